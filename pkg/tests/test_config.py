import json

import pytest

from dirtygen import ConfigError, LexiconError, load_lexicon, parse_config
from dirtygen.config import compute_config_hash

from conftest import make_config_text


def minimal_text(**gen) -> str:
    doc = {
        "schema": [
            {
                "name": "age",
                "datatype": "integer",
                "source": {"kind": "numeric", "distribution": "uniform", "min": 0, "max": 120},
                "interval": [0, 120],
            }
        ],
        "errors": [{"type": "missing_value", "rate": 0.1}],
        "generation": {"tuple_count": 100, "seed": 7, **gen},
    }
    return json.dumps(doc)


def test_minimal_config_parses():
    config = parse_config(minimal_text())
    assert config.tuple_count == 100
    assert config.seed == 7
    assert config.errors[0].error_type == "missing_value"
    assert config.errors[0].target_attributes == ("age",)


def test_syntax_error_reports_position():
    with pytest.raises(ConfigError, match=r"line 1, column"):
        parse_config("{not json")


def test_unknown_error_type_rejected():
    doc = json.loads(minimal_text())
    doc["errors"] = [{"type": "value_swap", "rate": 0.1}]
    with pytest.raises(ConfigError, match="unknown error type 'value_swap'"):
        parse_config(json.dumps(doc))


def test_interval_violation_needs_interval():
    doc = json.loads(make_config_text())
    doc["errors"] = [{"type": "interval_violation", "rate": 0.1, "attributes": ["city"]}]
    with pytest.raises(ConfigError, match="not applicable to attribute 'city'"):
        parse_config(json.dumps(doc))


def test_unique_source_exhaustion_by_pigeonhole():
    doc = {
        "schema": [
            {
                "name": "grade",
                "datatype": "string",
                "source": {"kind": "set", "values": ["a", "b", "c", "d", "e"]},
                "admissible_set": ["a", "b", "c", "d", "e"],
                "unique": True,
            }
        ],
        "generation": {"tuple_count": 10, "seed": 1},
    }
    with pytest.raises(ConfigError, match="unique source exhausted"):
        parse_config(json.dumps(doc))


def test_admissible_member_violating_interval_is_contradiction():
    doc = {
        "schema": [
            {
                "name": "age",
                "datatype": "integer",
                "source": {"kind": "numeric", "distribution": "uniform", "min": 0, "max": 120},
                "interval": [0, 100],
                "admissible_set": [10, 50, 200],
            }
        ],
        "generation": {"tuple_count": 10, "seed": 1},
    }
    with pytest.raises(ConfigError, match="admissible_set member 200 violates"):
        parse_config(json.dumps(doc))


def test_oversubscribed_rates_rejected_at_parse_time():
    doc = {
        "schema": [
            {
                "name": "city",
                "datatype": "string",
                "source": {"kind": "set", "values": ["Berlin", "Munich", "Hamburg"]},
            }
        ],
        "errors": [
            {"type": "missing_value", "rate": 0.5},
            {"type": "erroneous_entry", "rate": 0.6},
        ],
        "generation": {"tuple_count": 10, "seed": 1},
    }
    with pytest.raises(ConfigError, match="infeasible rate"):
        parse_config(json.dumps(doc))


def test_dependency_mapping_must_be_total():
    doc = json.loads(make_config_text())
    doc["dependencies"][0]["mapping"].pop("Hamburg")
    with pytest.raises(ConfigError, match="not total.*Hamburg"):
        parse_config(json.dumps(doc))


def test_dependency_cycles_rejected():
    doc = {
        "schema": [
            {"name": "a", "datatype": "string"},
            {"name": "b", "datatype": "string"},
        ],
        "dependencies": [
            {"determinant": "a", "dependent": "b", "mapping": {"x": "y"}},
            {"determinant": "b", "dependent": "a", "mapping": {"y": "x"}},
        ],
        "generation": {"tuple_count": 10, "seed": 1},
    }
    with pytest.raises(ConfigError, match="cycle"):
        parse_config(json.dumps(doc))


def test_dependent_with_own_source_rejected():
    doc = json.loads(make_config_text())
    for attr in doc["schema"]:
        if attr["name"] == "zip":
            attr["source"] = {"kind": "lexicon", "name": "words"}
    with pytest.raises(ConfigError, match="must not declare"):
        parse_config(json.dumps(doc))


def test_rate_outside_unit_interval_rejected():
    doc = json.loads(minimal_text())
    doc["errors"] = [{"type": "missing_value", "rate": 1.5}]
    with pytest.raises(ConfigError, match=r"rate must be in \[0, 1\]"):
        parse_config(json.dumps(doc))


def test_duplicate_type_attribute_pair_rejected():
    doc = json.loads(minimal_text())
    doc["errors"] = [
        {"type": "missing_value", "rate": 0.1, "attributes": ["age"]},
        {"type": "missing_value", "rate": 0.2, "attributes": ["age"]},
    ]
    with pytest.raises(ConfigError, match="duplicate spec"):
        parse_config(json.dumps(doc))


def test_missing_attribute_takes_exactly_one_target():
    doc = json.loads(make_config_text())
    doc["errors"] = [{"type": "missing_attribute", "rate": 0.1, "attributes": ["city", "age"]}]
    with pytest.raises(ConfigError, match="exactly one target"):
        parse_config(json.dumps(doc))


def test_parse_is_pure():
    text = make_config_text()
    a = parse_config(text)
    b = parse_config(text)
    assert a.config_hash == b.config_hash
    assert a.schema == b.schema
    assert a.errors == b.errors


def test_hash_changes_with_seed_and_schema():
    base = parse_config(make_config_text())
    reseeded = parse_config(make_config_text(seed=8))
    assert base.config_hash != reseeded.config_hash
    assert compute_config_hash(base) == base.config_hash


def test_seed_override():
    config = parse_config(make_config_text(), seed_override=123)
    assert config.seed == 123


def test_column_replication_clones_constraints():
    doc = json.loads(minimal_text())
    doc["generation"]["scaling"] = {"column_replication": 2, "shard_count": 1}
    config = parse_config(json.dumps(doc))
    names = config.attribute_names
    assert names == ("age", "age_r1", "age_r2")
    for name in names:
        assert config.attribute(name).interval == (0, 120)
    # default targeting picks up the replicas
    assert config.errors[0].target_attributes == names


def test_bundled_lexicon_is_realistic():
    cities = load_lexicon("cities")
    assert len(cities) >= 50
    assert "Berlin" in cities and "New York" in cities


def test_lexicon_trim_and_dedupe(tmp_path):
    path = tmp_path / "lex.txt"
    path.write_text("a\n\na\nb\n", encoding="utf-8")
    assert load_lexicon(str(path)) == ["a", "b"]


def test_missing_lexicon_file():
    with pytest.raises(LexiconError, match="missing lexicon file"):
        load_lexicon("nope.txt")


def test_empty_lexicon_file(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text(" \n\n", encoding="utf-8")
    with pytest.raises(LexiconError, match="empty"):
        load_lexicon(str(path))


def test_lexicon_env_override(tmp_path, monkeypatch):
    (tmp_path / "cities.txt").write_text("OnlyTown\n", encoding="utf-8")
    monkeypatch.setenv("DIRTYGEN_LEXICON_DIR", str(tmp_path))
    assert load_lexicon("cities") == ["OnlyTown"]


def test_unknown_section_keys_rejected():
    doc = json.loads(minimal_text())
    doc["extra"] = {}
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(json.dumps(doc))


def test_uniqueness_rate_needs_donors():
    doc = {
        "schema": [
            {
                "name": "id",
                "datatype": "integer",
                "source": {"kind": "sequence", "start": 0, "step": 1},
                "unique": True,
            },
        ],
        "errors": [{"type": "uniqueness_value_violation", "rate": 1.0}],
        "generation": {"tuple_count": 10, "seed": 1},
    }
    with pytest.raises(ConfigError, match="earlier donor"):
        parse_config(json.dumps(doc))
