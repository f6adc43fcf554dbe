import json

import pytest

from dirtygen import parse_config


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(label): a release gate; prints one PASS/FAIL line"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        marker = item.get_closest_marker("acceptance")
        if marker:
            status = "PASS" if report.passed else "FAIL"
            line = f"ACCEPTANCE {marker.args[0]}: {status}"
            print(f"\n{line}")
            report.sections.append(("acceptance", line))


def make_config_text(**overrides) -> str:
    doc = {
        "schema": [
            {
                "name": "id",
                "datatype": "integer",
                "source": {"kind": "sequence", "start": 1, "step": 1},
                "unique": True,
            },
            {
                "name": "first_name",
                "datatype": "string",
                "source": {"kind": "lexicon", "name": "first_names"},
            },
            {
                "name": "age",
                "datatype": "integer",
                "source": {"kind": "numeric", "distribution": "uniform", "min": 0, "max": 120},
                "interval": [0, 120],
            },
            {
                "name": "score",
                "datatype": "float",
                "source": {"kind": "numeric", "distribution": "normal", "mean": 50.0, "stddev": 10.0},
            },
            {
                "name": "city",
                "datatype": "string",
                "source": {"kind": "set", "values": ["Berlin", "Munich", "Hamburg"]},
                "synonyms": {"Berlin": ["BER"], "Munich": ["Muenchen"], "Hamburg": ["HH"]},
            },
            {"name": "zip", "datatype": "string"},
        ],
        "dependencies": [
            {
                "determinant": "city",
                "dependent": "zip",
                "mapping": {"Berlin": "10115", "Munich": "80331", "Hamburg": "20095"},
            }
        ],
        "errors": [],
        "generation": {"tuple_count": 100, "seed": 7},
        "output": {"mode": "ndjson"},
    }
    for key, value in overrides.items():
        if key == "tuple_count" or key == "seed":
            doc["generation"][key] = value
        else:
            doc[key] = value
    return json.dumps(doc)


@pytest.fixture
def base_config():
    return parse_config(make_config_text())


@pytest.fixture
def config_with_errors():
    errors = [
        {"type": "missing_value", "rate": 0.1, "attributes": ["city"]},
        {"type": "misspelling", "rate": 0.1, "attributes": ["first_name"]},
        {"type": "interval_violation", "rate": 0.05, "attributes": ["age"]},
    ]
    return parse_config(make_config_text(errors=errors))
