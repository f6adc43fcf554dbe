"""Run-configuration parsing and validation.

A run is described by one JSON document with sections `schema`,
`dependencies`, `errors`, `generation`, and `output`. parse_config turns the
document into a fully validated GeneratorConfig: every lexicon is loaded,
every constraint cross-checked, every error spec resolved to concrete target
attributes with type-specific parameters, and rate feasibility proven with
exact integer target counts. A config that parses is guaranteed to run
without applicability errors.

The full grammar is documented in docs/config-reference.md.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from . import taxonomy
from .exceptions import ConfigError, LexiconError
from .output import OutputSpec
from .templates import template_regex, template_size

BUNDLED_LEXICONS = ("first_names", "last_names", "cities", "streets", "words")
LEXICON_DIR_ENV = "DIRTYGEN_LEXICON_DIR"

_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")

# Enumerable determinant domains above this size are rejected; checking
# mapping totality would be disproportionate.
_MAX_DETERMINANT_DOMAIN = 10_000

_FLOAT_GRID_BITS = 53  # unique float values are drawn from a 2^53 grid


# ---------------------------------------------------------------------------
# Value sources


@dataclass(frozen=True)
class LexiconSource:
    name: str  # bundled name or the path as given
    values: tuple[str, ...] = field(repr=False)

    kind = "lexicon"

    def signature(self) -> dict:
        digest = hashlib.sha256("\n".join(self.values).encode("utf-8")).hexdigest()
        return {"kind": "lexicon", "name": self.name, "sha256": digest}


@dataclass(frozen=True)
class NumericSource:
    distribution: str  # "uniform" | "normal"
    low: float = 0.0
    high: float = 0.0
    mean: float = 0.0
    stddev: float = 0.0

    kind = "numeric"

    def signature(self) -> dict:
        if self.distribution == "uniform":
            return {"kind": "numeric", "distribution": "uniform", "min": self.low, "max": self.high}
        return {
            "kind": "numeric",
            "distribution": "normal",
            "mean": self.mean,
            "stddev": self.stddev,
        }


@dataclass(frozen=True)
class TemplateSource:
    template: str

    kind = "template"

    def signature(self) -> dict:
        return {"kind": "template", "template": self.template}


@dataclass(frozen=True)
class SequenceSource:
    start: float
    step: float

    kind = "sequence"

    def signature(self) -> dict:
        return {"kind": "sequence", "start": self.start, "step": self.step}


@dataclass(frozen=True)
class ConstantSetSource:
    values: tuple
    weights: tuple[float, ...] | None = None

    kind = "set"

    def signature(self) -> dict:
        return {"kind": "set", "values": list(self.values), "weights": list(self.weights or ())}


ValueSource = LexiconSource | NumericSource | TemplateSource | SequenceSource | ConstantSetSource


# ---------------------------------------------------------------------------
# Domain model


@dataclass
class DependencyRule:
    determinant: str
    dependent: str
    mapping: dict

    def signature(self) -> dict:
        return {
            "determinant": self.determinant,
            "dependent": self.dependent,
            "mapping": {json.dumps(k, ensure_ascii=False): v for k, v in self.mapping.items()},
        }


@dataclass
class AttributeSpec:
    name: str
    datatype: str  # "string" | "integer" | "float"
    source: ValueSource | None = None
    pattern: str | None = None
    interval: tuple[float, float] | None = None
    admissible_set: tuple | None = None
    unique: bool = False
    synonyms: dict | None = None
    nullable_in_clean: bool = False
    null_rate: float = 0.0
    # Resolved during parsing:
    dependency: DependencyRule | None = field(default=None, repr=False, compare=False)
    finite_domain: tuple | None = field(default=None, repr=False, compare=False)
    compiled_pattern: re.Pattern | None = field(default=None, repr=False, compare=False)

    def effective_pattern(self) -> re.Pattern | None:
        """The explicit pattern, or the regex implied by a template source."""
        if self.compiled_pattern is not None:
            return self.compiled_pattern
        if isinstance(self.source, TemplateSource):
            return template_regex(self.source.template)
        return None

    def source_signature(self) -> dict:
        if self.dependency is not None:
            return {"kind": "derived", "determinant": self.dependency.determinant}
        return self.source.signature()

    def signature(self) -> dict:
        return {
            "name": self.name,
            "datatype": self.datatype,
            "source": self.source_signature(),
            "pattern": self.pattern,
            "interval": list(self.interval) if self.interval else None,
            "admissible_set": list(self.admissible_set) if self.admissible_set else None,
            "unique": self.unique,
            "synonyms": {k: list(v) for k, v in self.synonyms.items()} if self.synonyms else None,
            "nullable_in_clean": self.nullable_in_clean,
            "null_rate": self.null_rate,
        }


@dataclass(frozen=True)
class ScalingSpec:
    column_replication: int = 0
    shard_count: int = 1


@dataclass
class ErrorSpec:
    error_type: str
    rate: float
    target_attributes: tuple[str, ...]  # resolved, possibly empty for row/insertion types
    params: dict = field(default_factory=dict)

    def signature(self) -> dict:
        return {
            "type": self.error_type,
            "rate": self.rate,
            "attributes": list(self.target_attributes),
            "params": self.params,
        }


@dataclass
class GeneratorConfig:
    schema: tuple[AttributeSpec, ...]
    dependencies: tuple[DependencyRule, ...]
    errors: tuple[ErrorSpec, ...]
    tuple_count: int
    seed: int
    scaling: ScalingSpec
    output: OutputSpec
    config_hash: str = ""
    attr_positions: dict = field(default_factory=dict, repr=False, compare=False)
    eval_order: tuple[str, ...] = ()
    caches: dict = field(default_factory=dict, repr=False, compare=False)

    def attribute(self, name: str) -> AttributeSpec:
        return self.schema[self.attr_positions[name]]

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.schema)


# ---------------------------------------------------------------------------
# Lexicons


def load_lexicon(name_or_path: str, *, base_dir: Path | None = None) -> list[str]:
    """Load a lexicon: trimmed, order-preserving, duplicate-free, non-empty lines.

    Bundled names resolve to packaged word lists; anything else is treated as
    a file path (relative paths resolve against base_dir, then the working
    directory). The DIRTYGEN_LEXICON_DIR environment variable points at a
    directory whose <name>.txt files override the bundled lists.
    """
    text = None
    override_dir = os.environ.get(LEXICON_DIR_ENV)
    if override_dir and name_or_path in BUNDLED_LEXICONS:
        candidate = Path(override_dir) / f"{name_or_path}.txt"
        if candidate.is_file():
            text = candidate.read_text(encoding="utf-8")
    if text is None and name_or_path in BUNDLED_LEXICONS:
        text = (
            resources.files("dirtygen")
            .joinpath("lexicons", f"{name_or_path}.txt")
            .read_text(encoding="utf-8")
        )
    if text is None:
        path = Path(name_or_path)
        if not path.is_absolute() and base_dir is not None and (base_dir / path).is_file():
            path = base_dir / path
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise LexiconError(f"missing lexicon file: {name_or_path}") from exc
    seen = set()
    values = []
    for line in text.splitlines():
        line = line.strip()
        if line and line not in seen:
            seen.add(line)
            values.append(line)
    if not values:
        raise LexiconError(f"lexicon is empty: {name_or_path}")
    return values


# ---------------------------------------------------------------------------
# Parsing helpers


def _fail(message: str) -> None:
    raise ConfigError(message)


def _expect_mapping(value, what: str) -> dict:
    if not isinstance(value, dict):
        _fail(f"{what} must be a JSON object")
    return value


def _expect_keys(mapping: dict, allowed: set[str], what: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        _fail(f"{what}: unknown key(s) {sorted(unknown)}")


def _expect_number(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(f"{what} must be a number")
    return value


def _expect_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(f"{what} must be an integer")
    return value


def _coerce(value, datatype: str, what: str):
    """Coerce a JSON scalar to the attribute datatype; reject mismatches."""
    if value is None:
        _fail(f"{what} must not be null")
    if datatype == "string":
        if not isinstance(value, str):
            _fail(f"{what} must be a string")
        return value
    if datatype == "integer":
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, str):
                try:
                    return int(value)
                except ValueError:
                    _fail(f"{what} is not an integer: {value!r}")
            if isinstance(value, float) and value.is_integer():
                return int(value)
            _fail(f"{what} must be an integer")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        if isinstance(value, str):
            try:
                return float(value)
            except ValueError:
                _fail(f"{what} is not a number: {value!r}")
        _fail(f"{what} must be a number")
    return float(value)


def _parse_source(raw, attr_name: str, base_dir: Path | None) -> ValueSource:
    raw = _expect_mapping(raw, f"attribute '{attr_name}' source")
    kind = raw.get("kind")
    where = f"attribute '{attr_name}' source"
    if kind == "lexicon":
        _expect_keys(raw, {"kind", "name", "path"}, where)
        ref = raw.get("name") or raw.get("path")
        if not ref:
            _fail(f"{where}: lexicon requires 'name' or 'path'")
        return LexiconSource(name=ref, values=tuple(load_lexicon(ref, base_dir=base_dir)))
    if kind == "numeric":
        dist = raw.get("distribution")
        if dist == "uniform":
            _expect_keys(raw, {"kind", "distribution", "min", "max"}, where)
            low = _expect_number(raw.get("min"), f"{where} min")
            high = _expect_number(raw.get("max"), f"{where} max")
            if not low < high:
                _fail(f"{where}: uniform requires min < max")
            return NumericSource("uniform", low=low, high=high)
        if dist == "normal":
            _expect_keys(raw, {"kind", "distribution", "mean", "stddev"}, where)
            mean = _expect_number(raw.get("mean"), f"{where} mean")
            stddev = _expect_number(raw.get("stddev"), f"{where} stddev")
            if not stddev > 0:
                _fail(f"{where}: normal requires stddev > 0")
            return NumericSource("normal", mean=mean, stddev=stddev)
        _fail(f"{where}: unknown distribution {dist!r} (expected 'uniform' or 'normal')")
    if kind == "template":
        _expect_keys(raw, {"kind", "template"}, where)
        template = raw.get("template")
        if not isinstance(template, str) or not template:
            _fail(f"{where}: template must be a non-empty string")
        return TemplateSource(template=template)
    if kind == "sequence":
        _expect_keys(raw, {"kind", "start", "step"}, where)
        start = _expect_number(raw.get("start", 0), f"{where} start")
        step = _expect_number(raw.get("step", 1), f"{where} step")
        return SequenceSource(start=start, step=step)
    if kind == "set":
        _expect_keys(raw, {"kind", "values", "weights"}, where)
        values = raw.get("values")
        if not isinstance(values, list) or not values:
            _fail(f"{where}: set requires a non-empty 'values' list")
        weights = raw.get("weights")
        if weights is not None:
            if not isinstance(weights, list) or len(weights) != len(values):
                _fail(f"{where}: weights must match values in length")
            weights = tuple(_expect_number(w, f"{where} weight") for w in weights)
            if any(w < 0 for w in weights) or sum(weights) <= 0:
                _fail(f"{where}: weights must be non-negative with a positive sum")
        return ConstantSetSource(values=tuple(values), weights=weights)
    _fail(f"{where}: unknown source kind {kind!r}")


def _parse_attribute(raw, base_dir: Path | None) -> AttributeSpec:
    raw = _expect_mapping(raw, "schema entry")
    name = raw.get("name")
    if not isinstance(name, str) or not _IDENTIFIER.fullmatch(name):
        _fail(f"attribute name must be an identifier, got {name!r}")
    where = f"attribute '{name}'"
    _expect_keys(
        raw,
        {
            "name",
            "datatype",
            "source",
            "pattern",
            "interval",
            "admissible_set",
            "unique",
            "synonyms",
            "nullable_in_clean",
            "null_rate",
        },
        where,
    )
    datatype = raw.get("datatype")
    if datatype not in ("string", "integer", "float"):
        _fail(f"{where}: datatype must be one of string, integer, float")

    source = None
    if "source" in raw:
        source = _parse_source(raw["source"], name, base_dir)

    pattern = raw.get("pattern")
    compiled = None
    if pattern is not None:
        if not isinstance(pattern, str):
            _fail(f"{where}: pattern must be a string")
        try:
            compiled = re.compile(pattern)
        except re.error as exc:
            _fail(f"{where}: invalid pattern: {exc}")

    interval = raw.get("interval")
    if interval is not None:
        if not isinstance(interval, list) or len(interval) != 2:
            _fail(f"{where}: interval must be a [min, max] pair")
        lo = _expect_number(interval[0], f"{where} interval min")
        hi = _expect_number(interval[1], f"{where} interval max")
        if datatype == "string":
            _fail(f"{where}: interval requires a numeric datatype")
        if lo > hi:
            _fail(f"{where}: interval min must be <= max")
        interval = (lo, hi)

    admissible = raw.get("admissible_set")
    if admissible is not None:
        if not isinstance(admissible, list) or not admissible:
            _fail(f"{where}: admissible_set must be a non-empty list")
        admissible = tuple(
            _coerce(v, datatype, f"{where} admissible_set member") for v in admissible
        )
        if len(set(admissible)) != len(admissible):
            _fail(f"{where}: admissible_set contains duplicates")

    synonyms = raw.get("synonyms")
    if synonyms is not None:
        if datatype != "string":
            _fail(f"{where}: synonyms require datatype string")
        synonyms = _expect_mapping(synonyms, f"{where} synonyms")
        parsed = {}
        for key, alts in synonyms.items():
            if not isinstance(alts, list) or not alts:
                _fail(f"{where}: synonyms for {key!r} must be a non-empty list")
            if any(not isinstance(a, str) for a in alts):
                _fail(f"{where}: synonyms must be strings")
            if len(set(alts)) != len(alts):
                _fail(f"{where}: synonym list for {key!r} contains duplicates")
            if key in alts:
                _fail(f"{where}: {key!r} lists itself as a synonym")
            parsed[key] = tuple(alts)
        synonyms = parsed

    unique = raw.get("unique", False)
    if not isinstance(unique, bool):
        _fail(f"{where}: unique must be a boolean")
    nullable = raw.get("nullable_in_clean", False)
    if not isinstance(nullable, bool):
        _fail(f"{where}: nullable_in_clean must be a boolean")
    null_rate = raw.get("null_rate", 0.0)
    null_rate = _expect_number(null_rate, f"{where} null_rate")
    if not 0 <= null_rate < 1:
        _fail(f"{where}: null_rate must be in [0, 1)")
    if null_rate > 0 and not nullable:
        _fail(f"{where}: null_rate > 0 requires nullable_in_clean")

    return AttributeSpec(
        name=name,
        datatype=datatype,
        source=source,
        pattern=pattern,
        interval=interval,
        admissible_set=admissible,
        unique=unique,
        synonyms=synonyms,
        nullable_in_clean=nullable,
        null_rate=null_rate,
        compiled_pattern=compiled,
    )


# ---------------------------------------------------------------------------
# Constraint cross-validation


def _check_constraints(value, attr: AttributeSpec) -> bool:
    """Pattern + interval check; admissible membership handled separately."""
    if attr.compiled_pattern is not None and not attr.compiled_pattern.fullmatch(str(value)):
        return False
    if attr.interval is not None:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            return False
        if not attr.interval[0] <= value <= attr.interval[1]:
            return False
    return True


def _effective_int_range(attr: AttributeSpec) -> tuple[int, int]:
    src = attr.source
    lo, hi = math.ceil(src.low), math.floor(src.high)
    if attr.interval is not None:
        lo = max(lo, math.ceil(attr.interval[0]))
        hi = min(hi, math.floor(attr.interval[1]))
    if lo > hi:
        _fail(
            f"attribute '{attr.name}': no integer satisfies both the uniform "
            f"range and the interval constraint"
        )
    return lo, hi


def _effective_float_range(attr: AttributeSpec) -> tuple[float, float]:
    src = attr.source
    lo, hi = src.low, src.high
    if attr.interval is not None:
        lo = max(lo, attr.interval[0])
        hi = min(hi, attr.interval[1])
    if not lo < hi:
        _fail(
            f"attribute '{attr.name}': the uniform range and the interval "
            f"constraint do not overlap"
        )
    return lo, hi


def _resolve_domain(attr: AttributeSpec) -> AttributeSpec:
    """Validate constraint interactions and fix the finite generation domain."""
    if attr.admissible_set is not None:
        for member in attr.admissible_set:
            if not _check_constraints(member, attr):
                _fail(
                    f"attribute '{attr.name}': admissible_set member {member!r} "
                    f"violates the declared pattern or interval"
                )
        attr.finite_domain = attr.admissible_set
        return attr
    if isinstance(attr.source, ConstantSetSource):
        typed = tuple(
            _coerce(v, attr.datatype, f"attribute '{attr.name}' set value")
            for v in attr.source.values
        )
        for member in typed:
            if not _check_constraints(member, attr):
                _fail(
                    f"attribute '{attr.name}': set source value {member!r} "
                    f"violates the declared pattern or interval"
                )
        attr.finite_domain = typed
        return attr
    if isinstance(attr.source, LexiconSource):
        if attr.datatype != "string":
            _fail(f"attribute '{attr.name}': lexicon sources require datatype string")
        kept = tuple(v for v in attr.source.values if _check_constraints(v, attr))
        if not kept:
            _fail(
                f"attribute '{attr.name}': no lexicon value satisfies the "
                f"declared constraints"
            )
        attr.finite_domain = kept
        return attr
    if isinstance(attr.source, TemplateSource) and attr.datatype != "string":
        _fail(f"attribute '{attr.name}': template sources require datatype string")
    if isinstance(attr.source, NumericSource) and attr.datatype == "string":
        _fail(f"attribute '{attr.name}': numeric sources require a numeric datatype")
    if isinstance(attr.source, SequenceSource) and attr.datatype == "string":
        _fail(f"attribute '{attr.name}': sequence sources require a numeric datatype")
    if isinstance(attr.source, SequenceSource) and attr.datatype == "integer":
        if attr.source.start != int(attr.source.start) or attr.source.step != int(attr.source.step):
            _fail(f"attribute '{attr.name}': integer sequences need integer start and step")
    return attr


def unique_domain_size(attr: AttributeSpec) -> int | None:
    """How many distinct values the attribute can produce; None means unbounded."""
    if attr.finite_domain is not None:
        return len(attr.finite_domain)
    src = attr.source
    if isinstance(src, SequenceSource):
        return None if src.step != 0 else 1
    if isinstance(src, TemplateSource):
        return template_size(src.template)
    if isinstance(src, NumericSource):
        if attr.datatype == "integer":
            if src.distribution == "normal":
                return None  # rejected for unique at validation time
            lo, hi = _effective_int_range(attr)
            return hi - lo + 1
        return 1 << _FLOAT_GRID_BITS
    return None


def _validate_unique(attr: AttributeSpec, tuple_count: int) -> None:
    if not attr.unique:
        return
    if attr.dependency is not None:
        _fail(f"attribute '{attr.name}': dependent attributes cannot be unique")
    if attr.null_rate > 0:
        _fail(f"attribute '{attr.name}': unique attributes cannot draw nulls")
    src = attr.source
    if isinstance(src, NumericSource) and src.distribution == "normal" and attr.datatype == "integer":
        _fail(
            f"attribute '{attr.name}': unique integer attributes need a uniform, "
            f"sequence, template, or finite-set source"
        )
    if isinstance(src, SequenceSource) and src.step == 0:
        _fail(f"attribute '{attr.name}': a unique sequence needs step != 0")
    if isinstance(src, TemplateSource) and attr.compiled_pattern is not None:
        _fail(
            f"attribute '{attr.name}': unique template attributes must encode their "
            f"format in the template itself, not in a separate pattern"
        )
    if isinstance(src, NumericSource) and attr.compiled_pattern is not None:
        _fail(f"attribute '{attr.name}': unique numeric attributes cannot take a pattern")
    size = unique_domain_size(attr)
    if size is not None and size < tuple_count:
        _fail(
            f"attribute '{attr.name}': unique source exhausted: the value domain has "
            f"{size} member(s) but {tuple_count} tuples were requested"
        )


def _validate_sequence_interval(attr: AttributeSpec, tuple_count: int) -> None:
    if not isinstance(attr.source, SequenceSource) or attr.interval is None or tuple_count == 0:
        return
    first = attr.source.start
    last = attr.source.start + (tuple_count - 1) * attr.source.step
    lo, hi = attr.interval
    if not (lo <= first <= hi and lo <= last <= hi):
        _fail(
            f"attribute '{attr.name}': the sequence leaves the interval "
            f"[{lo}, {hi}] within {tuple_count} tuples"
        )


# ---------------------------------------------------------------------------
# Dependencies


def enumerate_clean_domain(attr: AttributeSpec, tuple_count: int) -> list | None:
    """All values the clean generator can emit, or None if not enumerable."""
    if attr.dependency is not None:
        return sorted(set(attr.dependency.mapping.values()), key=repr)
    if attr.finite_domain is not None:
        return list(attr.finite_domain)
    src = attr.source
    if isinstance(src, SequenceSource):
        return [
            int(src.start + i * src.step) if attr.datatype == "integer"
            else src.start + i * src.step
            for i in range(tuple_count)
        ]
    if isinstance(src, NumericSource) and attr.datatype == "integer" and src.distribution == "uniform":
        lo, hi = _effective_int_range(attr)
        if hi - lo + 1 <= _MAX_DETERMINANT_DOMAIN:
            return list(range(lo, hi + 1))
        return None
    if isinstance(src, TemplateSource):
        size = template_size(src.template)
        if size <= _MAX_DETERMINANT_DOMAIN:
            from .templates import template_decode

            return [template_decode(src.template, i) for i in range(size)]
    return None


def _resolve_dependencies(
    attrs: list[AttributeSpec], raw_rules, tuple_count: int
) -> list[DependencyRule]:
    by_name = {a.name: a for a in attrs}
    rules: list[DependencyRule] = []
    dependents_seen = set()
    if raw_rules is None:
        raw_rules = []
    if not isinstance(raw_rules, list):
        _fail("dependencies must be a list")
    for raw in raw_rules:
        raw = _expect_mapping(raw, "dependency rule")
        _expect_keys(raw, {"determinant", "dependent", "mapping"}, "dependency rule")
        det, dep = raw.get("determinant"), raw.get("dependent")
        if det not in by_name:
            _fail(f"dependency rule: unknown determinant attribute {det!r}")
        if dep not in by_name:
            _fail(f"dependency rule: unknown dependent attribute {dep!r}")
        if det == dep:
            _fail(f"dependency rule: determinant and dependent are both {det!r}")
        if dep in dependents_seen:
            _fail(f"attribute {dep!r} is the dependent of more than one rule")
        dependents_seen.add(dep)
        mapping_raw = _expect_mapping(raw.get("mapping"), "dependency mapping")
        if not mapping_raw:
            _fail(f"dependency rule {det!r} -> {dep!r}: mapping is empty")
        det_attr, dep_attr = by_name[det], by_name[dep]
        mapping = {}
        for key, value in mapping_raw.items():
            typed_key = _coerce(key, det_attr.datatype, f"mapping key {key!r}")
            typed_value = _coerce(value, dep_attr.datatype, f"mapping value for {key!r}")
            if typed_key in mapping:
                _fail(f"dependency rule {det!r} -> {dep!r}: duplicate key {key!r}")
            mapping[typed_key] = typed_value
        rule = DependencyRule(determinant=det, dependent=dep, mapping=mapping)
        if by_name[dep].source is not None:
            _fail(
                f"attribute {dep!r} is dependent on {det!r} and must not declare "
                f"its own value source"
            )
        by_name[dep].dependency = rule
        rules.append(rule)

    # Cycle check: walk determinant chains.
    for attr in attrs:
        seen = set()
        cursor = attr
        while cursor.dependency is not None:
            if cursor.name in seen:
                _fail(f"dependency rules form a cycle involving {cursor.name!r}")
            seen.add(cursor.name)
            cursor = by_name[cursor.dependency.determinant]

    # Totality and image validity, in chain order so chained domains resolve.
    for rule in _topo_sorted(rules, by_name):
        det_attr, dep_attr = by_name[rule.determinant], by_name[rule.dependent]
        domain = enumerate_clean_domain(det_attr, tuple_count)
        if domain is None:
            _fail(
                f"dependency rule {rule.determinant!r} -> {rule.dependent!r}: the "
                f"determinant needs a finite value domain (lexicon, set, integer "
                f"range, short sequence, or template)"
            )
        if len(domain) > _MAX_DETERMINANT_DOMAIN:
            _fail(
                f"dependency rule {rule.determinant!r} -> {rule.dependent!r}: "
                f"determinant domain has {len(domain)} values, above the supported "
                f"{_MAX_DETERMINANT_DOMAIN}"
            )
        missing = [v for v in domain if v not in rule.mapping]
        if missing:
            _fail(
                f"dependency rule {rule.determinant!r} -> {rule.dependent!r}: mapping "
                f"is not total; first unmapped determinant value: {missing[0]!r}"
            )
        for image in rule.mapping.values():
            if not _check_constraints(image, dep_attr) or (
                dep_attr.admissible_set is not None and image not in dep_attr.admissible_set
            ):
                _fail(
                    f"dependency rule {rule.determinant!r} -> {rule.dependent!r}: "
                    f"mapped value {image!r} violates the dependent's constraints"
                )
    return rules


def _topo_sorted(rules: list[DependencyRule], by_name: dict) -> list[DependencyRule]:
    """Rules ordered so a chained determinant's own rule comes first."""
    order: list[DependencyRule] = []
    visited: set[str] = set()

    def visit(rule: DependencyRule):
        if rule.dependent in visited:
            return
        det_attr = by_name[rule.determinant]
        if det_attr.dependency is not None:
            visit(det_attr.dependency)
        visited.add(rule.dependent)
        order.append(rule)

    for rule in rules:
        visit(rule)
    return order


# ---------------------------------------------------------------------------
# Error specs

_PARAM_KEYS = {
    "outlier": {"k"},
    "noise": {"alpha"},
    "semi_empty_tuple": {"empty_fraction"},
    "redundancy_about_entity": {"near_duplicate", "perturbed_attributes"},
    "irrelevant_observation": {"offdomain"},
    "bias": {"group_attribute", "group_value", "target_attribute", "shift", "skewed_weights"},
}

# Types whose spec may (or must) name target attributes.
_TARGETED_TYPES = set(taxonomy.CELL_TYPES) | {
    "uniqueness_value_violation",
    "synonyms_existence",
    "outlier",
    "noise",
    "missing_attribute",
}


def erroneous_entry_domain_size(attr: AttributeSpec, tuple_count: int) -> int | None:
    """Distinct values a plausible-but-wrong draw can produce; None = unbounded."""
    if attr.dependency is not None:
        return len(set(attr.dependency.mapping.values()))
    if attr.finite_domain is not None:
        return len(attr.finite_domain)
    src = attr.source
    if isinstance(src, NumericSource):
        if src.distribution == "normal":
            return None
        if attr.datatype == "integer":
            lo, hi = _effective_int_range(attr)
            return hi - lo + 1
        return None
    if isinstance(src, SequenceSource):
        return max(tuple_count, 2) if src.step != 0 else 1
    if isinstance(src, TemplateSource):
        return template_size(src.template)
    return None


def _type_applicable(error_type: str, attr: AttributeSpec, config_ctx: dict) -> bool:
    """Can this error type target this attribute at all?"""
    tuple_count = config_ctx["tuple_count"]
    if error_type == "missing_value":
        return True
    if error_type == "syntax_violation":
        return attr.effective_pattern() is not None
    if error_type == "interval_violation":
        return attr.interval is not None
    if error_type == "set_violation":
        return attr.admissible_set is not None
    if error_type == "misspelling":
        return attr.datatype == "string"
    if error_type == "inadequate_value_to_attribute_context":
        sig = json.dumps(attr.source_signature(), sort_keys=True)
        return any(
            json.dumps(o.source_signature(), sort_keys=True) != sig
            for o in config_ctx["attrs"]
            if o.name != attr.name
        )
    if error_type == "value_items_beyond_attribute_context":
        return attr.datatype == "string" and len(config_ctx["attrs"]) >= 2
    if error_type == "meaningless_value":
        return True
    if error_type == "erroneous_entry":
        size = erroneous_entry_domain_size(attr, tuple_count)
        return size is None or size >= 2
    if error_type == "uniqueness_value_violation":
        return attr.unique and tuple_count >= 2
    if error_type == "synonyms_existence":
        return bool(attr.synonyms)
    if error_type in ("outlier", "noise"):
        return (
            isinstance(attr.source, NumericSource)
            and attr.datatype in ("integer", "float")
            and attr.finite_domain is None
        )
    if error_type == "missing_attribute":
        return True
    raise AssertionError(f"not an attribute-targeted type: {error_type}")


def _parse_error_spec(raw, index: int, attrs: list[AttributeSpec], tuple_count: int) -> ErrorSpec:
    raw = _expect_mapping(raw, f"errors[{index}]")
    _expect_keys(raw, {"type", "rate", "attributes", "params"}, f"errors[{index}]")
    error_type = raw.get("type")
    if error_type not in taxonomy.ALL_ERROR_TYPES:
        _fail(f"errors[{index}]: unknown error type {error_type!r}")
    where = f"errors[{index}] ({error_type})"
    rate = _expect_number(raw.get("rate"), f"{where} rate")
    if not 0 <= rate <= 1:
        _fail(f"{where}: rate must be in [0, 1]")
    params = raw.get("params", {})
    params = _expect_mapping(params, f"{where} params")
    _expect_keys(params, _PARAM_KEYS.get(error_type, set()), f"{where} params")

    ctx = {"attrs": attrs, "tuple_count": tuple_count}
    by_name = {a.name: a for a in attrs}

    targets_raw = raw.get("attributes")
    if error_type in _TARGETED_TYPES:
        if targets_raw is not None:
            if not isinstance(targets_raw, list) or not targets_raw:
                _fail(f"{where}: attributes must be a non-empty list")
            for name in targets_raw:
                if name not in by_name:
                    _fail(f"{where}: unknown attribute {name!r}")
                if not _type_applicable(error_type, by_name[name], ctx):
                    _fail(f"{where}: type not applicable to attribute {name!r}")
            targets = tuple(targets_raw)
        else:
            targets = tuple(
                a.name for a in attrs if _type_applicable(error_type, a, ctx)
            )
            if not targets:
                _fail(f"{where}: no attribute in the schema is applicable")
        if error_type == "missing_attribute" and len(targets) != 1:
            _fail(
                f"{where}: takes exactly one target attribute; declare one spec "
                f"per attribute"
            )
    else:
        if targets_raw is not None:
            _fail(f"{where}: this error type does not take target attributes")
        targets = ()

    resolved = _resolve_params(error_type, params, where, attrs, by_name, tuple_count)
    return ErrorSpec(error_type=error_type, rate=rate, target_attributes=targets, params=resolved)


def _resolve_params(
    error_type: str,
    params: dict,
    where: str,
    attrs: list[AttributeSpec],
    by_name: dict,
    tuple_count: int,
) -> dict:
    out = dict(params)
    if error_type == "outlier":
        k = _expect_number(out.setdefault("k", 5.0), f"{where} k")
        if k <= 0:
            _fail(f"{where}: k must be positive")
    elif error_type == "noise":
        alpha = _expect_number(out.setdefault("alpha", 0.05), f"{where} alpha")
        if alpha <= 0:
            _fail(f"{where}: alpha must be positive")
    elif error_type == "semi_empty_tuple":
        frac = _expect_number(out.setdefault("empty_fraction", 0.7), f"{where} empty_fraction")
        if not 0 < frac < 1:
            _fail(f"{where}: empty_fraction must be in (0, 1)")
        if len(attrs) < 2:
            _fail(f"{where}: needs at least two attributes in the schema")
    elif error_type == "redundancy_about_entity":
        near = out.setdefault("near_duplicate", True)
        if not isinstance(near, bool):
            _fail(f"{where}: near_duplicate must be a boolean")
        perturbed = _expect_int(out.setdefault("perturbed_attributes", 1), f"{where} perturbed_attributes")
        if perturbed < 0:
            _fail(f"{where}: perturbed_attributes must be >= 0")
        if near and perturbed > 0:
            perturbable = [a for a in attrs if not a.unique and a.datatype == "string"]
            if not perturbable:
                _fail(
                    f"{where}: near-duplicate mode needs a non-unique string "
                    f"attribute to misspell"
                )
    elif error_type == "inconsistency_about_entity":
        candidates = [
            a
            for a in attrs
            if not a.unique
            and (
                (size := erroneous_entry_domain_size(a, tuple_count)) is None or size >= 2
            )
        ]
        if not candidates:
            _fail(f"{where}: no non-unique attribute offers an alternative valid value")
    elif error_type == "inconsistency_among_attribute_values":
        pass  # validated against the rules by the caller
    elif error_type == "irrelevant_observation":
        offdomain = out.get("offdomain")
        if offdomain is not None:
            offdomain = _expect_mapping(offdomain, f"{where} offdomain")
            parsed = {}
            for name, source_raw in offdomain.items():
                if name not in by_name:
                    _fail(f"{where}: offdomain names unknown attribute {name!r}")
                parsed[name] = _parse_source(source_raw, f"{name} (offdomain)", None)
            out["offdomain"] = parsed
    elif error_type == "bias":
        for key in ("group_attribute", "group_value", "target_attribute"):
            if key not in out:
                _fail(f"{where}: params require {key}")
        group_attr = out["group_attribute"]
        target_attr = out["target_attribute"]
        if group_attr not in by_name:
            _fail(f"{where}: unknown group attribute {group_attr!r}")
        if target_attr not in by_name:
            _fail(f"{where}: unknown target attribute {target_attr!r}")
        if group_attr == target_attr:
            _fail(f"{where}: group and target attribute must differ")
        out["group_value"] = _coerce(
            out["group_value"], by_name[group_attr].datatype, f"{where} group_value"
        )
        target = by_name[target_attr]
        weights = out.get("skewed_weights")
        if weights is None:
            if not isinstance(target.source, NumericSource) or target.finite_domain is not None:
                _fail(
                    f"{where}: numeric bias needs a distribution-sourced target; "
                    f"categorical targets need skewed_weights"
                )
            shift = out.get("shift")
            if shift is None:
                from .datagen import distribution_params

                shift = distribution_params(target)[1]
            out["shift"] = _expect_number(shift, f"{where} shift")
            if out["shift"] == 0:
                _fail(f"{where}: shift must be non-zero")
        else:
            weights = _expect_mapping(weights, f"{where} skewed_weights")
            if target.finite_domain is None:
                _fail(f"{where}: skewed_weights requires a finite-domain target")
            typed = {}
            for key, weight in weights.items():
                value = _coerce(key, target.datatype, f"{where} skewed_weights key")
                if value not in target.finite_domain:
                    _fail(f"{where}: skewed_weights key {key!r} is outside the target domain")
                w = _expect_number(weight, f"{where} skewed_weights weight")
                if w < 0:
                    _fail(f"{where}: weights must be non-negative")
                typed[value] = w
            if len([w for w in typed.values() if w > 0]) < 2:
                _fail(f"{where}: skewed_weights needs at least two positive-weight values")
            out["skewed_weights"] = typed
    return out


# ---------------------------------------------------------------------------
# Feasibility


def _check_feasibility(
    attrs: list[AttributeSpec], specs: list[ErrorSpec], tuple_count: int
) -> None:
    n = tuple_count
    row_claims = 0
    for i, spec in enumerate(specs):
        if spec.error_type in taxonomy.ROW_TYPES:
            count = taxonomy.target_count(spec.error_type, spec.rate, 0, n)
            row_claims += count
            if row_claims > n:
                _fail(
                    f"errors[{i}] ({spec.error_type}): infeasible rate; row-scope "
                    f"errors claim {row_claims} of {n} tuples"
                )
    available = n - row_claims
    per_attr = {a.name: 0 for a in attrs}
    for i, spec in enumerate(specs):
        stage = taxonomy.STAGE_OF[spec.error_type]
        if stage not in (taxonomy.STAGE_COLUMN, taxonomy.STAGE_CELL):
            continue
        if spec.error_type == "bias":
            continue  # may realize below target by design; never oversubscribes
        targets = spec.target_attributes
        count = taxonomy.target_count(spec.error_type, spec.rate, len(targets), n)
        if spec.error_type == "uniqueness_value_violation" and count > max(n - 1, 0):
            _fail(
                f"errors[{i}] ({spec.error_type}): infeasible rate; needs {count} "
                f"targets but only {max(n - 1, 0)} tuples have an earlier donor"
            )
        charges = taxonomy.split_count(count, len(targets)) if targets else []
        for attr_name, charge in zip(targets, charges):
            if spec.error_type == "uniqueness_value_violation":
                charge *= 2  # the donor cell is claimed too
            per_attr[attr_name] += charge
            if per_attr[attr_name] > available:
                _fail(
                    f"errors[{i}] ({spec.error_type}): infeasible rate; "
                    f"{per_attr[attr_name]} cell claims on attribute "
                    f"'{attr_name}' exceed the {available} available tuples"
                )


# ---------------------------------------------------------------------------
# Top-level parsing


def parse_config(
    text: str,
    *,
    base_dir: Path | None = None,
    seed_override: int | None = None,
    output_dir_override: str | Path | None = None,
) -> GeneratorConfig:
    """Parse and fully validate a configuration document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    doc = _expect_mapping(doc, "config document")
    _expect_keys(doc, {"schema", "dependencies", "errors", "generation", "output"}, "config")

    generation = _expect_mapping(doc.get("generation"), "generation section")
    _expect_keys(generation, {"tuple_count", "seed", "scaling"}, "generation")
    tuple_count = _expect_int(generation.get("tuple_count"), "tuple_count")
    if tuple_count < 0:
        _fail("tuple_count must be >= 0")
    seed = generation.get("seed", 0)
    seed = _expect_int(seed, "seed")
    if not 0 <= seed < 1 << 64:
        _fail("seed must be an unsigned 64-bit integer")
    if seed_override is not None:
        if not 0 <= seed_override < 1 << 64:
            _fail("seed must be an unsigned 64-bit integer")
        seed = seed_override

    scaling_raw = generation.get("scaling", {})
    scaling_raw = _expect_mapping(scaling_raw, "scaling")
    _expect_keys(scaling_raw, {"column_replication", "shard_count"}, "scaling")
    replication = _expect_int(scaling_raw.get("column_replication", 0), "column_replication")
    if replication < 0:
        _fail("column_replication must be >= 0")
    shard_count = _expect_int(scaling_raw.get("shard_count", 1), "shard_count")
    if shard_count < 1:
        _fail("shard_count must be >= 1")
    scaling = ScalingSpec(column_replication=replication, shard_count=shard_count)

    schema_raw = doc.get("schema")
    if not isinstance(schema_raw, list) or not schema_raw:
        _fail("schema must be a non-empty list of attributes")
    attrs = [_parse_attribute(raw, base_dir) for raw in schema_raw]
    names = [a.name for a in attrs]
    if len(set(names)) != len(names):
        dupe = next(n for n in names if names.count(n) > 1)
        _fail(f"duplicate attribute name: {dupe!r}")

    # Column replication: clone attributes (not dependency rules) with
    # suffixed names before any further validation.
    if replication > 0:
        dependents = {
            _expect_mapping(r, "dependency rule").get("dependent")
            for r in doc.get("dependencies") or []
        }
        clones = []
        for attr in attrs:
            if attr.name in dependents:
                continue
            for j in range(1, replication + 1):
                clone_name = f"{attr.name}_r{j}"
                if clone_name in names:
                    _fail(
                        f"column replication would create {clone_name!r}, which "
                        f"is already declared"
                    )
                clones.append(replace(attr, name=clone_name))
        attrs.extend(clones)
        names = [a.name for a in attrs]

    for attr in attrs:
        if attr.source is None and not _is_dependent(attr.name, doc.get("dependencies")):
            _fail(f"attribute '{attr.name}' declares no value source and no dependency rule")
        if attr.source is not None:
            _resolve_domain(attr)

    dependencies = _resolve_dependencies(attrs, doc.get("dependencies"), tuple_count)

    for attr in attrs:
        _validate_sequence_interval(attr, tuple_count)
        _validate_unique(attr, tuple_count)
        if attr.synonyms is not None:
            domain = (
                enumerate_clean_domain(attr, tuple_count)
                if (attr.finite_domain is not None or attr.dependency is not None)
                else None
            )
            if domain is not None:
                orphan = [k for k in attr.synonyms if k not in domain]
                if orphan:
                    _fail(
                        f"attribute '{attr.name}': synonym key {orphan[0]!r} can "
                        f"never be generated"
                    )

    errors_raw = doc.get("errors", [])
    if errors_raw is None:
        errors_raw = []
    if not isinstance(errors_raw, list):
        _fail("errors must be a list")
    specs = [_parse_error_spec(raw, i, attrs, tuple_count) for i, raw in enumerate(errors_raw)]

    violable = [
        r for r in dependencies if len(set(r.mapping.values())) >= 2
    ]
    for i, spec in enumerate(specs):
        if spec.error_type == "inconsistency_among_attribute_values" and not violable:
            _fail(
                f"errors[{i}] ({spec.error_type}): no dependency rule with at "
                f"least two distinct dependent values is declared"
            )

    seen_pairs = set()
    for i, spec in enumerate(specs):
        keys = spec.target_attributes or (
            (spec.params["target_attribute"],) if spec.error_type == "bias" else (None,)
        )
        for key in keys:
            pair = (spec.error_type, key)
            if pair in seen_pairs:
                _fail(
                    f"errors[{i}]: duplicate spec for error type "
                    f"'{spec.error_type}' on attribute {key!r}"
                )
            seen_pairs.add(pair)

    _check_feasibility(attrs, specs, tuple_count)

    output_raw = doc.get("output", {})
    output_raw = _expect_mapping(output_raw, "output section")
    _expect_keys(output_raw, {"directory", "mode"}, "output")
    directory = output_raw.get("directory", "out")
    if output_dir_override is not None:
        directory = output_dir_override
    mode = output_raw.get("mode", "ndjson")
    try:
        output = OutputSpec(directory=Path(directory), mode=mode, shard_count=shard_count)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    config = GeneratorConfig(
        schema=tuple(attrs),
        dependencies=tuple(dependencies),
        errors=tuple(specs),
        tuple_count=tuple_count,
        seed=seed,
        scaling=scaling,
        output=output,
        attr_positions={a.name: i for i, a in enumerate(attrs)},
        eval_order=_evaluation_order(attrs),
    )
    config.config_hash = compute_config_hash(config)
    return config


def _is_dependent(name: str, raw_rules) -> bool:
    for raw in raw_rules or []:
        if isinstance(raw, dict) and raw.get("dependent") == name:
            return True
    return False


def _evaluation_order(attrs: list[AttributeSpec]) -> tuple[str, ...]:
    """Schema order with every determinant placed before its dependents."""
    order: list[str] = []
    placed: set[str] = set()
    by_name = {a.name: a for a in attrs}

    def place(attr: AttributeSpec):
        if attr.name in placed:
            return
        if attr.dependency is not None:
            place(by_name[attr.dependency.determinant])
        placed.add(attr.name)
        order.append(attr.name)

    for attr in attrs:
        place(attr)
    return tuple(order)


def load_config(
    path: str | Path,
    *,
    seed_override: int | None = None,
    output_dir_override: str | Path | None = None,
) -> GeneratorConfig:
    """Read and parse a configuration file; relative lexicon paths resolve
    against the config file's directory."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(
        text,
        base_dir=path.parent,
        seed_override=seed_override,
        output_dir_override=output_dir_override,
    )


def compute_config_hash(config: GeneratorConfig) -> str:
    """Stable SHA-256 over the canonical resolved configuration.

    Lexicon references are replaced by content digests, so the hash changes
    when a lexicon file changes. The output directory is excluded: moving a
    run must not change its identity.
    """
    canonical = {
        "schema": [a.signature() for a in config.schema],
        "dependencies": [r.signature() for r in config.dependencies],
        "errors": [_error_signature(s) for s in config.errors],
        "generation": {
            "tuple_count": config.tuple_count,
            "seed": config.seed,
            "column_replication": config.scaling.column_replication,
            "shard_count": config.scaling.shard_count,
        },
        "output": {"mode": config.output.mode},
    }
    encoded = json.dumps(canonical, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(encoded.encode("utf-8")).hexdigest()


def _error_signature(spec: ErrorSpec) -> dict:
    sig = spec.signature()
    params = {}
    for key, value in sig["params"].items():
        if key == "offdomain" and isinstance(value, dict):
            params[key] = {
                name: src.signature() if hasattr(src, "signature") else src
                for name, src in value.items()
            }
        elif key == "skewed_weights" and isinstance(value, dict):
            params[key] = {json.dumps(k, ensure_ascii=False): w for k, w in value.items()}
        else:
            params[key] = value
    sig["params"] = params
    return sig
