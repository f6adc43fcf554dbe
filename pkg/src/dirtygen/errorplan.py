"""Deterministic assignment of error targets before any injection happens.

Planning walks a seeded permutation of each spec's candidate space and takes
the first eligible, unclaimed targets until the exact count is met, so the
realized number of errors equals round(rate x population) and never depends
on luck. Specs are processed coarse-scope first (insertions, rows, columns,
cells); a cell already claimed by an earlier entry is skipped and the walk
continues. Because every spec draws from its own permutation, adding or
removing a spec of one type never moves the placements of another type
unless their claims actually collide.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import taxonomy
from .config import ErrorSpec, GeneratorConfig
from .datagen import clean_cell_value
from .exceptions import PlanError
from .rng import IndexPermutation, Stream, address_key
from .taxonomy import STAGE_CELL, STAGE_COLUMN, STAGE_INSERTION, STAGE_ROW

_DONOR_ATTEMPTS = 128


@dataclass(slots=True)
class PlanEntry:
    error_type: str
    scope: str  # "cell" | "row" | "column" | "insertion"
    spec_index: int
    row: int | None  # target tuple, or source tuple for insertions (None: no source)
    attribute: str | None
    donor: int | None = None  # uniqueness violations: earlier tuple to copy from
    rule_index: int | None = None  # inconsistency among attributes: which rule

    def describe(self) -> str:
        parts = [self.scope, self.error_type]
        if self.scope == "insertion":
            if self.row is not None:
                parts.append(f"source={self.row}")
        else:
            parts.append(f"row={self.row}")
        if self.attribute is not None:
            parts.append(f"attr={self.attribute}")
        if self.donor is not None:
            parts.append(f"donor={self.donor}")
        if self.rule_index is not None:
            parts.append(f"rule={self.rule_index}")
        return " ".join(parts)


@dataclass
class ErrorPlan:
    entries: tuple[PlanEntry, ...]
    base_count: int
    inserted_count: int
    row_entries: dict = field(repr=False)  # base row -> [PlanEntry]
    insertions: tuple[PlanEntry, ...]  # dirty index N + position
    warnings: tuple[str, ...] = ()


def applicable_population(spec: ErrorSpec, config: GeneratorConfig) -> int:
    """The denominator of the spec's rate: cells for cell-addressed types,
    tuples for row and insertion types."""
    return taxonomy.population(
        spec.error_type, len(spec.target_attributes), config.tuple_count
    )


def spec_target_count(spec: ErrorSpec, config: GeneratorConfig) -> int:
    return taxonomy.round_half_away(spec.rate * applicable_population(spec, config))


def _may_be_null(attr, config: GeneratorConfig) -> bool:
    while attr.dependency is not None:
        attr = config.attribute(attr.dependency.determinant)
    return attr.null_rate > 0


class _Claims:
    """Row and cell claims; cells are keyed as row * width + attr position."""

    def __init__(self, config: GeneratorConfig):
        self._width = len(config.schema)
        self._positions = config.attr_positions
        self.rows: set[int] = set()
        self.cells: set[int] = set()

    def cell_key(self, row: int, attribute: str) -> int:
        return row * self._width + self._positions[attribute]

    def cell_free(self, row: int, attribute: str) -> bool:
        return row not in self.rows and self.cell_key(row, attribute) not in self.cells

    def claim_cell(self, row: int, attribute: str) -> None:
        self.cells.add(self.cell_key(row, attribute))

    def row_free(self, row: int) -> bool:
        if row in self.rows:
            return False
        base = row * self._width
        return not any(base + p in self.cells for p in range(self._width))

    def claim_row(self, row: int) -> None:
        self.rows.add(row)


def plan_errors(config: GeneratorConfig) -> ErrorPlan:
    """Turn the error specs into a collision-free, exact-count target plan."""
    n = config.tuple_count
    claims = _Claims(config)
    entries: list[PlanEntry] = []
    insertions: list[PlanEntry] = []
    warnings: list[str] = []

    staged: dict[int, list[tuple[int, ErrorSpec]]] = {
        STAGE_INSERTION: [],
        STAGE_ROW: [],
        STAGE_COLUMN: [],
        STAGE_CELL: [],
    }
    for index, spec in enumerate(config.errors):
        staged[taxonomy.STAGE_OF[spec.error_type]].append((index, spec))

    for index, spec in staged[STAGE_INSERTION]:
        count = spec_target_count(spec, config)
        stream = Stream(address_key(config.seed, f"plan:{spec.error_type}"))
        for _ in range(count):
            source = None
            if spec.error_type != "irrelevant_observation":
                source = stream.randrange(n)  # n >= 1 whenever count >= 1
            entry = PlanEntry(spec.error_type, "insertion", index, source, None)
            entries.append(entry)
            insertions.append(entry)

    violable_rules = [
        i
        for i, rule in enumerate(config.dependencies)
        if len(set(rule.mapping.values())) >= 2
    ]
    nullable_anywhere = any(_may_be_null(a, config) for a in config.schema)

    for index, spec in staged[STAGE_ROW]:
        count = spec_target_count(spec, config)
        if count == 0:
            continue
        perm = IndexPermutation(address_key(config.seed, f"plan:{spec.error_type}"), n)
        placed = 0
        for j in range(n):
            if placed >= count:
                break
            row = perm(j)
            if not claims.row_free(row):
                continue
            entry = None
            if spec.error_type == "semi_empty_tuple":
                if nullable_anywhere and _non_null_cells(config, row) < 2:
                    continue
                entry = PlanEntry(spec.error_type, "row", index, row, None)
            else:  # inconsistency_among_attribute_values
                rule_index = _choose_rule(config, row, violable_rules)
                if rule_index is None:
                    continue
                entry = PlanEntry(
                    spec.error_type, "row", index, row, None, rule_index=rule_index
                )
            claims.claim_row(row)
            entries.append(entry)
            placed += 1
        if placed < count:
            raise PlanError(
                f"error plan infeasible: spec {index} ({spec.error_type}, rate "
                f"{spec.rate}) placed only {placed} of {count} targets"
            )

    for index, spec in staged[STAGE_COLUMN]:
        if spec.error_type == "bias":
            _plan_bias(config, index, spec, claims, entries, warnings)
            continue
        count = spec_target_count(spec, config)
        targets = spec.target_attributes
        for attribute, share in zip(targets, taxonomy.split_count(count, len(targets))):
            _plan_cells(config, index, spec, attribute, share, claims, entries)

    for index, spec in staged[STAGE_CELL]:
        count = spec_target_count(spec, config)
        targets = spec.target_attributes
        for attribute, share in zip(targets, taxonomy.split_count(count, len(targets))):
            _plan_cells(config, index, spec, attribute, share, claims, entries)

    row_entries: dict[int, list[PlanEntry]] = {}
    for entry in entries:
        if entry.scope != "insertion":
            row_entries.setdefault(entry.row, []).append(entry)

    return ErrorPlan(
        entries=tuple(entries),
        base_count=n,
        inserted_count=len(insertions),
        row_entries=row_entries,
        insertions=tuple(insertions),
        warnings=tuple(warnings),
    )


def _non_null_cells(config: GeneratorConfig, row: int) -> int:
    memo: dict = {}
    return sum(
        1 for name in config.attribute_names if clean_cell_value(config, row, name, memo) is not None
    )


def _choose_rule(config: GeneratorConfig, row: int, violable_rules: list[int]) -> int | None:
    stream = Stream(address_key(config.seed, "plan:inconsistency_among_attribute_values", row))
    rule_index = violable_rules[stream.randrange(len(violable_rules))]
    rule = config.dependencies[rule_index]
    memo: dict = {}
    if clean_cell_value(config, row, rule.determinant, memo) is None:
        return None
    if clean_cell_value(config, row, rule.dependent, memo) is None:
        return None
    return rule_index


def _plan_cells(
    config: GeneratorConfig,
    index: int,
    spec: ErrorSpec,
    attribute: str,
    count: int,
    claims: _Claims,
    entries: list[PlanEntry],
) -> None:
    if count == 0:
        return
    n = config.tuple_count
    attr = config.attribute(attribute)
    error_type = spec.error_type
    scope = "column" if taxonomy.STAGE_OF[error_type] == STAGE_COLUMN else "cell"
    needs_value = error_type not in ("missing_attribute",) and _may_be_null(attr, config)
    check_synonym = error_type == "synonyms_existence"
    is_uniqueness = error_type == "uniqueness_value_violation"

    perm = IndexPermutation(address_key(config.seed, f"plan:{error_type}", 0, attribute), n)
    placed = 0
    for j in range(n):
        if placed >= count:
            break
        row = perm(j)
        if not claims.cell_free(row, attribute):
            continue
        if needs_value or check_synonym:
            value = clean_cell_value(config, row, attribute)
            if value is None:
                continue
            if check_synonym and not (attr.synonyms and attr.synonyms.get(value)):
                continue
        donor = None
        if is_uniqueness:
            if row == 0:
                continue
            donor = _find_donor(config, row, attribute, claims)
            if donor is None:
                continue
        entry = PlanEntry(error_type, scope, index, row, attribute, donor=donor)
        claims.claim_cell(row, attribute)
        if donor is not None:
            claims.claim_cell(donor, attribute)
        entries.append(entry)
        placed += 1
    if placed < count:
        raise PlanError(
            f"error plan infeasible: spec {index} ({error_type} on '{attribute}', "
            f"rate {spec.rate}) placed only {placed} of {count} targets"
        )


def _find_donor(config: GeneratorConfig, row: int, attribute: str, claims: _Claims) -> int | None:
    stream = Stream(address_key(config.seed, "plan:uniqueness_value_violation:donor", row, attribute))
    attr = config.attribute(attribute)
    nullable = _may_be_null(attr, config)
    for _ in range(min(_DONOR_ATTEMPTS, max(row * 4, 8))):
        donor = stream.randrange(row)
        if not claims.cell_free(donor, attribute):
            continue
        if nullable and clean_cell_value(config, donor, attribute) is None:
            continue
        return donor
    return None


def _plan_bias(
    config: GeneratorConfig,
    index: int,
    spec: ErrorSpec,
    claims: _Claims,
    entries: list[PlanEntry],
    warnings: list[str],
) -> None:
    count = spec_target_count(spec, config)
    if count == 0:
        return
    n = config.tuple_count
    group_attr = spec.params["group_attribute"]
    group_value = spec.params["group_value"]
    target_attr = spec.params["target_attribute"]
    nullable = _may_be_null(config.attribute(target_attr), config)

    perm = IndexPermutation(address_key(config.seed, "plan:bias", 0, target_attr), n)
    placed = 0
    for j in range(n):
        if placed >= count:
            break
        row = perm(j)
        if not claims.cell_free(row, target_attr):
            continue
        if clean_cell_value(config, row, group_attr) != group_value:
            continue
        if nullable and clean_cell_value(config, row, target_attr) is None:
            continue
        entries.append(PlanEntry("bias", "column", index, row, target_attr))
        claims.claim_cell(row, target_attr)
        placed += 1
    if placed < count:
        warnings.append(
            f"bias spec {index}: only {placed} of {count} targets have "
            f"{group_attr} = {group_value!r}; realized count is below target"
        )


def format_plan(plan: ErrorPlan) -> str:
    """One line per entry, for --emit-plan debugging."""
    return "\n".join(entry.describe() for entry in plan.entries)
