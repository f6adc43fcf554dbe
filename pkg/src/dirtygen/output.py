"""Bit-exact serialization of datasets and error logs, and their readers.

Dataset files are UTF-8 with LF line endings. In ndjson mode every record is
one compact JSON object per line (keys in schema order, no spaces, floats in
shortest round-trip form, absent keys omitted, nulls explicit). In json_array
mode each file holds one JSON array with the same objects, one per line.

The error log is a tab-separated text file. One header line starting with
'#' records the format version, seed, config hash, and column names. Every
following line has six fields: dirty_index, clean_index, attribute,
error_type, clean_value, dirty_value. Index and attribute fields use '-'
when not applicable; values are JSON-encoded, with '-' meaning "no value at
all" (distinct from JSON null).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .exceptions import DatasetFormatError
from .taxonomy import ABSENT, ALL_ERROR_TYPES

LOG_FORMAT_VERSION = "dirtygen-log-v1"
_LOG_COLUMNS = "dirty_index,clean_index,attribute,error_type,clean_value,dirty_value"


@dataclass(frozen=True)
class OutputSpec:
    directory: Path = Path("out")
    mode: str = "ndjson"  # "ndjson" | "json_array"
    shard_count: int = 1

    def __post_init__(self):
        if self.mode not in ("ndjson", "json_array"):
            raise ValueError(f"unknown output mode: {self.mode!r}")
        if self.shard_count < 1:
            raise ValueError("shard_count must be >= 1")

    @property
    def extension(self) -> str:
        return "ndjson" if self.mode == "ndjson" else "json"

    def dataset_paths(self, which: str) -> list[Path]:
        if self.shard_count == 1:
            return [self.directory / f"{which}.{self.extension}"]
        return [
            self.directory / f"{which}.{shard:05d}.{self.extension}"
            for shard in range(self.shard_count)
        ]

    @property
    def log_path(self) -> Path:
        return self.directory / "errors.log"

    @property
    def manifest_path(self) -> Path:
        return self.directory / "run-manifest.json"


def encode_record(record: dict) -> str:
    """Compact one-line JSON for a record, keys in insertion order."""
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"), allow_nan=False)


class DatasetWriter:
    """Streaming writer that partitions records into contiguous-range shards."""

    def __init__(self, spec: OutputSpec, which: str, total_count: int):
        self.spec = spec
        self.paths = spec.dataset_paths(which)
        base, extra = divmod(total_count, spec.shard_count)
        self._shard_sizes = [base + (1 if s < extra else 0) for s in range(spec.shard_count)]
        self._shard = 0
        self._written_in_shard = 0
        self._total = 0
        self._expected = total_count
        self._file = None
        spec.directory.mkdir(parents=True, exist_ok=True)

    def _open_next(self):
        self._file = open(self.paths[self._shard], "w", encoding="utf-8", newline="\n")
        if self.spec.mode == "json_array":
            self._file.write("[")
        self._written_in_shard = 0

    def _close_current(self):
        if self._file is None:
            return
        if self.spec.mode == "json_array":
            self._file.write("]\n" if self._written_in_shard == 0 else "\n]\n")
        self._file.close()
        self._file = None

    def write(self, record: dict | None) -> None:
        """Write one record; None writes a JSON null line (a deleted row)."""
        if self._total >= self._expected:
            raise DatasetFormatError(
                f"writer received more than the declared {self._expected} records"
            )
        if self._file is None:
            self._open_next()
        while self._written_in_shard >= self._shard_sizes[self._shard]:
            self._close_current()
            self._shard += 1
            self._open_next()
        line = "null" if record is None else encode_record(record)
        if self.spec.mode == "ndjson":
            self._file.write(line + "\n")
        else:
            self._file.write(("\n" if self._written_in_shard == 0 else ",\n") + line)
        self._written_in_shard += 1
        self._total += 1

    def close(self) -> list[Path]:
        if self._file is not None:
            self._close_current()
            self._shard += 1
        # Emit empty files for any shards that received no records.
        while self._shard < len(self.paths):
            self._open_next()
            self._close_current()
            self._shard += 1
        if self._total != self._expected:
            raise DatasetFormatError(
                f"writer closed after {self._total} records, expected {self._expected}"
            )
        return self.paths


def write_dataset(
    records: Iterable[dict], spec: OutputSpec, which: str, total_count: int | None = None
) -> list[Path]:
    """Serialize records to the dataset file(s) for `which` ("clean" or "dirty")."""
    if total_count is None:
        records = list(records)
        total_count = len(records)
    writer = DatasetWriter(spec, which, total_count)
    for record in records:
        writer.write(record)
    return writer.close()


def _infer_mode(path: Path, mode: str | None) -> str:
    if mode is not None:
        return mode
    return "json_array" if path.suffix == ".json" else "ndjson"


def _strict_loads(text: str):
    # Reject NaN/Infinity; they are not standard JSON.
    return json.loads(text, parse_constant=lambda c: (_ for _ in ()).throw(ValueError(c)))


def read_dataset(
    path: str | Path, mode: str | None = None, *, allow_deleted: bool = False
) -> Iterator[dict | None]:
    """Stream records back from a dataset file; inverse of write_dataset."""
    path = Path(path)
    mode = _infer_mode(path, mode)
    if mode == "ndjson":
        with open(path, encoding="utf-8", newline="") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                try:
                    obj = _strict_loads(line)
                except ValueError as exc:
                    raise DatasetFormatError(f"{path}: line {lineno}: not valid JSON: {exc}") from exc
                yield _check_row(obj, path, lineno, allow_deleted)
    else:
        text = Path(path).read_text(encoding="utf-8")
        try:
            data = _strict_loads(text)
        except ValueError as exc:
            raise DatasetFormatError(f"{path}: not a valid JSON document: {exc}") from exc
        if not isinstance(data, list):
            raise DatasetFormatError(f"{path}: expected a top-level JSON array")
        for index, obj in enumerate(data):
            yield _check_row(obj, path, index + 1, allow_deleted)


def _check_row(obj, path: Path, position: int, allow_deleted: bool):
    if obj is None and allow_deleted:
        return None
    if not isinstance(obj, dict):
        raise DatasetFormatError(f"{path}: entry {position}: expected a JSON object")
    return obj


def _encode_log_value(value) -> str:
    if value is ABSENT:
        return "-"
    return json.dumps(value, ensure_ascii=False, separators=(",", ":"), allow_nan=False)


def _decode_log_value(text: str):
    if text == "-":
        return ABSENT
    return _strict_loads(text)


def write_error_log(entries: Iterable, spec: OutputSpec, *, seed: int, config_hash: str) -> Path:
    spec.directory.mkdir(parents=True, exist_ok=True)
    path = spec.log_path
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        writer = ErrorLogWriter(fh, seed=seed, config_hash=config_hash)
        for entry in entries:
            writer.write(entry)
    return path


class ErrorLogWriter:
    """Incremental error-log writer; the header goes out on construction."""

    def __init__(self, fh, *, seed: int, config_hash: str):
        self._fh = fh
        fh.write(
            f"# {LOG_FORMAT_VERSION}\tseed={seed}\tconfig=sha256:{config_hash}"
            f"\tcolumns={_LOG_COLUMNS}\n"
        )

    def write(self, entry) -> None:
        fields = (
            str(entry.dirty_tuple_index),
            "-" if entry.clean_tuple_index is None else str(entry.clean_tuple_index),
            "-" if entry.attribute is None else entry.attribute,
            entry.error_type,
            _encode_log_value(entry.clean_value),
            _encode_log_value(entry.dirty_value),
        )
        self._fh.write("\t".join(fields) + "\n")


def read_error_log(path: str | Path) -> list:
    """Parse an error log back into ErrorLogEntry objects."""
    from .inject import ErrorLogEntry  # late import; inject depends on this module

    path = Path(path)
    entries = []
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise DatasetFormatError(f"{path}: missing '#' header line")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 6:
                raise DatasetFormatError(
                    f"{path}: line {lineno}: expected 6 tab-separated fields, got {len(fields)}"
                )
            dirty_idx, clean_idx, attribute, error_type, clean_val, dirty_val = fields
            if error_type not in ALL_ERROR_TYPES:
                raise DatasetFormatError(
                    f"{path}: line {lineno}: unknown error type {error_type!r}"
                )
            try:
                entries.append(
                    ErrorLogEntry(
                        dirty_tuple_index=int(dirty_idx),
                        clean_tuple_index=None if clean_idx == "-" else int(clean_idx),
                        attribute=None if attribute == "-" else attribute,
                        error_type=error_type,
                        clean_value=_decode_log_value(clean_val),
                        dirty_value=_decode_log_value(dirty_val),
                    )
                )
            except ValueError as exc:
                raise DatasetFormatError(f"{path}: line {lineno}: {exc}") from exc
    return entries


def write_manifest(spec: OutputSpec, manifest: dict) -> Path:
    spec.directory.mkdir(parents=True, exist_ok=True)
    path = spec.manifest_path
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")
    return path
