"""Response dataset schema, CSV ingestion, and group partitioning.

A dataset is a flat list of classifier responses, one row per presented
sample: who was presented (``sample_id``), which demographic group the
sample belongs to, whether it was a bona fide presentation or an attack,
and the classifier's scalar response. Responses are non-negative; lower
means more likely to be accepted (accept iff response <= threshold).
"""
from __future__ import annotations

import csv
import enum
import logging
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    EmptyDatasetError,
    InsufficientDataError,
    ParameterError,
    RowError,
    SchemaError,
    UnknownGroupError,
)

__all__ = [
    "EXPECTED_HEADER",
    "SampleClass",
    "ResponseRecord",
    "Dataset",
    "GroupPair",
    "load_csv",
    "save_csv",
    "bona_fide_responses",
    "attack_responses",
    "group_pairs",
]

log = logging.getLogger(__name__)

EXPECTED_HEADER = ("sample_id", "group", "class", "response")

# accepted spellings for the class column, case-insensitive
_BONA_FIDE_NAMES = frozenset({"bonafide", "bona_fide", "bona-fide", "bona fide"})
_ATTACK_NAMES = frozenset({"attack"})


class SampleClass(enum.Enum):
    BONA_FIDE = "bonafide"
    ATTACK = "attack"


@dataclass(frozen=True)
class ResponseRecord:
    """One presented sample: identity, group, class, and response."""

    sample_id: str
    group: str
    sample_class: SampleClass
    response: float

    def __post_init__(self):
        if not self.sample_id:
            raise ParameterError("sample_id must be non-empty")
        if not self.group:
            raise ParameterError("group must be non-empty")
        if not isinstance(self.sample_class, SampleClass):
            raise ParameterError(f"bad sample class: {self.sample_class!r}")
        r = self.response
        if not isinstance(r, float) or not math.isfinite(r) or r < 0.0:
            raise ParameterError(f"response must be a finite float >= 0, got {r!r}")


@dataclass(frozen=True)
class GroupPair:
    """Unordered pair of group labels in canonical (lexicographic) order."""

    a: str
    b: str

    def __post_init__(self):
        if self.a >= self.b:
            raise ParameterError(
                f"pair must be in strict lexicographic order, got ({self.a!r}, {self.b!r})"
            )

    @classmethod
    def of(cls, x: str, y: str) -> "GroupPair":
        if x == y:
            raise ParameterError(f"a pair needs two distinct groups, got {x!r} twice")
        return cls(x, y) if x < y else cls(y, x)

    @property
    def key(self) -> str:
        return f"{self.a}|{self.b}"


class Dataset:
    """Immutable collection of ResponseRecords with a per-group index."""

    def __init__(self, records: Iterable[ResponseRecord]):
        self.records: tuple[ResponseRecord, ...] = tuple(records)
        if not self.records:
            raise EmptyDatasetError("dataset has no records")
        index: dict[str, list[int]] = {}
        for i, rec in enumerate(self.records):
            index.setdefault(rec.group, []).append(i)
        self.group_index: dict[str, tuple[int, ...]] = {
            g: tuple(ix) for g, ix in sorted(index.items())
        }
        dupes = {
            sid: c
            for sid, c in Counter(r.sample_id for r in self.records).items()
            if c > 1
        }
        if dupes:
            log.warning(
                "dataset contains %d duplicated sample_id value(s), e.g. %r",
                len(dupes),
                next(iter(sorted(dupes))),
            )

    def groups(self) -> list[str]:
        return list(self.group_index)

    def __len__(self) -> int:
        return len(self.records)


def load_csv(path: str | Path) -> Dataset:
    """Load a response dataset from CSV.

    Expects the exact header ``sample_id,group,class,response`` (UTF-8,
    ``.`` decimal separator, LF or CRLF). Class values are case-insensitive.
    Raises SchemaError / RowError / EmptyDatasetError accordingly.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDatasetError(f"{path}: file is empty") from None
        normalized = [h.strip().lower() for h in header]
        if normalized != list(EXPECTED_HEADER):
            missing = [c for c in EXPECTED_HEADER if c not in normalized]
            extra = [c for c in normalized if c not in EXPECTED_HEADER]
            detail = []
            if missing:
                detail.append(f"missing column(s): {', '.join(missing)}")
            if extra:
                detail.append(f"unexpected column(s): {', '.join(extra)}")
            if not detail:
                detail.append(f"column order must be {','.join(EXPECTED_HEADER)}")
            raise SchemaError(f"{path}: bad header: {'; '.join(detail)}")

        records = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue  # tolerate blank lines
            if len(row) != 4:
                raise RowError(line_no, f"expected 4 fields, got {len(row)}")
            sid, group, cls_text, resp_text = (f.strip() for f in row)
            if not sid:
                raise RowError(line_no, "empty sample_id")
            if not group:
                raise RowError(line_no, "empty group")
            cls_norm = cls_text.lower()
            if cls_norm in _BONA_FIDE_NAMES:
                cls = SampleClass.BONA_FIDE
            elif cls_norm in _ATTACK_NAMES:
                cls = SampleClass.ATTACK
            else:
                raise RowError(line_no, f"unknown class {cls_text!r}")
            try:
                resp = float(resp_text)
            except ValueError:
                raise RowError(line_no, f"bad response {resp_text!r}") from None
            if not math.isfinite(resp) or resp < 0.0:
                raise RowError(
                    line_no, f"response must be finite and >= 0, got {resp_text!r}"
                )
            records.append(ResponseRecord(sid, group, cls, resp))

    if not records:
        raise EmptyDatasetError(f"{path}: no data rows")
    return Dataset(records)


def save_csv(ds: Dataset, path: str | Path) -> None:
    """Write a dataset back to CSV; responses as shortest round-trip decimals."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EXPECTED_HEADER)
        for rec in ds.records:
            writer.writerow(
                [rec.sample_id, rec.group, rec.sample_class.value, repr(rec.response)]
            )


def _responses(ds: Dataset, cls: SampleClass, group: str | None) -> list[float]:
    if group is not None:
        if group not in ds.group_index:
            known = ", ".join(ds.group_index)
            raise UnknownGroupError(f"no such group {group!r} (have: {known})")
        idx: Sequence[int] = ds.group_index[group]
    else:
        idx = range(len(ds.records))
    out = [ds.records[i].response for i in idx if ds.records[i].sample_class is cls]
    out.sort()
    return out


def bona_fide_responses(ds: Dataset, group: str | None = None) -> list[float]:
    """Ascending bona fide responses for one group (or pooled when None)."""
    return _responses(ds, SampleClass.BONA_FIDE, group)


def attack_responses(ds: Dataset, group: str | None = None) -> list[float]:
    """Ascending attack responses for one group (or pooled when None)."""
    return _responses(ds, SampleClass.ATTACK, group)


def group_pairs(ds: Dataset) -> list[GroupPair]:
    """All unordered group pairs in canonical order; needs >= 2 groups."""
    groups = ds.groups()
    if len(groups) < 2:
        raise InsufficientDataError(
            f"need at least two groups for pairwise analysis, got {len(groups)}"
        )
    return [
        GroupPair(groups[i], groups[j])
        for i in range(len(groups))
        for j in range(i + 1, len(groups))
    ]
