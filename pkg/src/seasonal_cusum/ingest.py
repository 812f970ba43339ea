"""Count dataset ingestion: CSV parsing, calendar metadata, gaps, train/test split.

CSV formats (UTF-8, header row required, ISO-8601 dates, 24h HH:MM times):
    daily:  date,count
    slots:  date,slot_start,count
Gaps in the record are detected and masked, never imputed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date, time, timedelta
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

from .daycal import (
    DEFAULT_ORIGIN,
    SATURDAY_SLOT_COUNT,
    DayMeta,
    day_meta,
    slot_index,
)
from .errors import DuplicateKeyError, ParseError, ValidationError

DAILY_HEADER = ["date", "count"]
SLOT_HEADER = ["date", "slot_start", "count"]


@dataclass(frozen=True, order=True)
class DailyRecord:
    date: date
    count: int


@dataclass(frozen=True, order=True)
class SlotRecord:
    date: date
    slot_start: time
    count: int

    @property
    def slot_index(self) -> int:
        return slot_index(self.slot_start)


@dataclass(frozen=True)
class Dataset:
    """Immutable bundle of daily and intraday counts with per-date metadata."""

    daily: tuple[DailyRecord, ...]
    slots: tuple[SlotRecord, ...]
    meta: Mapping[date, DayMeta]
    holidays: frozenset[date]
    origin: date
    split_date: date | None = None

    @property
    def dates(self) -> list[date]:
        seen = {r.date for r in self.daily} | {r.date for r in self.slots}
        return sorted(seen)

    @property
    def first_date(self) -> date:
        return self.dates[0]

    @property
    def last_date(self) -> date:
        return self.dates[-1]


def _build_meta(dates: Iterable[date], holidays: frozenset[date], origin: date) -> Mapping[date, DayMeta]:
    return MappingProxyType({d: day_meta(d, holidays, origin) for d in dates})


def build_dataset(
    daily: Iterable[DailyRecord] = (),
    slots: Iterable[SlotRecord] = (),
    holidays: frozenset[date] = frozenset(),
    origin: date = DEFAULT_ORIGIN,
    split_date: date | None = None,
) -> Dataset:
    daily = tuple(sorted(daily))
    slots = tuple(sorted(slots))
    dates = {r.date for r in daily} | {r.date for r in slots}
    if not dates:
        raise ValidationError("dataset has no records")
    return Dataset(
        daily=daily,
        slots=slots,
        meta=_build_meta(sorted(dates), holidays, origin),
        holidays=holidays,
        origin=origin,
        split_date=split_date,
    )


def _read_rows(path: str | Path, header: list[str]):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise ParseError("empty file", line=1) from None
        if [c.strip() for c in first] != header:
            raise ParseError(f"expected header {','.join(header)!r}, got {','.join(first)!r}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(row)}", line=lineno)
            yield lineno, [c.strip() for c in row]


def _parse_date(text: str, lineno: int) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError as exc:
        raise ParseError(f"bad date {text!r}: {exc}", line=lineno) from None


def _parse_count(text: str, lineno: int) -> int:
    try:
        value = int(text)
    except ValueError:
        raise ParseError(f"bad count {text!r}", line=lineno) from None
    if value < 0:
        raise ValidationError(f"line {lineno}: negative count {value}")
    return value


def parse_daily_csv(
    path: str | Path,
    holidays: frozenset[date] = frozenset(),
    origin: date = DEFAULT_ORIGIN,
) -> Dataset:
    """Parse a `date,count` CSV into a Dataset fragment (daily records plus meta)."""
    records = []
    seen: set[date] = set()
    for lineno, (d_text, c_text) in _read_rows(path, DAILY_HEADER):
        d = _parse_date(d_text, lineno)
        if d in seen:
            raise DuplicateKeyError(f"line {lineno}: duplicate date {d.isoformat()}")
        seen.add(d)
        records.append(DailyRecord(d, _parse_count(c_text, lineno)))
    if not records:
        raise ParseError("no data rows", line=2)
    return build_dataset(daily=records, holidays=holidays, origin=origin)


def parse_slot_csv(path: str | Path) -> tuple[SlotRecord, ...]:
    """Parse a `date,slot_start,count` CSV into sorted, unique slot records."""
    records = []
    seen: set[tuple[date, time]] = set()
    for lineno, (d_text, t_text, c_text) in _read_rows(path, SLOT_HEADER):
        d = _parse_date(d_text, lineno)
        try:
            t = time.fromisoformat(t_text)
        except ValueError as exc:
            raise ParseError(f"bad time {t_text!r}: {exc}", line=lineno) from None
        try:
            idx = slot_index(t)
        except ValidationError as exc:
            raise ValidationError(f"line {lineno}: {exc}") from None
        if d.weekday() == 6:
            raise ValidationError(f"line {lineno}: {d.isoformat()} is a Sunday (closed)")
        if d.weekday() == 5 and idx >= SATURDAY_SLOT_COUNT:
            raise ValidationError(
                f"line {lineno}: slot {t.isoformat('minutes')} outside the Saturday grid"
            )
        key = (d, t)
        if key in seen:
            raise DuplicateKeyError(f"line {lineno}: duplicate slot ({d.isoformat()}, {t.isoformat('minutes')})")
        seen.add(key)
        records.append(SlotRecord(d, t, _parse_count(c_text, lineno)))
    return tuple(sorted(records))


def write_daily_csv(records: Iterable[DailyRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(DAILY_HEADER)
        for r in records:
            writer.writerow([r.date.isoformat(), r.count])


def write_slot_csv(records: Iterable[SlotRecord], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SLOT_HEADER)
        for r in records:
            writer.writerow([r.date.isoformat(), r.slot_start.isoformat("minutes"), r.count])


def detect_gaps(dataset: Dataset) -> list[tuple[date, date]]:
    """Maximal runs of expected-open dates carrying no records at all.

    Gap dates are excluded from fitting and detection downstream; detector
    state is frozen across them rather than reset.
    """
    recorded = set(dataset.dates)
    gaps: list[tuple[date, date]] = []
    run_start: date | None = None
    prev_open: date | None = None
    d = dataset.first_date
    while d <= dataset.last_date:
        if day_meta(d, dataset.holidays, dataset.origin).is_open:
            if d not in recorded:
                if run_start is None:
                    run_start = d
                prev_open = d
            else:
                if run_start is not None:
                    gaps.append((run_start, prev_open))
                    run_start = None
                prev_open = d
        d += timedelta(days=1)
    if run_start is not None:
        gaps.append((run_start, prev_open))
    return gaps


def split_train_test(dataset: Dataset, split_date: date) -> tuple[Dataset, Dataset]:
    """Partition into train (date < split_date) and test (date >= split_date)."""
    if split_date <= dataset.first_date or split_date > dataset.last_date:
        raise ValidationError(
            f"split date {split_date.isoformat()} outside data range "
            f"({dataset.first_date.isoformat()}, {dataset.last_date.isoformat()}]"
        )
    train = build_dataset(
        daily=[r for r in dataset.daily if r.date < split_date],
        slots=[r for r in dataset.slots if r.date < split_date],
        holidays=dataset.holidays,
        origin=dataset.origin,
        split_date=split_date,
    )
    test = build_dataset(
        daily=[r for r in dataset.daily if r.date >= split_date],
        slots=[r for r in dataset.slots if r.date >= split_date],
        holidays=dataset.holidays,
        origin=dataset.origin,
        split_date=split_date,
    )
    return train, test


def load_dataset(
    daily_path: str | Path,
    slot_path: str | Path | None = None,
    holidays: frozenset[date] = frozenset(),
    origin: date = DEFAULT_ORIGIN,
    split_date: date | None = None,
) -> Dataset:
    """Convenience loader combining the daily and (optional) slot CSVs."""
    fragment = parse_daily_csv(daily_path, holidays=holidays, origin=origin)
    slots = parse_slot_csv(slot_path) if slot_path is not None else ()
    ds = build_dataset(
        daily=fragment.daily,
        slots=slots,
        holidays=holidays,
        origin=origin,
        split_date=split_date,
    )
    return ds
