"""Operating calendar: half-hour slot grid, per-day metadata, holiday handling.

The call window is 07:30-18:30 on weekdays (22 half-hour slots) and
07:30-12:30 on Saturdays (the first 10 slots). Sundays and holidays are
closed. All times are local and naive.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, datetime, time, timedelta
from pathlib import Path

from .errors import ParseError, ValidationError

WEEKDAY_SLOT_COUNT = 22
SATURDAY_SLOT_COUNT = 10
MORNING_SLOT_COUNT = 10  # slots starting before the 12:30 boundary
SLOT_MINUTES = 30
DAY_OPEN_MINUTE = 7 * 60 + 30

# Matches the origin used for the trend feature in the daily dataset.
DEFAULT_ORIGIN = date(2015, 4, 1)

DAY_NAMES = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")


def slot_start(index: int) -> time:
    """Start time of slot `index` (0-based from 07:30)."""
    minute = DAY_OPEN_MINUTE + SLOT_MINUTES * index
    return time(minute // 60, minute % 60)


def slot_end(index: int) -> time:
    minute = DAY_OPEN_MINUTE + SLOT_MINUTES * (index + 1)
    return time(minute // 60, minute % 60)


def slot_index(t: time) -> int:
    """Slot index of a half-hour-aligned start time; raises if off-grid."""
    minute = t.hour * 60 + t.minute
    offset = minute - DAY_OPEN_MINUTE
    if t.second or t.microsecond or offset % SLOT_MINUTES:
        raise ValidationError(f"slot start {t.isoformat('minutes')} is not half-hour aligned to the grid")
    index = offset // SLOT_MINUTES
    if not 0 <= index < WEEKDAY_SLOT_COUNT:
        raise ValidationError(f"slot start {t.isoformat('minutes')} outside 07:30-18:00")
    return index


@dataclass(frozen=True)
class DayMeta:
    """Calendar facts about one date, derived purely from (date, holidays, origin)."""

    date: date
    day_of_week: int  # 0 = Monday .. 6 = Sunday
    month: int
    days_since_origin: int
    is_weekday: bool
    is_day_after_holiday: bool
    is_open: bool

    @property
    def open_slot_count(self) -> int:
        if not self.is_open:
            return 0
        return SATURDAY_SLOT_COUNT if self.day_of_week == 5 else WEEKDAY_SLOT_COUNT


def day_meta(d: date, holidays: frozenset[date] = frozenset(), origin: date = DEFAULT_ORIGIN) -> DayMeta:
    dow = d.weekday()
    is_weekday = dow <= 4
    # Public holidays are treated as closed days; the center never opens Sundays.
    is_open = dow <= 5 and d not in holidays
    return DayMeta(
        date=d,
        day_of_week=dow,
        month=d.month,
        days_since_origin=(d - origin).days,
        is_weekday=is_weekday,
        is_day_after_holiday=(d - timedelta(days=1)) in holidays,
        is_open=is_open,
    )


def open_dates(first: date, last: date, holidays: frozenset[date] = frozenset()) -> list[date]:
    """All open dates in [first, last], in order."""
    out = []
    d = first
    while d <= last:
        if day_meta(d, holidays).is_open:
            out.append(d)
        d += timedelta(days=1)
    return out


def read_holidays(path: str | Path) -> frozenset[date]:
    """Read a holiday file: one ISO date per line, blank lines ignored."""
    dates = set()
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        text = raw.strip()
        if not text:
            continue
        try:
            dates.add(date.fromisoformat(text))
        except ValueError as exc:
            raise ParseError(f"bad holiday date {text!r}: {exc}", line=lineno) from None
    return frozenset(dates)


def slot_timestamp(d: date, index: int, end: bool = False) -> datetime:
    return datetime.combine(d, slot_end(index) if end else slot_start(index))


@dataclass(frozen=True)
class ScenarioSchedule:
    """Tuesdays affected by the postponed-morning scenario.

    Affected days are every `every`-th Tuesday counted from `anchor`
    (which must itself be a Tuesday).
    """

    anchor: date
    every: int = 3

    def __post_init__(self):
        if self.anchor.weekday() != 1:
            raise ValidationError(f"scenario anchor {self.anchor} is not a Tuesday")
        if self.every < 1:
            raise ValidationError("scenario period must be >= 1 week")

    def is_affected(self, d: date) -> bool:
        if d.weekday() != 1 or d < self.anchor:
            return False
        weeks = (d - self.anchor).days // 7
        return weeks % self.every == 0

    @classmethod
    def from_first_tuesday(cls, dates, every: int = 3) -> "ScenarioSchedule":
        for d in sorted(dates):
            if d.weekday() == 1:
                return cls(anchor=d, every=every)
        raise ValidationError("no Tuesday found in the supplied dates")
