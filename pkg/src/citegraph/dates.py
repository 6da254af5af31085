"""Partial publication dates and signed calendar durations.

Publication dates in real dumps come at year, month or day precision; a
citation timespan is the calendar interval from the cited publication
date to the citing publication date, measured at the coarser of the two
precisions so no precision is ever fabricated.

The interval convention steps whole calendar units greedily: as many
years as fit, then months (clamping the day-of-month where a target
month is shorter), then exact days.  The sign is positive when the
citing date is the later one.
"""

from __future__ import annotations

import calendar
import datetime
import re
from dataclasses import dataclass

from .errors import MalformedDate, MalformedDuration

YEAR = "year"
MONTH = "month"
DAY = "day"

_PRECISION_RANK = {YEAR: 0, MONTH: 1, DAY: 2}

_DATE_RE = re.compile(r"^(-?\d{1,4})(?:-(\d{2}))?(?:-(\d{2}))?$")
_DURATION_RE = re.compile(r"^(-)?P(\d+)Y(?:(\d+)M(?:(\d+)D)?)?$")


@dataclass(frozen=True)
class PartialDate:
    """Calendar date known down to year, month or day."""

    year: int
    month: int | None = None
    day: int | None = None

    def __post_init__(self):
        if self.day is not None and self.month is None:
            raise MalformedDate("day given without month")
        if self.month is not None and not 1 <= self.month <= 12:
            raise MalformedDate(f"month {self.month} out of range")
        if self.day is not None:
            last = calendar.monthrange(self.year, self.month)[1]
            if not 1 <= self.day <= last:
                raise MalformedDate(f"day {self.day} invalid for {self.year}-{self.month:02d}")

    @property
    def precision(self) -> str:
        if self.day is not None:
            return DAY
        if self.month is not None:
            return MONTH
        return YEAR

    def truncate(self, precision: str) -> PartialDate:
        """Drop components finer than ``precision``."""
        if precision == YEAR:
            return PartialDate(self.year)
        if precision == MONTH:
            return PartialDate(self.year, self.month)
        return self

    @classmethod
    def parse(cls, text: str) -> PartialDate:
        m = _DATE_RE.match(text.strip())
        if not m:
            raise MalformedDate(f"{text!r} is not YYYY[-MM[-DD]]")
        year, month, day = m.groups()
        return cls(int(year), int(month) if month else None, int(day) if day else None)

    @classmethod
    def from_parts(cls, parts: list) -> PartialDate:
        """Build from a Crossref ``date-parts`` inner array."""
        cleaned = [int(p) for p in parts if p is not None]
        if not cleaned:
            raise MalformedDate("empty date-parts")
        return cls(*cleaned[:3])

    def isoformat(self) -> str:
        if self.day is not None:
            return f"{self.year:04d}-{self.month:02d}-{self.day:02d}"
        if self.month is not None:
            return f"{self.year:04d}-{self.month:02d}"
        return f"{self.year:04d}"

    def sort_key(self) -> tuple[int, int, int]:
        """Orderable key; missing components count as earliest."""
        return (self.year, self.month or 0, self.day or 0)

    def __str__(self) -> str:
        return self.isoformat()


@dataclass(frozen=True)
class SignedDuration:
    """Calendar interval with a sign and its own precision."""

    negative: bool = False
    years: int = 0
    months: int = 0
    days: int = 0
    precision: str = YEAR

    def __post_init__(self):
        if self.years < 0 or self.days < 0 or not 0 <= self.months <= 11:
            raise MalformedDuration("component out of range")
        if self.precision not in _PRECISION_RANK:
            raise MalformedDuration(f"unknown precision {self.precision!r}")
        if self.negative and self.is_zero:
            raise MalformedDuration("zero duration must be non-negative")

    @property
    def is_zero(self) -> bool:
        return self.years == 0 and self.months == 0 and self.days == 0

    def negated(self) -> SignedDuration:
        if self.is_zero:
            return self
        return SignedDuration(not self.negative, self.years, self.months,
                              self.days, self.precision)

    def __str__(self) -> str:
        return format_duration(self)


def min_precision(a: str, b: str) -> str:
    return a if _PRECISION_RANK[a] <= _PRECISION_RANK[b] else b


def _days_in_month(year: int, month: int) -> int:
    return calendar.monthrange(year, month)[1]


def _add_months(year: int, month: int, day: int, n: int) -> tuple[int, int, int]:
    # day-of-month clamps when the target month is shorter
    total = (year * 12 + (month - 1)) + n
    y, m = divmod(total, 12)
    m += 1
    return y, m, min(day, _days_in_month(y, m))


def _ordinal(year: int, month: int, day: int) -> int:
    return datetime.date(year, month, day).toordinal()


def compute_timespan(citing_date: PartialDate, cited_date: PartialDate) -> SignedDuration:
    """Calendar interval from the cited date to the citing date.

    Both dates are first truncated to the coarser precision; the result
    carries that precision.  Negative means the citing date strictly
    precedes the cited one.
    """
    precision = min_precision(citing_date.precision, cited_date.precision)
    citing = citing_date.truncate(precision)
    cited = cited_date.truncate(precision)
    negative = citing.sort_key() < cited.sort_key()
    start, end = (citing, cited) if negative else (cited, citing)

    if precision == YEAR:
        return SignedDuration(negative, end.year - start.year, 0, 0, YEAR)

    if precision == MONTH:
        months = (end.year - start.year) * 12 + (end.month - start.month)
        years, months = divmod(months, 12)
        return SignedDuration(negative, years, months, 0, MONTH)

    total_months = 0
    end_ord = _ordinal(end.year, end.month, end.day)
    # greedy: whole years, then whole months, then exact days
    while True:
        ny, nm, nd = _add_months(start.year, start.month, start.day, total_months + 12)
        if _ordinal(ny, nm, nd) > end_ord:
            break
        total_months += 12
    while True:
        ny, nm, nd = _add_months(start.year, start.month, start.day, total_months + 1)
        if _ordinal(ny, nm, nd) > end_ord:
            break
        total_months += 1
    y, m, d = _add_months(start.year, start.month, start.day, total_months)
    days = end_ord - _ordinal(y, m, d)
    years, months = divmod(total_months, 12)
    return SignedDuration(negative, years, months, days, DAY)


def format_duration(d: SignedDuration) -> str:
    """Render as ISO-8601 style text; components follow the precision."""
    out = "-" if d.negative else ""
    out += f"P{d.years}Y"
    if _PRECISION_RANK[d.precision] >= _PRECISION_RANK[MONTH]:
        out += f"{d.months}M"
    if d.precision == DAY:
        out += f"{d.days}D"
    return out


def parse_duration(text: str) -> SignedDuration:
    """Exact inverse of :func:`format_duration`."""
    m = _DURATION_RE.match(text.strip())
    if not m:
        raise MalformedDuration(f"{text!r} is not a signed Y/M/D duration")
    sign, years, months, days = m.groups()
    precision = DAY if days is not None else MONTH if months is not None else YEAR
    try:
        return SignedDuration(
            negative=sign is not None,
            years=int(years),
            months=int(months) if months is not None else 0,
            days=int(days) if days is not None else 0,
            precision=precision,
        )
    except MalformedDuration as exc:
        raise MalformedDuration(f"{text!r}: {exc}") from None
