"""Kaplan-Meier estimation over integer event times.

Times are years-until-first-translational-event, so everything is small
integers and the product-limit estimator can be evaluated in exact rational
arithmetic.  Converting each value to float at the end keeps the estimate
correctly rounded, which makes the censoring-free case agree bit-for-bit with
the empirical CDF complement.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence


@dataclass(frozen=True, slots=True)
class SurvivalPoint:
    time: int
    at_risk: int
    events: int
    censored: int
    survival: Fraction


@dataclass(frozen=True, slots=True)
class SurvivalCurve:
    """Step function S(t): probability of remaining event-free past time t."""

    points: tuple[SurvivalPoint, ...]
    n_subjects: int

    def survival_at(self, time: int) -> Fraction:
        value = Fraction(1)
        for point in self.points:
            if point.time > time:
                break
            value = point.survival
        return value

    def survival_values(self) -> list[float]:
        return [float(p.survival) for p in self.points]


def kaplan_meier(rows: Iterable[tuple[int, bool]]) -> SurvivalCurve:
    """Product-limit estimate from (time, is_event) rows.

    ``is_event`` False marks right censoring: the subject leaves the risk set
    after ``time`` without contributing an event.  Subjects censored at an
    event time are still at risk for that event.
    """
    events_at: dict[int, int] = {}
    censored_at: dict[int, int] = {}
    n_subjects = 0
    for time, is_event in rows:
        if time < 0:
            raise ValueError(f"negative time {time}")
        n_subjects += 1
        bucket = events_at if is_event else censored_at
        bucket[time] = bucket.get(time, 0) + 1
    if n_subjects == 0:
        raise ValueError("survival curve needs at least one subject")

    at_risk = n_subjects
    survival = Fraction(1)
    points: list[SurvivalPoint] = []
    for t in sorted(set(events_at) | set(censored_at)):
        d = events_at.get(t, 0)
        c = censored_at.get(t, 0)
        if d > 0:
            survival *= Fraction(at_risk - d, at_risk)
            points.append(SurvivalPoint(t, at_risk, d, c, survival))
        at_risk -= d + c
    return SurvivalCurve(points=tuple(points), n_subjects=n_subjects)


def km_from_times(
    event_times: Sequence[int],
    censored_times: Sequence[int] = (),
) -> SurvivalCurve:
    """Convenience wrapper over explicit event / censoring time lists."""
    rows = [(t, True) for t in event_times] + [(t, False) for t in censored_times]
    return kaplan_meier(rows)


def median_crossing(curve: SurvivalCurve) -> int | None:
    """Smallest event time with S(t) <= 1/2, or None if never reached."""
    for point in curve.points:
        if point.survival <= Fraction(1, 2):
            return point.time
    return None


def ecdf_complement(event_times: Sequence[int]) -> list[tuple[int, Fraction]]:
    """(t, 1 - ECDF(t)) at each distinct event time, for the no-censoring check."""
    if not event_times:
        raise ValueError("need at least one event time")
    n = len(event_times)
    out: list[tuple[int, Fraction]] = []
    seen = 0
    for t in sorted(set(event_times)):
        seen += sum(1 for x in event_times if x == t)
        out.append((t, Fraction(n - seen, n)))
    return out
