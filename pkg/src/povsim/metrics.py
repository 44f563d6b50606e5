"""Poverty measurement: equivalization, weighted medians, rates, headcounts.

Everything here is exact. Equivalized incomes are Fractions, weighted
reductions run on integer centiweights, and the lower weighted median is
the smallest value whose cumulative weight reaches half the total. Rates
are Fractions and only rendered to decimals at the reporting edge.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import ConfigError, DataError
from .money import as_fraction, fmt_fraction, round_half_away
from .population import EducationLevel, Household, Person, Population

#: Age below which a household member counts as a child on the modified
#: OECD scale (the scale's cut, distinct from the under-18 poverty cut).
OECD_CHILD_AGE = 14

INDICATORS: tuple[str, ...] = ("relative", "absolute_extreme", "absolute_upper")


@dataclass(frozen=True)
class EquivalenceScale:
    """Modified OECD scale; coefficients are exact decimals."""

    first_adult: Fraction = Fraction(1)
    additional_adult_14plus: Fraction = Fraction(1, 2)
    child_under_14: Fraction = Fraction(3, 10)

    def __post_init__(self) -> None:
        object.__setattr__(self, "first_adult", as_fraction(self.first_adult))
        object.__setattr__(self, "additional_adult_14plus",
                           as_fraction(self.additional_adult_14plus))
        object.__setattr__(self, "child_under_14", as_fraction(self.child_under_14))
        if self.first_adult != 1:
            raise ConfigError("equivalence scale first adult coefficient must be 1")

    def divisor(self, members: Sequence[Person]) -> Fraction:
        if not members:
            raise DataError("cannot equivalize an empty household")
        adults = sum(1 for m in members if m.age >= OECD_CHILD_AGE)
        children = len(members) - adults
        if adults == 0:
            # No 14+ member: the first child takes the head coefficient.
            return self.first_adult + self.child_under_14 * (children - 1)
        return (self.first_adult
                + self.additional_adult_14plus * (adults - 1)
                + self.child_under_14 * children)


def equivalized_income(annual_income: int, members: Sequence[Person],
                       scale: EquivalenceScale) -> Fraction:
    """Annual household income per equivalent adult (exact)."""
    return Fraction(annual_income) / scale.divisor(members)


def weighted_median(pairs: Iterable[tuple[Fraction | int, int]]) -> Fraction:
    """Lower weighted median of (value, weight) pairs with integer weights.

    Returns the smallest value v such that the cumulative weight of items
    <= v reaches half the total weight.
    """
    items = sorted(pairs, key=lambda vw: vw[0])
    if not items:
        raise DataError("weighted median of empty sequence")
    total = 0
    for value, weight in items:
        if weight <= 0:
            raise DataError("weighted median requires positive weights")
        total += weight
    cum = 0
    for value, weight in items:
        cum += weight
        if 2 * cum >= total:
            return as_fraction(value)
    raise AssertionError("unreachable: cumulative weight never reached half total")


@dataclass(frozen=True)
class PersonRow:
    """One person with the household context needed by filters and groups."""

    person: Person
    household: Household
    equivalized: Fraction
    weight_centi: int
    per_capita_annual: Fraction
    n_children: int          # household members under 18
    adult_education: str | None  # bucketed mean education of adult members

    @property
    def age(self) -> int:
        return self.person.age

    @property
    def is_child(self) -> bool:
        return self.person.is_child


_EDU_CODE = {
    EducationLevel.PRIMARY_OR_LESS: 0,
    EducationLevel.SECONDARY: 1,
    EducationLevel.TERTIARY_PLUS: 2,
}
_EDU_FROM_CODE = {v: k.value for k, v in _EDU_CODE.items()}


def adult_education_group(members: Sequence[Person]) -> str | None:
    """Mean education level of members aged 18+, rounded to the nearest level.

    None when the household has no adult members.
    """
    codes = [_EDU_CODE[m.education_level] for m in members if m.age >= 18]
    if not codes:
        return None
    mean = Fraction(sum(codes), len(codes))
    return _EDU_FROM_CODE[min(2, round_half_away(mean))]


def build_person_rows(pop: Population, annual_income: Mapping[int, int],
                      scale: EquivalenceScale) -> list[PersonRow]:
    """Expand household annual incomes into per-person analysis rows."""
    rows: list[PersonRow] = []
    for hh in pop.households:
        members = pop.members(hh.household_id)
        income = annual_income[hh.household_id]
        eq = equivalized_income(income, members, scale)
        pc = Fraction(income, len(members))
        n_children = sum(1 for m in members if m.is_child)
        edu = adult_education_group(members)
        for person in members:
            rows.append(PersonRow(
                person=person, household=hh, equivalized=eq,
                weight_centi=hh.weight_centi, per_capita_annual=pc,
                n_children=n_children, adult_education=edu,
            ))
    return rows


def relative_poverty_line(rows: Sequence[PersonRow]) -> Fraction:
    """60 percent of the person-weighted median equivalized income."""
    median = weighted_median((r.equivalized, r.weight_centi) for r in rows)
    return Fraction(3, 5) * median


@dataclass(frozen=True)
class PovertyLines:
    relative: Fraction
    absolute_extreme: Fraction
    absolute_upper: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "relative", as_fraction(self.relative))
        object.__setattr__(self, "absolute_extreme", as_fraction(self.absolute_extreme))
        object.__setattr__(self, "absolute_upper", as_fraction(self.absolute_upper))
        if not self.absolute_extreme < self.absolute_upper:
            raise ConfigError("absolute extreme line must sit below the upper line")

    def line(self, indicator: str) -> Fraction:
        if indicator == "relative":
            return self.relative
        if indicator == "absolute_extreme":
            return self.absolute_extreme
        if indicator == "absolute_upper":
            return self.absolute_upper
        raise ConfigError(f"unknown indicator {indicator!r}")


@dataclass(frozen=True)
class RateResult:
    """Weighted poverty rate over a filtered person set.

    rate is None when the filter selects nobody (undefined, not zero).
    Headcounts are weighted persons in centiweight units.
    """

    rate: Fraction | None
    poor_centi: int
    total_centi: int

    @property
    def headcount(self) -> Fraction:
        return Fraction(self.poor_centi, 100)

    @property
    def population(self) -> Fraction:
        return Fraction(self.total_centi, 100)

    def rate_str(self, places: int = 6) -> str:
        return "" if self.rate is None else fmt_fraction(self.rate, places)


def poverty_rate(rows: Iterable[PersonRow], line: Fraction,
                 selector: Callable[[PersonRow], bool] | None = None) -> RateResult:
    """Weighted share of selected persons strictly below the line."""
    poor = 0
    total = 0
    for row in rows:
        if selector is not None and not selector(row):
            continue
        total += row.weight_centi
        if row.equivalized < line:
            poor += row.weight_centi
    rate = None if total == 0 else Fraction(poor, total)
    return RateResult(rate=rate, poor_centi=poor, total_centi=total)


def headcount_from_pp(delta_pp: float | Fraction, population: int) -> int:
    """Convert a percentage-point rate change into persons of a reference
    population, rounding half away from zero."""
    return round_half_away(as_fraction(delta_pp) * population / 100)


def is_child_row(row: PersonRow) -> bool:
    return row.is_child


@dataclass(frozen=True)
class IndicatorStats:
    children: RateResult
    all_persons: RateResult


@dataclass(frozen=True)
class PovertyReport:
    """Headline poverty statistics for one simulated scenario."""

    lines: PovertyLines
    indicators: Mapping[str, IndicatorStats]
    n_persons: int
    n_households: int

    def child_rate(self, indicator: str = "relative") -> Fraction | None:
        return self.indicators[indicator].children.rate

    def child_headcount(self, indicator: str = "relative") -> Fraction:
        return self.indicators[indicator].children.headcount

    def to_dict(self) -> dict:
        return {
            "lines": {
                "relative": fmt_fraction(self.lines.relative, 2),
                "absolute_extreme": fmt_fraction(self.lines.absolute_extreme, 2),
                "absolute_upper": fmt_fraction(self.lines.absolute_upper, 2),
            },
            "indicators": {
                name: {
                    "child_rate": stats.children.rate_str(),
                    "all_rate": stats.all_persons.rate_str(),
                    "child_headcount": fmt_fraction(stats.children.headcount, 2),
                    "child_population": fmt_fraction(stats.children.population, 2),
                }
                for name, stats in self.indicators.items()
            },
            "n_persons": self.n_persons,
            "n_households": self.n_households,
        }


def compute_report(rows: Sequence[PersonRow], lines: PovertyLines,
                   n_households: int) -> PovertyReport:
    indicators = {}
    for name in INDICATORS:
        line = lines.line(name)
        indicators[name] = IndicatorStats(
            children=poverty_rate(rows, line, is_child_row),
            all_persons=poverty_rate(rows, line),
        )
    return PovertyReport(lines=lines, indicators=indicators,
                         n_persons=len(rows), n_households=n_households)
