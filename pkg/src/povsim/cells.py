"""Labour-survey cell machinery: income-change factors and their application.

Wage changes are estimated on cells of two-digit activity x sex x age band
(89 x 2 x 3 = 534 cells); self-employment changes on the 21 one-digit
sections. A factor is the ratio of annualized post-shock cell income to
base-year cell income. Cells whose base employment is below the
small-cell threshold keep factor 1.0, as do cells with no base income.

Factors are exact Fractions end to end; applying them rounds each month
half away from zero back to integer MKD.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import DataError
from .money import as_fraction, round_mul_div
from .nace import DIVISIONS, SECTIONS, is_division, section_of
from .population import LaborStatus, Person, Population, Sex

AGE_BANDS: tuple[str, ...] = ("youth_15_24", "adult_25_49", "elderly_50_64")

SEXES: tuple[str, ...] = (Sex.MALE.value, Sex.FEMALE.value)

#: Default minimum base-year employment for a cell estimate to be used.
SMALL_CELL_THRESHOLD = 1000

# Factor provenance values.
ESTIMATED = "estimated"
SUPPRESSED_SMALL_CELL = "suppressed_small_cell"
MISSING_DEFAULT = "missing_default"


def age_band_of(age: int) -> str | None:
    """Survey age band for workers; None outside 15..64."""
    if 15 <= age <= 24:
        return "youth_15_24"
    if 25 <= age <= 49:
        return "adult_25_49"
    if 50 <= age <= 64:
        return "elderly_50_64"
    return None


@dataclass(frozen=True, slots=True, order=True)
class WageCellKey:
    nace2: str
    sex: str
    age_band: str

    def __post_init__(self) -> None:
        if not is_division(self.nace2):
            raise DataError(f"unknown activity division {self.nace2!r}")
        if self.sex not in SEXES:
            raise DataError(f"unknown sex {self.sex!r}")
        if self.age_band not in AGE_BANDS:
            raise DataError(f"unknown age band {self.age_band!r}")


@dataclass(frozen=True, slots=True, order=True)
class SelfEmpCellKey:
    section: str

    def __post_init__(self) -> None:
        if self.section not in SECTIONS:
            raise DataError(f"unknown activity section {self.section!r}")


def all_wage_keys() -> tuple[WageCellKey, ...]:
    return tuple(WageCellKey(d, s, b)
                 for d in DIVISIONS for s in SEXES for b in AGE_BANDS)


def all_selfemp_keys() -> tuple[SelfEmpCellKey, ...]:
    return tuple(SelfEmpCellKey(s) for s in SECTIONS)


@dataclass(frozen=True, slots=True)
class CellStat:
    """Observed aggregate for one cell in one period."""

    income: int  # total income, MKD
    count: int   # employment count

    def __post_init__(self) -> None:
        if self.income < 0:
            raise DataError(f"negative cell income {self.income}")
        if self.count < 0:
            raise DataError(f"negative cell count {self.count}")


@dataclass(frozen=True)
class LfsAggregate:
    """Cell totals for one period, with its annualization factor.

    quarters_covered drives scaling: totals over three quarters are scaled
    by 4/3 to a full-year basis, four quarters by 1.
    """

    period: str
    quarters_covered: tuple[int, ...]
    wage_cells: Mapping[WageCellKey, CellStat]
    selfemp_cells: Mapping[SelfEmpCellKey, CellStat]

    def __post_init__(self) -> None:
        quarters = tuple(sorted(set(self.quarters_covered)))
        if not quarters or any(q not in (1, 2, 3, 4) for q in quarters):
            raise DataError(f"invalid quarter coverage {self.quarters_covered!r}")
        object.__setattr__(self, "quarters_covered", quarters)

    @property
    def scaling(self) -> Fraction:
        return Fraction(4, len(self.quarters_covered))


_LFS_COLUMNS = ("cell_type", "nace", "sex", "age_band", "income", "count")


def load_lfs_aggregate(path: str, *, period: str,
                       quarters_covered: Iterable[int]) -> LfsAggregate:
    """Read cell totals from CSV: one row per cell.

    Wage rows carry nace (two-digit), sex and age_band; self-employment
    rows carry the one-digit section with sex/age_band empty.
    """
    wage: dict[WageCellKey, CellStat] = {}
    selfemp: dict[SelfEmpCellKey, CellStat] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in _LFS_COLUMNS:
            if col not in header:
                raise DataError(f"missing column {col!r}", file=path, row=1, column=col)
        for i, rec in enumerate(reader, start=2):
            try:
                income = int(rec["income"])
                count = int(rec["count"])
            except ValueError:
                raise DataError("income and count must be integers", file=path,
                                row=i) from None
            if income < 0 or count < 0:
                raise DataError("negative income or count", file=path, row=i)
            kind = rec["cell_type"]
            try:
                if kind == "wage":
                    key = WageCellKey(rec["nace"], rec["sex"], rec["age_band"])
                    if key in wage:
                        raise DataError(f"duplicate wage cell {key}", file=path, row=i)
                    wage[key] = CellStat(income, count)
                elif kind == "selfemp":
                    skey = SelfEmpCellKey(rec["nace"])
                    if skey in selfemp:
                        raise DataError(f"duplicate self-employment cell {skey}",
                                        file=path, row=i)
                    selfemp[skey] = CellStat(income, count)
                else:
                    raise DataError(f"unknown cell_type {kind!r}", file=path, row=i,
                                    column="cell_type")
            except DataError as exc:
                if exc.file is None:
                    raise DataError(str(exc), file=path, row=i) from None
                raise
    return LfsAggregate(period=period, quarters_covered=tuple(quarters_covered),
                        wage_cells=wage, selfemp_cells=selfemp)


def save_lfs_aggregate(agg: LfsAggregate, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_LFS_COLUMNS)
        for key in sorted(agg.wage_cells):
            stat = agg.wage_cells[key]
            writer.writerow(["wage", key.nace2, key.sex, key.age_band,
                             stat.income, stat.count])
        for skey in sorted(agg.selfemp_cells):
            stat = agg.selfemp_cells[skey]
            writer.writerow(["selfemp", skey.section, "", "", stat.income, stat.count])


@dataclass(frozen=True, slots=True)
class CellChange:
    factor: Fraction
    provenance: str

    def __post_init__(self) -> None:
        if self.factor <= 0:
            raise DataError(f"cell factor must be positive, got {self.factor}")
        if self.provenance not in (ESTIMATED, SUPPRESSED_SMALL_CELL, MISSING_DEFAULT):
            raise DataError(f"unknown provenance {self.provenance!r}")
        if self.provenance == SUPPRESSED_SMALL_CELL and self.factor != 1:
            raise DataError("suppressed cells must carry factor 1.0")


_NO_CHANGE_SUPPRESSED = CellChange(Fraction(1), SUPPRESSED_SMALL_CELL)
_NO_CHANGE_MISSING = CellChange(Fraction(1), MISSING_DEFAULT)


@dataclass(frozen=True)
class CellChangeTable:
    """Complete income-change factor table over all 534 + 21 cells."""

    wage: Mapping[WageCellKey, CellChange]
    selfemp: Mapping[SelfEmpCellKey, CellChange]
    small_cell_threshold: int = SMALL_CELL_THRESHOLD

    def __post_init__(self) -> None:
        expected_wage = set(all_wage_keys())
        if set(self.wage) != expected_wage:
            raise DataError(
                f"wage table covers {len(self.wage)} cells, expected "
                f"{len(expected_wage)}")
        expected_se = set(all_selfemp_keys())
        if set(self.selfemp) != expected_se:
            raise DataError(
                f"self-employment table covers {len(self.selfemp)} cells, expected "
                f"{len(expected_se)}")

    @classmethod
    def identity(cls) -> "CellChangeTable":
        return cls(
            wage={k: _NO_CHANGE_MISSING for k in all_wage_keys()},
            selfemp={k: _NO_CHANGE_MISSING for k in all_selfemp_keys()},
        )

    @classmethod
    def from_factors(cls, wage_factors: Mapping[str, float | Fraction] | None = None,
                     selfemp_factors: Mapping[str, float | Fraction] | None = None,
                     ) -> "CellChangeTable":
        """Build a table from per-division / per-section factors.

        Convenience for tests and synthetic fixtures: a division factor is
        applied to all six sex x age cells of that division; unspecified
        cells stay at 1.0.
        """
        wage_factors = dict(wage_factors or {})
        selfemp_factors = dict(selfemp_factors or {})
        wage = {}
        for key in all_wage_keys():
            if key.nace2 in wage_factors:
                wage[key] = CellChange(as_fraction(wage_factors[key.nace2]), ESTIMATED)
            else:
                wage[key] = _NO_CHANGE_MISSING
        selfemp = {}
        for skey in all_selfemp_keys():
            if skey.section in selfemp_factors:
                selfemp[skey] = CellChange(
                    as_fraction(selfemp_factors[skey.section]), ESTIMATED)
            else:
                selfemp[skey] = _NO_CHANGE_MISSING
        return cls(wage=wage, selfemp=selfemp)

    def neutralize(self, *, wage: bool = False, selfemp: bool = False,
                   ) -> "CellChangeTable":
        """Copy with the selected side forced to factor 1.0 (no change)."""
        new_wage = ({k: _NO_CHANGE_MISSING for k in self.wage} if wage else self.wage)
        new_se = ({k: _NO_CHANGE_MISSING for k in self.selfemp} if selfemp
                  else self.selfemp)
        return replace(self, wage=new_wage, selfemp=new_se)

    def wage_factor(self, key: WageCellKey) -> Fraction:
        return self.wage[key].factor

    def selfemp_factor(self, key: SelfEmpCellKey) -> Fraction:
        return self.selfemp[key].factor


def compute_cell_changes(base: LfsAggregate, shocked: LfsAggregate, *,
                         small_cell_threshold: int = SMALL_CELL_THRESHOLD,
                         ) -> CellChangeTable:
    """Derive the factor table from a base-year and a shocked-period aggregate.

    Both aggregates must cover the same cell universe. For each cell:
    base count below the threshold suppresses the estimate (factor 1.0);
    zero base or shocked income falls back to 1.0 with provenance
    missing_default; otherwise the factor is the exact income ratio after
    annualizing both sides.
    """
    if set(base.wage_cells) != set(shocked.wage_cells):
        raise DataError("wage cell universes differ between base and shocked periods")
    if set(base.selfemp_cells) != set(shocked.selfemp_cells):
        raise DataError(
            "self-employment cell universes differ between base and shocked periods")

    def change(b: CellStat | None, s: CellStat | None) -> CellChange:
        if b is None or s is None:
            return _NO_CHANGE_MISSING
        if b.count < small_cell_threshold:
            return _NO_CHANGE_SUPPRESSED
        if b.income == 0 or s.income == 0:
            # A zero total against a sizeable base is treated as missing
            # data, not a 100 percent change.
            return _NO_CHANGE_MISSING
        factor = (Fraction(s.income) * shocked.scaling) / (
            Fraction(b.income) * base.scaling)
        return CellChange(factor, ESTIMATED)

    wage = {key: change(base.wage_cells.get(key), shocked.wage_cells.get(key))
            for key in all_wage_keys()}
    selfemp = {key: change(base.selfemp_cells.get(key), shocked.selfemp_cells.get(key))
               for key in all_selfemp_keys()}
    return CellChangeTable(wage=wage, selfemp=selfemp,
                           small_cell_threshold=small_cell_threshold)


_TABLE_COLUMNS = ("cell_type", "nace", "sex", "age_band", "factor", "provenance")


def save_cell_table(table: CellChangeTable, path: str) -> None:
    """Write the factor table as CSV for inspection and reuse.

    Factors are written as exact fractions so a reloaded table reproduces
    the in-memory one bit for bit.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_TABLE_COLUMNS)
        for key in sorted(table.wage):
            cc = table.wage[key]
            writer.writerow(["wage", key.nace2, key.sex, key.age_band,
                             str(cc.factor), cc.provenance])
        for skey in sorted(table.selfemp):
            cc = table.selfemp[skey]
            writer.writerow(["selfemp", skey.section, "", "",
                             str(cc.factor), cc.provenance])


def load_cell_table(path: str) -> CellChangeTable:
    wage: dict[WageCellKey, CellChange] = {}
    selfemp: dict[SelfEmpCellKey, CellChange] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in _TABLE_COLUMNS:
            if col not in header:
                raise DataError(f"missing column {col!r}", file=path, row=1, column=col)
        for i, rec in enumerate(reader, start=2):
            try:
                factor = Fraction(rec["factor"])
            except (ValueError, ZeroDivisionError):
                raise DataError(f"bad factor {rec['factor']!r}", file=path, row=i,
                                column="factor") from None
            try:
                cc = CellChange(factor, rec["provenance"])
                if rec["cell_type"] == "wage":
                    wage[WageCellKey(rec["nace"], rec["sex"], rec["age_band"])] = cc
                elif rec["cell_type"] == "selfemp":
                    selfemp[SelfEmpCellKey(rec["nace"])] = cc
                else:
                    raise DataError(f"unknown cell_type {rec['cell_type']!r}",
                                    file=path, row=i, column="cell_type")
            except DataError as exc:
                if exc.file is None:
                    raise DataError(str(exc), file=path, row=i) from None
                raise
    return CellChangeTable(wage=wage, selfemp=selfemp)


def _effective(factor: Fraction, scale: Fraction) -> tuple[int, int]:
    """Numerator/denominator of 1 + scale * (factor - 1), floored at zero."""
    eff = 1 + scale * (factor - 1)
    if eff < 0:
        eff = Fraction(0)
    return eff.numerator, eff.denominator


def apply_shock(pop: Population, table: CellChangeTable, *,
                shock_start_month: int = 3,
                scale: float | Fraction = 1) -> Population:
    """Rescale wage and self-employment income from the shock month onward.

    effective factor = 1 + scale * (factor - 1); months before the shock
    month are untouched, any other income source is untouched, and persons
    outside the cell universe (for example workers aged 65 and over) are
    returned unchanged. The input population is not modified.
    """
    if not 1 <= shock_start_month <= 12:
        raise DataError(f"shock start month {shock_start_month} outside 1..12")
    scale_f = as_fraction(scale)
    if scale_f < 0:
        raise DataError("shock scale must be nonnegative")

    wage_eff = {key: _effective(cc.factor, scale_f) for key, cc in table.wage.items()}
    se_eff = {key: _effective(cc.factor, scale_f) for key, cc in table.selfemp.items()}
    start = shock_start_month - 1  # zero-based index

    def shock_vector(vec: tuple[int, ...], num: int, den: int) -> tuple[int, ...]:
        if num == den:
            return vec
        return vec[:start] + tuple(
            round_mul_div(v, num, den) for v in vec[start:])

    def transform(p: Person) -> Person:
        if p.labor_status is LaborStatus.EMPLOYEE:
            if p.nace2 is None:
                raise DataError(f"employee {p.person_id} has no industry code")
            band = age_band_of(p.age)
            if band is None:
                return p
            num, den = wage_eff[WageCellKey(p.nace2, p.sex.value, band)]
            new_wage = shock_vector(p.wage, num, den)
            if new_wage is p.wage:
                return p
            return replace(p, wage=new_wage)
        if p.labor_status is LaborStatus.SELF_EMPLOYED:
            if p.nace2 is None:
                raise DataError(f"self-employed {p.person_id} has no industry code")
            if p.age >= 65:
                return p
            section = section_of(p.nace2)
            if section is None:
                return p
            num, den = se_eff[SelfEmpCellKey(section)]
            new_se = shock_vector(p.self_employment, num, den)
            if new_se is p.self_employment:
                return p
            return replace(p, self_employment=new_se)
        return p

    return pop.map_persons(transform)


def aggregate_income_change(before: Population, after: Population,
                            source: str) -> Fraction:
    """Weighted relative change in total annual income from one source.

    Weighted by household survey weights; exact. Raises when the two
    populations do not describe the same persons or the base total is zero.
    """
    if source not in ("wage", "self_employment"):
        raise DataError(f"unsupported source {source!r}")
    if [p.person_id for p in before.persons] != [p.person_id for p in after.persons]:
        raise DataError("populations cover different persons")
    total_before = 0
    total_after = 0
    for pb, pa in zip(before.persons, after.persons):
        w = before.household(pb.household_id).weight_centi
        total_before += w * sum(pb.income(source))
        total_after += w * sum(pa.income(source))
    if total_before == 0:
        raise DataError(f"zero base-period total for source {source!r}")
    return Fraction(total_after - total_before, total_before)
