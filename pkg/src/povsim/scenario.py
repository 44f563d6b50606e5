"""Scenario pipeline: shocks, rules, metrics, decomposition, band, groups.

A scenario is a switch set over {wage shock, self-employment shock, GMA
relaxation, one-offs, basic income} plus a shock scale. The pipeline
order is fixed: income shocks, gross-to-net, GMA and allowances, one-off
schemes, basic income, then poverty metrics. Baseline statistics (the
pre-shock income profile and the medians the basic income anchors to) are
always computed from the unshocked population.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from . import cells as cells_mod
from .errors import ConfigError, PipelineError
from .cells import CellChangeTable, apply_shock
from .metrics import (EquivalenceScale, PersonRow, PovertyLines, PovertyReport,
                      RateResult, build_person_rows, compute_report,
                      headcount_from_pp, poverty_rate, relative_poverty_line,
                      weighted_median)
from .money import as_fraction
from .population import Population
from .rules import (HouseholdFiscalResult, PipelineFlags, PolicyParameters, Regime,
                    TbiContext, build_ledger, disposable_income)

FACTOR_NAMES: tuple[str, ...] = ("wage_shock", "selfemp_shock", "gma_relaxation",
                                 "one_offs")

COLUMN_ORDER: tuple[str, ...] = ("baseline",) + FACTOR_NAMES + ("combined",)

DIMENSIONS: tuple[str, ...] = ("sex", "child_age_band", "three_plus_children",
                               "adult_education")


@dataclass(frozen=True)
class ScenarioSpec:
    """Switch set and scale for one scenario run."""

    wage_shock: bool = False
    selfemp_shock: bool = False
    gma_relaxation: bool = False
    one_offs: bool = False
    tbi: bool = False
    shock_scale: Fraction = Fraction(1)
    shock_start_month: int = 3

    def __post_init__(self) -> None:
        object.__setattr__(self, "shock_scale", as_fraction(self.shock_scale))
        if not 1 <= self.shock_start_month <= 12:
            raise ConfigError(
                f"shock_start_month {self.shock_start_month} outside 1..12")

    @property
    def any_shock(self) -> bool:
        return self.wage_shock or self.selfemp_shock

    def flags(self) -> PipelineFlags:
        return PipelineFlags(
            regime=Regime.RELAXED if self.gma_relaxation else Regime.PRE_COVID,
            one_offs=self.one_offs,
            tbi=self.tbi,
        )


@dataclass(frozen=True)
class PovertyConfig:
    """Measurement settings shared by every scenario of a study."""

    equivalence_scale: EquivalenceScale = field(default_factory=EquivalenceScale)
    absolute_extreme: int = 42000
    absolute_upper: int = 150000
    child_population: int = 407865

    def __post_init__(self) -> None:
        if not 0 < self.absolute_extreme < self.absolute_upper:
            raise ConfigError("absolute poverty lines must satisfy 0 < extreme < upper")
        if self.child_population <= 0:
            raise ConfigError("child_population must be positive")


@dataclass(frozen=True)
class BaselineStats:
    """Anchors derived from the unshocked, no-new-transfers run."""

    relative_line: Fraction
    median_pc_monthly: Fraction
    child_rate: Fraction | None

    def tbi_context(self, params: PolicyParameters) -> TbiContext:
        return TbiContext(
            median_pc_monthly=self.median_pc_monthly,
            vulnerability_line_annual=(params.tbi.vulnerability_multiplier
                                       * self.relative_line),
        )


@dataclass(frozen=True)
class ScenarioResult:
    """Everything one scenario run produced."""

    spec: ScenarioSpec
    report: PovertyReport
    rows: tuple[PersonRow, ...]
    fiscal: Mapping[int, HouseholdFiscalResult]
    population: Population  # post-shock population the run was scored on


def _run_fiscal(pop: Population, base_pop: Population, params: PolicyParameters,
                flags: PipelineFlags, tbi_ctx: TbiContext | None,
                jobs: int = 1) -> dict[int, HouseholdFiscalResult]:
    shocked = pop is not base_pop

    def one(hh) -> HouseholdFiscalResult:
        ledger = build_ledger(
            hh, pop.members(hh.household_id), params,
            baseline_members=(base_pop.members(hh.household_id) if shocked else None))
        return disposable_income(ledger, params, flags, tbi_ctx)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, pop.households))
    else:
        results = [one(hh) for hh in pop.households]
    return {r.household_id: r for r in results}


def _score(pop: Population, fiscal: Mapping[int, HouseholdFiscalResult],
           pov: PovertyConfig) -> tuple[tuple[PersonRow, ...], PovertyReport]:
    annual = {hid: res.annual_disposable for hid, res in fiscal.items()}
    rows = tuple(build_person_rows(pop, annual, pov.equivalence_scale))
    lines = PovertyLines(
        relative=relative_poverty_line(rows),
        absolute_extreme=Fraction(pov.absolute_extreme),
        absolute_upper=Fraction(pov.absolute_upper),
    )
    return rows, compute_report(rows, lines, pop.n_households)


def prepare_baseline(pop: Population, params: PolicyParameters,
                     pov: PovertyConfig, jobs: int = 1) -> tuple[BaselineStats,
                                                                 ScenarioResult]:
    """Run the all-off scenario and extract the anchors other runs need."""
    spec = ScenarioSpec()
    fiscal = _run_fiscal(pop, pop, params, spec.flags(), None, jobs)
    rows, report = _score(pop, fiscal, pov)
    median_pc_monthly = weighted_median(
        ((r.per_capita_annual / 12, r.weight_centi) for r in rows))
    stats = BaselineStats(
        relative_line=report.lines.relative,
        median_pc_monthly=median_pc_monthly,
        child_rate=report.child_rate("relative"),
    )
    result = ScenarioResult(spec=spec, report=report, rows=rows, fiscal=fiscal,
                            population=pop)
    return stats, result


def run_scenario(pop: Population, table: CellChangeTable | None, spec: ScenarioSpec,
                 params: PolicyParameters, pov: PovertyConfig,
                 baseline: BaselineStats | None = None,
                 jobs: int = 1) -> ScenarioResult:
    """Execute the fixed pipeline for one switch set.

    baseline stats are computed on the fly when not supplied; pass them in
    when running several scenarios over the same population.
    """
    try:
        if spec.any_shock:
            if table is None:
                raise ConfigError("scenario enables shocks but no cell table given")
            effective = table.neutralize(wage=not spec.wage_shock,
                                         selfemp=not spec.selfemp_shock)
            shocked = apply_shock(pop, effective,
                                  shock_start_month=spec.shock_start_month,
                                  scale=spec.shock_scale)
        else:
            shocked = pop
    except Exception as exc:
        if isinstance(exc, (PipelineError, ConfigError)):
            raise
        raise PipelineError("shock_application", str(exc)) from exc

    try:
        tbi_ctx = None
        if spec.tbi:
            if baseline is None:
                baseline, _ = prepare_baseline(pop, params, pov, jobs)
            tbi_ctx = baseline.tbi_context(params)
        fiscal = _run_fiscal(shocked, pop, params, spec.flags(), tbi_ctx, jobs)
    except Exception as exc:
        if isinstance(exc, (PipelineError, ConfigError)):
            raise
        raise PipelineError("fiscal_rules", str(exc)) from exc

    try:
        rows, report = _score(shocked, fiscal, pov)
    except Exception as exc:
        raise PipelineError("poverty_metrics", str(exc)) from exc

    return ScenarioResult(spec=spec, report=report, rows=rows, fiscal=fiscal,
                          population=shocked)


def _column_spec(name: str, base: ScenarioSpec,
                 transfers_on_shocked: bool) -> ScenarioSpec:
    kwargs = dict(shock_scale=base.shock_scale,
                  shock_start_month=base.shock_start_month)
    if name == "baseline":
        return ScenarioSpec(**kwargs)
    if name == "wage_shock":
        return ScenarioSpec(wage_shock=True, **kwargs)
    if name == "selfemp_shock":
        return ScenarioSpec(selfemp_shock=True, **kwargs)
    if name == "gma_relaxation":
        return ScenarioSpec(gma_relaxation=True,
                            wage_shock=transfers_on_shocked,
                            selfemp_shock=transfers_on_shocked, **kwargs)
    if name == "one_offs":
        return ScenarioSpec(one_offs=True,
                            wage_shock=transfers_on_shocked,
                            selfemp_shock=transfers_on_shocked, **kwargs)
    if name == "combined":
        return ScenarioSpec(wage_shock=True, selfemp_shock=True,
                            gma_relaxation=True, one_offs=True, **kwargs)
    raise ConfigError(f"unknown decomposition column {name!r}")


@dataclass(frozen=True)
class DecompositionResult:
    """Factor-by-factor scenario columns in fixed order."""

    columns: tuple[tuple[str, ScenarioResult], ...]

    def report(self, name: str) -> PovertyReport:
        for col_name, result in self.columns:
            if col_name == name:
                return result.report
        raise KeyError(name)

    def column_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.columns)


def decompose(pop: Population, table: CellChangeTable | None,
              params: PolicyParameters, pov: PovertyConfig,
              base_spec: ScenarioSpec | None = None,
              factors: Sequence[str] | None = None,
              transfers_on_shocked: bool = False,
              jobs: int = 1) -> DecompositionResult:
    """Six-column decomposition: baseline, each factor alone, all together.

    The transfer columns run on unshocked incomes by default; setting
    transfers_on_shocked evaluates them on top of both income shocks
    instead. A factor subset drops the unselected single-factor columns,
    and the combined column is only produced when all factors are in.
    """
    base_spec = base_spec or ScenarioSpec()
    selected = tuple(factors) if factors is not None else FACTOR_NAMES
    unknown = set(selected) - set(FACTOR_NAMES)
    if unknown:
        raise ConfigError(f"unknown factor {sorted(unknown)[0]!r} "
                          f"(allowed: {', '.join(FACTOR_NAMES)})")
    names = ["baseline"]
    names += [f for f in FACTOR_NAMES if f in selected]
    if set(selected) == set(FACTOR_NAMES):
        names.append("combined")

    baseline_stats, baseline_result = prepare_baseline(pop, params, pov, jobs)
    columns: list[tuple[str, ScenarioResult]] = []
    for name in names:
        if name == "baseline":
            columns.append((name, baseline_result))
            continue
        spec = _column_spec(name, base_spec, transfers_on_shocked)
        columns.append((name, run_scenario(pop, table, spec, params, pov,
                                           baseline=baseline_stats, jobs=jobs)))
    return DecompositionResult(columns=tuple(columns))


@dataclass(frozen=True)
class BandPoint:
    scale: Fraction
    result: ScenarioResult
    delta_pp: Fraction          # relative child rate shift vs baseline
    headcount_shift: int        # converted onto the reference child population


@dataclass(frozen=True)
class BandResult:
    baseline: ScenarioResult
    points: tuple[BandPoint, ...]


def uncertainty_band(pop: Population, table: CellChangeTable,
                     params: PolicyParameters, pov: PovertyConfig,
                     scales: Sequence[float | Fraction] = (0.8, 1.0, 1.2),
                     base_spec: ScenarioSpec | None = None,
                     jobs: int = 1) -> BandResult:
    """Combined scenario at several shock scales, sorted ascending."""
    base_spec = base_spec or ScenarioSpec()
    baseline_stats, baseline_result = prepare_baseline(pop, params, pov, jobs)
    base_rate = baseline_result.report.child_rate("relative")
    if base_rate is None:
        raise PipelineError("reporting", "baseline child rate undefined")
    points = []
    for scale in sorted(as_fraction(s) for s in scales):
        spec = ScenarioSpec(wage_shock=True, selfemp_shock=True,
                            gma_relaxation=True, one_offs=True,
                            shock_scale=scale,
                            shock_start_month=base_spec.shock_start_month)
        result = run_scenario(pop, table, spec, params, pov,
                              baseline=baseline_stats, jobs=jobs)
        rate = result.report.child_rate("relative")
        if rate is None:
            raise PipelineError("reporting", "band child rate undefined")
        delta_pp = (rate - base_rate) * 100
        points.append(BandPoint(
            scale=scale, result=result, delta_pp=delta_pp,
            headcount_shift=headcount_from_pp(delta_pp, pov.child_population)))
    return BandResult(baseline=baseline_result, points=tuple(points))


@dataclass(frozen=True)
class ValidationRow:
    source: str
    simulated_pct: Fraction
    observed_pct: Fraction
    gap_pp: Fraction
    tolerance_pp: Fraction

    @property
    def passed(self) -> bool:
        return self.gap_pp <= self.tolerance_pp


@dataclass(frozen=True)
class ValidationResult:
    rows: tuple[ValidationRow, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def validate_against_observed(simulated: Mapping[str, float | Fraction],
                              observed: Mapping[str, float | Fraction],
                              tolerance_pp: Mapping[str, float | Fraction],
                              ) -> ValidationResult:
    """Compare simulated aggregate income changes (percent) to observed ones.

    All three mappings must cover the same sources. Gaps and comparisons
    are exact.
    """
    if set(simulated) != set(observed) or set(simulated) != set(tolerance_pp):
        raise ConfigError("simulated, observed and tolerance sources differ")
    rows = []
    for source in sorted(simulated):
        sim = as_fraction(simulated[source])
        obs = as_fraction(observed[source])
        rows.append(ValidationRow(
            source=source, simulated_pct=sim, observed_pct=obs,
            gap_pp=abs(sim - obs), tolerance_pp=as_fraction(tolerance_pp[source])))
    return ValidationResult(rows=tuple(rows))


def _age_band_group(age: int) -> str:
    if age <= 5:
        return "age_0_5"
    if age <= 14:
        return "age_6_14"
    return "age_15_17"


_GROUPERS: dict[str, tuple[tuple[str, ...], Callable[[PersonRow], str]]] = {
    "sex": (("male", "female"), lambda r: r.person.sex.value),
    "child_age_band": (("age_0_5", "age_6_14", "age_15_17"),
                       lambda r: _age_band_group(r.age)),
    "three_plus_children": (("three_plus", "fewer_than_three"),
                            lambda r: "three_plus" if r.n_children >= 3
                            else "fewer_than_three"),
    "adult_education": (("primary_or_less", "secondary", "tertiary_plus",
                         "undefined"),
                        lambda r: r.adult_education or "undefined"),
}


@dataclass(frozen=True)
class GroupCell:
    pre: RateResult
    post: RateResult


@dataclass(frozen=True)
class GroupBreakdown:
    """Child poverty by group for one dimension, pre and post scenario."""

    dimension: str
    groups: tuple[str, ...]
    cells: Mapping[tuple[str, str], GroupCell]  # (group, indicator) -> rates

    def cell(self, group: str, indicator: str) -> GroupCell:
        return self.cells[(group, indicator)]


@dataclass(frozen=True)
class DisaggregationResult:
    baseline: ScenarioResult
    scenario: ScenarioResult
    breakdowns: tuple[GroupBreakdown, ...]


def disaggregate(pop: Population, table: CellChangeTable | None,
                 spec: ScenarioSpec, params: PolicyParameters, pov: PovertyConfig,
                 dimensions: Sequence[str] = DIMENSIONS,
                 jobs: int = 1) -> DisaggregationResult:
    """Child poverty rates by group, baseline versus scenario.

    Every dimension partitions the child population, so group headcounts
    add up to the headline child headcount exactly.
    """
    for dim in dimensions:
        if dim not in _GROUPERS:
            raise ConfigError(f"unknown dimension {dim!r} "
                              f"(allowed: {', '.join(_GROUPERS)})")
    baseline_stats, baseline_result = prepare_baseline(pop, params, pov, jobs)
    scenario_result = run_scenario(pop, table, spec, params, pov,
                                   baseline=baseline_stats, jobs=jobs)
    breakdowns = []
    for dim in dimensions:
        group_names, grouper = _GROUPERS[dim]
        cells: dict[tuple[str, str], GroupCell] = {}
        for group in group_names:
            for indicator in ("relative", "absolute_extreme", "absolute_upper"):
                def selector(row: PersonRow, g=group) -> bool:
                    return row.is_child and grouper(row) == g
                pre = poverty_rate(baseline_result.rows,
                                   baseline_result.report.lines.line(indicator),
                                   selector)
                post = poverty_rate(scenario_result.rows,
                                    scenario_result.report.lines.line(indicator),
                                    selector)
                cells[(group, indicator)] = GroupCell(pre=pre, post=post)
        breakdowns.append(GroupBreakdown(dimension=dim, groups=group_names,
                                         cells=cells))
    return DisaggregationResult(baseline=baseline_result, scenario=scenario_result,
                                breakdowns=tuple(breakdowns))


def simulated_aggregate_changes(pop: Population, table: CellChangeTable,
                                spec: ScenarioSpec | None = None,
                                ) -> dict[str, Fraction]:
    """Full-scale aggregate income changes in percent, for validation."""
    spec = spec or ScenarioSpec(wage_shock=True, selfemp_shock=True)
    shocked = apply_shock(pop, table, shock_start_month=spec.shock_start_month,
                          scale=spec.shock_scale)
    return {
        "wage": cells_mod.aggregate_income_change(pop, shocked, "wage") * 100,
        "self_employment": cells_mod.aggregate_income_change(
            pop, shocked, "self_employment") * 100,
    }
