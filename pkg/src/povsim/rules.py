"""Tax and benefit rules applied to household microdata.

The module covers the gross-to-net wage wedge, the guaranteed minimum
assistance (GMA) means test in its pre-crisis and relaxed variants, the
energy supplement and child/education allowances that ride on GMA, two
one-off cash schemes (May and December 2020), and a temporary basic
income transfer. All awards are integer MKD per month; means tests are
evaluated in exact arithmetic.

Benefit sequencing matters: GMA is resolved before one-offs because the
May scheme keys off social-assistance receipt, and the basic income is
resolved last against income including every other component.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import ConfigError, DataError
from .money import MONTHS, ZERO_YEAR, as_fraction, round_half_away, round_mul_div
from .population import Household, LaborStatus, Person


class Regime(str, Enum):
    """GMA rulebook in force."""

    PRE_COVID = "pre_covid"
    RELAXED = "relaxed"


# GMA ineligibility reasons.
ELIGIBLE = "eligible"
OTHER_REAL_ESTATE = "owns_other_real_estate"
CAR_OWNED = "owns_car"
CAR_TOO_NEW = "car_newer_than_5_years"
LAND_OWNED = "owns_land"
LAND_TOO_LARGE = "land_500m2_or_larger"
INCOME_TOO_HIGH = "income_at_or_above_threshold"


def _frac_field(value) -> Fraction:
    return as_fraction(value)


@dataclass(frozen=True)
class GmaScale:
    """Equivalence coefficients used inside the GMA means test."""

    first_adult: Fraction = Fraction(1)
    additional_adult: Fraction = Fraction(1, 2)
    child: Fraction = Fraction(3, 10)

    def __post_init__(self) -> None:
        for name in ("first_adult", "additional_adult", "child"):
            object.__setattr__(self, name, _frac_field(getattr(self, name)))
            if getattr(self, name) < 0:
                raise ConfigError(f"GMA scale coefficient {name} must be nonnegative")

    def coefficient(self, members: Sequence[Person]) -> Fraction:
        adults = sum(1 for m in members if m.age >= 18)
        children = len(members) - adults
        if adults == 0:
            return self.first_adult + self.child * max(0, children - 1)
        return (self.first_adult + self.additional_adult * (adults - 1)
                + self.child * children)


@dataclass(frozen=True)
class OneOffMay:
    """May 2020 one-off cash support."""

    adult_sa_amount: int = 9000
    low_wage_amount: int = 3000
    low_wage_cap: int = 15000
    student_amount: int = 3000
    student_age_min: int = 16
    student_age_max: int = 29


@dataclass(frozen=True)
class OneOffDec:
    """December 2020 one-off cash support."""

    amount: int = 6000
    passive_jobseeker_cap: int = 15000
    pension_cap: int = 15000


@dataclass(frozen=True)
class TbiParams:
    """Temporary basic income: a fraction of median per-capita income paid
    monthly to households below a vulnerability threshold."""

    transfer_rule: Fraction = Fraction(1, 4)
    vulnerability_multiplier: Fraction = Fraction(5, 4)

    def __post_init__(self) -> None:
        object.__setattr__(self, "transfer_rule", _frac_field(self.transfer_rule))
        object.__setattr__(self, "vulnerability_multiplier",
                           _frac_field(self.vulnerability_multiplier))
        if self.transfer_rule < 0:
            raise ConfigError("TBI transfer rule must be nonnegative")
        if self.vulnerability_multiplier <= 0:
            raise ConfigError("TBI vulnerability multiplier must be positive")


@dataclass(frozen=True)
class PolicyParameters:
    """Every policy lever in one place; all values are configurable."""

    pit_rate: Fraction = Fraction(1, 10)
    ssc_rate: Fraction = Fraction(28, 100)
    gma_base_amount: int = 4000
    gma_scale: GmaScale = field(default_factory=GmaScale)
    gma_regime: Regime = Regime.PRE_COVID
    energy_supplement_amount: int = 1000
    energy_months_pre: int = 6
    energy_months_relaxed: int = 12
    child_allowance_amount: int = 700
    education_allowance_amount: int = 700
    universal_child_allowance: bool = False
    oneoff_may: OneOffMay = field(default_factory=OneOffMay)
    oneoff_dec: OneOffDec = field(default_factory=OneOffDec)
    tbi: TbiParams = field(default_factory=TbiParams)

    def __post_init__(self) -> None:
        object.__setattr__(self, "pit_rate", _frac_field(self.pit_rate))
        object.__setattr__(self, "ssc_rate", _frac_field(self.ssc_rate))
        for name in ("pit_rate", "ssc_rate"):
            rate = getattr(self, name)
            if not 0 <= rate < 1:
                raise ConfigError(f"{name} must lie in [0, 1)")
        for name in ("gma_base_amount", "energy_supplement_amount",
                     "child_allowance_amount", "education_allowance_amount"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")
        for name in ("energy_months_pre", "energy_months_relaxed"):
            if not 0 <= getattr(self, name) <= 12:
                raise ConfigError(f"{name} must lie in 0..12")

    def energy_months(self, regime: Regime) -> int:
        return (self.energy_months_relaxed if regime is Regime.RELAXED
                else self.energy_months_pre)

    def with_regime(self, regime: Regime) -> "PolicyParameters":
        return replace(self, gma_regime=regime)


def gross_to_net(gross: int, params: PolicyParameters, *,
                 informal: bool = False) -> int:
    """Net monthly earnings after social contributions and income tax.

    Contributions come off gross first, tax applies to the remainder;
    both round half away from zero. Informal earnings bypass the wedge.
    """
    if gross < 0:
        raise DataError(f"negative gross earnings {gross}")
    if informal or gross == 0:
        return gross
    sr = params.ssc_rate
    ssc = round_mul_div(gross, sr.numerator, sr.denominator)
    base = gross - ssc
    pr = params.pit_rate
    pit = round_mul_div(base, pr.numerator, pr.denominator)
    return gross - ssc - pit


def person_net_market(person: Person, params: PolicyParameters) -> tuple[int, ...]:
    """Twelve months of net market income (wage plus self-employment)."""
    wage = person.wage
    if not person.informal_wage_flag:
        wage = tuple(gross_to_net(v, params) for v in wage)
    se = tuple(gross_to_net(v, params) for v in person.self_employment)
    return tuple(w + s for w, s in zip(wage, se))


def _sum_vectors(vectors: Sequence[tuple[int, ...]]) -> tuple[int, ...]:
    if not vectors:
        return ZERO_YEAR
    return tuple(sum(col) for col in zip(*vectors))


@dataclass(frozen=True)
class HouseholdLedger:
    """Per-household income streams the benefit rules read from.

    core_countable is the means-testable stream without capital rent
    (net market income, pensions, inter-household transfers); the rent
    stream is kept separate because only the pre-crisis test counts it.
    base_* streams hold the pre-shock profile used for assessment months
    that fall before January.
    """

    household: Household
    members: tuple[Person, ...]
    net_market: tuple[int, ...]
    carried: tuple[int, ...]
    core_countable: tuple[int, ...]
    rent: tuple[int, ...]
    base_core_countable: tuple[int, ...]
    base_rent: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def n_children(self) -> int:
        return sum(1 for m in self.members if m.is_child)

    @property
    def n_enrolled_children(self) -> int:
        return sum(1 for m in self.members if m.is_child and m.in_public_education)


def build_ledger(household: Household, members: Sequence[Person],
                 params: PolicyParameters,
                 baseline_members: Sequence[Person] | None = None,
                 ) -> HouseholdLedger:
    """Assemble the income streams for one household.

    baseline_members supplies the pre-shock profile; it defaults to the
    current members (appropriate when no shock was applied).
    """
    members = tuple(members)
    net_market = _sum_vectors([person_net_market(m, params) for m in members])
    pensions = _sum_vectors([m.pension for m in members])
    transfers = _sum_vectors([m.interhousehold_transfers for m in members])
    rent = _sum_vectors([m.capital_rent for m in members])
    core = tuple(n + p + t for n, p, t in zip(net_market, pensions, transfers))
    carried = tuple(p + r + t for p, r, t in zip(pensions, rent, transfers))
    if baseline_members is None:
        base_core, base_rent = core, rent
    else:
        base_net = _sum_vectors([person_net_market(m, params)
                                 for m in baseline_members])
        base_pens = _sum_vectors([m.pension for m in baseline_members])
        base_tr = _sum_vectors([m.interhousehold_transfers
                                for m in baseline_members])
        base_rent = _sum_vectors([m.capital_rent for m in baseline_members])
        base_core = tuple(n + p + t for n, p, t in zip(base_net, base_pens, base_tr))
    return HouseholdLedger(
        household=household, members=members, net_market=net_market,
        carried=carried, core_countable=core, rent=rent,
        base_core_countable=base_core, base_rent=base_rent,
    )


def _countable_at(ledger: HouseholdLedger, month: int, include_rent: bool) -> int:
    """Countable income in one assessment month; months before January
    read the baseline profile (month 0 maps to baseline December)."""
    if month >= 1:
        value = ledger.core_countable[month - 1]
        if include_rent:
            value += ledger.rent[month - 1]
        return value
    value = ledger.base_core_countable[month + 11]
    if include_rent:
        value += ledger.base_rent[month + 11]
    return value


def gma_countable_income(ledger: HouseholdLedger, month: int,
                         params: PolicyParameters,
                         regime: Regime | None = None) -> Fraction:
    """Income the GMA means test sees for an award month.

    Pre-crisis: mean of the three preceding months, rent included.
    Relaxed: the single preceding month, rent excluded.
    """
    if not 1 <= month <= MONTHS:
        raise DataError(f"award month {month} outside 1..12")
    regime = regime if regime is not None else params.gma_regime
    if regime is Regime.RELAXED:
        return Fraction(_countable_at(ledger, month - 1, include_rent=False))
    total = sum(_countable_at(ledger, k, include_rent=True)
                for k in (month - 3, month - 2, month - 1))
    return Fraction(total, 3)


def gma_threshold(ledger: HouseholdLedger, params: PolicyParameters) -> Fraction:
    return params.gma_base_amount * params.gma_scale.coefficient(ledger.members)


def _asset_check(household: Household, regime: Regime) -> str:
    """First failing asset test, or ELIGIBLE. An owned residence never
    disqualifies; real estate beyond it always does. Pre-crisis any car or
    land parcel disqualifies, while the relaxed regime tolerates a car of
    five or more years and land under 500 m2."""
    if household.owns_other_real_estate:
        return OTHER_REAL_ESTATE
    if regime is Regime.PRE_COVID:
        if household.car_age_years is not None:
            return CAR_OWNED
        if household.land_parcel_m2 is not None:
            return LAND_OWNED
    else:
        if household.car_age_years is not None and household.car_age_years < 5:
            return CAR_TOO_NEW
        if household.land_parcel_m2 is not None and household.land_parcel_m2 >= 500:
            return LAND_TOO_LARGE
    return ELIGIBLE


def gma_eligible(ledger: HouseholdLedger, month: int, params: PolicyParameters,
                 regime: Regime | None = None) -> tuple[bool, str]:
    """(eligible, reason). Income must be strictly below the threshold."""
    regime = regime if regime is not None else params.gma_regime
    reason = _asset_check(ledger.household, regime)
    if reason is not ELIGIBLE:
        return False, reason
    countable = gma_countable_income(ledger, month, params, regime)
    if countable >= gma_threshold(ledger, params):
        return False, INCOME_TOO_HIGH
    return True, ELIGIBLE


def gma_award(ledger: HouseholdLedger, month: int, params: PolicyParameters,
              regime: Regime | None = None) -> int:
    """Monthly GMA top-up: threshold minus countable income, floored at 0."""
    regime = regime if regime is not None else params.gma_regime
    ok, _ = gma_eligible(ledger, month, params, regime)
    if not ok:
        return 0
    gap = gma_threshold(ledger, params) - gma_countable_income(
        ledger, month, params, regime)
    return max(0, round_half_away(gap))


def _sole_income_is_wage(person: Person) -> bool:
    return not (any(person.self_employment) or any(person.pension)
                or any(person.capital_rent) or any(person.interhousehold_transfers))


def oneoff_may2020(person: Person, on_social_assistance: bool,
                   params: PolicyParameters) -> int:
    """May 2020 award for one person; at most one award, highest first.

    Adults in households on social assistance and registered active
    jobseekers get the large amount. Employees whose income is wages alone
    with a May net wage at or under the cap, and public-education students
    in the eligible age band, get the small amount.
    """
    may = params.oneoff_may
    if person.age >= 18 and on_social_assistance:
        return may.adult_sa_amount
    if person.labor_status is LaborStatus.UNEMPLOYED_ACTIVE:
        return may.adult_sa_amount
    if (person.labor_status is LaborStatus.EMPLOYEE
            and _sole_income_is_wage(person)):
        net_may = gross_to_net(person.wage[4], params,
                               informal=person.informal_wage_flag)
        if net_may <= may.low_wage_cap:
            return may.low_wage_amount
    if (person.in_public_education
            and may.student_age_min <= person.age <= may.student_age_max):
        return may.student_amount
    return 0


def oneoff_dec2020(person: Person, params: PolicyParameters) -> int:
    """December 2020 award for one person (single amount, three gateways)."""
    dec = params.oneoff_dec
    if person.labor_status is LaborStatus.UNEMPLOYED_PASSIVE:
        if all(person.total_income(m) <= dec.passive_jobseeker_cap
               for m in range(1, 13)):
            return dec.amount
    if person.labor_status is LaborStatus.PENSIONER:
        if max(person.pension) < dec.pension_cap:
            return dec.amount
    if person.special_category_flag:
        return dec.amount
    return 0


@dataclass(frozen=True)
class TbiContext:
    """Population statistics the basic-income rule needs, fixed on the
    baseline (pre-shock) distribution."""

    median_pc_monthly: Fraction
    vulnerability_line_annual: Fraction


def tbi_award(pre_tbi_annual: int, household_size: int, ctx: TbiContext,
              params: PolicyParameters) -> int:
    """Monthly basic-income transfer for a household, or 0.

    Qualifies when per-capita annual income (before this transfer) falls
    below the vulnerability line; pays a fixed fraction of the baseline
    median per-capita monthly income.
    """
    if household_size <= 0:
        raise DataError("household size must be positive")
    per_capita = Fraction(pre_tbi_annual, household_size)
    if per_capita >= ctx.vulnerability_line_annual:
        return 0
    return round_half_away(params.tbi.transfer_rule * ctx.median_pc_monthly)


@dataclass(frozen=True)
class PipelineFlags:
    """Which optional components run for a scenario."""

    regime: Regime = Regime.PRE_COVID
    one_offs: bool = False
    tbi: bool = False


@dataclass(frozen=True)
class HouseholdFiscalResult:
    """Monthly decomposition of one household's disposable income."""

    household_id: int
    net_market: tuple[int, ...]
    carried: tuple[int, ...]
    gma: tuple[int, ...]
    energy: tuple[int, ...]
    allowances: tuple[int, ...]
    oneoff_may: tuple[int, ...]
    oneoff_dec: tuple[int, ...]
    tbi: tuple[int, ...]

    def monthly_disposable(self) -> tuple[int, ...]:
        return tuple(
            self.net_market[i] + self.carried[i] + self.gma[i] + self.energy[i]
            + self.allowances[i] + self.oneoff_may[i] + self.oneoff_dec[i]
            + self.tbi[i]
            for i in range(MONTHS))

    @property
    def annual_disposable(self) -> int:
        return sum(self.monthly_disposable())


def disposable_income(ledger: HouseholdLedger, params: PolicyParameters,
                      flags: PipelineFlags,
                      tbi_ctx: TbiContext | None = None) -> HouseholdFiscalResult:
    """Run the benefit cascade for one household.

    Order: GMA and its supplements, then one-offs (May depends on social
    assistance receipt), then the basic income against everything else.
    """
    regime = flags.regime
    threshold = gma_threshold(ledger, params)
    energy_months = params.energy_months(regime)
    include_rent = regime is not Regime.RELAXED
    asset_reason = _asset_check(ledger.household, regime)
    assets_ok = asset_reason is ELIGIBLE

    gma = [0] * MONTHS
    energy = [0] * MONTHS
    allowances = [0] * MONTHS
    eligible_months = [False] * MONTHS
    n_children = ledger.n_children
    n_enrolled = ledger.n_enrolled_children
    for m in range(1, MONTHS + 1):
        eligible = False
        if assets_ok:
            if regime is Regime.RELAXED:
                countable = Fraction(_countable_at(ledger, m - 1, include_rent))
            else:
                countable = Fraction(
                    sum(_countable_at(ledger, k, include_rent)
                        for k in (m - 3, m - 2, m - 1)), 3)
            if countable < threshold:
                eligible = True
                gma[m - 1] = max(0, round_half_away(threshold - countable))
                if m <= energy_months:
                    energy[m - 1] = params.energy_supplement_amount
        eligible_months[m - 1] = eligible
        child_part = (params.child_allowance_amount * n_children
                      if (eligible or params.universal_child_allowance) else 0)
        edu_part = (params.education_allowance_amount * n_enrolled
                    if eligible else 0)
        allowances[m - 1] = child_part + edu_part

    may = [0] * MONTHS
    dec = [0] * MONTHS
    if flags.one_offs:
        on_sa = any(eligible_months[m] or allowances[m] > 0 for m in range(5))
        may[4] = sum(oneoff_may2020(p, on_sa, params) for p in ledger.members)
        dec[11] = sum(oneoff_dec2020(p, params) for p in ledger.members)

    tbi = [0] * MONTHS
    if flags.tbi:
        if tbi_ctx is None:
            raise DataError("TBI enabled without baseline statistics")
        pre_tbi = sum(ledger.net_market) + sum(ledger.carried) + sum(gma) \
            + sum(energy) + sum(allowances) + sum(may) + sum(dec)
        monthly = tbi_award(pre_tbi, ledger.size, tbi_ctx, params)
        if monthly:
            tbi = [monthly] * MONTHS

    return HouseholdFiscalResult(
        household_id=ledger.household.household_id,
        net_market=ledger.net_market,
        carried=ledger.carried,
        gma=tuple(gma),
        energy=tuple(energy),
        allowances=tuple(allowances),
        oneoff_may=tuple(may),
        oneoff_dec=tuple(dec),
        tbi=tuple(tbi),
    )


def social_assistance_household(result: HouseholdFiscalResult) -> bool:
    """True when any month carries GMA or allowance money."""
    return any(result.gma) or any(result.allowances) or any(result.energy)


def params_from_dict(data: Mapping) -> PolicyParameters:
    """Parse the policy-parameter JSON section; unknown keys are rejected."""

    def take(mapping: Mapping, allowed: dict, where: str) -> dict:
        unknown = set(mapping) - set(allowed)
        if unknown:
            raise ConfigError(
                f"unknown key {sorted(unknown)[0]!r} in {where} "
                f"(allowed: {', '.join(sorted(allowed))})")
        out = {}
        for key, conv in allowed.items():
            if key in mapping:
                out[key] = conv(mapping[key])
        return out

    top = take(data, {
        "pit_rate": as_fraction, "ssc_rate": as_fraction,
        "gma_base_amount": int, "gma_scale": dict, "gma_regime": Regime,
        "energy_supplement_amount": int, "energy_months_pre": int,
        "energy_months_relaxed": int, "child_allowance_amount": int,
        "education_allowance_amount": int, "universal_child_allowance": bool,
        "oneoff_may": dict, "oneoff_dec": dict, "tbi": dict,
    }, "params")
    if "gma_scale" in top:
        top["gma_scale"] = GmaScale(**take(top["gma_scale"], {
            "first_adult": as_fraction, "additional_adult": as_fraction,
            "child": as_fraction}, "params.gma_scale"))
    if "oneoff_may" in top:
        top["oneoff_may"] = OneOffMay(**take(top["oneoff_may"], {
            "adult_sa_amount": int, "low_wage_amount": int, "low_wage_cap": int,
            "student_amount": int, "student_age_min": int, "student_age_max": int},
            "params.oneoff_may"))
    if "oneoff_dec" in top:
        top["oneoff_dec"] = OneOffDec(**take(top["oneoff_dec"], {
            "amount": int, "passive_jobseeker_cap": int, "pension_cap": int},
            "params.oneoff_dec"))
    if "tbi" in top:
        top["tbi"] = TbiParams(**take(top["tbi"], {
            "transfer_rule": as_fraction, "vulnerability_multiplier": as_fraction},
            "params.tbi"))
    try:
        return PolicyParameters(**top)
    except TypeError as exc:
        raise ConfigError(f"bad params section: {exc}") from None


def params_to_dict(params: PolicyParameters) -> dict:
    """JSON-ready echo of the effective parameters."""
    return {
        "pit_rate": str(params.pit_rate),
        "ssc_rate": str(params.ssc_rate),
        "gma_base_amount": params.gma_base_amount,
        "gma_scale": {
            "first_adult": str(params.gma_scale.first_adult),
            "additional_adult": str(params.gma_scale.additional_adult),
            "child": str(params.gma_scale.child),
        },
        "gma_regime": params.gma_regime.value,
        "energy_supplement_amount": params.energy_supplement_amount,
        "energy_months_pre": params.energy_months_pre,
        "energy_months_relaxed": params.energy_months_relaxed,
        "child_allowance_amount": params.child_allowance_amount,
        "education_allowance_amount": params.education_allowance_amount,
        "universal_child_allowance": params.universal_child_allowance,
        "oneoff_may": {
            "adult_sa_amount": params.oneoff_may.adult_sa_amount,
            "low_wage_amount": params.oneoff_may.low_wage_amount,
            "low_wage_cap": params.oneoff_may.low_wage_cap,
            "student_amount": params.oneoff_may.student_amount,
            "student_age_min": params.oneoff_may.student_age_min,
            "student_age_max": params.oneoff_may.student_age_max,
        },
        "oneoff_dec": {
            "amount": params.oneoff_dec.amount,
            "passive_jobseeker_cap": params.oneoff_dec.passive_jobseeker_cap,
            "pension_cap": params.oneoff_dec.pension_cap,
        },
        "tbi": {
            "transfer_rule": str(params.tbi.transfer_rule),
            "vulnerability_multiplier": str(params.tbi.vulnerability_multiplier),
        },
    }
