"""povsim: static tax-benefit microsimulation of income shocks and child poverty.

The engine loads (or fabricates) a survey-style population, calibrates
sector-by-demographic income-change factors from labour-survey cell
aggregates, applies parametrized benefit rules month by month, and
measures relative and absolute child poverty before and after, with
factor decompositions, shock-scale uncertainty bands and group
breakdowns. All accounting is exact (integers and rationals), so every
result is reproducible bit for bit.
"""

from .cells import (CellChange, CellChangeTable, CellStat, LfsAggregate,
                    SelfEmpCellKey, WageCellKey, aggregate_income_change,
                    all_selfemp_keys, all_wage_keys, apply_shock,
                    compute_cell_changes, load_cell_table, load_lfs_aggregate,
                    save_cell_table, save_lfs_aggregate)
from .config import (CalibrationSettings, ObservedChange, ScenarioSettings,
                     StudyConfig, load_study_config, study_config_from_dict)
from .errors import (CalibrationError, ConfigError, DataError, PipelineError,
                     PovsimError)
from .metrics import (EquivalenceScale, PersonRow, PovertyLines, PovertyReport,
                      RateResult, build_person_rows, compute_report,
                      equivalized_income, headcount_from_pp, poverty_rate,
                      relative_poverty_line, weighted_median)
from .population import (Household, LaborStatus, Person, Population, Sex,
                         load_population, save_population)
from .rules import (GmaScale, OneOffDec, OneOffMay, PipelineFlags,
                    PolicyParameters, Regime, TbiContext, TbiParams,
                    build_ledger, disposable_income, gma_eligible, gma_threshold,
                    gross_to_net, params_from_dict, params_to_dict, tbi_award)
from .scenario import (BandResult, BaselineStats, DecompositionResult,
                       DisaggregationResult, PovertyConfig, ScenarioResult,
                       ScenarioSpec, ValidationResult, decompose, disaggregate,
                       prepare_baseline, run_scenario,
                       simulated_aggregate_changes, uncertainty_band,
                       validate_against_observed)
from .synth import (IncomeDist, SynthConfig, calibrate_to_baseline,
                    generate_synthetic, synth_config_from_dict)

__version__ = "0.1.0"

__all__ = [
    "BandResult", "BaselineStats", "CalibrationError", "CalibrationSettings",
    "CellChange", "CellChangeTable", "CellStat", "ConfigError", "DataError",
    "DecompositionResult", "DisaggregationResult", "EquivalenceScale",
    "GmaScale", "Household", "IncomeDist", "LaborStatus", "LfsAggregate",
    "ObservedChange", "OneOffDec", "OneOffMay", "Person", "PersonRow",
    "PipelineError", "PipelineFlags", "PolicyParameters", "Population",
    "PovertyConfig", "PovertyLines", "PovertyReport", "PovsimError",
    "RateResult", "Regime", "ScenarioResult", "ScenarioSettings",
    "ScenarioSpec", "SelfEmpCellKey", "Sex", "StudyConfig", "SynthConfig",
    "TbiContext", "TbiParams", "ValidationResult", "WageCellKey",
    "aggregate_income_change", "all_selfemp_keys", "all_wage_keys",
    "apply_shock", "build_ledger", "build_person_rows",
    "calibrate_to_baseline", "compute_cell_changes", "compute_report",
    "decompose", "disaggregate", "disposable_income", "equivalized_income",
    "generate_synthetic", "gma_eligible", "gma_threshold", "gross_to_net",
    "headcount_from_pp", "load_cell_table", "load_lfs_aggregate",
    "load_population", "load_study_config", "params_from_dict",
    "params_to_dict", "poverty_rate", "prepare_baseline",
    "relative_poverty_line", "run_scenario", "save_cell_table",
    "save_lfs_aggregate", "save_population", "simulated_aggregate_changes",
    "study_config_from_dict", "synth_config_from_dict", "tbi_award",
    "uncertainty_band", "validate_against_observed", "weighted_median",
]
