"""Sequential posted-price mechanisms: environments, exact solvers, learning."""

from seqprice.errors import (
    DegenerateSettingError,
    InputError,
    ProtocolError,
    SizeBudgetError,
    UnsupportedSettingError,
)
from seqprice.valuation import (
    AdditiveAcrossTypes,
    BundleTable,
    UnitDemand,
    ValuationProfile,
    best_response,
    bundle_value,
)
from seqprice.mechanism import (
    Action,
    MechanismState,
    Objective,
    apply_round,
    initial_state,
    objective_value,
)
from seqprice.settings import SettingSpec, enumerate_support, get_setting, normalize, sample_profile, setting_catalog
from seqprice.statistics import STATISTIC_KINDS, constrain, make_statistic, statistic_length
from seqprice.episode import (
    Policy,
    RSDPolicy,
    TrajectoryRecord,
    format_trajectory,
    run_batch,
    run_episode,
)

__all__ = [
    "Action",
    "AdditiveAcrossTypes",
    "BundleTable",
    "DegenerateSettingError",
    "InputError",
    "MechanismState",
    "Objective",
    "Policy",
    "ProtocolError",
    "RSDPolicy",
    "STATISTIC_KINDS",
    "SettingSpec",
    "TrajectoryRecord",
    "SizeBudgetError",
    "UnitDemand",
    "UnsupportedSettingError",
    "ValuationProfile",
    "apply_round",
    "best_response",
    "bundle_value",
    "constrain",
    "enumerate_support",
    "format_trajectory",
    "get_setting",
    "initial_state",
    "make_statistic",
    "normalize",
    "objective_value",
    "run_batch",
    "run_episode",
    "sample_profile",
    "setting_catalog",
    "statistic_length",
]
