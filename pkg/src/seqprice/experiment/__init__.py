from seqprice.experiment.config import ArmSpec, ExperimentConfig, parse_config
from seqprice.experiment.report import SummaryRow, SummaryTable, compare
from seqprice.experiment.runner import run_experiment

__all__ = [
    "ArmSpec",
    "ExperimentConfig",
    "SummaryRow",
    "SummaryTable",
    "compare",
    "parse_config",
    "run_experiment",
]
