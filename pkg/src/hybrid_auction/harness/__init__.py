"""Instance generation, experiments, truthfulness audits."""
from .audit import Violation, audit_truthfulness, shaded_bid_auction
from .experiment import ExperimentConfig, run_experiment, write_report
from .generators import FAMILIES, InstanceGenerator, generate_instance

__all__ = [
    "FAMILIES",
    "ExperimentConfig",
    "InstanceGenerator",
    "Violation",
    "audit_truthfulness",
    "generate_instance",
    "run_experiment",
    "shaded_bid_auction",
    "write_report",
]
