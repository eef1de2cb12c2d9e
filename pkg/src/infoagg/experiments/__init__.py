from .asymptotic import (
    Corollary1Config,
    Corollary1Result,
    JamisonReport,
    WeightRule,
    die_menu_config,
    jamison_check,
    run_corollary1,
)
from .example1 import Example1Config, Example1Report, run_example1, shared_weight_curve
from .example2 import Example2Report, run_example2
from .example3 import Example3Config, Example3Report, run_example3
from .random_instances import Instance, random_instance, random_weights
from .suites import SuiteResult, efficiency_certification, strict_mean_suite, weighted_mean_suite

__all__ = [
    "Corollary1Config",
    "Corollary1Result",
    "Example1Config",
    "Example1Report",
    "Example2Report",
    "Example3Config",
    "Example3Report",
    "Instance",
    "JamisonReport",
    "WeightRule",
    "die_menu_config",
    "jamison_check",
    "random_instance",
    "random_weights",
    "run_corollary1",
    "run_example1",
    "run_example2",
    "run_example3",
    "shared_weight_curve",
    "SuiteResult",
    "efficiency_certification",
    "strict_mean_suite",
    "weighted_mean_suite",
]
