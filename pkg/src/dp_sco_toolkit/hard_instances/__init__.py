"""Hard-instance generators, exact excess-loss evaluators and mirror descent counterexamples."""

from dp_sco_toolkit.hard_instances.counterexamples import (
    ShuffledRun,
    counterexample_size,
    md_counterexample_check,
    md_linear_stability_check,
    run_shuffled_smd,
    stability_bound,
)
from dp_sco_toolkit.hard_instances.sign_instance import (
    SignInstance,
    brute_force_l1_minimum,
    gen_sign_instance,
    l1_median_excess,
    l1_minimizer,
    l1_minimum,
    sign,
    sign_error,
)

__all__ = [
    "ShuffledRun",
    "SignInstance",
    "brute_force_l1_minimum",
    "counterexample_size",
    "gen_sign_instance",
    "l1_median_excess",
    "l1_minimizer",
    "l1_minimum",
    "md_counterexample_check",
    "md_linear_stability_check",
    "run_shuffled_smd",
    "sign",
    "sign_error",
    "stability_bound",
]
