"""Privacy budgets, noise calibration, mechanisms and composition."""

from dp_sco_toolkit.privacy.budget import NoiseSpec, PrivacyBudget
from dp_sco_toolkit.privacy.calibration import (
    DEFAULT_SIGMA_CONSTANT,
    lambda_approx_fw,
    lambda_pure_fw,
    sigma_noisy_md,
)
from dp_sco_toolkit.privacy.composition import (
    PrivacyLedger,
    compose_advanced,
    compose_basic,
    shuffle_amplified_epsilon,
    subsample_amplified,
)
from dp_sco_toolkit.privacy.mechanisms import NoiseSource, report_noisy_max

__all__ = [
    "DEFAULT_SIGMA_CONSTANT",
    "NoiseSource",
    "NoiseSpec",
    "PrivacyBudget",
    "PrivacyLedger",
    "compose_advanced",
    "compose_basic",
    "lambda_approx_fw",
    "lambda_pure_fw",
    "report_noisy_max",
    "shuffle_amplified_epsilon",
    "sigma_noisy_md",
    "subsample_amplified",
]
