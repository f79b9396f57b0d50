"""Private optimization algorithms: noisy mirror descent, localization, tree Frank-Wolfe."""

from dp_sco_toolkit.algorithms.frank_wolfe import (
    FwConfig,
    FwReport,
    FwSchedule,
    TreeAddress,
    approx_fw_schedule,
    default_T_approx,
    default_T_pure,
    dfs_order,
    fw_step_size,
    leaf_index,
    phase_fresh_samples,
    phase_gradient_count,
    private_vr_fw,
    pure_fw_schedule,
    score_sensitivity,
    variance_probe,
)
from dp_sco_toolkit.algorithms.localization import (
    LocalizationMode,
    LocalizationReport,
    build_schedule,
    default_eta_l1,
    default_eta_lp,
    localized_md,
)
from dp_sco_toolkit.algorithms.mirror_descent import (
    ConstantStep,
    MdConfig,
    MdResult,
    StronglyConvexStep,
    calibrated_noise,
    default_step_convex,
    default_step_sc,
    noisy_md,
)
from dp_sco_toolkit.algorithms.reductions import (
    InnerAlgorithm,
    ScheduledRun,
    StageOutcome,
    sc_wrapper,
    stage_schedule,
)

__all__ = [
    "ConstantStep",
    "FwConfig",
    "FwReport",
    "FwSchedule",
    "InnerAlgorithm",
    "LocalizationMode",
    "LocalizationReport",
    "MdConfig",
    "MdResult",
    "ScheduledRun",
    "StageOutcome",
    "StronglyConvexStep",
    "TreeAddress",
    "approx_fw_schedule",
    "build_schedule",
    "calibrated_noise",
    "default_T_approx",
    "default_T_pure",
    "default_eta_l1",
    "default_eta_lp",
    "default_step_convex",
    "default_step_sc",
    "dfs_order",
    "fw_step_size",
    "leaf_index",
    "localized_md",
    "noisy_md",
    "phase_fresh_samples",
    "phase_gradient_count",
    "private_vr_fw",
    "pure_fw_schedule",
    "sc_wrapper",
    "score_sensitivity",
    "stage_schedule",
    "variance_probe",
]
