"""ℓp geometry: norms, mirror maps, constraint sets and mirror steps."""

from dp_sco_toolkit.geometry.constraints import (
    FEASIBILITY_TOL,
    ConstraintSet,
    ConvexHull,
    Intersection,
    L1Ball,
    LpBall,
    Simplex,
)
from dp_sco_toolkit.geometry.lp_geometry import (
    LpGeometry,
    Vector,
    as_vector,
    bregman_divergence,
    dual_exponent,
    l1_proxy_exponent,
    log_dimension,
    lp_norm,
)
from dp_sco_toolkit.geometry.mirror_step import (
    bregman_projection,
    entropic_md_step,
    mirror_step,
    prox_objective,
)

__all__ = [
    "FEASIBILITY_TOL",
    "ConstraintSet",
    "ConvexHull",
    "Intersection",
    "L1Ball",
    "LpBall",
    "LpGeometry",
    "Simplex",
    "Vector",
    "as_vector",
    "bregman_divergence",
    "bregman_projection",
    "dual_exponent",
    "entropic_md_step",
    "l1_proxy_exponent",
    "log_dimension",
    "lp_norm",
    "mirror_step",
    "prox_objective",
]
