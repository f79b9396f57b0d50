"""Builds the concrete optimization problem behind a RunSpec."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from dp_sco_toolkit.errors import DomainError
from dp_sco_toolkit.geometry import (
    ConstraintSet,
    L1Ball,
    LpBall,
    LpGeometry,
    Vector,
    dual_exponent,
    l1_proxy_exponent,
    lp_norm,
)
from dp_sco_toolkit.hard_instances import SignInstance, gen_sign_instance, l1_minimizer, l1_minimum, sign
from dp_sco_toolkit.losses import (
    AbsL1Loss,
    Dataset,
    Distribution,
    LinearDistribution,
    LinearLoss,
    LossFamily,
    QuadraticDistribution,
    QuadraticLoss,
    SignDistribution,
    make_rng,
)
from dp_sco_toolkit.models.experiment_models import RunSpec

logger = logging.getLogger(__name__)

DATA_SEED_OFFSET = 2**32
POPULATION_SEED_OFFSET = 2**33


@dataclass(eq=False)
class Problem:
    """Dataset, loss and constraint of one benchmark run.

    Attributes:
        spec: The run it was built for
        dataset: Training sample
        loss: Loss family
        constraint: Feasible set (ℓ1 or ℓp ball around the origin)
        geometry: Mirror map of the run, centered at the origin
        distribution: Data-generating distribution
        D: Radius of the feasible set
        lipschitz: Gradient bound in the dual norm used by the algorithm
        lipschitz_inf: ‖∇f‖_∞ bound (the ℓ1 setting)
        smoothness: ℓ1/ℓ∞ smoothness constant (inf for non-smooth losses)
        x0: Starting point
        empirical_minimum: Closed-form min F̂ when available
        population_reference: Minimizer of the population loss over the set
        sign_instance: The sign instance for the sign family
    """

    spec: RunSpec
    dataset: Dataset
    loss: LossFamily
    constraint: ConstraintSet
    geometry: LpGeometry
    distribution: Distribution
    D: float
    lipschitz: float
    lipschitz_inf: float
    smoothness: float
    x0: Vector
    empirical_minimum: float | None
    population_reference: Vector
    sign_instance: SignInstance | None = None

    @property
    def p(self) -> float:
        return self.geometry.p

    @property
    def q(self) -> float:
        return self.geometry.q

    @property
    def general_geometry(self) -> bool:
        return self.spec.geometry.norm == "lp"

    @property
    def population_seed(self) -> int:
        return self.spec.seed + POPULATION_SEED_OFFSET


def norm_exponent(spec: RunSpec) -> float:
    """p of the run: 1 + 1/ln d for the ℓ1 ball, the configured p otherwise."""
    if spec.geometry.norm == "l1":
        return l1_proxy_exponent(spec.d)
    return float(spec.geometry.p)  # type: ignore[arg-type]


def build_problem(spec: RunSpec) -> Problem:
    """Generate the run's dataset and constants deterministically from its seed.

    Raises:
        DomainError: For unsupported family and geometry combinations
    """
    n, d, D = spec.n, spec.d, spec.geometry.D
    p = norm_exponent(spec)
    geometry = LpGeometry.centered(p, d)
    constraint: ConstraintSet
    if spec.geometry.norm == "l1":
        constraint = L1Ball(d, D)
        ball_exponent = 1.0
    else:
        constraint = LpBall(p=p, radius=D, center=np.zeros(d))
        ball_exponent = p
    dual = math.inf if spec.geometry.norm == "l1" else dual_exponent(p)
    data_seed = spec.seed + DATA_SEED_OFFSET
    family = spec.instance
    sign_instance = None

    if family.family == "linear":
        distribution: Distribution = LinearDistribution(
            d=d, bound=family.bound, nonnegative=family.nonnegative
        )
        dataset = distribution.sample(n, make_rng(data_seed), data_seed)
        loss: LossFamily = LinearLoss(family.bound)
        z_bar = dataset.features.mean(axis=1)
        empirical_minimum: float | None = -D * lp_norm(z_bar, dual)
        reference = linear_minimizer(distribution.population_gradient(np.zeros(d)), D, dual)
    elif family.family == "quadratic":
        plant_rng = make_rng(data_seed)
        direction = plant_rng.standard_normal(d)
        x_plant = (D / 4.0) * direction / np.abs(direction).sum()
        distribution = QuadraticDistribution(d=d, C=family.C, D=D, x_plant=x_plant, noise=family.noise)
        dataset = distribution.sample(n, plant_rng, data_seed)
        loss = QuadraticLoss(family.C, D)
        empirical_minimum = None
        reference = distribution.population_minimizer()
    elif family.family == "sign":
        if spec.geometry.norm != "l1":
            raise DomainError("the sign family is defined on the l1 ball")
        sign_instance = gen_sign_instance(n, d, D, family.bias, data_seed)
        distribution = SignDistribution(d=d, D=D, bias=family.bias)
        dataset = sign_instance.dataset
        loss = AbsL1Loss(family.scale)
        empirical_minimum = l1_minimum(sign_instance, family.scale)
        reference = sign(distribution.mean()) * (D / d)
    else:  # pragma: no cover
        raise DomainError(f"unknown family {family.family!r}")

    lipschitz_inf = loss.lipschitz(1.0, d)
    lipschitz = lipschitz_inf if spec.geometry.norm == "l1" else loss.lipschitz(ball_exponent, d)
    problem = Problem(
        spec=spec,
        dataset=dataset,
        loss=loss,
        constraint=constraint,
        geometry=geometry,
        distribution=distribution,
        D=D,
        lipschitz=lipschitz,
        lipschitz_inf=lipschitz_inf,
        smoothness=loss.smoothness(1.0, d),
        x0=np.zeros(d),
        empirical_minimum=empirical_minimum,
        population_reference=reference,
        sign_instance=sign_instance,
    )
    logger.debug(
        "Problem built",
        extra={"family": family.family, "n": n, "d": d, "p": p, "lipschitz": lipschitz},
    )
    return problem


def linear_minimizer(mean: Vector, D: float, q: float) -> Vector:
    """argmin of <mean, x> over the ball ‖x‖_p <= D, with q dual to p."""
    d = mean.shape[0]
    if not np.any(mean):
        return np.zeros(d)
    if math.isinf(q):
        j = int(np.argmax(np.abs(mean)))
        x = np.zeros(d)
        x[j] = -D * float(np.sign(mean[j]))
        return x
    weights = np.abs(mean) ** (q - 1.0)
    return -D * np.sign(mean) * weights / lp_norm(weights, q / (q - 1.0))
