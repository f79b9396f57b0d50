"""Dyadic-tree variance-reduced private Frank-Wolfe over explicit vertex sets."""

import logging
import math
from collections import Counter
from collections.abc import Callable, Iterator
from dataclasses import asdict, dataclass, field
from typing import Any, Literal

import numpy as np
from numpy.typing import ArrayLike

from dp_sco_toolkit.errors import (
    DomainError,
    FallbackRequired,
    ParameterizationError,
    PreconditionError,
    SampleExhaustionError,
)
from dp_sco_toolkit.geometry import FEASIBILITY_TOL, ConstraintSet, Vector, as_vector, lp_norm
from dp_sco_toolkit.losses import Dataset, LossFamily, spawn_rngs
from dp_sco_toolkit.observability import traced
from dp_sco_toolkit.observability.metrics import record_gradients
from dp_sco_toolkit.privacy import (
    NoiseSource,
    PrivacyBudget,
    lambda_approx_fw,
    lambda_pure_fw,
    report_noisy_max,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class TreeAddress:
    """Vertex (t, s) of the phase-t tree; s is a bit string, "" for the root."""

    t: int
    s: str = ""

    def __post_init__(self) -> None:
        if self.t < 1:
            raise DomainError(f"phase must be >= 1, got {self.t}")
        if len(self.s) > self.t or set(self.s) - {"0", "1"}:
            raise DomainError(f"invalid address {self.s!r} for phase {self.t}")

    @property
    def depth(self) -> int:
        return len(self.s)

    @property
    def is_leaf(self) -> bool:
        return self.depth == self.t

    @property
    def is_right(self) -> bool:
        return self.s.endswith("1")

    @property
    def parent(self) -> "TreeAddress":
        if not self.s:
            raise DomainError("the root has no parent")
        return TreeAddress(self.t, self.s[:-1])

    @property
    def leaf_index(self) -> int:
        return leaf_index(self.s)

    @property
    def step_index(self) -> int:
        """Global step k = 2^{t-1} + ℓ(s) of a leaf."""
        if not self.is_leaf:
            raise DomainError(f"{self.s!r} is not a leaf of phase {self.t}")
        return 2 ** (self.t - 1) + self.leaf_index


def dfs_order(t: int) -> list[str]:
    """Pre-order DFS of the 2^{t+1} - 2 non-root vertices of the phase-t tree."""
    if t < 1:
        raise DomainError(f"phase must be >= 1, got {t}")
    return list(_preorder("", t))


def _preorder(prefix: str, t: int) -> Iterator[str]:
    if len(prefix) == t:
        return
    for bit in "01":
        child = prefix + bit
        yield child
        yield from _preorder(child, t)


def leaf_index(s: str) -> int:
    """Integer whose binary representation is s."""
    if not s:
        raise DomainError("the empty address has no leaf index")
    if set(s) - {"0", "1"}:
        raise DomainError(f"address must be a bit string, got {s!r}")
    return int(s, 2)


def fw_step_size(t: int, s: str) -> float:
    """η_{t,s} = 2/(2^{t-1} + ℓ(s) + 1) for a leaf (|s| = t)."""
    return 2.0 / (TreeAddress(t, s).step_index + 1)


def slice_size(b: int, depth: int) -> int:
    """Fresh samples max(1, ⌊2^{-j}·b⌋) at a vertex of depth j."""
    return max(1, b >> depth)


@dataclass(frozen=True, eq=False)
class FwConfig:
    """Tree Frank-Wolfe parameters.

    Attributes:
        constraint: Polytope given by its vertex list
        loss: Loss family
        phases: Number of phases T
        batch_size: Root batch b, with 2^T <= b
        epsilon: Privacy ε
        lipschitz: ‖∇f‖_∞ bound L
        radius: max_i ‖c_i‖₁ (D in the noise scale)
        noise_mode: "pure" or "approx"
        delta: δ for approximate DP
        n: Dataset size for approximate DP
        seed: Run seed (shuffle and noise streams)
        non_private: Disable the noisy argmin
        full_batch: Test mode using the whole dataset at every vertex
        record_vertices: Keep (x, v) for every visited vertex
    """

    constraint: ConstraintSet
    loss: LossFamily
    phases: int
    batch_size: int
    epsilon: float
    lipschitz: float
    radius: float
    noise_mode: Literal["pure", "approx"] = "pure"
    delta: float = 0.0
    n: int | None = None
    seed: int = 0
    non_private: bool = False
    full_batch: bool = False
    record_vertices: bool = False

    def __post_init__(self) -> None:
        if self.phases < 1 or self.batch_size < 1:
            raise DomainError(f"need T >= 1 and b >= 1, got T={self.phases}, b={self.batch_size}")
        if 2**self.phases > self.batch_size:
            raise ParameterizationError(f"2^T <= b violated: 2^{self.phases} > {self.batch_size}")
        self.constraint.vertices()
        if self.non_private:
            return
        if self.noise_mode == "approx":
            if self.n is None:
                raise ParameterizationError("approximate-DP mode needs the dataset size n")
            lambda_approx_fw(
                self.lipschitz, self.radius, self.phases, self.n, self.delta, self.batch_size, self.epsilon
            )
        else:
            lambda_pure_fw(self.lipschitz, self.radius, self.phases, self.batch_size, self.epsilon)

    @property
    def budget(self) -> PrivacyBudget:
        delta = self.delta if self.noise_mode == "approx" else 0.0
        return PrivacyBudget(epsilon=self.epsilon, delta=delta)

    def laplace_scale(self, t: int) -> float:
        if self.non_private:
            return 0.0
        if self.noise_mode == "approx":
            return lambda_approx_fw(
                self.lipschitz,
                self.radius,
                self.phases,
                int(self.n or 0),
                self.delta,
                self.batch_size,
                self.epsilon,
            )
        return lambda_pure_fw(self.lipschitz, self.radius, t, self.batch_size, self.epsilon)


@dataclass
class VertexRecord:
    """State at a visited vertex; x and v are kept only with record_vertices."""

    t: int
    s: str
    slice_start: int | None
    slice_stop: int | None
    x: Vector | None = field(default=None, repr=False)
    v: Vector | None = field(default=None, repr=False)


@dataclass
class PhaseSummary:
    t: int
    fresh_samples: int
    grad_count: int
    leaves: int
    laplace_scale: float
    mean_step: float


@dataclass
class FwReport:
    """Ledger of one tree Frank-Wolfe run."""

    phases: list[PhaseSummary] = field(default_factory=list)
    vertices: list[VertexRecord] = field(default_factory=list, repr=False)
    selections: list[int] = field(default_factory=list)
    influence: dict[tuple[int, str], int] = field(default_factory=dict, repr=False)
    max_influence_ratio: float = 0.0
    max_drift_ratio: float = 0.0
    final_step_index: int = 0
    non_private: bool = False

    @property
    def grad_count(self) -> int:
        return sum(phase.grad_count for phase in self.phases)

    @property
    def fresh_samples(self) -> int:
        return sum(phase.fresh_samples for phase in self.phases)

    def to_dict(self) -> dict[str, Any]:
        return {
            "phases": [asdict(phase) for phase in self.phases],
            "grad_count": self.grad_count,
            "fresh_samples": self.fresh_samples,
            "final_step_index": self.final_step_index,
            "max_influence_ratio": self.max_influence_ratio,
            "max_drift_ratio": self.max_drift_ratio,
            "non_private": self.non_private,
        }


class _SampleCursor:
    """Hands out disjoint slices of one seeded permutation in draw order."""

    def __init__(self, order: np.ndarray, full_batch: bool) -> None:
        self.order = order
        self.full_batch = full_batch
        self.position = 0

    def take(self, count: int) -> tuple[np.ndarray, int | None, int | None]:
        if self.full_batch:
            return self.order, None, None
        start, stop = self.position, self.position + count
        if stop > self.order.shape[0]:
            raise SampleExhaustionError(
                f"tree needs samples [{start}, {stop}) but the dataset holds {self.order.shape[0]}"
            )
        self.position = stop
        return self.order[start:stop], start, stop


def vertex_diameter(constraint: ConstraintSet) -> float:
    """Largest ℓ1 distance between two vertices."""
    vertices = constraint.vertices()
    if vertices.shape[0] > 2048:
        return 2.0 * float(np.abs(vertices).sum(axis=1).max())
    diffs = vertices[:, None, :] - vertices[None, :, :]
    return float(np.abs(diffs).sum(axis=2).max())


@traced("private_vr_fw")
def private_vr_fw(
    dataset: Dataset, config: FwConfig, x0: ArrayLike | None = None
) -> tuple[Vector, FwReport]:
    """Private variance-reduced Frank-Wolfe on a dyadic tree per phase.

    Phase t starts from the iterate produced by the previous phase's last leaf,
    draws b fresh samples at the root and walks the tree in pre-order. Left
    children copy the parent's (x, v); right children draw ⌊2^{-j}b⌋ fresh
    samples and correct v by ∇f(x_s; S) - ∇f(x_parent; S). Leaves pick a
    vertex by report-noisy-max on <c_i, v> and take a Frank-Wolfe step.

    Args:
        dataset: Training sample
        config: Tree parameters
        x0: Starting point in conv{c_i} (first vertex by default)

    Returns:
        Final iterate and the run report

    Raises:
        SampleExhaustionError: If the tree needs more fresh samples than n
        PreconditionError: If x0 lies outside the hull
    """
    constraint = config.constraint
    vertices = constraint.vertices()
    x = vertices[0].copy() if x0 is None else as_vector(x0, "x0")
    if x0 is not None and constraint.violation(x) > FEASIBILITY_TOL:
        raise PreconditionError("starting point lies outside the vertex hull")
    if dataset.n == 0:
        raise DomainError("Frank-Wolfe needs a non-empty dataset")

    shuffle_rng, noise_rng = spawn_rngs(config.seed, 2)
    cursor = _SampleCursor(shuffle_rng.permutation(dataset.n), config.full_batch)
    noise = NoiseSource(rng=noise_rng)
    loss = config.loss
    diameter = vertex_diameter(constraint)
    report = FwReport(non_private=config.non_private)
    influence: Counter[tuple[int, str]] = Counter()
    tag_depth: dict[tuple[int, str], int] = {}
    max_drift_ratio = 0.0

    if config.non_private:
        logger.warning("Tree Frank-Wolfe running in non-private mode")

    for t in range(1, config.phases + 1):
        scale = config.laplace_scale(t)
        indices, start, stop = cursor.take(config.batch_size)
        fresh = indices.shape[0]
        grads = fresh
        v = loss.mean_gradient(x, dataset, indices)
        root_tag = (t, "")
        tag_depth[root_tag] = 0
        # path[j] = (x, v, provenance tags) of the current ancestor at depth j
        path: list[tuple[Vector, Vector, tuple[tuple[int, str], ...]]] = [(x, v, (root_tag,))]
        if config.record_vertices:
            report.vertices.append(VertexRecord(t, "", start, stop, x.copy(), v.copy()))
        steps: list[float] = []
        leaves = 0

        for s in dfs_order(t):
            depth = len(s)
            parent_x, parent_v, parent_tags = path[depth - 1]
            if s.endswith("0"):
                x_s, v_s, tags = parent_x, parent_v, parent_tags
                start = stop = None
            else:
                x_s = x
                indices, start, stop = cursor.take(slice_size(config.batch_size, depth))
                fresh += indices.shape[0]
                grads += 2 * indices.shape[0]
                v_s = (
                    parent_v
                    + loss.mean_gradient(x_s, dataset, indices)
                    - loss.mean_gradient(parent_x, dataset, indices)
                )
                tag = (t, s)
                tag_depth[tag] = depth
                tags = parent_tags + (tag,)
                drift = lp_norm(x_s - parent_x, 1.0)
                bound = 4.0 * diameter * 2.0**-depth
                max_drift_ratio = max(max_drift_ratio, drift / bound if bound > 0 else 0.0)
            del path[depth:]
            path.append((x_s, v_s, tags))
            if config.record_vertices:
                report.vertices.append(VertexRecord(t, s, start, stop, x_s.copy(), v_s.copy()))

            if depth == t:
                choice = report_noisy_max(constraint.vertex_scores(v_s), scale, noise)
                eta = fw_step_size(t, s)
                x = (1.0 - eta) * x_s + eta * vertices[choice]
                report.selections.append(choice)
                influence.update(tags)
                steps.append(eta)
                leaves += 1
                report.final_step_index = TreeAddress(t, s).step_index

        report.phases.append(
            PhaseSummary(
                t=t,
                fresh_samples=fresh,
                grad_count=grads,
                leaves=leaves,
                laplace_scale=scale,
                mean_step=float(np.mean(steps)),
            )
        )
        logger.debug("Frank-Wolfe phase finished", extra={"phase": t, "fresh_samples": fresh})

    report.influence = dict(influence)
    report.max_influence_ratio = max(
        (count / 2 ** (tag[0] - tag_depth[tag]) for tag, count in influence.items()), default=0.0
    )
    report.max_drift_ratio = max_drift_ratio
    record_gradients("private_vr_fw", report.grad_count)
    logger.info(
        "Tree Frank-Wolfe finished",
        extra={
            "phases": config.phases,
            "batch_size": config.batch_size,
            "grad_count": report.grad_count,
            "fresh_samples": report.fresh_samples,
        },
    )
    return x, report


def replay_gradient_estimates(
    dataset: Dataset, config: FwConfig, report: FwReport
) -> dict[tuple[int, str], Vector]:
    """Recompute every v_{t,s} on ``dataset`` along a recorded run's iterates and slices.

    Used to compare neighboring datasets conditioned on the same history.
    """
    if not report.vertices or report.vertices[0].x is None:
        raise PreconditionError("replay needs a run made with record_vertices=True")
    order = spawn_rngs(config.seed, 2)[0].permutation(dataset.n)
    records = {(rec.t, rec.s): rec for rec in report.vertices}
    estimates: dict[tuple[int, str], Vector] = {}

    def slice_of(rec: VertexRecord) -> np.ndarray:
        if rec.slice_start is None:
            return order
        return order[rec.slice_start : rec.slice_stop]

    for rec in report.vertices:
        if rec.s == "":
            estimates[(rec.t, "")] = config.loss.mean_gradient(rec.x, dataset, slice_of(rec))
            continue
        parent = records[(rec.t, rec.s[:-1])]
        parent_v = estimates[(rec.t, rec.s[:-1])]
        if rec.s.endswith("0"):
            estimates[(rec.t, rec.s)] = parent_v
        else:
            indices = slice_of(rec)
            estimates[(rec.t, rec.s)] = (
                parent_v
                + config.loss.mean_gradient(rec.x, dataset, indices)
                - config.loss.mean_gradient(parent.x, dataset, indices)
            )
    return estimates


@dataclass
class SensitivityCheck:
    """Score gap at one vertex between neighboring datasets."""

    t: int
    s: str
    depth: int
    gap: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.gap <= self.bound * (1.0 + 1e-12)


def score_sensitivity(
    dataset: Dataset,
    config: FwConfig,
    t: int,
    s: str,
    replacement_offset: int,
    replacement: Any,
    gradient_range: float,
) -> list[SensitivityCheck]:
    """Compare max_i |<c_i, v - v'>| with the per-slice bound for a point swapped in S_{t,s}.

    The swapped sample is the ``replacement_offset``-th entry of the fresh slice
    at vertex (t, s). Every vertex of phase t is checked against the bound at
    the depth of the swapped slice. ``gradient_range`` bounds ‖∇f(x;z) - ∇f(x;z')‖_∞.

    The bound is gradient_range·D/|S| at the root and 2·gradient_range·D/|S|
    at a right child, with |S| = ⌊2^{-j}b⌋ and D the largest ‖c_i‖₁. Swapping
    one point moves a batch mean by at most gradient_range/|S| in ℓ∞. A right
    child averages ∇f(x_s;z) - ∇f(x_parent;z), so the swap changes two
    gradients. With only ‖∇f‖_∞ <= L known, a swap needs gradient_range = 2L,
    which makes the right-child bound 4·L·D/|S| rather than the L·D/|S| that
    holds when L bounds the whole change one sample makes to a gradient.
    """
    recorded = FwConfig(**{**_config_fields(config), "record_vertices": True, "non_private": True})
    _, report = private_vr_fw(dataset, recorded)
    target = next((rec for rec in report.vertices if (rec.t, rec.s) == (t, s)), None)
    if target is None or target.slice_start is None or target.slice_stop is None:
        raise DomainError(f"vertex ({t}, {s!r}) has no fresh slice")
    size = target.slice_stop - target.slice_start
    if not 0 <= replacement_offset < size:
        raise DomainError(f"offset {replacement_offset} outside a slice of size {size}")
    order = spawn_rngs(config.seed, 2)[0].permutation(dataset.n)
    neighbor = dataset.replace_point(int(order[target.slice_start + replacement_offset]), replacement)

    original = replay_gradient_estimates(dataset, recorded, report)
    swapped = replay_gradient_estimates(neighbor, recorded, report)
    vertices = config.constraint.vertices()
    radius = float(np.abs(vertices).sum(axis=1).max())
    # a fresh slice enters the estimate twice (at x_s and at the parent iterate)
    bound = (1.0 if s == "" else 2.0) * gradient_range * radius / size
    checks = []
    for (phase, address), v in original.items():
        if phase != t:
            continue
        gap = float(np.max(np.abs(config.constraint.vertex_scores(v - swapped[(phase, address)]))))
        checks.append(SensitivityCheck(phase, address, len(s), gap, bound))
    return checks


def variance_probe(
    report: FwReport, reference_gradient: Callable[[Vector], Vector]
) -> dict[tuple[int, str], float]:
    """‖v_{t,s} - ∇F(x_{t,s})‖_∞ at every recorded vertex."""
    errors = {}
    for rec in report.vertices:
        if rec.x is None or rec.v is None:
            raise PreconditionError("variance probe needs a run made with record_vertices=True")
        errors[(rec.t, rec.s)] = lp_norm(rec.v - reference_gradient(rec.x), math.inf)
    return errors


def _config_fields(config: FwConfig) -> dict[str, Any]:
    return {name: getattr(config, name) for name in FwConfig.__dataclass_fields__}


def phase_fresh_samples(t: int, b: int) -> int:
    """Root batch plus 2^{j-1} right children of ⌊2^{-j}b⌋ samples at each depth j."""
    return b + sum(2 ** (j - 1) * slice_size(b, j) for j in range(1, t + 1))


def phase_gradient_count(t: int, b: int) -> int:
    return 2 * phase_fresh_samples(t, b) - b


def default_T_pure(b: int, epsilon: float, beta: float, D: float, L: float, m: int) -> int:
    """T = ⌊½·log₂(b·ε·β·D/(L·ln m))⌋, at least 1 and with 2^T <= b.

    Raises:
        FallbackRequired: If the log argument is <= 1 (β below range)
    """
    argument = _fw_argument(b, epsilon, beta, D, L, m, 1.0)
    return _clamped_T(0.5 * math.log2(argument), b)


def default_T_approx(
    b: int, epsilon: float, beta: float, D: float, L: float, n: int, m: int, delta: float
) -> int:
    """T = ⌊⅔·log₂(b·ε·β·D/(L·ln(n/δ)·ln m))⌋, at least 1 and with 2^T <= b.

    Raises:
        FallbackRequired: If the log argument is <= 1
    """
    if not (n >= 1 and 0 < delta < 1):
        raise DomainError(f"need n >= 1 and 0 < delta < 1, got n={n}, delta={delta}")
    argument = _fw_argument(b, epsilon, beta, D, L, m, math.log(n / delta))
    return _clamped_T(2.0 / 3.0 * math.log2(argument), b)


def _fw_argument(
    b: int, epsilon: float, beta: float, D: float, L: float, m: int, extra_log: float
) -> float:
    if m < 2:
        raise DomainError(f"need at least 2 vertices, got m={m}")
    if not (b >= 1 and epsilon > 0 and beta >= 0 and D > 0 and L > 0):
        raise DomainError("need b >= 1 and positive epsilon, D, L")
    argument = b * epsilon * beta * D / (L * math.log(m) * extra_log)
    if argument <= 1.0:
        raise FallbackRequired(
            f"smoothness below range (log argument {argument:.4g} <= 1); use T = 1"
        )
    return argument


def _clamped_T(value: float, b: int) -> int:
    T = max(1, math.floor(value))
    return min(T, max(1, int(math.log2(b))))


@dataclass(frozen=True)
class FwSchedule:
    """Phases T and batch b chosen for a dataset of size n."""

    phases: int
    batch_size: int
    fallback: bool


def pure_fw_schedule(n: int, epsilon: float, beta: float, D: float, L: float, m: int) -> FwSchedule:
    """b = ⌊n/ln²n⌋ with the pure-DP T, or the single-phase fallback.

    T is lowered until the fresh samples of all phases fit in n. The fallback
    uses T = 1 and b = ⌊2n/3⌋, the largest root batch whose tree fits in n.
    """
    return _schedule(n, lambda b: default_T_pure(b, epsilon, beta, D, L, m))


def approx_fw_schedule(
    n: int, epsilon: float, beta: float, D: float, L: float, m: int, delta: float
) -> FwSchedule:
    """Approximate-DP counterpart of :func:`pure_fw_schedule`."""
    return _schedule(n, lambda b: default_T_approx(b, epsilon, beta, D, L, n, m, delta))


def _schedule(n: int, choose_T: Callable[[int], int]) -> FwSchedule:
    if n < 3:
        raise ParameterizationError(f"tree Frank-Wolfe needs n >= 3, got {n}")
    b = max(2, math.floor(n / math.log(n) ** 2))
    try:
        T = choose_T(b)
    except FallbackRequired:
        logger.warning("Smoothness below range, using the single-phase schedule", extra={"n": n})
        return FwSchedule(phases=1, batch_size=(2 * n) // 3, fallback=True)
    while T > 1 and sum(phase_fresh_samples(t, b) for t in range(1, T + 1)) > n:
        T -= 1
    if phase_fresh_samples(1, b) > n:  # pragma: no cover
        raise ParameterizationError(f"n = {n} too small for batch {b}")
    return FwSchedule(phases=T, batch_size=b, fallback=False)
