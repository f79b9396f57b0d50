"""Fast invariant suites behind the ``verify`` subcommand.

Each check runs on small seeded instances in well under a minute and reports
a CheckResult instead of raising, so one broken invariant does not hide the
others.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from dp_sco_toolkit.algorithms import (
    FwConfig,
    phase_fresh_samples,
    private_vr_fw,
    pure_fw_schedule,
    score_sensitivity,
)
from dp_sco_toolkit.errors import ToolkitError
from dp_sco_toolkit.geometry import L1Ball, LpBall, LpGeometry, lp_norm, mirror_step, prox_objective
from dp_sco_toolkit.hard_instances import (
    brute_force_l1_minimum,
    gen_sign_instance,
    l1_median_excess,
    l1_minimum,
    md_counterexample_check,
    md_linear_stability_check,
    sign_error,
    stability_bound,
)
from dp_sco_toolkit.losses import DataPoint, QuadraticLoss, gen_quadratic_instance, make_rng

logger = logging.getLogger(__name__)

GRID_POINTS = 401


@dataclass
class CheckResult:
    """Outcome of one invariant check.

    Attributes:
        name: Check identifier
        passed: Whether the invariant held on every instance
        detail: Worst observed value against its bound
    """

    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def _grid_prox_minimum(p: float, x_k: np.ndarray, g: np.ndarray, eta: float) -> float:
    """Prox objective minimized over a grid of the 2-d unit ℓp ball (mirror map centered at 0)."""
    axis = np.linspace(-1.0, 1.0, GRID_POINTS)
    u, w = np.meshgrid(axis, axis, indexing="ij")
    norm = (np.abs(u) ** p + np.abs(w) ** p) ** (1.0 / p)
    geom = LpGeometry.centered(p, 2)
    h_k = geom.potential(x_k)
    grad_k = geom.gradient(x_k)
    h = norm**2 / (p - 1.0)
    du, dw = u - x_k[0], w - x_k[1]
    divergence = h - h_k - (grad_k[0] * du + grad_k[1] * dw)
    objective = g[0] * du + g[1] * dw + divergence / eta
    return float(np.min(np.where(norm <= 1.0, objective, np.inf)))


class VerificationService:
    """Runs the invariant checks on seeded instances."""

    def __init__(self, seed: int = 0) -> None:
        """Initialize the VerificationService.

        Args:
            seed: Base seed of every check instance
        """
        self.seed = seed

    @property
    def checks(self) -> dict[str, Callable[[], CheckResult]]:
        return {
            "mirror_step_oracle": self.check_mirror_step_oracle,
            "fw_sample_ledger": self.check_fw_sample_ledger,
            "fw_gradient_budget": self.check_fw_gradient_budget,
            "fw_telescoping": self.check_fw_telescoping,
            "fw_sensitivity": self.check_fw_sensitivity,
            "md_counterexample": self.check_md_counterexample,
            "md_linear_stability": self.check_md_linear_stability,
            "sign_minimizer": self.check_sign_minimizer,
            "sign_lower_bound": self.check_sign_lower_bound,
        }

    def run_all(self, names: list[str] | None = None) -> list[CheckResult]:
        """Run the named checks (all by default); a check that raises fails."""
        selected = self.checks if names is None else {name: self.checks[name] for name in names}
        results = []
        for name, check in selected.items():
            try:
                result = check()
            except ToolkitError as e:
                logger.error(f"Check {name} raised: {e}")  # pragma: no cover
                result = CheckResult(name, False, f"raised {type(e).__name__}: {e}")
            logger.info(
                "Check finished", extra={"check": name, "passed": result.passed, "detail": result.detail}
            )
            results.append(result)
        return results

    def check_mirror_step_oracle(self, instances: int = 30) -> CheckResult:
        """mirror_step objective <= grid minimum + 1e-4 on the 2-d unit ball."""
        rng = make_rng(self.seed)
        worst = -math.inf
        for k in range(instances):
            p = (1.2, 1.5, 2.0)[k % 3]
            geom = LpGeometry.centered(p, 2)
            ball = LpBall.around(geom, 1.0)
            x_k = rng.uniform(-1.0, 1.0, 2)
            x_k *= rng.uniform(0.0, 0.9) / lp_norm(x_k, p)
            g = rng.normal(size=2)
            eta = float(rng.uniform(0.1, 2.0))
            x_next = mirror_step(geom, ball, x_k, g, eta)
            value = prox_objective(geom, x_next, x_k, g, eta)
            worst = max(worst, value - _grid_prox_minimum(p, x_k, g, eta))
        return CheckResult(
            "mirror_step_oracle", worst <= 1e-4, f"max(step - grid) = {worst:.3e} <= 1e-4"
        )

    def check_fw_sample_ledger(self) -> CheckResult:
        """Fresh samples per phase match the tree-walk count; totals <= T²b."""
        T, b, d = 4, 64, 8
        config = self._fw_config(T, b, d, n=T * T * b)
        dataset = gen_quadratic_instance(T * T * b, d, 1.0, 1.0, self.seed)
        _, report = private_vr_fw(dataset, config)
        mismatches = [
            phase.t for phase in report.phases if phase.fresh_samples != phase_fresh_samples(phase.t, b)
        ]
        within = report.fresh_samples <= T * T * b
        return CheckResult(
            "fw_sample_ledger",
            not mismatches and within,
            f"fresh = {report.fresh_samples} <= {T * T * b}, mismatched phases {mismatches}",
        )

    def check_fw_gradient_budget(self) -> CheckResult:
        """Gradient count <= n under the default pure-DP schedule."""
        n, d, C, D = 4096, 8, 1.0, 1.0
        loss = QuadraticLoss(C, D)
        constraint = L1Ball(d, D)
        L = loss.lipschitz(1.0, d)
        schedule = pure_fw_schedule(n, 1.0, loss.smoothness(1.0, d), D, L, 2 * d)
        config = FwConfig(
            constraint=constraint,
            loss=loss,
            phases=schedule.phases,
            batch_size=schedule.batch_size,
            epsilon=1.0,
            lipschitz=L,
            radius=D,
            seed=self.seed,
        )
        _, report = private_vr_fw(gen_quadratic_instance(n, d, C, D, self.seed), config)
        return CheckResult(
            "fw_gradient_budget",
            report.grad_count <= n,
            f"grad_count = {report.grad_count} <= n = {n} (T={schedule.phases}, b={schedule.batch_size})",
        )

    def check_fw_telescoping(self) -> CheckResult:
        """Full-batch noiseless mode gives v = exact batch gradient at every vertex."""
        T, b, d, n = 3, 16, 6, 40
        config = self._fw_config(T, b, d, n=n, full_batch=True, record_vertices=True, non_private=True)
        dataset = gen_quadratic_instance(n, d, 1.0, 1.0, self.seed)
        _, report = private_vr_fw(dataset, config)
        worst = 0.0
        for rec in report.vertices:
            assert rec.x is not None and rec.v is not None
            exact = config.loss.mean_gradient(rec.x, dataset)
            worst = max(worst, lp_norm(rec.v - exact, math.inf))
        return CheckResult("fw_telescoping", worst <= 1e-12, f"max error = {worst:.3e} <= 1e-12")

    def check_fw_sensitivity(self, instances: int = 10) -> CheckResult:
        """Neighboring-dataset score gaps stay within the per-slice bound."""
        T, b, d = 3, 16, 4
        n = sum(phase_fresh_samples(t, b) for t in range(1, T + 1))
        worst = 0.0
        for k in range(instances):
            seed = self.seed + k
            config = self._fw_config(T, b, d, n=n, seed=seed)
            dataset = gen_quadratic_instance(n, d, 1.0, 1.0, seed)
            rng = make_rng(seed)
            t = int(rng.integers(1, T + 1))
            s = "" if t == 1 else "1" * int(rng.integers(0, t))
            offset = 0
            replacement = DataPoint(z=rng.uniform(-1.0, 1.0, d), b=float(rng.uniform(-1.0, 1.0)))
            # replace-one with ‖∇f‖_∞ <= L moves a gradient by up to 2L
            checks = score_sensitivity(
                dataset, config, t, s, offset, replacement, 2.0 * config.lipschitz
            )
            worst = max(worst, max(check.gap / check.bound for check in checks))
        return CheckResult(
            "fw_sensitivity", worst <= 1.0 + 1e-12, f"max gap / bound = {worst:.4f} <= 1"
        )

    def check_md_counterexample(self) -> CheckResult:
        """Entropic step expands distances: >= 1.025 at η = 0.1, >= 1.25 at η = 1."""
        small = min(md_counterexample_check(0.1))
        large = min(md_counterexample_check(1.0))
        return CheckResult(
            "md_counterexample",
            small >= 1.025 and large >= 1.25,
            f"min ratio {small:.4f} at eta=0.1, {large:.4f} at eta=1",
        )

    def check_md_linear_stability(self, seeds: int = 20) -> CheckResult:
        """Shuffled SMD divergence on neighboring linear datasets <= 4η²L²R²."""
        eta, L, R = 0.05, 1.0, 3
        bound = stability_bound(eta, L, R)
        worst = max(
            md_linear_stability_check(50, 5, R, eta, L, self.seed + k) for k in range(seeds)
        )
        return CheckResult(
            "md_linear_stability", worst <= bound, f"max divergence {worst:.3e} <= {bound:.3e}"
        )

    def check_sign_minimizer(self, instances: int = 5) -> CheckResult:
        """Grid minimum of the ℓ1-median loss equals the closed form (d = 2)."""
        worst = 0.0
        for k in range(instances):
            instance = gen_sign_instance(6, 2, 1.0, 0.5, self.seed + k)
            grid_value, _ = brute_force_l1_minimum(instance, 1.0, resolution=1e-2)
            worst = max(worst, abs(grid_value - l1_minimum(instance, 1.0)))
        return CheckResult("sign_minimizer", worst <= 1e-9, f"max |grid - closed form| = {worst:.3e}")

    def check_sign_lower_bound(self, points: int = 1000) -> CheckResult:
        """l1_median_excess(x) >= L·sign_error(x) at random feasible points."""
        L, D, d = 1.0, 1.0, 8
        instance = gen_sign_instance(40, d, D, "random", self.seed)
        rng = make_rng(self.seed)
        worst = math.inf
        for _ in range(points):
            x = rng.normal(size=d)
            x *= rng.uniform(0.0, D) / lp_norm(x, 1.0)
            worst = min(worst, l1_median_excess(x, instance, L) - L * sign_error(x, instance))
        return CheckResult(
            "sign_lower_bound", worst >= -1e-12, f"min(excess - L*sign_error) = {worst:.3e} >= 0"
        )

    def _fw_config(self, T: int, b: int, d: int, *, n: int, seed: int | None = None, **flags: bool) -> FwConfig:
        loss = QuadraticLoss(1.0, 1.0)
        return FwConfig(
            constraint=L1Ball(d, 1.0),
            loss=loss,
            phases=T,
            batch_size=b,
            epsilon=1.0,
            lipschitz=loss.lipschitz(1.0, d),
            radius=1.0,
            n=n,
            seed=self.seed if seed is None else seed,
            **flags,
        )
