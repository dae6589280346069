"""Gradient descent on the factor, spectral initialization, error bounds.

Because the horizontal lift of the Riemannian gradient equals the Euclidean
gradient of the lifted objective, plain gradient descent on the factor is
simultaneously the Riemannian method for the quotient geometry; no
retraction machinery is needed beyond staying full rank.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import (
    HypothesisViolationError,
    InitializationFailure,
    InputContractError,
    NotAFOSPError,
    NumericalFailure,
    RankCollapseError,
    StepSearchError,
)
from .geometry import FactorPoint, quotient_distance, vertical_project
from .kernels import sym_eig
from .landscape import (
    RegionLabel,
    RegionParams,
    classify_region,
    hess_extreme_eigs,
    horizontal_dim,
)
from .objectives import (
    GroundTruth,
    ObjectiveHandle,
    TraceRegressionObjective,
    lifted_value,
    riemannian_grad_lift,
)

__all__ = [
    "BacktrackingSpec",
    "PerturbationSpec",
    "GDConfig",
    "TrajectoryRecord",
    "ErrorBoundResult",
    "riemannian_gd",
    "spectral_init",
    "error_bound_check",
]


@dataclass(frozen=True)
class BacktrackingSpec:
    """Armijo line-search parameters."""

    c1: float = 1e-4
    shrink: float = 0.5
    max_backtracks: int = 50


@dataclass(frozen=True)
class PerturbationSpec:
    """Saddle-escape settings: perturb when the gradient is small but the
    Hessian has certified negative curvature."""

    radius: float
    trigger_tol: float
    cooldown_iters: int = 10


@dataclass(frozen=True)
class GDConfig:
    """Gradient-descent configuration.

    ``step_size=None`` selects backtracking line search; a positive float
    selects that fixed step.
    """

    step_size: float | None = None
    max_iters: int = 1000
    grad_tol: float = 1e-8
    backtracking: BacktrackingSpec = field(default_factory=BacktrackingSpec)
    perturbation: PerturbationSpec | None = None
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise InputContractError("max_iters must be >= 1")
        if self.grad_tol <= 0:
            raise InputContractError("grad_tol must be > 0")
        if self.step_size is not None and self.step_size <= 0:
            raise InputContractError("step_size must be > 0")


@dataclass
class TrajectoryRecord:
    """Per-iterate diagnostics of one optimization run."""

    values: list[float] = field(default_factory=list)
    grad_norms: list[float] = field(default_factory=list)
    dists: list[float] = field(default_factory=list)
    regions: list[tuple[RegionLabel, ...]] = field(default_factory=list)
    steps: list[float] = field(default_factory=list)
    perturbed: list[bool] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    final: FactorPoint | None = None

    def to_csv(self) -> str:
        def fmt(x: float) -> str:
            return format(float(x), ".17g")

        lines = ["iter,obj,grad_norm,dist_to_star,step,regions,perturbed_flag"]
        for k in range(len(self.values)):
            dist = fmt(self.dists[k]) if self.dists else ""
            regions = ";".join(lb.value for lb in self.regions[k]) if self.regions else ""
            step = fmt(self.steps[k]) if k < len(self.steps) else ""
            pert = "true" if (self.perturbed and self.perturbed[k]) else "false"
            lines.append(
                ",".join(
                    [str(k), fmt(self.values[k]), fmt(self.grad_norms[k]), dist, step, regions, pert]
                )
            )
        return "\n".join(lines) + "\n"


def _full_rank(Y: np.ndarray) -> bool:
    s = np.linalg.svd(Y, compute_uv=False)
    return s[-1] > max(1e-10 * s[0], 1e-300)


def _random_horizontal(base: FactorPoint, radius: float, rng: np.random.Generator) -> np.ndarray:
    raw = rng.standard_normal(base.Y.shape)
    theta = raw - vertical_project(base, raw)
    return theta * (radius / np.linalg.norm(theta))


def riemannian_gd(
    obj: ObjectiveHandle,
    Y0: FactorPoint,
    cfg: GDConfig,
    gt: GroundTruth | None = None,
    params: RegionParams | None = None,
) -> TrajectoryRecord:
    """Gradient descent ``Y <- Y - eta * grad`` on the factor.

    Terminates when the gradient norm drops below ``cfg.grad_tol`` or after
    ``cfg.max_iters`` iterations. With ``cfg.perturbation`` set, a random
    horizontal kick of the configured radius is injected whenever the
    gradient is small but the horizontal Hessian has an eigenvalue below
    ``-trigger_tol`` (a strict saddle).

    Raises
    ------
    RankCollapseError
        If an accepted iterate leaves the full-rank set (fixed-step mode;
        backtracking treats rank-collapsing trials as failed steps).
    StepSearchError
        If backtracking cannot find an acceptable step.
    """
    rec = TrajectoryRecord()
    track = gt is not None
    rng = np.random.default_rng(cfg.seed)
    Y = Y0
    trial = None  # warm-started backtracking step
    cooldown = 0

    for k in range(cfg.max_iters + 1):
        try:
            grad = riemannian_grad_lift(obj, Y)
        except InputContractError as exc:
            # non-finite intermediates mid-run mean the iterates diverged
            raise NumericalFailure(
                f"gradient evaluation failed at iterate {k}: {exc}"
            ) from exc
        gnorm = grad.norm
        val = lifted_value(obj, Y)
        if not np.isfinite(val) or not np.isfinite(gnorm):
            raise NumericalFailure(f"iterates diverged at iterate {k}")
        rec.values.append(val)
        rec.grad_norms.append(gnorm)
        if track:
            rec.dists.append(quotient_distance(Y, gt.Y_star))
            if params is not None:
                rec.regions.append(
                    tuple(sorted(classify_region(Y, gt, params), key=lambda lb: lb.value))
                )
        rec.perturbed.append(False)

        def negative_curvature() -> bool:
            method = "dense" if horizontal_dim(Y.p, Y.r) <= 4000 else "iterative"
            est = hess_extreme_eigs(obj, Y, method=method)
            return est.lambda_min < -cfg.perturbation.trigger_tol

        if gnorm <= cfg.grad_tol:
            # a strict saddle is not convergence when escape is enabled
            if cfg.perturbation is None or not negative_curvature():
                rec.converged = True
                break
        if k == cfg.max_iters:
            break

        if (
            cfg.perturbation is not None
            and gnorm < cfg.perturbation.trigger_tol
            and (cooldown == 0 or gnorm <= cfg.grad_tol)
            and negative_curvature()
        ):
            kick = _random_horizontal(Y, cfg.perturbation.radius, rng)
            cand = Y.Y + kick
            if not _full_rank(cand):
                raise RankCollapseError(
                    f"saddle-escape perturbation collapsed the rank at iterate {k}",
                    iteration=k,
                )
            Y = FactorPoint(cand)
            cooldown = cfg.perturbation.cooldown_iters
            rec.perturbed[-1] = True
            rec.steps.append(0.0)
            continue
        if cooldown > 0:
            cooldown -= 1

        if cfg.step_size is not None:
            eta = cfg.step_size
            cand = Y.Y - eta * grad.theta
            if not _full_rank(cand):
                raise RankCollapseError(
                    f"iterate {k + 1} left the full-rank set (step {eta:.3g})",
                    iteration=k + 1,
                )
            Y = FactorPoint(cand)
            rec.steps.append(eta)
            continue

        # Armijo backtracking; rank-collapsing trials count as rejected steps
        bt = cfg.backtracking
        eta = trial if trial is not None else 1.0 / (4.0 * Y.sigma_max**2)
        accepted = False
        for _ in range(bt.max_backtracks):
            cand = Y.Y - eta * grad.theta
            if _full_rank(cand):
                cand_val = float(obj.value(cand @ cand.T))
                if cand_val <= val - bt.c1 * eta * gnorm**2:
                    Y = FactorPoint(cand)
                    rec.steps.append(eta)
                    trial = eta * 2.0
                    accepted = True
                    break
            eta *= bt.shrink
        if not accepted:
            raise StepSearchError(
                f"backtracking exhausted {bt.max_backtracks} trials at iterate {k} "
                f"(gradient norm {gnorm:.3e})"
            )

    rec.iterations = len(rec.values) - 1
    rec.final = Y
    return rec


def spectral_init(obj: TraceRegressionObjective, r: int, eig_floor_rel: float = 1e-8) -> FactorPoint:
    """Spectral initialization from the back-projected observations.

    Forms ``M = sum_i y_i A_i``, takes its top-``r`` eigenpairs with
    eigenvalues clipped below at ``eig_floor_rel * lambda_1`` and returns
    ``U_r diag(lambda_r)^{1/2}``.

    Raises
    ------
    InitializationFailure
        If fewer than ``r`` eigenvalues exceed the floor.
    """
    M = obj.adjoint(obj.y)
    U, lam = sym_eig(M)
    if lam[0] <= 0.0:
        raise InitializationFailure("back-projected observations have no positive spectrum")
    floor = eig_floor_rel * float(lam[0])
    if int(np.sum(lam > floor)) < r:
        raise InitializationFailure(
            f"only {int(np.sum(lam > floor))} eigenvalues exceed the floor, need {r}"
        )
    lam_r = np.clip(lam[:r], floor, None)
    return FactorPoint(U[:, :r] * np.sqrt(lam_r)[None, :])


@dataclass(frozen=True)
class ErrorBoundResult:
    """Outcome of the stationary-point distance bound check."""

    lhs: float
    rhs: float
    rhs_mid: float
    holds: bool
    holds_mid: bool


def error_bound_check(
    Y_hat: FactorPoint,
    gt: GroundTruth,
    mu: float,
    obj: ObjectiveHandle,
    fosp_tol: float | None = None,
    slack: float | None = None,
) -> ErrorBoundResult:
    """Check the certified distance bound at a stationary point in R1.

    ``lhs`` is the quotient distance from the stationary point to the
    target; ``rhs`` is
    ``2 ||Y*|| ||(grad f(X*))_max(r)||_F / (((1-mu/k)^2 - 7mu/3) sigma_r^2)``
    and ``rhs_mid`` the tighter intermediate bound with
    ``||grad f(X*) Y*||_F`` in the numerator. ``holds`` compares with an
    absolute slack (default ``1e-7 sigma_r(Y*)``) because the noiseless rhs
    is exactly zero while a numerically converged point sits at a tiny
    positive distance.
    """
    kap, sr = gt.kappa_star, gt.sigmar_star
    denom_margin = (1.0 - mu / kap) ** 2 - 7.0 * mu / 3.0
    if denom_margin <= 0.0:
        raise HypothesisViolationError(
            f"(1 - mu/kappa*)^2 - 7 mu/3 = {denom_margin:.6g} <= 0"
        )
    if fosp_tol is None:
        fosp_tol = 1e-6 * sr**3
    gnorm = riemannian_grad_lift(obj, Y_hat).norm
    if gnorm > fosp_tol:
        raise NotAFOSPError(gnorm, fosp_tol)
    lhs = quotient_distance(Y_hat, gt.Y_star)
    r1_radius = mu * sr / kap
    if lhs > r1_radius * (1.0 + 1e-9):
        raise InputContractError(
            f"stationary point lies outside R1: distance {lhs:.3e} > {r1_radius:.3e}"
        )
    denom = denom_margin * sr**2
    rhs = 2.0 * gt.sigma1_star * gt.grad_at_star_trunc / denom
    grad_star = obj.euclid_grad(gt.X_star)
    rhs_mid = 2.0 * float(np.linalg.norm(grad_star @ gt.Y_star.Y)) / denom
    if slack is None:
        slack = 1e-7 * sr
    return ErrorBoundResult(
        lhs=float(lhs),
        rhs=float(rhs),
        rhs_mid=float(rhs_mid),
        holds=bool(lhs <= rhs + slack),
        holds_mid=bool(lhs <= rhs_mid + slack),
    )


def multistart_gd(
    obj: ObjectiveHandle,
    starts: Iterable[FactorPoint],
    cfg: GDConfig,
    gt: GroundTruth | None = None,
) -> list[TrajectoryRecord]:
    """Run independent descents from several starts (order-independent)."""
    return [riemannian_gd(obj, Y0, cfg, gt=gt) for Y0 in starts]
