"""Region classification and numerical certification of landscape bounds.

The factor space splits into five (possibly overlapping) regions around a
rank-r target ``[Y*]``, driven by four parameters ``mu, alpha, beta, gamma``:

* R1     -- distance to the target at most ``mu sigma_r(Y*) / kappa*``,
* R2     -- outside R1, small exact-factorization gradient, bounded norms,
* R3'    -- large exact-factorization gradient, bounded norms,
* R3''   -- ``||Y|| > beta ||Y*||`` with bounded Gram norm,
* R3'''  -- ``||Y Y.T||_F > gamma ||Y* Y*.T||_F``.

In R1 the lifted objective is geodesically strongly convex and smooth; in
R2 the quadratic form along the explicit direction ``Y - Y* Q`` is provably
negative; in the R3 regions the Riemannian gradient norm has explicit
positive floors. :func:`certify_landscape` samples points, classifies them
and checks every applicable bound, reporting margins per point.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    HypothesisViolationError,
    InputContractError,
    NotAFOSPError,
    NumericalFailure,
    ResourceLimitError,
)
from .geometry import (
    FactorPoint,
    HorizontalTangent,
    quotient_distance,
    vertical_project,
)
from .kernels import sym_eig, thin_svd
from .objectives import (
    GroundTruth,
    ObjectiveHandle,
    _hess_quadform_cached,
    riemannian_grad_lift,
    riemannian_hess_quadform,
)

__all__ = [
    "RegionParams",
    "RegionLabel",
    "HessianSpectrumEstimate",
    "ThresholdReport",
    "RegionReport",
    "SQRT2M1_TIMES_2",
    "classify_region",
    "horizontal_basis",
    "horizontal_dim",
    "hess_extreme_eigs",
    "escape_direction",
    "compute_thresholds",
    "certify_landscape",
    "strict_convexity_fosp_check",
    "reports_to_csv",
    "random_ball_tangent",
]

#: the curvature margin constant 2 (sqrt(2) - 1) ~ 0.8284
SQRT2M1_TIMES_2 = 2.0 * (np.sqrt(2.0) - 1.0)


@dataclass(frozen=True)
class RegionParams:
    """Region parameters; validated against the certified-bound hypotheses."""

    mu: float
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.mu <= 1.0 / 3.0:
            raise InputContractError(f"mu must lie in [0, 1/3], got {self.mu}")
        if not 0.0 <= self.alpha < SQRT2M1_TIMES_2:
            raise InputContractError(
                f"alpha must lie in [0, 2(sqrt(2)-1)) = [0, {SQRT2M1_TIMES_2:.6f}), "
                f"got {self.alpha}"
            )
        if self.beta <= 1.0:
            raise InputContractError(f"beta must exceed 1, got {self.beta}")
        if self.gamma <= 1.0:
            raise InputContractError(f"gamma must exceed 1, got {self.gamma}")


class RegionLabel(str, Enum):
    R1 = "R1"
    R2 = "R2"
    R3_PRIME = "R3'"
    R3_DOUBLE_PRIME = "R3''"
    R3_TRIPLE_PRIME = "R3'''"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


@dataclass(frozen=True)
class HessianSpectrumEstimate:
    """Extreme eigenvalues of the Hessian restricted to the horizontal space."""

    lambda_min: float
    lambda_max: float
    method: str
    residual: float


@dataclass(frozen=True)
class ThresholdReport:
    """All certified-bound quantities for one (target, params) pair."""

    delta_min: float
    psi: float
    r1_hess_lower: float
    r1_hess_upper: float
    r2_curvature_upper: float
    r3_grad_lowers: tuple[float, float, float]
    delta_composite_bound: float
    noise_composite_bound: float
    delta_used: float
    noise_at_target: float

    def to_dict(self) -> dict:
        return {
            "delta_min": self.delta_min,
            "psi": self.psi,
            "r1_hess_lower": self.r1_hess_lower,
            "r1_hess_upper": self.r1_hess_upper,
            "r2_curvature_upper": self.r2_curvature_upper,
            "r3_grad_lowers": list(self.r3_grad_lowers),
            "delta_composite_bound": self.delta_composite_bound,
            "noise_composite_bound": self.noise_composite_bound,
            "delta_used": self.delta_used,
            "noise_at_target": self.noise_at_target,
        }


@dataclass(frozen=True)
class RegionReport:
    """Per-point certification outcome."""

    point_id: int
    region_labels: tuple[RegionLabel, ...]
    dist_to_star: float
    grad_H_norm: float
    grad_h_norm: float
    lambda_min: float
    lambda_max: float
    bound_value: float
    margin: float
    passed: bool


def _grad_exact_factorization(Y: FactorPoint, gt: GroundTruth) -> np.ndarray:
    return 2.0 * ((Y.gram() - gt.X_star) @ Y.Y)


def classify_region(
    Y: FactorPoint, gt: GroundTruth, params: RegionParams
) -> set[RegionLabel]:
    """Return every region label whose defining predicate holds at ``Y``.

    The predicates depend on ``Y`` only through the quotient distance to
    the target, the norm of the exact-factorization gradient, the spectral
    norm and the Gram Frobenius norm, so the result is fiber-invariant.
    The returned set is never empty (the five regions cover the manifold).
    Distances below ``1e-12 sigma_r(Y*)`` are treated as exact zeros so that
    fiber points classify into R1 even when ``mu = 0``.
    """
    d = quotient_distance(Y, gt.Y_star)
    if d <= 1e-12 * gt.sigmar_star:
        d = 0.0
    grad_norm = float(np.linalg.norm(_grad_exact_factorization(Y, gt)))
    spec_norm = Y.sigma_max
    gram_norm = float(np.linalg.norm(Y.gram()))

    r1_radius = params.mu * gt.sigmar_star / gt.kappa_star
    grad_thresh = params.alpha * params.mu * gt.sigmar_star**3 / (4.0 * gt.kappa_star)
    spec_cap = params.beta * gt.sigma1_star
    gram_cap = params.gamma * float(np.linalg.norm(gt.X_star))

    labels: set[RegionLabel] = set()
    in_box = spec_norm <= spec_cap and gram_norm <= gram_cap
    if d <= r1_radius:
        labels.add(RegionLabel.R1)
    if d > r1_radius and grad_norm <= grad_thresh and in_box:
        labels.add(RegionLabel.R2)
    if grad_norm > grad_thresh and in_box:
        labels.add(RegionLabel.R3_PRIME)
    if spec_norm > spec_cap and gram_norm <= gram_cap:
        labels.add(RegionLabel.R3_DOUBLE_PRIME)
    if gram_norm > gram_cap:
        labels.add(RegionLabel.R3_TRIPLE_PRIME)
    return labels


def horizontal_dim(p: int, r: int) -> int:
    """Dimension of the horizontal space: ``p r - r (r - 1) / 2``."""
    return p * r - (r * r - r) // 2


def horizontal_basis(Y: FactorPoint, cap: int = 4000) -> list[HorizontalTangent]:
    """Orthonormal basis (Frobenius inner product) of the horizontal space.

    Built from ``Y (Y.T Y)^{-1} S`` over a symmetric-matrix basis plus
    ``U_perp E`` over matrix units, then orthonormalized by a QR pass.

    Raises
    ------
    ResourceLimitError
        If the dimension exceeds ``cap``; use the iterative spectrum path.
    """
    p, r = Y.p, Y.r
    dim = horizontal_dim(p, r)
    if dim > cap:
        raise ResourceLimitError(
            f"horizontal dimension {dim} exceeds cap {cap}; "
            "use hess_extreme_eigs(..., method='iterative')"
        )
    U, sigma, V = Y.svd
    # Y (Y.T Y)^{-1} = U diag(1/sigma) V.T
    Ypinv_t = (U / sigma[None, :]) @ V.T
    cols = []
    for i in range(r):
        for j in range(i, r):
            S = np.zeros((r, r))
            S[i, j] = S[j, i] = 1.0
            cols.append((Ypinv_t @ S).ravel())
    if p > r:
        Q_full, _ = np.linalg.qr(U, mode="complete")
        U_perp = Q_full[:, r:]
        for i in range(p - r):
            for j in range(r):
                E = np.zeros((p, r))
                E[:, j] = U_perp[:, i]
                cols.append(E.ravel())
    A = np.stack(cols, axis=1)
    Qmat, R = np.linalg.qr(A)
    if np.min(np.abs(np.diag(R))) < 1e-12 * np.max(np.abs(np.diag(R))):
        raise NumericalFailure("horizontal basis candidates are numerically dependent")
    return [HorizontalTangent(Qmat[:, k].reshape(p, r), Y) for k in range(dim)]


def _assemble_dense_hessian(
    obj: ObjectiveHandle, Y: FactorPoint, basis: Sequence[HorizontalTangent]
) -> np.ndarray:
    """Matrix of the Hessian form over ``basis`` via the polarization identity."""
    X = Y.gram()
    R = obj.euclid_grad(X)
    R = (R + R.T) / 2.0
    thetas = [b.theta for b in basis]
    m = len(thetas)
    q = np.array([_hess_quadform_cached(obj, Y.Y, X, R, th) for th in thetas])
    M = np.zeros((m, m))
    for k in range(m):
        M[k, k] = q[k]
        for l in range(k + 1, m):
            qkl = _hess_quadform_cached(obj, Y.Y, X, R, thetas[k] + thetas[l])
            M[k, l] = M[l, k] = 0.5 * (qkl - q[k] - q[l])
    return M


class _ProbeHessian:
    """Matrix-free Hessian apply built from the scalar quadratic form.

    Entry ``(i, j)`` of ``H v`` is the bilinear form of ``v`` against the
    horizontally projected matrix unit ``E_ij``, recovered through the
    polarization identity. Projected probes and their form values are
    precomputed once.
    """

    def __init__(self, obj: ObjectiveHandle, Y: FactorPoint):
        self.Y = Y
        self.obj = obj
        self.X = Y.gram()
        R = obj.euclid_grad(self.X)
        self.R = (R + R.T) / 2.0
        p, r = Y.p, Y.r
        probes = []
        for i in range(p):
            for j in range(r):
                E = np.zeros((p, r))
                E[i, j] = 1.0
                probes.append(E - vertical_project(Y, E))
        self.probes = probes
        self.q_probe = np.array(
            [_hess_quadform_cached(obj, Y.Y, self.X, self.R, e) for e in probes]
        )

    def quadform(self, v: np.ndarray) -> float:
        return _hess_quadform_cached(self.obj, self.Y.Y, self.X, self.R, v)

    def apply(self, v: np.ndarray) -> np.ndarray:
        p, r = self.Y.p, self.Y.r
        qv = self.quadform(v)
        out = np.empty(p * r)
        for m, e in enumerate(self.probes):
            out[m] = 0.5 * (self.quadform(v + e) - qv - self.q_probe[m])
        Hv = out.reshape(p, r)
        return Hv - vertical_project(self.Y, Hv)


def _power_extreme(
    op: Callable[[np.ndarray], np.ndarray],
    horizontalize: Callable[[np.ndarray], np.ndarray],
    raw_apply: Callable[[np.ndarray], np.ndarray],
    shift: float,
    v0: np.ndarray,
    max_iters: int,
    tol: float,
) -> tuple[float, np.ndarray, float, int]:
    """Power iteration on ``op``; convergence measured on the unshifted apply."""
    v = v0 / np.linalg.norm(v0)
    lam = 0.0
    residual = np.inf
    for it in range(max_iters):
        w = op(v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return -shift, v, 0.0, it
        v = horizontalize(w / nw)
        v = v / np.linalg.norm(v)
        Hv = raw_apply(v)
        lam = float(np.vdot(v, Hv))
        residual = float(np.linalg.norm(Hv - lam * v))
        if residual <= tol * max(abs(lam), 1e-300):
            return lam, v, residual, it + 1
    raise NumericalFailure(
        f"power iteration did not converge in {max_iters} iterations "
        f"(final residual {residual:.3e})"
    )


def hess_extreme_eigs(
    obj: ObjectiveHandle,
    Y: FactorPoint,
    method: str = "dense",
    cap: int = 4000,
    max_iters: int = 5000,
    residual_tol: float = 1e-8,
    seed: int = 0,
) -> HessianSpectrumEstimate:
    """Extreme eigenvalues of the Riemannian Hessian on the horizontal space.

    ``method='dense'`` assembles the full matrix of the quadratic form over
    an orthonormal horizontal basis and factorizes it. ``method='iterative'``
    runs shifted power iteration on the matrix-free Hessian apply, with a
    horizontal projection each step; the Rayleigh residual of the returned
    pair against the unshifted operator is reported.
    """
    if method == "dense":
        basis = horizontal_basis(Y, cap=cap)
        M = _assemble_dense_hessian(obj, Y, basis)
        _, lam = sym_eig(M, asym_tol=1e-6)
        return HessianSpectrumEstimate(float(lam[-1]), float(lam[0]), "dense", 0.0)
    if method != "iterative":
        raise InputContractError(f"unknown method {method!r}")

    probe = _ProbeHessian(obj, Y)
    p, r = Y.p, Y.r
    rng = np.random.default_rng(seed)

    def horizontalize(v: np.ndarray) -> np.ndarray:
        return v - vertical_project(Y, v)

    def raw(v: np.ndarray) -> np.ndarray:
        return probe.apply(v)

    # stage 1: rough largest-|eigenvalue| estimate (Rayleigh quotients never
    # exceed it, so a small multiplicative margin keeps the shift safe)
    v = horizontalize(rng.standard_normal((p, r)))
    v /= np.linalg.norm(v)
    lam_abs = 0.0
    for _ in range(300):
        w = raw(v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return HessianSpectrumEstimate(0.0, 0.0, "iterative", 0.0)
        lam_abs = max(lam_abs, abs(float(np.vdot(v, w))))
        v = horizontalize(w / nw)
        v /= np.linalg.norm(v)

    # stage 2: top of the spectrum from the positively shifted operator; the
    # shift sits just above lam_abs so the dominant gap stays as wide as possible
    shift_up = 1.02 * lam_abs + 1e-12
    v1 = horizontalize(rng.standard_normal((p, r)))
    lam_max, _, res_max, _ = _power_extreme(
        lambda v: raw(v) + shift_up * v,
        horizontalize, raw, shift_up, v1, max_iters, residual_tol,
    )
    # stage 3: bottom of the spectrum from the reflected operator, shifted
    # just above the computed top so the bottom eigenvalue dominates
    shift_down = lam_max + 0.02 * (abs(lam_max) + lam_abs) + 1e-12
    v2 = horizontalize(rng.standard_normal((p, r)))
    lam_min, _, res_min, _ = _power_extreme(
        lambda v: shift_down * v - raw(v),
        horizontalize, raw, shift_down, v2, max_iters, residual_tol,
    )
    return HessianSpectrumEstimate(
        float(lam_min), float(lam_max), "iterative", max(res_max, res_min)
    )


def escape_direction(Y: FactorPoint, gt: GroundTruth) -> HorizontalTangent:
    """The provably descending direction ``Y - Y* Q`` at points of R2.

    ``Q`` is the best orthogonal alignment of the target onto ``Y``; the
    norm of the returned tangent equals the quotient distance to the
    target. When the alignment is not unique the deterministic minimizer
    of the canonicalized SVD is used and a warning is emitted.
    """
    cross = Y.Y.T @ gt.Y_star.Y
    QU, s, QV = thin_svd(cross)
    if s[-1] <= 1e-10 * max(float(s[0]), 1e-300):
        warnings.warn(
            "alignment of the target onto Y is not unique; using the "
            "deterministic canonicalized minimizer",
            RuntimeWarning,
            stacklevel=2,
        )
    Q = QV @ QU.T
    return HorizontalTangent(Y.Y - gt.Y_star.Y @ Q, Y)


def compute_thresholds(
    gt: GroundTruth, params: RegionParams, r: int, delta: float = 0.0
) -> ThresholdReport:
    """Evaluate every certified-bound quantity for the given target.

    ``delta`` is the restricted convexity/smoothness constant substituted
    into the general-objective bounds; zero reproduces the exact-
    factorization forms.

    Raises
    ------
    HypothesisViolationError
        If ``(1 - mu/kappa*)^2 - 7 mu / 3 <= 0``, which voids the local
        strong-convexity bracket.
    """
    mu, alpha, beta, gamma = params.mu, params.alpha, params.beta, params.gamma
    kap = gt.kappa_star
    s1, sr = gt.sigma1_star, gt.sigmar_star
    xnorm = float(np.linalg.norm(gt.X_star))
    noise = gt.grad_at_star_trunc

    margin = (1.0 - mu / kap) ** 2 - 7.0 * mu / 3.0
    if margin <= 0.0:
        raise HypothesisViolationError(
            f"(1 - mu/kappa*)^2 - 7 mu/3 = {margin:.6g} <= 0; "
            "the local strong-convexity bracket is void for these parameters"
        )

    top = s1 + mu * sr / kap
    correction = 4.0 * delta * top**2 + 14.0 * delta * mu * sr**2 / 3.0 + 2.0 * noise
    r1_lower = (2.0 * (1.0 - mu / kap) ** 2 - 14.0 * mu / 3.0) * sr**2 - correction
    r1_upper = 4.0 * top**2 + 14.0 * mu * sr**2 / 3.0 + correction

    r2_upper = (
        (alpha - SQRT2M1_TIMES_2) * sr**2
        + 2.0 * delta * (2.0 * beta**2 * s1**2 + (1.0 + gamma) * xnorm)
        + 2.0 * noise
    )

    r3_lowers = (
        alpha * mu * sr**3 / (8.0 * kap),
        (beta**3 - beta) * s1**3,
        (gamma - 1.0) * np.sqrt(gamma) * xnorm**1.5 / np.sqrt(r),
    )

    delta_min = min(
        alpha * mu * sr**2 / (32.0 * kap**2 * beta * (1.0 + gamma) * xnorm),
        (beta**2 - 1.0) * s1**2 / (4.0 * (1.0 + gamma) * xnorm),
        (gamma - 1.0) / (4.0 * (gamma + 1.0)),
    )
    psi = min(
        alpha * mu * sr**2 / (32.0 * kap**2 * beta),
        (beta**2 - 1.0) * s1**2 / 4.0,
        (gamma - 1.0) * xnorm / 4.0,
    )

    delta_composite = min(
        margin / (4.0 * (2.0 * (kap + mu / kap) ** 2 + 7.0 * mu / 3.0)),
        (SQRT2M1_TIMES_2 - alpha) * sr**2
        / (8.0 * (2.0 * beta**2 * s1**2 + (1.0 + gamma) * xnorm)),
        delta_min,
    )
    noise_composite = min(
        margin * sr**2 / 4.0,
        (SQRT2M1_TIMES_2 - alpha) * sr**2 / 8.0,
        psi,
    )

    return ThresholdReport(
        delta_min=float(delta_min),
        psi=float(psi),
        r1_hess_lower=float(r1_lower),
        r1_hess_upper=float(r1_upper),
        r2_curvature_upper=float(r2_upper),
        r3_grad_lowers=tuple(float(v) for v in r3_lowers),
        delta_composite_bound=float(delta_composite),
        noise_composite_bound=float(noise_composite),
        delta_used=float(delta),
        noise_at_target=float(noise),
    )


# ---------------------------------------------------------------------------
# Point samplers
# ---------------------------------------------------------------------------


def random_ball_tangent(
    base: FactorPoint, radius: float, rng: np.random.Generator
) -> HorizontalTangent:
    """Horizontal direction with norm distributed as uniform-in-ball."""
    dim = horizontal_dim(base.p, base.r)
    raw = rng.standard_normal(base.Y.shape)
    theta = raw - vertical_project(base, raw)
    nrm = np.linalg.norm(theta)
    if nrm == 0.0:  # pragma: no cover - measure zero
        theta = base.Y.copy()
        nrm = np.linalg.norm(theta)
    scale = radius * rng.uniform() ** (1.0 / dim)
    return HorizontalTangent(theta * (scale / nrm), base)


def _haar_orthogonal(r: int, rng: np.random.Generator) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((r, r)))
    return Q * np.sign(np.where(np.diag(R) == 0, 1.0, np.diag(R)))[None, :]


def _sample_point(
    name: str,
    gt: GroundTruth,
    params: RegionParams,
    rng: np.random.Generator,
    ball_radius: float,
) -> FactorPoint:
    Ys = gt.Y_star
    if name == "ball":
        theta = random_ball_tangent(Ys, ball_radius, rng)
        return FactorPoint(Ys.Y + theta.theta)
    if name == "fiber":
        theta = random_ball_tangent(Ys, ball_radius, rng)
        O = _haar_orthogonal(Ys.r, rng)
        return FactorPoint((Ys.Y + theta.theta) @ O)
    if name == "scaled":
        c = np.sqrt(params.gamma) * (1.1 + 1.4 * rng.uniform())
        return FactorPoint(c * Ys.Y)
    if name == "gaussian":
        scale = gt.sigma1_star / np.sqrt(Ys.p)
        for _ in range(100):
            cand = scale * rng.standard_normal(Ys.Y.shape)
            try:
                return FactorPoint(cand)
            except InputContractError:
                continue
        raise NumericalFailure("could not draw a full-rank Gaussian factor")
    raise InputContractError(f"unknown sampler {name!r}")


# ---------------------------------------------------------------------------
# Certification driver
# ---------------------------------------------------------------------------


def _certify_point(
    point_id: int,
    Y: FactorPoint,
    obj: ObjectiveHandle,
    gt: GroundTruth,
    params: RegionParams,
    thresholds: ThresholdReport,
    hess_cap: int,
) -> RegionReport:
    labels = classify_region(Y, gt, params)
    d = quotient_distance(Y, gt.Y_star)
    grad_H = float(np.linalg.norm(_grad_exact_factorization(Y, gt)))
    grad_h = riemannian_grad_lift(obj, Y).norm

    tol_curv = 1e-8 * gt.sigmar_star**2
    tol_grad = 1e-8 * gt.sigmar_star**3

    checks: list[tuple[float, float, bool]] = []  # (bound, margin, ok)
    lam_min = np.nan
    lam_max = np.nan

    if RegionLabel.R1 in labels:
        method = "dense" if horizontal_dim(Y.p, Y.r) <= hess_cap else "iterative"
        est = hess_extreme_eigs(obj, Y, method=method, cap=hess_cap)
        lam_min, lam_max = est.lambda_min, est.lambda_max
        m_lo = lam_min - (thresholds.r1_hess_lower - tol_curv)
        m_hi = (thresholds.r1_hess_upper + tol_curv) - lam_max
        checks.append((thresholds.r1_hess_lower, m_lo, m_lo >= 0.0))
        checks.append((thresholds.r1_hess_upper, m_hi, m_hi >= 0.0))

    if RegionLabel.R2 in labels:
        theta = escape_direction(Y, gt)
        quad = riemannian_hess_quadform(obj, Y, theta) / theta.norm**2
        m = (thresholds.r2_curvature_upper + tol_curv) - quad
        checks.append((thresholds.r2_curvature_upper, m, m >= 0.0))

    # gradient floors in their pointwise form, corrected by the restricted
    # convexity constant and the noise at the target; with both zero these
    # are the sharp exact-factorization floors
    delta = thresholds.delta_used
    noise = thresholds.noise_at_target
    mu, alpha, beta, gamma = params.mu, params.alpha, params.beta, params.gamma
    s1, sr, kap = gt.sigma1_star, gt.sigmar_star, gt.kappa_star
    xnorm = float(np.linalg.norm(gt.X_star))
    spec_norm = Y.sigma_max
    gram_norm = float(np.linalg.norm(Y.gram()))
    rr = Y.r
    floors = {
        RegionLabel.R3_PRIME: alpha * mu * sr**3 / (4.0 * kap)
        - 2.0 * delta * beta * (1.0 + gamma) * s1 * xnorm
        - 2.0 * beta * s1 * noise,
        RegionLabel.R3_DOUBLE_PRIME: 2.0 * (spec_norm**3 - spec_norm * s1**2)
        - 2.0 * delta * (1.0 + gamma) * spec_norm * xnorm
        - 2.0 * spec_norm * noise,
        RegionLabel.R3_TRIPLE_PRIME: (
            2.0 * (1.0 - 1.0 / gamma) - 2.0 * delta * (1.0 + 1.0 / gamma)
        )
        * gram_norm**1.5
        / np.sqrt(rr)
        - 2.0 * gram_norm**0.5 * noise / np.sqrt(rr),
    }
    for label, floor in floors.items():
        if label in labels:
            m = grad_h - (floor - tol_grad)
            checks.append((floor, m, m >= 0.0))

    if not checks:  # pragma: no cover - labels are never empty
        raise NumericalFailure("point received no region label")

    worst = min(range(len(checks)), key=lambda i: checks[i][1])
    bound_value, margin, _ = checks[worst]
    passed = all(ok for _, _, ok in checks)
    return RegionReport(
        point_id=point_id,
        region_labels=tuple(sorted(labels, key=lambda lb: lb.value)),
        dist_to_star=float(d),
        grad_H_norm=grad_H,
        grad_h_norm=float(grad_h),
        lambda_min=float(lam_min),
        lambda_max=float(lam_max),
        bound_value=float(bound_value),
        margin=float(margin),
        passed=bool(passed),
    )


def certify_landscape(
    obj: ObjectiveHandle,
    gt: GroundTruth,
    params: RegionParams,
    samplers: Sequence[str],
    n_points: int,
    seed: int,
    delta: float = 0.0,
    ball_radius: float | None = None,
    hess_cap: int = 4000,
    threads: int = 1,
) -> list[RegionReport]:
    """Sample points, classify them and check every applicable bound.

    Points are drawn by cycling through ``samplers`` ("ball", "fiber",
    "scaled", "gaussian"); the ball radius defaults to the R1 radius
    ``mu sigma_r(Y*) / kappa*``. Per-point seeds are derived from
    ``(seed, point index)`` so results do not depend on scheduling.
    """
    if n_points < 1:
        raise InputContractError("n_points must be >= 1")
    if not samplers:
        raise InputContractError("need at least one sampler")
    thresholds = compute_thresholds(gt, params, gt.Y_star.r, delta=delta)
    if ball_radius is None:
        ball_radius = params.mu * gt.sigmar_star / gt.kappa_star
    if ball_radius == 0.0 and any(s in ("ball", "fiber") for s in samplers):
        warnings.warn(
            "ball radius is zero (mu = 0): ball/fiber samples collapse onto "
            "the target fiber and the scan degenerates",
            RuntimeWarning,
            stacklevel=2,
        )

    def run(i: int) -> RegionReport:
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), i]))
        name = samplers[i % len(samplers)]
        Y = _sample_point(name, gt, params, rng, ball_radius)
        return _certify_point(i, Y, obj, gt, params, thresholds, hess_cap)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(run, range(n_points)))
    else:
        reports = [run(i) for i in range(n_points)]
    return reports


def strict_convexity_fosp_check(
    obj: ObjectiveHandle,
    Y_hat: FactorPoint,
    fosp_tol: float | None = None,
    hess_cap: int = 4000,
) -> HessianSpectrumEstimate:
    """Horizontal Hessian spectrum at a first-order stationary point.

    The testable consequence of restricted strict convexity is that the
    spectrum is positive semidefinite at the stationary point (strictly
    positive when the strict-convexity probe passes).

    Raises
    ------
    NotAFOSPError
        If the gradient norm exceeds ``fosp_tol``
        (default ``1e-8 * sigma_r(Y_hat)^3``).
    """
    if fosp_tol is None:
        fosp_tol = 1e-8 * Y_hat.sigma_min**3
    gnorm = riemannian_grad_lift(obj, Y_hat).norm
    if gnorm > fosp_tol:
        raise NotAFOSPError(gnorm, fosp_tol)
    method = "dense" if horizontal_dim(Y_hat.p, Y_hat.r) <= hess_cap else "iterative"
    return hess_extreme_eigs(obj, Y_hat, method=method, cap=hess_cap)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

CSV_HEADER = (
    "point_id,region_labels,dist_to_star,grad_H_norm,grad_h_norm,"
    "lambda_min,lambda_max,bound_value,margin,pass"
)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def reports_to_csv(reports: Iterable[RegionReport]) -> str:
    """Render reports as CSV with the fixed header; floats round-trip exactly."""
    lines = [CSV_HEADER]
    for rep in reports:
        labels = ";".join(lb.value for lb in rep.region_labels)
        status = "true" if rep.passed else "false"
        lines.append(
            ",".join(
                [
                    str(rep.point_id),
                    labels,
                    _fmt(rep.dist_to_star),
                    _fmt(rep.grad_H_norm),
                    _fmt(rep.grad_h_norm),
                    _fmt(rep.lambda_min),
                    _fmt(rep.lambda_max),
                    _fmt(rep.bound_value),
                    _fmt(rep.margin),
                    status,
                ]
            )
        )
    return "\n".join(lines) + "\n"
