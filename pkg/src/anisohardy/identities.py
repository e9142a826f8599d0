"""Quadrature certification of the divergence identities behind the inequalities.

The engine identity for p = 2,

    int V |grad u|^2 = -int div(V grad f)/f u^2 + int V f^2 |grad(u/f)|^2,

its p-version with the Picone-type remainder R, and the CKN product identity
are checked on compactly supported bumps placed away from the singular set.
Bump gradients are analytic; only grad(u/f) and the p != 2 field divergences
fall back to finite differences, so quadrature error is isolated from
differentiation error.

Support-box integration is tensor composite Gauss-Legendre (4 panels per
axis, degree 20 by default); the integrands are smooth on the support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .closed_form import sharp_constant_general_p
from .errors import (EmptyInputError, NegativeRemainderError,
                     SupportViolationError, TruncationError)
from .params import CknParams, HardyParams, admissible_ckn
from .quadrature import QuadMethod, QuadratureSpec, cutoff_eta, cutoff_eta_prime, integrate_1d
from .weights import WeightSpec, axis_norms, weight_general_p, weight_p2

__all__ = [
    "BumpFunction", "IdentityReport", "ExtremalReport", "SpotTestReport",
    "r_functional", "verify_E2", "verify_Ep", "verify_CKNp",
    "ckn_extremal_check", "hardy_spot_test",
]

_CLAMP_FLOOR = -1e-12


def r_functional(X, Y, p: float) -> float:
    """Picone-type remainder R(X, Y) = (p-1)|Y|^p + |X|^p + p|Y|^(p-2) <Y, X>.

    Nonnegative for p > 1 by Young's inequality; tiny negatives (above
    -1e-12) are rounded to zero, anything lower raises NegativeRemainderError
    because it indicates a bug, not a mathematical case.
    """
    if p <= 1:
        raise ValueError(f"r_functional requires p > 1, got {p}")
    xv = np.asarray(X, dtype=float)
    yv = np.asarray(Y, dtype=float)
    nx = float(np.linalg.norm(xv))
    ny = float(np.linalg.norm(yv))
    if ny == 0.0:
        value = nx ** p  # |Y|^(p-1) <Y/|Y|, X> -> 0 as Y -> 0 for p > 1
    else:
        value = (p - 1.0) * ny ** p + nx ** p + p * ny ** (p - 2.0) * float(np.dot(yv, xv))
    if value < _CLAMP_FLOOR:
        raise NegativeRemainderError(f"R(X, Y) = {value} < -1e-12")
    return max(value, 0.0)


def _r_rows(X, Y, p: float):
    """Row-wise r_functional for (N, n) arrays, with the same clamping."""
    nx = np.linalg.norm(X, axis=-1)
    ny = np.linalg.norm(Y, axis=-1)
    dot = np.sum(X * Y, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = np.where(ny > 0.0, p * ny ** (p - 2.0) * dot, 0.0)
    value = (p - 1.0) * ny ** p + nx ** p + cross
    if np.any(value < _CLAMP_FLOOR):
        raise NegativeRemainderError(
            f"R(X, Y) reached {float(np.min(value))} < -1e-12")
    return np.maximum(value, 0.0)


@dataclass(frozen=True)
class BumpFunction:
    """u(x) = P((x - center) . direction) * eta(|x - center| / width).

    P is a polynomial of degree <= 3; u vanishes outside the ball of radius
    2*width.  The placement rule |center'| > 3*width keeps a one-width margin
    from {x' = 0} (and from the origin, since |center| >= |center'|).
    """

    center: tuple
    width: float
    polynomial_degree: int = 0
    coefficients: tuple = (1.0,)
    direction: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if self.width <= 0:
            raise ValueError("width must be positive")
        if not 0 <= self.polynomial_degree <= 3:
            raise ValueError("polynomial_degree must lie in 0..3")
        if len(self.coefficients) != self.polynomial_degree + 1:
            raise ValueError("need polynomial_degree + 1 coefficients")
        if self.direction is None:
            d = (1.0,) + (0.0,) * (len(self.center) - 1)
            object.__setattr__(self, "direction", d)
        else:
            d = np.asarray(self.direction, dtype=float)
            if d.shape != (len(self.center),) or not np.linalg.norm(d) > 0:
                raise ValueError("direction must be a nonzero vector matching center")
            object.__setattr__(self, "direction",
                               tuple(float(x) for x in d / np.linalg.norm(d)))
        cprime = math.hypot(*self.center[:-1]) if len(self.center) > 1 else abs(self.center[0])
        if not cprime > 3.0 * self.width:
            raise SupportViolationError(
                f"|center'| = {cprime} must exceed 3*width = {3 * self.width}")

    @property
    def support_radius(self) -> float:
        return 2.0 * self.width

    def _poly(self, q):
        out = np.zeros_like(q)
        for c in reversed(self.coefficients):
            out = out * q + c
        return out

    def _poly_prime(self, q):
        out = np.zeros_like(q)
        deg = self.polynomial_degree
        for i, c in enumerate(self.coefficients[1:], start=1):
            out = out + i * c * q ** (i - 1)
        return out if deg >= 1 else np.zeros_like(q)

    def value(self, x):
        arr = np.asarray(x, dtype=float)
        z = arr - np.asarray(self.center)
        q = z @ np.asarray(self.direction)
        rho = np.linalg.norm(z, axis=-1)
        return self._poly(q) * cutoff_eta(rho / self.width)

    def gradient(self, x):
        arr = np.asarray(x, dtype=float)
        z = arr - np.asarray(self.center)
        dirv = np.asarray(self.direction)
        q = z @ dirv
        rho = np.linalg.norm(z, axis=-1)
        eta = cutoff_eta(rho / self.width)
        etap = cutoff_eta_prime(rho / self.width)
        safe_rho = np.where(rho > 0.0, rho, 1.0)
        radial = (self._poly(q) * etap / self.width / safe_rho)[..., None] * z
        return self._poly_prime(q)[..., None] * dirv * eta[..., None] + radial


@dataclass(frozen=True)
class IdentityReport:
    lhs: float
    rhs_terms: dict
    residual_rel: float


def _residual(lhs: float, terms: dict) -> IdentityReport:
    total = sum(terms.values())
    denom = abs(lhs) + sum(abs(v) for v in terms.values()) + 1e-300
    return IdentityReport(lhs, terms, abs(lhs - total) / denom)


@lru_cache(maxsize=8)
def _gl_axis(degree: int):
    return np.polynomial.legendre.leggauss(degree)


def _box_nodes(center, half_extent: float, panels: int, degree: int):
    x0, w0 = _gl_axis(degree)
    axes_x, axes_w = [], []
    for ci in center:
        edges = np.linspace(ci - half_extent, ci + half_extent, panels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        axes_x.append((mid[:, None] + half[:, None] * x0[None, :]).ravel())
        axes_w.append((half[:, None] * w0[None, :]).ravel())
    mesh = np.meshgrid(*axes_x, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    wts = axes_w[0]
    for wa in axes_w[1:]:
        wts = np.multiply.outer(wts, wa).ravel()
    return pts, wts


def _support_nodes(u, panels: int, degree: int):
    """Quadrature nodes restricted to the support ball of u."""
    pts, wts = _box_nodes(u.center, 2.0 * u.width, panels, degree)
    rho = np.linalg.norm(pts - np.asarray(u.center), axis=-1)
    keep = rho <= 2.0 * u.width
    return pts[keep], wts[keep]


def _check_support_clear(u, k: int):
    c = np.asarray(u.center, dtype=float)
    cprime = float(np.linalg.norm(c[:k]))
    cfull = float(np.linalg.norm(c))
    if cprime <= 3.0 * u.width or cfull <= 3.0 * u.width:
        raise SupportViolationError(
            "bump support reaches into the singular-set margin "
            f"(|center'|={cprime}, |center|={cfull}, width={u.width})")


def _fd_gradient_field(field, pts, scale: float = 1e-5):
    """O(h^4) five-point central gradient of a scalar field, row-vectorized."""
    n = pts.shape[1]
    h = scale * (1.0 + np.linalg.norm(pts, axis=-1))
    grad = np.empty_like(pts)
    for i in range(n):
        shifted = [pts.copy() for _ in range(4)]
        shifted[0][:, i] -= 2.0 * h
        shifted[1][:, i] -= h
        shifted[2][:, i] += h
        shifted[3][:, i] += 2.0 * h
        f_m2, f_m1, f_p1, f_p2 = (field(s) for s in shifted)
        grad[:, i] = (f_m2 - 8.0 * f_m1 + 8.0 * f_p1 - f_p2) / (12.0 * h)
    return grad


def verify_E2(spec: WeightSpec, u, panels: int = 4, degree: int = 20) -> IdentityReport:
    """Check int V|grad u|^2 = int W u^2 + int V f^2 |grad(u/f)|^2 on a bump.

    W is the closed-form weight; grad(u/f) is finite-differenced.  Residual
    is quadrature-limited, expected at or below 1e-6.
    """
    params = spec.params
    if params.p != 2 or spec.exponents is None:
        raise ValueError("verify_E2 needs a p = 2 WeightSpec with exponents")
    _check_support_clear(u, params.k)
    pts, wts = _support_nodes(u, panels, degree)

    uval = u.value(pts)
    ugrad = u.gradient(pts)
    v = spec.V(pts)
    f = spec.f(pts)
    w_closed = weight_p2(pts, spec)

    lhs = float(np.sum(wts * v * np.sum(ugrad * ugrad, axis=-1)))
    t_weight = float(np.sum(wts * w_closed * uval * uval))
    ratio_grad = _fd_gradient_field(lambda z: u.value(z) / spec.f(z), pts)
    t_remainder = float(np.sum(wts * v * f * f * np.sum(ratio_grad * ratio_grad, axis=-1)))
    return _residual(lhs, {"weight_term": t_weight, "remainder_term": t_remainder})


def verify_Ep(spec: WeightSpec, u, panels: int = 4, degree: int = 20) -> IdentityReport:
    """Check the p-version with the Picone remainder R(grad u, -u grad f / f).

    The trial function is f = |x'|^gamma, whose logarithmic gradient
    gamma x'/|x'|^2 is analytic, so only quadrature error enters; residual
    expected at or below 1e-5.
    """
    params = spec.params
    if spec.gamma is None:
        raise ValueError("verify_Ep needs a WeightSpec with gamma")
    p = params.p
    if p <= 1:
        raise ValueError("verify_Ep requires p > 1")
    if p < 2 and spec.gamma == 0.0:
        raise ValueError("p < 2 requires |grad f| > 0, so gamma != 0")
    _check_support_clear(u, params.k)
    pts, wts = _support_nodes(u, panels, degree)

    uval = u.value(pts)
    ugrad = u.gradient(pts)
    v = spec.V(pts)
    w_closed = weight_general_p(pts, spec)

    s = np.linalg.norm(pts[:, :params.k], axis=-1)
    logf_grad = np.zeros_like(pts)
    logf_grad[:, :params.k] = spec.gamma * pts[:, :params.k] / (s * s)[:, None]

    lhs = float(np.sum(wts * v * np.linalg.norm(ugrad, axis=-1) ** p))
    t_weight = float(np.sum(wts * w_closed * np.abs(uval) ** p))
    rvals = _r_rows(ugrad, -uval[:, None] * logf_grad, p)
    t_remainder = float(np.sum(wts * v * rvals))
    return _residual(lhs, {"weight_term": t_weight, "remainder_term": t_remainder})


# ------------------------------------------------------------------- CKN

def _ckn_fields(ckn: CknParams, pts):
    """(V, F, |F|, closed-form div(V |F|^(p-2) F)) at the given points."""
    s, r = axis_norms(pts, ckn.n - 1)
    V = s ** (ckn.p * ckn.mu) * r ** (ckn.p * ckn.gamma2)
    fmag = s ** (ckn.beta - ckn.mu) * r ** (ckn.gamma3 - ckn.gamma2)
    F = (s ** (ckn.beta - ckn.mu) * r ** (ckn.gamma3 - ckn.gamma2 - 1.0))[..., None] * pts
    div_closed = ((ckn.n + ckn.p * (ckn.alpha + ckn.gamma1))
                  * s ** (ckn.alpha * ckn.p) * r ** (ckn.gamma1 * ckn.p))
    return V, F, fmag, div_closed


def _ckn_flux_divergence_fd(ckn: CknParams, x: np.ndarray, h: float) -> float:
    """FD divergence of the flux V |F|^(p-2) F at one point, Richardson pair."""
    def phi(z, i):
        # V |F|^(p-2) F = |x'|^(b(p-1)+mu) |x|^(g3(p-1)+g2-1) x
        s, r = axis_norms(z, ckn.n - 1)
        mag = (s ** (ckn.beta * (ckn.p - 1.0) + ckn.mu)
               * r ** (ckn.gamma3 * (ckn.p - 1.0) + ckn.gamma2 - 1.0))
        return mag * z[i]

    def div_at(step):
        total = 0.0
        for i in range(ckn.n):
            e = np.zeros(ckn.n)
            e[i] = step
            total += (phi(x + e, i) - phi(x - e, i)) / (2.0 * step)
        return total

    d1 = div_at(h)
    d2 = div_at(0.5 * h)
    return (4.0 * d2 - d1) / 3.0


def verify_CKNp(ckn: CknParams, u, panels: int = 4, degree: int = 20,
                seed: int = 0, n_div_points: int = 20) -> IdentityReport:
    """Check the CKN product identity with kappa0 taken from the integrals.

    Also spot-checks the closed-form flux divergence
    [n + p(alpha+gamma1)] |x'|^(alpha p) |x|^(gamma1 p) against finite
    differences at sampled support points (relative error <= 1e-6 required).
    """
    flags = admissible_ckn(ckn)
    if not flags.normalized:
        raise ValueError("verify_CKNp requires the normalized exponent relation")
    _check_support_clear(u, ckn.n - 1)
    pts, wts = _support_nodes(u, panels, degree)

    V, F, fmag, div_closed = _ckn_fields(ckn, pts)
    uval = u.value(pts)
    ugrad = u.gradient(pts)
    p = ckn.p

    i_grad = float(np.sum(wts * V * np.linalg.norm(ugrad, axis=-1) ** p))
    i_field = float(np.sum(wts * V * fmag ** p * np.abs(uval) ** p))
    if i_grad == 0.0 or i_field == 0.0:
        return IdentityReport(0.0, {"divergence_term": 0.0, "remainder_term": 0.0}, 0.0)

    kappa0 = (i_grad / i_field) ** ((p - 1.0) / p)
    lhs = i_grad ** (1.0 / p) * i_field ** ((p - 1.0) / p)
    t_div = float(np.sum(wts * div_closed * np.abs(uval) ** p)) / p
    rvals = _r_rows(ugrad, (uval * kappa0 ** (1.0 / (p - 1.0)))[:, None] * F, p)
    t_rem = float(np.sum(wts * V / (p * kappa0) * rvals))
    report = _residual(lhs, {"divergence_term": t_div, "remainder_term": t_rem})

    # pointwise FD check of the closed-form flux divergence
    rng = np.random.default_rng(seed)
    center = np.asarray(u.center)
    worst = 0.0
    for _ in range(n_div_points):
        direction = rng.normal(size=ckn.n)
        direction /= np.linalg.norm(direction)
        x = center + rng.uniform(0.2, 1.5) * u.width * direction
        fd = _ckn_flux_divergence_fd(ckn, x, 1e-4 * (1.0 + float(np.linalg.norm(x))))
        s, r = axis_norms(x, ckn.n - 1)
        closed = ((ckn.n + p * (ckn.alpha + ckn.gamma1))
                  * s ** (ckn.alpha * p) * r ** (ckn.gamma1 * p))
        worst = max(worst, abs(fd - closed) / max(abs(closed), 1e-300))
    if worst > 1e-6:
        raise ArithmeticError(
            f"closed-form flux divergence disagrees with finite differences "
            f"(relative error {worst:.3e})")
    return report


@dataclass(frozen=True)
class ExtremalReport:
    quotient: float
    constant: float
    residual_R_max: float


def ckn_extremal_check(ckn: CknParams, kappa0: float = 1.0,
                       delta: float = 1e-6) -> ExtremalReport:
    """Evaluate the CKN quotient on the exponential extremal u0 = exp(-c |x|^m).

    m = gamma3 - gamma2 + 1 > 0 and c = kappa0^(1/(p-1))/m make
    grad u0 = -u0 kappa0^(1/(p-1)) F exactly, so the remainder R vanishes and
    the quotient must hit (n + p(alpha+gamma1))/p.  Radial integrals run over
    (delta, R) with R doubled until the tail is negligible.
    """
    flags = admissible_ckn(ckn)
    if not flags.all_ok:
        raise ValueError("ckn_extremal_check requires an admissible CKN instance")
    if not (abs(ckn.alpha - ckn.beta) <= 1e-12 and abs(ckn.alpha - ckn.mu) <= 1e-12):
        raise ValueError("the extremal family needs alpha = beta = mu")
    m = ckn.gamma3 - ckn.gamma2 + 1.0
    if not m > 0.0:
        raise ValueError("the extremal family needs gamma3 - gamma2 + 1 > 0")
    p = ckn.p
    c = kappa0 ** (1.0 / (p - 1.0)) / m

    a_grad = ckn.n - 1.0 + p * ckn.alpha + p * ckn.gamma2 + (m - 1.0) * p
    a_field = ckn.n - 1.0 + p * ckn.alpha + p * ckn.gamma3
    a_den = ckn.n - 1.0 + p * ckn.alpha + p * ckn.gamma1

    gl = QuadratureSpec(method=QuadMethod.GAUSS_LEGENDRE_COMPOSITE,
                        levels=9, abs_tol=1e-15, rel_tol=1e-12)

    def segment(a_exp, lo, hi):
        return integrate_1d(
            lambda r: r ** a_exp * np.exp(-p * c * r ** m), lo, hi, gl).value

    totals = {"grad": 0.0, "field": 0.0, "den": 0.0}
    exps = {"grad": a_grad, "field": a_field, "den": a_den}
    lo, hi = delta, 2.0
    for _ in range(24):
        last = {k: segment(e, lo, hi) for k, e in exps.items()}
        for k in totals:
            totals[k] += last[k]
        if all(abs(last[k]) <= 1e-9 * max(abs(totals[k]), 1e-300) for k in totals):
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise TruncationError(
            f"radial tail still above tolerance at R = {hi}")

    i_grad = (c * m) ** p * totals["grad"]
    quotient = (i_grad ** (1.0 / p) * totals["field"] ** ((p - 1.0) / p)
                / totals["den"])
    constant = (ckn.n + p * (ckn.alpha + ckn.gamma1)) / p

    radii = np.geomspace(delta, hi, 64)
    worst = 0.0
    for r in radii:
        u0 = math.exp(-c * r ** m)
        xvec = np.zeros(ckn.n)
        xvec[0] = -c * m * r ** (m - 1.0) * u0
        yvec = -xvec
        worst = max(worst, r_functional(xvec, yvec, p))
    return ExtremalReport(float(quotient), float(constant), float(worst))


@dataclass(frozen=True)
class SpotTestReport:
    min_quotient: float
    constant: float


def hardy_spot_test(params: HardyParams, bumps, panels: int = 4,
                    degree: int = 20) -> SpotTestReport:
    """Rayleigh quotients of arbitrary bumps must dominate the closed constant."""
    bumps = list(bumps)
    if not bumps:
        raise EmptyInputError("hardy_spot_test needs at least one bump")
    p = params.p
    best = math.inf
    for u in bumps:
        _check_support_clear(u, params.k)
        pts, wts = _support_nodes(u, panels, degree)
        s, r = axis_norms(pts, params.k)
        v = s ** (p * (params.alpha + 1.0)) * r ** (p * params.beta)
        num = float(np.sum(wts * v * np.linalg.norm(u.gradient(pts), axis=-1) ** p))
        den = float(np.sum(wts * v * s ** (-p) * np.abs(u.value(pts)) ** p))
        best = min(best, num / den)
    return SpotTestReport(best, sharp_constant_general_p(params).value)
