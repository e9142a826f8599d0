"""Weight algebra for separable trial functions and its finite-difference oracle.

For V = |x'|^(2a+2) |x|^(2b) and f = |x'|^theta |x|^lam, the generated Hardy
weight splits into a purely anisotropic part and an angular part:

    -div(V grad f)/f = H1(theta, lam) V/|x'|^2
                       + H2(theta, lam) V |x''|^2 / (|x'|^2 |x|^2)

where |x''|^2 = |x|^2 - |x'|^2 (for k = n-1 this is x_n^2), and

    H(theta)        = -theta (k + 2a + theta)
    H2(theta, lam)  = lam (n + 2a + 2b + 2 theta + lam) + 2 b theta
    H1              = H - H2.

For k < n-1, H1 is the general-axis quadratic (same H2).  The general-p path
uses f = |x'|^gamma and V = |x'|^(p(a+1)) |x|^(pb), producing

    W = V |x'|^-p { -|g|^(p-2) g [(p-1) g + k + p a]
                    - |g|^(p-2) g b p |x'|^2/|x|^2 }.

Sign convention: weights are returned as the coefficient of the POSITIVE
right-hand side, so Hardy inequalities read  int V |grad u|^p >= int W |u|^p.

divergence_oracle / divergence_oracle_p recompute the same quantities by
central finite differences with Richardson extrapolation and know nothing of
the closed forms above; they are the independent check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import IllConditionedError, SingularPointError
from .params import ExponentPair, HardyParams

__all__ = [
    "WeightSpec", "H", "H1", "H2", "axis_norms",
    "weight_p2", "weight_general_p",
    "divergence_oracle", "divergence_oracle_p",
]

#: evaluation requires |x'| >= GUARD_COEFF * (1 + |x|)
GUARD_COEFF = 1e-8

_RICHARDSON_TOL = 1e-4


def H(theta: float, params: HardyParams) -> float:
    """H(theta) = -theta (k + 2 alpha + theta); vertex value (k+2a)^2/4."""
    return -theta * (params.k + 2.0 * params.alpha + theta)


def H2(theta: float, lam: float, params: HardyParams) -> float:
    """Constraint quadratic lam (n + 2a + 2b + 2 theta + lam) + 2 b theta."""
    return (lam * (params.n + 2.0 * params.alpha + 2.0 * params.beta
                   + 2.0 * theta + lam)
            + 2.0 * params.beta * theta)


def H1(theta: float, lam: float, params: HardyParams) -> float:
    """Objective H1 = H - H2 (the general-axis quadratic when k < n-1)."""
    return H(theta, params) - H2(theta, lam, params)


def axis_norms(x, k: int):
    """(|x'|, |x|) for points of shape (..., n), x' = first k coordinates."""
    arr = np.asarray(x, dtype=float)
    s = np.sqrt(np.sum(arr[..., :k] ** 2, axis=-1))
    r = np.sqrt(np.sum(arr ** 2, axis=-1))
    return s, r


@dataclass(frozen=True)
class WeightSpec:
    """A weight pair: the gradient-side V and a trial exponent choice.

    Exactly one of `exponents` (the |x'|^theta |x|^lam path) or `gamma`
    (the |x'|^gamma path for general p) must be given.  Evaluation is only
    defined off {x' = 0}, and off {x = 0} when an |x|-exponent is negative.
    """

    params: HardyParams
    exponents: ExponentPair | None = None
    gamma: float | None = None

    def __post_init__(self):
        if (self.exponents is None) == (self.gamma is None):
            raise ValueError("give exactly one of exponents=(theta, lam) or gamma")

    def V(self, x):
        """|x'|^(p(alpha+1)) |x|^(p beta); vectorized over leading axes."""
        p = self.params
        s, r = axis_norms(x, p.k)
        return s ** (p.p * (p.alpha + 1.0)) * r ** (p.p * p.beta)

    def f(self, x):
        """The trial function |x'|^theta |x|^lam or |x'|^gamma."""
        p = self.params
        s, r = axis_norms(x, p.k)
        if self.exponents is not None:
            return s ** self.exponents.theta * r ** self.exponents.lam
        return s ** self.gamma


def _guard(s, r):
    if np.any(s < GUARD_COEFF * (1.0 + r)):
        raise SingularPointError(
            "point lies inside the singular-set guard zone |x'| < 1e-8 (1+|x|)")


def weight_p2(x, spec: WeightSpec):
    """Closed-form weight H1 V/|x'|^2 + H2 V |x''|^2/(|x'|^2 |x|^2), p = 2.

    |x''|^2 is computed as |x|^2 - |x'|^2 so the k = n-1 and general-k paths
    share code.  Accepts a point (n,) or a batch (..., n).
    """
    if spec.exponents is None:
        raise ValueError("weight_p2 needs a WeightSpec with exponents=(theta, lam)")
    p = spec.params
    if p.p != 2:
        raise ValueError(f"weight_p2 requires p = 2, got p = {p.p}")
    arr = np.asarray(x, dtype=float)
    s, r = axis_norms(arr, p.k)
    _guard(s, r)
    th, la = spec.exponents.theta, spec.exponents.lam
    v = s ** (2.0 * p.alpha + 2.0) * r ** (2.0 * p.beta)
    h1 = H1(th, la, p)
    h2 = H2(th, la, p)
    w = h1 * v / s ** 2 + h2 * v * (r * r - s * s) / (s * s * r * r)
    return float(w) if arr.ndim == 1 else w


def weight_general_p(x, spec: WeightSpec):
    """Closed-form weight of the |x'|^gamma trial function, any p >= 1.

    Returns V |x'|^-p { -|g|^(p-2) g [(p-1)g + k + p a] - |g|^(p-2) g b p |x'|^2/|x|^2 }.
    gamma = 0 returns 0 (the limit value; exact for p >= 2).
    """
    if spec.gamma is None:
        raise ValueError("weight_general_p needs a WeightSpec with gamma")
    p = spec.params
    arr = np.asarray(x, dtype=float)
    s, r = axis_norms(arr, p.k)
    _guard(s, r)
    g = spec.gamma
    if g == 0.0:
        w = np.zeros_like(s)
        return float(w) if arr.ndim == 1 else w
    gq = abs(g) ** (p.p - 2.0) * g
    v = s ** (p.p * (p.alpha + 1.0)) * r ** (p.p * p.beta)
    bracket = (-gq * ((p.p - 1.0) * g + p.k + p.p * p.alpha)
               - gq * p.beta * p.p * (s * s) / (r * r))
    w = v * s ** (-p.p) * bracket
    return float(w) if arr.ndim == 1 else w


# ------------------------------------------------------------- FD oracles

def _default_step(x) -> float:
    # The second-difference roundoff (~eps/h^2) dominates below h ~ 1e-3 and
    # breaks 1e-6 oracle agreement for steep exponents; 4e-3 with the second
    # Richardson stage keeps roundoff and truncation both below ~1e-7.
    return 4e-3 * (1.0 + float(np.linalg.norm(x)))


def _div_v_grad_f(V: Callable, f: Callable, x: np.ndarray, h: float) -> float:
    """div(V grad f)(x) = grad V . grad f + V Laplacian f, central differences."""
    n = x.size
    v0 = float(V(x))
    f0 = float(f(x))
    total = 0.0
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        fp, fm = float(f(x + e)), float(f(x - e))
        vp, vm = float(V(x + e)), float(V(x - e))
        dfi = (fp - fm) / (2.0 * h)
        d2fi = (fp - 2.0 * f0 + fm) / (h * h)
        dvi = (vp - vm) / (2.0 * h)
        total += dvi * dfi + v0 * d2fi
    return total


def _richardson2(values):
    """Two-stage Richardson for O(h^2) data at steps (h, h/2, h/4).

    Returns the O(h^6) combination and the disagreement of the two O(h^4)
    stages, which estimates the remaining error.
    """
    d1, d2, d3 = values
    r1 = (4.0 * d2 - d1) / 3.0
    r2 = (4.0 * d3 - d2) / 3.0
    return (16.0 * r2 - r1) / 15.0, abs(r2 - r1)


def divergence_oracle(V: Callable, f: Callable, x, h: float | None = None) -> float:
    """-div(V grad f)/f by central differences with Richardson halving.

    V and f are scalar fields taking a point (n,).  Steps h, h/2, h/4 are
    combined to O(h^6); IllConditionedError when the two Richardson stages
    disagree by more than 1e-4 relative.
    """
    pt = np.asarray(x, dtype=float)
    step = h if h is not None else _default_step(pt)
    stages = [_div_v_grad_f(V, f, pt, step * s) for s in (1.0, 0.5, 0.25)]
    rich, disagreement = _richardson2(stages)
    if disagreement > _RICHARDSON_TOL * max(abs(rich), 1e-12):
        raise IllConditionedError(
            f"Richardson halving disagrees by {disagreement:.3e} at {pt}",
            value=-rich / float(f(pt)), disagreement=disagreement)
    return -rich / float(f(pt))


def _grad_fd(f: Callable, x: np.ndarray, h: float) -> np.ndarray:
    n = x.size
    g = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        g[i] = (float(f(x + e)) - float(f(x - e))) / (2.0 * h)
    return g


def _div_p_field(V: Callable, f: Callable, p: float, x: np.ndarray, h: float) -> float:
    """div(V |grad f|^(p-2) grad f)(x); the gradient inside is itself FD at step h."""
    n = x.size

    def flux(z: np.ndarray, i: int) -> float:
        g = _grad_fd(f, z, h)
        gn = float(np.linalg.norm(g))
        return float(V(z)) * gn ** (p - 2.0) * g[i]

    total = 0.0
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        total += (flux(x + e, i) - flux(x - e, i)) / (2.0 * h)
    return total


def divergence_oracle_p(V: Callable, f: Callable, p: float, x,
                        h: float | None = None) -> float:
    """-div(V |grad f|^(p-2) grad f)/f^(p-1) by nested central differences.

    p = 2 is the same operator as divergence_oracle and is delegated to it.
    For p < 2 the gradient of f must not vanish at x.
    """
    if p == 2:
        return divergence_oracle(V, f, x, h)
    pt = np.asarray(x, dtype=float)
    step = h if h is not None else _default_step(pt)
    if p < 2 and float(np.linalg.norm(_grad_fd(f, pt, step))) == 0.0:
        raise ValueError("divergence_oracle_p with p < 2 needs |grad f| > 0 at x")
    stages = [_div_p_field(V, f, p, pt, step * s) for s in (1.0, 0.5, 0.25)]
    rich, disagreement = _richardson2(stages)
    if disagreement > _RICHARDSON_TOL * max(abs(rich), 1e-12):
        raise IllConditionedError(
            f"Richardson halving disagrees by {disagreement:.3e} at {pt}",
            value=-rich / float(f(pt)) ** (p - 1.0), disagreement=disagreement)
    return -rich / float(f(pt)) ** (p - 1.0)
