"""Domain parameters and admissibility predicates.

The inequality under study is

    || |x|^beta |x'|^(alpha+1) grad u ||_p  >=  C  || |x|^beta |x'|^alpha u ||_p

over test functions on R^n, where x' is the projection onto the first k
coordinates (k = n-1 unless stated otherwise).  Admissibility of an instance
is exactly local L^p-integrability of the right-hand weight:

    k + p*alpha > 0   and   p*(alpha + beta) > -n,

both strict.  The borderline equalities are treated as inadmissible.

The regime constant

    K = -4*beta*(n + 2*alpha + beta) = (n+2*alpha)^2 - (n+2*alpha+2*beta)^2

decides which branch of the p = 2 case analysis applies and which trial
family certifies sharpness.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import InadmissibleParamsError

#: half-width of the K ~ 1 classification band.  Near-critical K is routed
#: through the K = 1 trial family, which stays integrable at the boundary.
REGIME_TOL = 1e-9

_FORM_AGREE_TOL = 1e-12
_EQ_TOL = 1e-12


@dataclass(frozen=True)
class HardyParams:
    """One instance (n, p, alpha, beta, k) of the anisotropic Hardy inequality.

    k defaults to n-1, the codimension-one axis split.  p = 1 is accepted.
    """

    n: int
    p: float = 2.0
    alpha: float = 0.0
    beta: float = 0.0
    k: int | None = None

    def __post_init__(self):
        if self.k is None:
            object.__setattr__(self, "k", self.n - 1)
        if not isinstance(self.n, int) or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        if not isinstance(self.k, int) or not 1 <= self.k <= self.n - 1:
            raise ValueError(f"k must be an integer in [1, n-1], got k={self.k!r} for n={self.n}")
        if not self.p >= 1:
            raise ValueError(f"p must be >= 1, got {self.p!r}")

    @property
    def is_full_axis(self) -> bool:
        """True when k = n-1 (the weights are singular on a single line)."""
        return self.k == self.n - 1


@dataclass(frozen=True)
class ExponentPair:
    """Exponents of the separable trial function f(x) = |x'|^theta |x|^lam."""

    theta: float
    lam: float


def admissible_hardy(params: HardyParams) -> bool:
    """Local p-integrability of |x|^beta |x'|^alpha.

    Total function: returns a bool, never raises.  Both inequalities are
    strict; boundary cases count as inadmissible.
    """
    return (params.k + params.p * params.alpha > 0.0
            and params.p * (params.alpha + params.beta) > -params.n)


@dataclass(frozen=True)
class CknParams:
    """The six exponents (alpha, beta, mu, gamma1, gamma2, gamma3) plus (n, p)
    of a Caffarelli-Kohn-Nirenberg product instance

        || |x|^g2 |x'|^mu grad u ||_p * || |x|^g3 |x'|^beta u ||_p^(p-1)
            >= C || |x|^g1 |x'|^alpha u ||_p^p .
    """

    n: int
    p: float
    alpha: float = 0.0
    beta: float = 0.0
    mu: float = 0.0
    gamma1: float = 0.0
    gamma2: float = 0.0
    gamma3: float = 0.0

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        if not self.p > 1:
            raise ValueError(f"CknParams requires p > 1, got {self.p!r}")


@dataclass(frozen=True)
class CknAdmissibility:
    integrable: bool
    balanced: bool
    normalized: bool

    @property
    def all_ok(self) -> bool:
        return self.integrable and self.balanced and self.normalized


def admissible_ckn(params: CknParams) -> CknAdmissibility:
    """Three independent gates for a CKN instance.

    integrable: all three weights lie in L^p_loc.
    balanced:   the exponent balance equality holds and the slope inequality
                gamma1 <= (gamma2-1)/p + (p-1)*gamma3/p is satisfied.
    normalized: the reduced form alpha*p = beta*(p-1) + mu and
                gamma1*p = gamma3*(p-1) + gamma2 - 1, within 1e-12.
    """
    c = params
    integrable = (min(c.alpha, c.beta, c.mu) > (1.0 - c.n) / c.p
                  and min(c.alpha + c.gamma1, c.mu + c.gamma2, c.beta + c.gamma3) > -c.n / c.p)
    balance_lhs = c.alpha + c.gamma1
    balance_rhs = (c.mu + c.gamma2 - 1.0) / c.p + (c.p - 1.0) * (c.beta + c.gamma3) / c.p
    slope_ok = c.gamma1 <= (c.gamma2 - 1.0) / c.p + (c.p - 1.0) * c.gamma3 / c.p + _EQ_TOL
    balanced = abs(balance_lhs - balance_rhs) <= _EQ_TOL and slope_ok
    normalized = (abs(c.alpha * c.p - c.beta * (c.p - 1.0) - c.mu) <= _EQ_TOL
                  and abs(c.gamma1 * c.p - c.gamma3 * (c.p - 1.0) - c.gamma2 + 1.0) <= _EQ_TOL)
    return CknAdmissibility(integrable, balanced, normalized)


class RegimeFamily(Enum):
    K_GT_1 = "K>1"
    K_EQ_1 = "K=1"
    K_LT_1 = "K<1"


@dataclass(frozen=True)
class Regime:
    k_value: float
    family: RegimeFamily


def compute_K(params: HardyParams) -> Regime:
    """Regime constant K = -4*beta*(n + 2*alpha + beta), classified.

    The difference-of-squares form (n+2a)^2 - (n+2a+2b)^2 is evaluated as a
    cross-check; the two must agree to 1e-12 relative to the quadratic scale
    max(1, |K|, (n+2a)^2).  Classification uses the REGIME_TOL band around 1.
    """
    if not admissible_hardy(params):
        raise InadmissibleParamsError(
            f"compute_K requires admissible parameters, got {params}")
    n, a, b = params.n, params.alpha, params.beta
    k_val = -4.0 * b * (n + 2.0 * a + b)
    k_alt = (n + 2.0 * a) ** 2 - (n + 2.0 * a + 2.0 * b) ** 2
    scale = max(1.0, abs(k_val), (n + 2.0 * a) ** 2)
    if abs(k_val - k_alt) > _FORM_AGREE_TOL * scale:
        raise ArithmeticError(
            f"the two algebraic forms of K disagree: {k_val} vs {k_alt}")
    if abs(k_val - 1.0) <= REGIME_TOL:
        family = RegimeFamily.K_EQ_1
    elif k_val > 1.0:
        family = RegimeFamily.K_GT_1
    else:
        family = RegimeFamily.K_LT_1
    return Regime(k_val, family)
