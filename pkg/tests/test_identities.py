import numpy as np
import pytest

from anisohardy import (BumpFunction, CknParams, ExponentPair, HardyParams,
                        WeightSpec, branch_candidates, ckn_extremal_check,
                        hardy_spot_test, r_functional, sharp_constant_p2,
                        verify_CKNp, verify_E2, verify_Ep)
from anisohardy.errors import EmptyInputError, SupportViolationError
from anisohardy.identities import _r_rows
from anisohardy.weights import axis_norms


class TestRFunctional:
    def test_vanishes_at_opposite_arguments(self):
        assert r_functional([1.0, 2.0], [-1.0, -2.0], 2.0) <= 1e-12

    def test_p2_square(self):
        assert r_functional([1.0, 0.0], [1.0, 0.0], 2.0) == pytest.approx(4.0)

    def test_p3_orthogonal(self):
        assert r_functional([1.0, 0.0], [0.0, 1.0], 3.0) == pytest.approx(3.0)

    def test_requires_p_above_1(self):
        with pytest.raises(ValueError):
            r_functional([1.0], [1.0], 1.0)

    def test_nonnegative_fuzz(self):
        rng = np.random.default_rng(19)
        x = rng.normal(size=(10_000, 3))
        y = rng.normal(size=(10_000, 3))
        for p in (1.5, 2.0, 3.0, 5.0):
            vals = _r_rows(x, y, p)
            assert np.min(vals) >= 0.0

    def test_zero_y_limit(self):
        assert r_functional([2.0, 0.0], [0.0, 0.0], 1.5) == pytest.approx(2.0 ** 1.5)


class TestBumpFunction:
    def test_support_and_placement(self):
        u = BumpFunction(center=(1.0, 1.0, 0.5), width=0.1)
        assert u.support_radius == pytest.approx(0.2)
        pts = np.array([[1.0, 1.0, 0.5], [2.0, 2.0, 2.0]])
        vals = u.value(pts)
        assert vals[0] == pytest.approx(1.0)
        assert vals[1] == 0.0

    def test_rejects_axis_hugging_center(self):
        with pytest.raises(SupportViolationError):
            BumpFunction(center=(0.1, 0.1, 2.0), width=0.2)

    def test_gradient_matches_finite_differences(self):
        u = BumpFunction(center=(1.0, 0.8, -0.6), width=0.12,
                         polynomial_degree=2, coefficients=(1.0, 0.4, -0.2))
        rng = np.random.default_rng(2)
        pts = np.asarray(u.center) + rng.uniform(-0.2, 0.2, size=(40, 3))
        grad = u.gradient(pts)
        h = 1e-6
        for i in range(3):
            shift = np.zeros(3)
            shift[i] = h
            fd = (u.value(pts + shift) - u.value(pts - shift)) / (2 * h)
            assert np.max(np.abs(fd - grad[:, i])) <= 1e-8


class TestVerifyE2:
    def test_branch_point_weight(self):
        params = HardyParams(3, 2.0, -0.5, -0.5)
        (pair1, _), _ = branch_candidates(params)
        spec = WeightSpec(params, exponents=pair1)
        u = BumpFunction(center=(1.0, 1.0, 0.5), width=0.1,
                         polynomial_degree=1, coefficients=(1.0, 0.5))
        rep = verify_E2(spec, u)
        assert rep.residual_rel <= 1e-6

    def test_zero_bump(self):
        spec = WeightSpec(HardyParams(3, 2.0, 0.0, 0.0),
                          exponents=ExponentPair(0.5, -0.5))
        u = BumpFunction(center=(1.0, 1.0, 0.5), width=0.1,
                         polynomial_degree=0, coefficients=(0.0,))
        rep = verify_E2(spec, u)
        assert rep.lhs == 0.0
        assert all(v == 0.0 for v in rep.rhs_terms.values())

    def test_ratio_bump_stresses_remainder_term(self):
        # u = f * eta(|x - x0|/w): u/f is the cutoff alone, so the remainder
        # term carries everything the weight term misses
        params = HardyParams(3, 2.0, -0.25, 0.25)
        spec = WeightSpec(params, exponents=ExponentPair(0.4, -0.3))
        center = np.array([1.1, 0.9, 0.4])
        width = 0.1

        class RatioBump:
            def __init__(self):
                self.center = tuple(center)
                self.width = width

            def value(self, x):
                z = np.asarray(x) - center
                rho = np.linalg.norm(z, axis=-1)
                from anisohardy import cutoff_eta
                return spec.f(x) * cutoff_eta(rho / width)

            def gradient(self, x):
                from anisohardy import cutoff_eta, cutoff_eta_prime
                arr = np.asarray(x, dtype=float)
                z = arr - center
                rho = np.linalg.norm(z, axis=-1)
                s, r = axis_norms(arr, 2)
                fval = spec.f(arr)
                grad_f = np.zeros_like(arr)
                grad_f[..., :2] = (0.4 * fval / (s * s))[..., None] * arr[..., :2]
                grad_f += (-0.3 * fval / (r * r))[..., None] * arr
                eta = cutoff_eta(rho / width)
                etap = cutoff_eta_prime(rho / width)
                safe = np.where(rho > 0, rho, 1.0)
                return grad_f * eta[..., None] + (
                    fval * etap / width / safe)[..., None] * z

        rep = verify_E2(spec, RatioBump())
        assert rep.residual_rel <= 1e-6
        assert rep.rhs_terms["remainder_term"] > 0.0

    def test_support_violation(self):
        spec = WeightSpec(HardyParams(3, 2.0, 0.0, 0.0),
                          exponents=ExponentPair(0.5, 0.0))
        u = BumpFunction(center=(1.0, 1.0, 0.5), width=0.1)
        object.__setattr__(u, "center", (0.05, 0.05, 1.0))
        with pytest.raises(SupportViolationError):
            verify_E2(spec, u)


class TestVerifyEp:
    def test_matches_e2_term_by_term_at_p2(self):
        params = HardyParams(3, 2.0, -0.25, 0.25)
        gamma = 0.6
        spec_g = WeightSpec(params, gamma=gamma)
        spec_pair = WeightSpec(params, exponents=ExponentPair(gamma, 0.0))
        u = BumpFunction(center=(1.0, 0.8, 0.5), width=0.1,
                         polynomial_degree=1, coefficients=(1.0, 0.4))
        rep_p = verify_Ep(spec_g, u)
        rep_2 = verify_E2(spec_pair, u)
        assert rep_p.lhs == pytest.approx(rep_2.lhs, rel=1e-12)
        assert rep_p.rhs_terms["weight_term"] == pytest.approx(
            rep_2.rhs_terms["weight_term"], rel=1e-12)
        assert rep_p.rhs_terms["remainder_term"] == pytest.approx(
            rep_2.rhs_terms["remainder_term"], rel=1e-8)

    def test_p3_instance(self):
        params = HardyParams(3, 3.0, 0.0, 0.5)
        spec = WeightSpec(params, gamma=-(2.0 / 3.0))
        u = BumpFunction(center=(1.0, 0.5, -0.5), width=0.1,
                         polynomial_degree=1, coefficients=(1.0, 0.3))
        assert verify_Ep(spec, u).residual_rel <= 1e-5

    def test_p15_instance_n2(self):
        params = HardyParams(2, 1.5, 0.0, 0.0)
        spec = WeightSpec(params, gamma=-1.0 / 3.0)
        u = BumpFunction(center=(1.0, 1.0), width=0.15)
        assert verify_Ep(spec, u).residual_rel <= 1e-5

    def test_p_below_2_needs_nonzero_gamma(self):
        spec = WeightSpec(HardyParams(2, 1.5, 0.0, 0.0), gamma=0.0)
        u = BumpFunction(center=(1.0, 1.0), width=0.15)
        with pytest.raises(ValueError):
            verify_Ep(spec, u)


class TestVerifyCKNp:
    CKN = CknParams(3, 2.0, gamma1=-0.5)

    def test_product_identity(self):
        u = BumpFunction(center=(1.0, 1.0, 1.0), width=0.1,
                         polynomial_degree=1, coefficients=(1.0, 0.2))
        rep = verify_CKNp(self.CKN, u)
        assert rep.residual_rel <= 1e-5
        # inequality direction: lhs >= divergence term alone
        assert rep.lhs >= rep.rhs_terms["divergence_term"] - 1e-8

    def test_field_magnitude_formula(self):
        rng = np.random.default_rng(23)
        ckn = CknParams(3, 3.0, alpha=0.1, beta=0.2, mu=-0.1,
                        gamma1=(0.2 * 2 + 0.3 - 1) / 3, gamma2=0.3, gamma3=0.2)
        for _ in range(20):
            x = rng.uniform(0.2, 2.0, size=3)
            s, r = axis_norms(x, 2)
            field = (s ** (ckn.beta - ckn.mu)
                     * r ** (ckn.gamma3 - ckn.gamma2 - 1.0)) * x
            expected = s ** (ckn.beta - ckn.mu) * r ** (ckn.gamma3 - ckn.gamma2)
            assert np.linalg.norm(field) == pytest.approx(float(expected),
                                                          rel=1e-12)

    def test_zero_bump(self):
        u = BumpFunction(center=(1.0, 1.0, 1.0), width=0.1,
                         polynomial_degree=0, coefficients=(0.0,))
        rep = verify_CKNp(self.CKN, u)
        assert rep.lhs == 0.0
        assert rep.residual_rel == 0.0


class TestCknExtremal:
    def test_unit_quotient_n3(self):
        rep = ckn_extremal_check(CknParams(3, 2.0, gamma1=-0.5))
        assert rep.quotient == pytest.approx(1.0, abs=1e-3)
        assert rep.constant == pytest.approx(1.0)
        assert rep.residual_R_max <= 1e-12

    def test_half_quotient_n2(self):
        rep = ckn_extremal_check(CknParams(2, 2.0, gamma1=-0.5))
        assert rep.quotient == pytest.approx(0.5, abs=1e-3)

    def test_requires_symmetric_exponents(self):
        with pytest.raises(ValueError):
            ckn_extremal_check(CknParams(3, 2.0, alpha=0.2, beta=0.1, mu=0.3,
                                         gamma1=-0.45, gamma2=0.0, gamma3=0.1))


class TestHardySpotTest:
    def test_random_bumps_dominate_constant(self):
        params = HardyParams(3, 2.0, -0.5, -0.5)
        rng = np.random.default_rng(29)
        bumps = []
        while len(bumps) < 20:
            center = rng.uniform(-2.0, 2.0, size=3)
            width = 0.1 * float(np.linalg.norm(center))
            try:
                bumps.append(BumpFunction(center=tuple(center), width=width,
                                          polynomial_degree=1,
                                          coefficients=(1.0, float(rng.uniform(-0.4, 0.4)))))
            except SupportViolationError:
                continue
        rep = hardy_spot_test(params, bumps)
        assert rep.constant == pytest.approx(sharp_constant_p2(params).value)
        assert rep.min_quotient >= rep.constant * (1 - 1e-6)

    def test_narrow_far_bump_is_far_from_extremal(self):
        params = HardyParams(3, 2.0, -0.5, -0.5)
        u = BumpFunction(center=(2.0, 2.0, 1.0), width=0.02)
        rep = hardy_spot_test(params, [u])
        assert rep.min_quotient > 100.0 * rep.constant

    def test_empty_input(self):
        with pytest.raises(EmptyInputError):
            hardy_spot_test(HardyParams(3, 2.0, 0.0, 0.0), [])

    def test_p1_inequality_direction(self):
        # no sharpness construction exists at p = 1; the inequality itself
        # still holds with constant (k + alpha) for beta >= 0
        params = HardyParams(3, 1.0, 0.25, 0.5)
        u = BumpFunction(center=(1.0, 1.0, 0.5), width=0.12,
                         polynomial_degree=1, coefficients=(1.0, 0.2))
        rep = hardy_spot_test(params, [u])
        assert rep.constant == pytest.approx(2.25)
        assert rep.min_quotient >= rep.constant * (1 - 1e-6)
