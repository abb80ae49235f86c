import numpy as np
import pytest
import scipy.integrate

from sigspace import (
    BoxDomain,
    EmptyDomain,
    GroupElement,
    Signature,
    SymmetricForm,
    UnsupportedDimension,
    density,
    density_closed_form,
    invariance_experiment,
    mc_integrate,
    pushforward_invariance_residual,
    radial_bump,
    random_form,
)
from sigspace.packing import congruence_jacobian


def _random_group(rng, n, max_cond=10.0):
    while True:
        g = rng.standard_normal((n, n))
        if abs(np.linalg.det(g)) > 1e-3 and np.linalg.cond(g) < max_cond:
            return GroupElement(g)


class TestDensity:
    def test_scalar_value(self):
        assert np.isclose(density(SymmetricForm([[2.0]])).value, 0.5, rtol=1e-14)

    def test_n2_minkowski(self):
        val = density(SymmetricForm(np.diag([1.0, -1.0]))).value
        assert np.isclose(val, np.sqrt(2.0), rtol=1e-14)

    def test_n2_identity(self):
        assert np.isclose(density(SymmetricForm(np.eye(2))).value, np.sqrt(2.0), rtol=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_determinant_power_oracle(self, n):
        # sqrt|det Q| against the simplification 2^(n(n-1)/4) |det S|^-(n+1)/2,
        # itself cross-checked at n <= 2 by the printed formulas
        rng = np.random.default_rng(n)
        for _ in range(500):
            p = int(rng.integers(0, n + 1))
            S = random_form(Signature(p, n - p), rng, max_condition=10)
            expected = 2.0 ** (n * (n - 1) / 4.0) * abs(np.linalg.det(S.entries)) ** (-(n + 1) / 2.0)
            assert abs(density(S).value - expected) < 1e-8 * expected


class TestDensityClosedForm:
    def test_negative_scalar(self):
        assert np.isclose(density_closed_form(SymmetricForm([[-3.0]])).value, 1.0 / 3.0)

    def test_agrees_with_determinant_route(self):
        S = SymmetricForm([[2.0, 1.0], [1.0, 2.0]])
        direct = density(S).value
        assert abs(density_closed_form(S).value - direct) < 1e-10 * direct

    def test_unsupported_dimension(self):
        with pytest.raises(UnsupportedDimension):
            density_closed_form(SymmetricForm(np.eye(3)))


class TestPushforwardInvariance:
    def test_scalar_by_hand(self):
        # density(gamma/4) * (1/4) = (4/gamma)(1/4) = 1/gamma
        residual = pushforward_invariance_residual(GroupElement([[2.0]]), SymmetricForm([[3.0]]))
        assert residual < 1e-15

    def test_identity_exact(self):
        S = SymmetricForm([[2.0, 1.0], [1.0, 3.0]])
        assert pushforward_invariance_residual(GroupElement.identity(2), S) == 0.0

    def test_random_runs_n3(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            p = int(rng.integers(0, 4))
            S = random_form(Signature(p, 3 - p), rng, max_condition=10)
            g = _random_group(rng, 3)
            assert pushforward_invariance_residual(g, S) < 1e-8 * density(S).value

    def test_scale_covariance_via_group_element(self):
        # scaling S -> alpha S is the action of alpha^(-1/2) identity
        rng = np.random.default_rng(3)
        S = random_form(Signature(2, 1), rng, max_condition=10)
        for alpha in (0.25, 2.0, 9.0):
            g = GroupElement(alpha ** (-0.5) * np.eye(3))
            assert pushforward_invariance_residual(g, S) < 1e-8 * density(S).value

    def test_basis_independence_of_density(self):
        # recomputing in a transformed frame times |det Phi'| reproduces it
        rng = np.random.default_rng(4)
        for n in (1, 2, 3):
            p = int(rng.integers(0, n + 1))
            S = random_form(Signature(p, n - p), rng, max_condition=10)
            P = _random_group(rng, n).entries
            transformed = density(SymmetricForm(P.T @ S.entries @ P)).value
            jac = abs(np.linalg.det(congruence_jacobian(P)))
            assert abs(transformed * jac - density(S).value) < 1e-8 * density(S).value


class TestBoxDomain:
    def test_volume(self):
        box = BoxDomain(Signature(1, 0), [1.0], [3.0])
        assert box.volume == 2.0

    def test_rejects_bad_bounds(self):
        with pytest.raises(ValueError):
            BoxDomain(Signature(1, 0), [2.0], [1.0])

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            BoxDomain(Signature(2, 0), [0.0], [1.0])

    def test_json_round_trip(self):
        box = BoxDomain(Signature(2, 0), [0.5, -0.5, 0.5], [1.5, 0.5, 1.5])
        again = BoxDomain.from_dict(box.to_dict())
        np.testing.assert_array_equal(box.lower, again.lower)
        assert again.signature == Signature(2, 0)


class TestMCIntegrate:
    def test_linear_integrand_scalar_fiber(self):
        # int_1^2 gamma (1/gamma) dgamma = 1; the weighted integrand is
        # constant, so the estimate is exact and the std error collapses
        box = BoxDomain(Signature(1, 0), [1.0], [2.0])
        est = mc_integrate(lambda S: S.entries[0, 0], box, rng_seed=1, n_samples=20000)
        assert abs(est.value - 1.0) <= max(3.0 * est.std_error, 1e-12)
        assert est.n_accepted == est.n_samples

    def test_zero_integrand(self):
        box = BoxDomain(Signature(1, 0), [1.0], [2.0])
        est = mc_integrate(lambda S: 0.0, box, rng_seed=2, n_samples=5000)
        assert est.value == 0.0 and est.std_error == 0.0

    def test_log_measure_of_interval(self):
        # int_1^e dgamma/gamma = 1
        box = BoxDomain(Signature(1, 0), [1.0], [np.e])
        est = mc_integrate(lambda S: 1.0, box, rng_seed=3, n_samples=50000)
        assert abs(est.value - 1.0) < 3.0 * est.std_error

    def test_vectorized_matches_scalar_path(self):
        box = BoxDomain(Signature(1, 0), [1.0], [2.0])
        scalar = mc_integrate(lambda S: S.entries[0, 0], box, rng_seed=4, n_samples=5000)
        vector = mc_integrate(
            lambda coords: coords[:, 0], box, rng_seed=4, n_samples=5000, vectorized=True
        )
        assert scalar.value == vector.value

    def test_deterministic_across_thread_counts(self):
        box = BoxDomain(Signature(2, 0), [0.5, -0.3, 0.5], [1.5, 0.3, 1.5])
        f = radial_bump([1.0, 0.0, 1.0], 0.3)
        seq = mc_integrate(f, box, rng_seed=5, n_samples=150000, vectorized=True)
        par = mc_integrate(f, box, rng_seed=5, n_samples=150000, vectorized=True, threads=4)
        assert seq.value == par.value and seq.std_error == par.std_error

    def test_convergence_rate(self):
        # doubling samples shrinks the std error by about sqrt(2)
        box = BoxDomain(Signature(1, 0), [1.0], [2.0])
        f = radial_bump([1.5], 0.45)
        small = mc_integrate(f, box, rng_seed=6, n_samples=100000, vectorized=True)
        large = mc_integrate(f, box, rng_seed=7, n_samples=200000, vectorized=True)
        ratio = small.std_error / large.std_error
        assert abs(ratio - np.sqrt(2.0)) < 0.2 * np.sqrt(2.0)

    def test_signature_filter_counts(self):
        # around the identity some draws in this box are indefinite
        box = BoxDomain(Signature(2, 0), [0.1, -1.0, 0.1], [1.5, 1.0, 1.5])
        est = mc_integrate(lambda coords: np.ones(len(coords)), box, 8, 20000, vectorized=True)
        assert 0 < est.n_accepted < est.n_samples

    def test_empty_domain(self):
        box = BoxDomain(Signature(0, 1), [1.0], [2.0])  # positive gammas never accepted
        with pytest.raises(EmptyDomain):
            mc_integrate(lambda S: 1.0, box, rng_seed=9, n_samples=1000)

    def test_minimum_samples(self):
        box = BoxDomain(Signature(1, 0), [1.0], [2.0])
        with pytest.raises(ValueError):
            mc_integrate(lambda S: 1.0, box, rng_seed=0, n_samples=10)


class TestInvarianceExperiment:
    def test_identity_element_identical_estimates(self):
        box = BoxDomain(Signature(1, 0), [1.0], [2.0])
        f = radial_bump([1.5], 0.45)
        report = invariance_experiment(f, GroupElement.identity(1), box, 1, 10000, vectorized=True)
        assert report.lhs.value == report.rhs.value
        assert report.difference == 0.0 and report.difference_sigmas == 0.0

    def test_scalar_scaling_matches_quadrature(self):
        box = BoxDomain(Signature(1, 0), [1.0], [2.0])
        f = radial_bump([1.5], 0.45)
        report = invariance_experiment(f, GroupElement([[2.0]]), box, 11, 200000, vectorized=True)
        analytic, _ = scipy.integrate.quad(lambda g: f(np.array([[g]]))[0] / g, 1.05, 1.95)
        assert abs(report.lhs.value - analytic) < 3.0 * report.lhs.std_error
        assert abs(report.rhs.value - analytic) < 3.0 * report.rhs.std_error
        assert report.passed

    def test_n2_diagonal_element(self):
        box = BoxDomain(Signature(2, 0), [0.6, -0.35, 0.6], [1.4, 0.35, 1.4])
        f = radial_bump([1.0, 0.0, 1.0], 0.3)
        report = invariance_experiment(
            f, GroupElement(np.diag([2.0, 1.0])), box, 12, 200000, vectorized=True
        )
        assert abs(report.difference_sigmas) < 3.0
