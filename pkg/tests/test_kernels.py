import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import dblquad, quad

from besq.diffspec import BesselParams, besq_spec, doob_of
from besq.errors import DomainError, OrderingError
from besq.kernels import (
    ChamberPoint,
    DriftSpectrum,
    besq_density,
    conditioned_density,
    conditioned_density_generic,
    conditioned_density_many,
    entrance_density,
    laguerre_density,
    noncollision_prob,
)
from besq.specfun import phi

NU_HALF = BesselParams(delta=3.0)
NU_ONE = BesselParams(delta=4.0)


class TestTypes:
    def test_chamber_validation(self):
        ChamberPoint(np.array([0.5, 1.0, 2.0]))
        with pytest.raises(OrderingError):
            ChamberPoint(np.array([1.0, 1.0]))
        with pytest.raises(OrderingError):
            ChamberPoint(np.array([-1.0, 2.0]))

    def test_spectrum_validation(self):
        s = DriftSpectrum([0.5, 2.0])
        assert np.allclose(s.lambdas, [0.25, 1.0])
        assert not s.degenerate
        z = DriftSpectrum.zero(3)
        assert z.degenerate and z.size == 3
        with pytest.raises(OrderingError):
            DriftSpectrum([2.0, 2.0])
        with pytest.raises(OrderingError):
            DriftSpectrum([2.0, 1.0])


class TestBesqDensity:
    def test_normalization(self):
        mass, _ = quad(lambda y: besq_density(NU_HALF, 1.3, 2.0, y), 0, np.inf, limit=200)
        assert mass == pytest.approx(1.0, abs=1e-8)

    def test_entrance_limit_continuity(self):
        exact = besq_density(NU_HALF, 0.7, 0.0, 1.9)
        near = besq_density(NU_HALF, 0.7, 1e-8, 1.9)
        assert near == pytest.approx(exact, rel=1e-6)

    def test_entrance_value(self):
        # x = 0: y^nu e^{-y/2t} / ((2t)^{nu+1} Gamma(nu+1))
        t, y, nu = 0.7, 1.9, NU_HALF.nu
        ref = y**nu * math.exp(-y / (2 * t)) / ((2 * t) ** (nu + 1) * math.gamma(nu + 1))
        assert besq_density(NU_HALF, t, 0.0, y) == pytest.approx(ref, rel=1e-13)

    def test_chapman_kolmogorov(self):
        s, t, x, y = 0.4, 0.6, 1.0, 2.0
        lhs, _ = quad(
            lambda z: besq_density(NU_ONE, s, x, z) * besq_density(NU_ONE, t, z, y),
            0,
            np.inf,
            limit=200,
        )
        assert lhs == pytest.approx(besq_density(NU_ONE, s + t, x, y), rel=1e-7)

    def test_domain(self):
        with pytest.raises(DomainError):
            besq_density(NU_ONE, -1.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            besq_density(NU_ONE, 1.0, 1.0, -1.0)


class TestConditionedDensity:
    def test_n1_reduction(self):
        mu = DriftSpectrum([1.2])
        v = conditioned_density(NU_ONE, mu, 0.8, [0.9], [1.7])
        lam = 0.6
        ref = (
            math.exp(-lam * 0.8)
            * phi(1.0, lam, 1.7)
            / phi(1.0, lam, 0.9)
            * besq_density(NU_ONE, 0.8, 0.9, 1.7)
        )
        assert v == pytest.approx(ref, rel=1e-13)

    def test_time_one_symmetry(self):
        # swapping starting point and drift spectrum leaves the t=1 density fixed
        mu = DriftSpectrum([0.5, 2.0])
        x = np.array([1.0, 3.0])
        y = np.array([0.7, 4.0])
        lhs = conditioned_density(NU_ONE, mu, 1.0, x, y)
        rhs = conditioned_density(NU_ONE, DriftSpectrum(x), 1.0, mu.mu, y)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_normalization_w2(self):
        mu = DriftSpectrum([0.5, 2.0])
        x = np.array([1.0, 3.0])
        mass, _ = dblquad(
            lambda y2, y1: conditioned_density(NU_ONE, mu, 1.0, x, [y1, y2]),
            0,
            60,
            lambda y1: y1,
            70,
            epsabs=1e-6,
        )
        assert mass == pytest.approx(1.0, abs=1e-4)

    def test_degenerate_flag_dispatches(self):
        x = np.array([1.0, 3.0])
        y = np.array([0.7, 4.0])
        assert conditioned_density(NU_ONE, DriftSpectrum.zero(2), 1.0, x, y) == pytest.approx(
            laguerre_density(NU_ONE, 1.0, x, y), rel=1e-14
        )

    def test_small_mu_matches_laguerre(self):
        eps = 1e-4
        x = np.array([1.0, 3.0])
        y = np.array([0.7, 4.0])
        drifted = conditioned_density(NU_ONE, DriftSpectrum([eps, 2 * eps]), 1.0, x, y)
        flat = laguerre_density(NU_ONE, 1.0, x, y)
        assert drifted == pytest.approx(flat, rel=1e-3)

    def test_positivity_random_tuples(self):
        rng = np.random.default_rng(7)
        B = 10_000
        y1 = rng.uniform(0.05, 8.0, B)
        ys = np.stack([y1, y1 + rng.uniform(0.01, 8.0, B)], axis=1)
        mu = DriftSpectrum([0.3, 1.7])
        vals = conditioned_density_many(NU_HALF, mu, 0.9, [0.8, 2.2], ys)
        assert (vals >= 0.0).all()
        assert np.isfinite(vals).all()

    def test_mu_perturbation_continuity(self):
        x = np.array([1.0, 3.0])
        y = np.array([0.7, 4.0])
        base = conditioned_density(NU_ONE, DriftSpectrum([0.5, 2.0]), 1.0, x, y)
        rel = 1e-6
        moved = conditioned_density(NU_ONE, DriftSpectrum([0.5 * (1 + rel), 2.0 * (1 + rel)]), 1.0, x, y)
        assert abs(moved - base) / base <= 10.0 * rel

    def test_batch_matches_scalar(self):
        mu = DriftSpectrum([0.5, 2.0])
        x = [1.0, 3.0]
        ys = np.array([[0.7, 4.0], [1.1, 2.2], [0.2, 9.0]])
        batch = conditioned_density_many(NU_ONE, mu, 1.0, x, ys)
        for row, v in zip(ys, batch):
            assert v == pytest.approx(conditioned_density(NU_ONE, mu, 1.0, x, row), rel=1e-12)


class TestLaguerreDensity:
    def test_n1_reduces_to_besq(self):
        assert laguerre_density(NU_ONE, 0.8, [0.9], [1.7]) == pytest.approx(
            besq_density(NU_ONE, 0.8, 0.9, 1.7), rel=1e-14
        )

    def test_normalization_w2(self):
        x = np.array([1.0, 3.0])
        mass, _ = dblquad(
            lambda y2, y1: laguerre_density(NU_ONE, 1.0, x, [y1, y2]),
            0,
            60,
            lambda y1: y1,
            70,
            epsabs=1e-6,
        )
        assert mass == pytest.approx(1.0, abs=1e-4)


class TestNoncollisionProb:
    def test_n1_is_one(self):
        spec = besq_spec(NU_ONE)
        assert noncollision_prob(spec, [0.7], [2.0]) == pytest.approx(1.0, rel=1e-14)

    def test_collision_limit_vanishes(self):
        spec = besq_spec(NU_ONE)
        vals = [
            noncollision_prob(spec, [0.25, 1.0], [1.0, 1.0 + g]) for g in [1.0, 0.1, 0.01, 0.001]
        ]
        assert all(v2 < v1 for v1, v2 in zip(vals, vals[1:]))
        assert vals[-1] < 1e-2

    @given(
        lam1=st.floats(0.05, 0.5),
        dlam=st.floats(0.1, 2.0),
        x1=st.floats(0.1, 4.0),
        gap=st.floats(0.05, 20.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_in_unit_interval(self, lam1, dlam, x1, gap):
        spec = besq_spec(NU_HALF)
        p = noncollision_prob(spec, [lam1, lam1 + dlam], [x1, x1 + gap])
        assert 0.0 < p <= 1.0

    def test_ordering_required(self):
        spec = besq_spec(NU_ONE)
        with pytest.raises(OrderingError):
            noncollision_prob(spec, [1.0, 0.25], [1.0, 6.0])


class TestGenericPath:
    def test_matches_besq_path(self):
        spec = besq_spec(NU_ONE)
        mu = DriftSpectrum([0.5, 2.0])
        p_t = lambda a, b: besq_density(NU_ONE, 1.0, a, b)
        rng = np.random.default_rng(3)
        for _ in range(5):
            x = np.sort(rng.uniform(0.2, 4.0, 2))
            y = np.sort(rng.uniform(0.2, 6.0, 2))
            x[1] += 0.1
            y[1] += 0.1
            g = conditioned_density_generic(spec, p_t, mu.lambdas, 1.0, x, y)
            ref = conditioned_density(NU_ONE, mu, 1.0, x, y)
            assert g == pytest.approx(ref, rel=1e-12)

    def test_n1_doob_kernel(self):
        spec = besq_spec(NU_HALF)
        lam = 0.8
        p_t = lambda a, b: besq_density(NU_HALF, 0.5, a, b)
        v = conditioned_density_generic(spec, p_t, [lam], 0.5, [1.0], [2.0])
        d = doob_of(spec, lam)
        ref = math.exp(-lam * 0.5) * spec.psi(lam, 2.0) / spec.psi(lam, 1.0) * p_t(1.0, 2.0)
        assert v == pytest.approx(ref, rel=1e-12)
        assert d.b(1.0) > 0  # transformed spec exists alongside the kernel

    def test_andreief_consistency(self):
        # integral of det(p_t) det(psi(y)) over the chamber reproduces
        # e^{t sum lam} det(psi(x))
        spec = besq_spec(NU_ONE)
        lam = np.array([0.25, 1.0])
        x = np.array([0.8, 2.5])
        t = 0.5

        def integrand(y2, y1):
            Lq = np.array(
                [[math.log(besq_density(NU_ONE, t, xi, yj)) for yj in (y1, y2)] for xi in x]
            )
            Lp = np.array(
                [[spec.log_psi_eval(l, yj) for yj in (y1, y2)] for l in lam]
            )
            from besq.kernels import slogdet_from_logs

            sq, ldq = slogdet_from_logs(Lq)
            sp, ldp = slogdet_from_logs(Lp)
            return sq * sp * math.exp(ldq + ldp)

        val, _ = dblquad(integrand, 0, 50, lambda y1: y1, 60, epsabs=1e-9)
        from besq.kernels import slogdet_from_logs

        Lx = np.array([[spec.log_psi_eval(l, xi) for xi in x] for l in lam])
        s, ld = slogdet_from_logs(Lx)
        ref = s * math.exp(float(lam.sum()) * t + ld)
        assert val == pytest.approx(ref, rel=1e-5)


class TestEntranceDensity:
    def test_n1_reduction(self):
        mu = DriftSpectrum([1.2])
        lam = 0.6
        t, y = 0.9, 1.3
        ref = (
            math.exp(-lam * t)
            * phi(1.0, lam, y)
            * besq_density(NU_ONE, t, 0.0, y)
            / phi(1.0, lam, 0.0)
        )
        assert entrance_density(NU_ONE, mu, t, [y]) == pytest.approx(ref, rel=1e-13)

    def test_mass_w2(self):
        mu = DriftSpectrum([1.0, 4.0])
        mass, _ = dblquad(
            lambda y2, y1: entrance_density(NU_ONE, mu, 1.0, [y1, y2]),
            0,
            60,
            lambda y1: y1,
            70,
            epsabs=1e-6,
        )
        assert mass == pytest.approx(1.0, abs=1e-4)

    def test_degenerate_mass_w2(self):
        mass, _ = dblquad(
            lambda y2, y1: entrance_density(NU_ONE, DriftSpectrum.zero(2), 1.0, [y1, y2]),
            0,
            50,
            lambda y1: y1,
            60,
            epsabs=1e-6,
        )
        assert mass == pytest.approx(1.0, abs=1e-4)

    def test_entrance_law_consistency_pointwise(self):
        # evolving the t-law by the transition kernel for s gives the (t+s)-law
        mu = DriftSpectrum([1.0, 4.0])
        t, s = 0.5, 0.5
        y = np.array([1.5, 5.0])

        def integrand(z2, z1):
            return entrance_density(NU_ONE, mu, t, [z1, z2]) * conditioned_density(
                NU_ONE, mu, s, [z1, z2], y
            )

        lhs, _ = dblquad(integrand, 0, 40, lambda z1: z1, 50, epsabs=1e-7)
        rhs = entrance_density(NU_ONE, mu, t + s, y)
        assert lhs == pytest.approx(rhs, rel=2e-4)
