import math

import numpy as np
import pytest
from scipy.special import gammaln

from cwgng.errors import DomainError, SolverInvariantViolation, UnclassifiableError
from cwgng.model import (ModelParams, a_fn, a_prime, b_fn, b_prime, entropy,
                         k_fn, k_prime, k_zeros, l_fn, lagrangian,
                         lagrangian_dv, m_infinity, mean_field_potential,
                         static_rate)

# frozen from 40-digit evaluations of the same formulas
ENTROPY_HALF = 0.13081203594113695913
M_INF_J2 = 0.95750402407726874068
M_INF_J05_H03 = 0.50083188766986502719


def test_params_validation():
    with pytest.raises(DomainError):
        ModelParams(-1.0, 0.0)
    with pytest.raises(DomainError):
        ModelParams(0.0, 0.0)
    with pytest.raises(DomainError):
        ModelParams(1.0, float("nan"))


def test_potential_direct_values():
    assert mean_field_potential(0.0, ModelParams(1.7, 0.9)) == 0.0
    assert mean_field_potential(1.0, ModelParams(1.0, 0.0)) == -0.5
    assert mean_field_potential(-1.0, ModelParams(2.0, 0.5)) == pytest.approx(-0.5)


def test_entropy_values_and_sign():
    assert entropy(0.0) == 0.0
    assert entropy(1.0) == pytest.approx(math.log(2.0), abs=1e-15)
    assert entropy(-1.0) == pytest.approx(math.log(2.0), abs=1e-15)
    assert entropy(0.5) == pytest.approx(ENTROPY_HALF, abs=1e-16)
    for m in np.linspace(-0.999, 0.999, 41):
        if m != 0.0:
            assert entropy(float(m)) > 0.0


def test_static_rate_values():
    p = ModelParams(1.0, 0.0)
    assert static_rate(0.0, p) == 0.0
    assert static_rate(1.0, p) == pytest.approx(math.log(2.0) - 0.5, abs=1e-15)


def test_static_rate_against_binomial_weights():
    """Finite-N log-weights converge to the static rate (exact binomials)."""
    p = ModelParams(1.6, 0.0)
    m_ref = 0.0

    def finite_n_diff(N, m):
        k = round((1.0 + m) / 2.0 * N)
        kr = round((1.0 + m_ref) / 2.0 * N)

        def logw(kk):
            mm = 2.0 * kk / N - 1.0
            return (gammaln(N + 1) - gammaln(kk + 1) - gammaln(N - kk + 1)
                    + N * (0.5 * p.J * mm * mm + p.h * mm))

        return -(logw(k) - logw(kr)) / N

    exact = static_rate(0.3, p) - static_rate(m_ref, p)
    gap_2000 = abs(finite_n_diff(2000, 0.3) - exact)
    gap_8000 = abs(finite_n_diff(8000, 0.3) - exact)
    assert gap_2000 < 5e-3
    assert gap_8000 < gap_2000  # Stirling corrections shrink with N


def test_lagrangian_deterministic_flow_is_free():
    for m in np.linspace(-0.95, 0.95, 21):
        assert lagrangian(float(m), -2.0 * float(m)) == pytest.approx(0.0, abs=1e-14)
    assert lagrangian(0.0, 0.0) == 0.0
    assert lagrangian(0.5, 0.0) == pytest.approx(1.0 - math.sqrt(0.75), abs=1e-15)


def test_lagrangian_strictly_positive_off_flow(rng):
    for _ in range(40):
        m = rng.uniform(-0.95, 0.95)
        v = rng.uniform(-3.0, 3.0)
        if abs(v + 2.0 * m) > 1e-6:
            assert lagrangian(m, v) > 0.0


def test_lagrangian_endpoints():
    with pytest.raises(DomainError):
        lagrangian(1.0, 0.0)
    with pytest.raises(DomainError):
        lagrangian(1.0, 0.5)
    with pytest.raises(DomainError):
        lagrangian(-1.0, -0.5)
    # inward velocities take the limiting value
    assert math.isfinite(lagrangian(1.0, -1.0))
    assert lagrangian(-1.0, 1.0) == lagrangian(1.0, -1.0)
    with pytest.raises(DomainError):
        lagrangian(1.5, 0.0)


def test_lagrangian_dv_closed_form(rng):
    # dL/dv = log((S+v)/(2(1-m)))/2, checked by central differences
    for _ in range(15):
        m = rng.uniform(-0.9, 0.9)
        v = rng.uniform(-2.5, 2.5)
        h = 1e-6
        fd = (lagrangian(m, v + h) - lagrangian(m, v - h)) / (2.0 * h)
        assert lagrangian_dv(m, v) == pytest.approx(fd, abs=1e-9)


def test_ab_basics(rng):
    assert a_fn(0.0, 1.7) == 0.0
    assert b_fn(0.0, 1.7) == 1.0
    for _ in range(20):
        m = rng.uniform(-1.0, 1.0)
        J = rng.uniform(0.1, 3.0)
        assert a_fn(-m, J) == pytest.approx(-a_fn(m, J), abs=1e-14)
        assert b_fn(-m, J) == pytest.approx(b_fn(m, J), abs=1e-14)


def test_ab_derivative_formulas(rng):
    h = 1e-6
    for _ in range(20):
        m = rng.uniform(-0.95, 0.95)
        J = rng.uniform(0.2, 3.0)
        fd_a = (a_fn(m + h, J) - a_fn(m - h, J)) / (2.0 * h)
        fd_b = (b_fn(m + h, J) - b_fn(m - h, J)) / (2.0 * h)
        assert a_prime(m, J) == pytest.approx(fd_a, rel=1e-7, abs=1e-8)
        assert b_prime(m, J) == pytest.approx(fd_b, rel=1e-7, abs=1e-8)


def test_k_reduction_identity(rng):
    # k = 2 cosh^2(Jm+h) [tanh(Jm+h) - m] + m
    for _ in range(40):
        p = ModelParams(rng.uniform(0.1, 3.0), rng.uniform(-1.0, 1.0))
        m = rng.uniform(-1.0, 1.0)
        x = p.J * m + p.h
        ident = 2.0 * math.cosh(x) ** 2 * (math.tanh(x) - m) + m
        assert k_fn(m, p) == pytest.approx(ident, abs=1e-12)


def test_k_special_values(rng):
    for J in (0.5, 1.3, 2.7):
        assert k_fn(0.0, ModelParams(J, 0.0)) == 0.0
        for h in (0.2, -0.7):
            assert k_fn(0.0, ModelParams(J, h)) == pytest.approx(math.sinh(2 * h))
    # odd in m at h = 0
    for _ in range(10):
        m = rng.uniform(0.0, 1.0)
        p = ModelParams(rng.uniform(0.2, 3.0), 0.0)
        assert k_fn(-m, p) == pytest.approx(-k_fn(m, p), abs=1e-14)


def test_k_prime_against_finite_differences(rng):
    h = 1e-6
    for _ in range(20):
        p = ModelParams(rng.uniform(0.2, 3.0), rng.uniform(-1.0, 1.0))
        m = rng.uniform(-0.95, 0.95)
        fd = (k_fn(m + h, p) - k_fn(m - h, p)) / (2.0 * h)
        assert abs(k_prime(m, p) - fd) <= 1e-7 * max(1.0, abs(fd))


def test_l_stable_forms():
    # identity l(alpha, t, alpha) = alpha tanh(t)
    for t, alpha in ((0.7, 0.35), (3.0, -0.6), (25.0, 0.9)):
        assert l_fn(alpha, t, alpha) == pytest.approx(alpha * math.tanh(t), abs=1e-14)
    # naive vs stable form at moderate t
    m, t, alpha = 0.2, 0.5, 0.1
    naive = m / math.tanh(2 * t) - alpha / math.sinh(2 * t)
    assert l_fn(m, t, alpha) == pytest.approx(naive, abs=1e-14)
    # stays finite for very large and very small t
    assert l_fn(0.3, 500.0, 0.1) == pytest.approx(0.3, abs=1e-12)
    assert math.isfinite(l_fn(0.3, 1e-12, 0.1))
    with pytest.raises(DomainError):
        l_fn(0.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        l_fn(0.0, -1.0, 0.0)


def test_l_slope_above_one(rng):
    for _ in range(10):
        t = rng.uniform(0.01, 10.0)
        alpha = rng.uniform(-1.0, 1.0)
        slope = (l_fn(0.5, t, alpha) - l_fn(-0.5, t, alpha))
        assert slope > 1.0


def test_m_infinity_values():
    assert m_infinity(ModelParams(1.0, 0.0)) == pytest.approx(0.0, abs=1e-10)
    assert m_infinity(ModelParams(2.0, 0.0)) == pytest.approx(M_INF_J2, abs=1e-12)
    assert m_infinity(ModelParams(0.5, 0.3)) == pytest.approx(M_INF_J05_H03, abs=1e-12)
    for p in (ModelParams(2.0, 0.0), ModelParams(0.5, 0.3), ModelParams(2.9, 0.15)):
        m = m_infinity(p)
        assert abs(math.tanh(p.J * m + p.h) - m) <= 1e-12


def test_k_sign_pattern_around_m_infinity(rng):
    # for m > 0: k(m) < m iff m > m_infinity
    for p in (ModelParams(2.0, 0.0), ModelParams(1.5, 0.2), ModelParams(0.95, 0.01)):
        minf = m_infinity(p)
        for m in np.linspace(1e-3, 1.0 - 1e-3, 57):
            m = float(m)
            if abs(m - minf) < 1e-6:
                continue
            assert (k_fn(m, p) < m) == (m > minf)


def test_k_zeros_symmetric_case():
    zs = k_zeros(ModelParams(2.0, 0.0))
    assert len(zs) == 3 and zs[1] == pytest.approx(0.0, abs=1e-12)
    assert zs[0] == pytest.approx(-zs[2], abs=1e-11)
    # subcritical J at h=0: only the zero at the origin
    zs = k_zeros(ModelParams(0.4, 0.0))
    assert len(zs) == 1 and zs[0] == pytest.approx(0.0, abs=1e-12)


def test_k_zeros_field_case():
    p = ModelParams(0.95, 0.01)
    zs = k_zeros(p)
    assert all(abs(k_fn(z, p)) <= 1e-12 for z in zs)
    from cwgng.model import a_over_b
    grid = np.linspace(-1.0, 0.0, 2001)
    max_a = float(np.max(a_over_b(grid, p.J)))
    if math.tanh(2 * p.h) < max_a:
        assert len(zs) == 3 and zs[0] < zs[1] < 0.0 < zs[2]
    else:
        assert len(zs) == 1 and zs[0] > 0.0
    # mirror symmetry in h
    zs_neg = k_zeros(ModelParams(0.95, -0.01))
    assert zs_neg == pytest.approx([-z for z in reversed(zs)], abs=1e-12)


def test_b_never_vanishes_checked():
    from cwgng.model import a_over_b
    for J in (0.3, 1.0, 2.0, 3.0):
        vals = a_over_b(np.linspace(-1.0, 1.0, 513), J)
        assert np.all(np.isfinite(vals))
