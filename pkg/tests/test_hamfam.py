import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from goldfish import hamfam, polycore
from goldfish.errors import (DegenerateConfiguration, InconsistentFamily, UnknownFamily,
                             UnsupportedFamily)
from goldfish.hamfam import EtaMember, PhaseState

from conftest import LN2, complex_scalars, random_states


def test_builtin_family_examples():
    gf = hamfam.builtin_family("goldfish", 2)
    assert gf.eta([0.0, 0.0])[0] == 1
    assert hamfam.builtin_family("linear", 3).phi([1.0, 7.5, 2.0])[1] == 7.5
    assert gf.phi([2.0, 2.0])[0] == pytest.approx(math.log(2.0), abs=1e-15)


def test_unknown_family():
    with pytest.raises(UnknownFamily):
        hamfam.builtin_family("toda", 3)


def test_phase_state_validation():
    with pytest.raises(DegenerateConfiguration):
        PhaseState([0, 0], [1.0, 1.0])
    with pytest.raises(ValueError):
        PhaseState([0, 0], [1.0])


@pytest.mark.parametrize("name, p, q, expected", [
    ("goldfish", (0, 0), (0, 1), (0, 1)),
    ("goldfish", (0, LN2), (0, 1), (1, 1)),
    ("linear", (3, 3, 3), (1, 2, 5), (0, 0, 3)),
])
def test_family_polynomial_examples(name, p, q, expected):
    fam = hamfam.builtin_family(name, len(p))
    got = hamfam.family_polynomial(fam, PhaseState(p, q)).coeffs
    np.testing.assert_allclose(got, expected, atol=1e-14)


def test_observables_worked_state(worked_state):
    fam = hamfam.builtin_family("goldfish", 2)
    obs = hamfam.observables(fam, worked_state)
    np.testing.assert_allclose(obs.h, [1, 1], atol=1e-14)
    np.testing.assert_allclose(obs.e, [1, 0], atol=1e-14)
    assert obs.P == pytest.approx(LN2)
    assert obs.e_ext[0] == -1 and obs.h_ext[0] == 0


def test_observables_linear_zero():
    fam = hamfam.builtin_family("linear", 2)
    obs = hamfam.observables(fam, PhaseState([0, 0], [1, 2]))
    np.testing.assert_array_equal(obs.h, [0, 0])


@pytest.mark.parametrize("name", ["goldfish", "linear"])
def test_observables_single_particle(name):
    fam = hamfam.builtin_family(name, 1)
    obs = hamfam.observables(fam, PhaseState([0.3 + 0.1j], [2.0]))
    assert obs.h[0] == pytest.approx(fam.eta([0.3 + 0.1j])[0])


def test_deformed_tilde_examples(worked_state):
    fam = hamfam.builtin_family("goldfish", 2)
    base = hamfam.observables(fam, worked_state)
    np.testing.assert_array_equal(hamfam.deformed_tilde(fam, 0.0, worked_state).h, base.h)
    assert hamfam.deformed_tilde(fam, 1.0, worked_state).h[0] == pytest.approx(2.0)
    real_state = PhaseState([0.2, -0.4, 0.1], [0.0, 1.0, -1.5])
    fam3 = hamfam.builtin_family("goldfish", 3)
    ht = hamfam.deformed_tilde(fam3, 1j, real_state)
    e = hamfam.observables(fam3, real_state).e
    np.testing.assert_allclose(ht.h.imag, (1j * e).imag, atol=1e-12)


def test_deformed_tilde_needs_goldfish(worked_state):
    with pytest.raises(UnsupportedFamily):
        hamfam.deformed_tilde(hamfam.builtin_family("linear", 2), 1.0, worked_state)


def test_general_H_examples(worked_state):
    fam = hamfam.builtin_family("goldfish", 2)
    obs = hamfam.observables(fam, worked_state)
    assert hamfam.general_H(fam, [1, 0], 0, worked_state) == pytest.approx(obs.h[0])
    assert hamfam.general_H(fam, [0, 0], 1, worked_state) == pytest.approx(1.0)
    assert hamfam.general_H(fam, [0, 1], 2, worked_state) == pytest.approx(3.0)
    with pytest.raises(UnsupportedFamily):
        hamfam.general_H(hamfam.builtin_family("linear", 2), [1, 0], 0, worked_state)


@pytest.mark.parametrize("name", ["goldfish", "linear"])
@pytest.mark.parametrize("N", range(1, 9))
def test_defining_property_and_routes(name, N):
    fam = hamfam.builtin_family(name, N)
    for st_ in random_states(N, N, 10):
        poly = hamfam.family_polynomial(fam, st_)
        eta = fam.eta(st_.p)
        got = polycore.evaluate(poly, st_.q)
        assert np.max(np.abs(got - eta)) <= 1e-10 * max(1.0, np.max(np.abs(eta)))
        assert hamfam.observables(fam, st_).route_discrepancy <= hamfam.ROUTE_RTOL


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10 ** 6), complex_scalars, complex_scalars)
def test_translation_covariance(N, seed, a, z):
    fam = hamfam.builtin_family("goldfish", N)
    s = random_states(seed, N, 1)[0]
    moved = s.translated(a)
    lhs = polycore.evaluate(hamfam.family_polynomial(fam, moved), z)
    rhs = polycore.evaluate(hamfam.family_polynomial(fam, s), z - a)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs))
    h1a = hamfam.observables(fam, moved).h[0]
    h1 = hamfam.observables(fam, s).h[0]
    assert abs(h1a - h1) <= 1e-10 * max(1.0, abs(h1))


@pytest.mark.parametrize("N", range(1, 7))
def test_goldfish_h1_direct_formula(N):
    fam = hamfam.builtin_family("goldfish", N)
    for s in random_states(100 + N, N, 10):
        # oracle: sum_r e^{p_r} / prod_{s != r}(q_r - q_s), written out
        ref = 0j
        for r in range(N):
            den = 1.0 + 0j
            for j in range(N):
                if j != r:
                    den *= s.q[r] - s.q[j]
            ref += np.exp(s.p[r]) / den
        assert abs(hamfam.observables(fam, s).h[0] - ref) <= 1e-12 * max(1.0, abs(ref))
        assert abs(hamfam.h1_goldfish_direct(s) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_custom_family_registration():
    sinh = EtaMember(np.sinh, np.cosh, np.arcsinh)
    fam = hamfam.EtaFamily.custom([sinh, sinh], domain=(-1, 1, -0.5, 0.5))
    assert fam.N == 2
    bad = EtaMember(np.sinh, np.cosh, lambda x: np.arcsinh(x) + 0.01)
    with pytest.raises(InconsistentFamily):
        hamfam.EtaFamily.custom([bad, bad])


def test_corrupted_builtin_fails_check():
    fam = hamfam.builtin_family("goldfish", 3, phi_offset=1e-3)
    report = hamfam.check_family(fam, np.random.default_rng(0))
    assert not report["passed"]
    assert report["inverse_residual"] == pytest.approx(1e-3, rel=1e-6)
