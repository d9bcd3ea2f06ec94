"""Separation of variables: the invariant polynomial P0, the action S(q),
the constants beta_l and recovery of momenta from positions.

All contour integrals run along the straight segment from 0 to q_k.  For the
goldfish, phi = log is continued along that segment from the principal value
at 0, using the factorisation P0(y) = P0(0) prod_i (1 - y/r_i): each factor
stays off the negative real axis unless its root lies on the segment, which
is reported as a :class:`ContourSingularity`.
"""

from dataclasses import dataclass

import numpy as np

from . import _quadrature, flow, polycore
from .errors import BranchAmbiguity, ContourSingularity
from .hamfam import EtaFamily, PhaseState, family_polynomial

QUAD_RTOL = 1e-10
HJ_STEP = 1e-3
#: imaginary offset (after choosing the nearest branch) that flags a missed wrap
UNWRAP_LIMIT = 0.5 * np.pi


@dataclass(frozen=True, eq=False)
class SeparationData:
    """P0 together with the family it belongs to.

    ``quadrature_nodes`` is the Kronrod rule size per panel; only 15 is built.
    """

    P0: polycore.Polynomial
    family: EtaFamily
    quadrature_nodes: int = 15

    def __post_init__(self):
        if self.quadrature_nodes != 15:
            raise ValueError("only the 7/15-point Gauss-Kronrod pair is available")
        object.__setattr__(self, "_roots", None)

    @classmethod
    def from_state(cls, family, state):
        return cls(family_polynomial(family, state), family)

    @property
    def N(self):
        return self.family.N

    @property
    def P0_roots(self):
        """Roots of the trimmed P0 (empty when P0 is constant)."""
        if self._roots is None:
            p = self.P0.trimmed()
            r = polycore.roots(p).roots if p.degree > 0 else np.zeros(0, complex)
            object.__setattr__(self, "_roots", r)
        return self._roots


def _check_contour(sep, k, qk, start=0j):
    """Goldfish only: phi and 1/eta' are singular where P0 vanishes on [start, q_k]."""
    if not sep.family.is_goldfish or qk == start:
        return
    d = qk - start
    scale = max(1.0, abs(qk), abs(start))
    if np.all(sep.P0.coeffs == 0) or polycore.evaluate(sep.P0, start) == 0:
        raise ContourSingularity(f"P0 vanishes at the contour start {start:.6g}",
                                 k=k, point=complex(start))
    for r in sep.P0_roots:
        s = min(1.0, max(0.0, ((r - start) * np.conj(d)).real / abs(d) ** 2))
        if abs(r - start - s * d) <= 1e-12 * scale:
            raise ContourSingularity(
                f"P0 has a zero at {r:.6g} on the contour {start:.6g} -> q_{k + 1}",
                k=k, point=r)


def continued_log(sep, y):
    """log P0(y) continued from the principal value at 0 along the ray through y."""
    y = np.asarray(y, dtype=complex)
    p0 = sep.P0.trimmed()
    out = np.full(y.shape, np.log(complex(p0.coeffs[-1])), dtype=complex)
    for r in sep.P0_roots:
        out = out + np.log(1.0 - y / r)
    return out


def _phi_on(sep, k, y):
    if sep.family.is_goldfish:
        return continued_log(sep, y)
    x = polycore.evaluate(sep.P0, y)
    return np.asarray(sep.family.members[k].phi(x), dtype=complex)


def _inv_speed_on(sep, k, y):
    """1 / eta_k'(phi_k[P0(y)]); the goldfish composite is 1 / P0(y)."""
    x = polycore.evaluate(sep.P0, y)
    if sep.family.is_goldfish:
        return 1.0 / x
    m = sep.family.members[k]
    return 1.0 / np.asarray(m.deta(m.phi(x)), dtype=complex)


def endpoint_phi(sep, q):
    """phi_k[P0(q_k)] on the branch reached along the segment 0 -> q_k."""
    q = np.asarray(q, dtype=complex)
    return np.array([_phi_on(sep, k, qk) for k, qk in enumerate(q)], dtype=complex)


def _segment(sep, k, qk, integrand, rtol, start=0j):
    _check_contour(sep, k, qk, start)
    if qk == start:
        return None
    d = qk - start

    def f(s):
        return integrand(start + s * d) * d

    val, _, _ = _quadrature.integrate(f, 0.0, 1.0, rtol=rtol)
    return val


def action_terms(sep, q, rtol=QUAD_RTOL):
    """Per-coordinate integrals int_0^{q_k} phi_k[P0(y)] dy."""
    q = np.asarray(q, dtype=complex)
    _check_size(sep, q)
    out = np.zeros(q.size, dtype=complex)
    for k, qk in enumerate(q):
        v = _segment(sep, k, qk, lambda y, k=k: _phi_on(sep, k, y), rtol)
        if v is not None:
            out[k] = v[0] if np.ndim(v) else v
    return out


def action(sep, q, rtol=QUAD_RTOL):
    """S(q) = sum_k int_0^{q_k} phi_k[P0(y)] dy along straight segments."""
    return complex(np.sum(action_terms(sep, q, rtol)))


def _beta_integrand(sep, k):
    powers = np.arange(sep.N - 1, -1, -1)

    def integrand(y):
        return y[:, None] ** powers[None, :] * _inv_speed_on(sep, k, y)[:, None]
    return integrand


def beta_constants(sep, q, rtol=QUAD_RTOL):
    """beta_l = sum_k int_0^{q_k} y^{N-l} / eta_k'(phi_k[P0(y)]) dy, l = 1..N."""
    q = np.asarray(q, dtype=complex)
    _check_size(sep, q)
    beta = np.zeros(sep.N, dtype=complex)
    for k, qk in enumerate(q):
        v = _segment(sep, k, qk, _beta_integrand(sep, k), rtol)
        if v is not None:
            beta += v
    return beta


def beta_along_path(sep, q_path, rtol=QUAD_RTOL):
    """beta at every sample of a position path, continued along the path.

    The first row uses straight segments from 0; later rows add the integral
    over the chord between consecutive samples.  When q_k(t) drags its
    segment from 0 across a zero of P0, the straight-segment value jumps by
    2 pi i times a residue, while the continued value stays constant.
    """
    q_path = np.atleast_2d(np.asarray(q_path, dtype=complex))
    out = np.empty(q_path.shape, dtype=complex)
    out[0] = beta_constants(sep, q_path[0], rtol)
    for i in range(1, len(q_path)):
        step = np.zeros(sep.N, dtype=complex)
        for k in range(sep.N):
            v = _segment(sep, k, q_path[i, k], _beta_integrand(sep, k), rtol,
                         start=q_path[i - 1, k])
            if v is not None:
                step += v
        out[i] = out[i - 1] + step
    return out


def linear_beta(q):
    """Closed form of beta for eta = identity: sum_k q_k^{N-l+1} / (N-l+1)."""
    q = np.asarray(q, dtype=complex)
    N = q.size
    return np.array([np.sum(q ** (N - l + 1)) / (N - l + 1) for l in range(1, N + 1)])


def _check_size(sep, q):
    if q.size != sep.N:
        raise ValueError(f"expected {sep.N} positions, got {q.size}")


def momentum_recovery_check(sep, state):
    """max_k |P0(q_k) - eta_k(p_k)| / max(1, |eta_k(p_k)|)."""
    eta = sep.family.eta(state.p)
    x = polycore.evaluate(sep.P0, state.q)
    return float(np.max(np.abs(x - eta) / np.maximum(1.0, np.abs(eta))))


def recover_momenta(sep, q_path, p0=None):
    """p_k(t) = phi_k[P0(q_k(t))] along a sampled path of positions.

    For the goldfish the logarithm is unwrapped sample to sample, starting
    from ``p0`` (or the principal branch).  A vanishing P0(q_k) or a residual
    imaginary jump above pi/2 after unwrapping raises BranchAmbiguity.
    """
    q_path = np.atleast_2d(np.asarray(q_path, dtype=complex))
    x = polycore.evaluate(sep.P0, q_path)
    if not sep.family.is_goldfish:
        return sep.family.phi(x)
    scale = max(1.0, float(np.max(np.abs(sep.P0.coeffs))))
    if np.any(np.abs(x) <= 1e-14 * scale):
        raise BranchAmbiguity("P0 vanishes at a particle position; log branch undefined")
    raw = np.log(x)
    out = np.empty_like(raw)
    prev = raw[0] if p0 is None else np.asarray(p0, dtype=complex)
    for i, row in enumerate(raw):
        turns = np.round((prev.imag - row.imag) / (2 * np.pi))
        cand = row + 2j * np.pi * turns
        if np.any(np.abs(cand.imag - prev.imag) > UNWRAP_LIMIT):
            raise BranchAmbiguity(f"log branch jump at sample {i}; sampling too coarse")
        out[i] = prev = cand
    return out


def hamilton_jacobi_check(sep, q, step=None):
    """Compare a 4-point central difference of S with phi_k[P0(q_k)].

    Returns the largest deviation scaled by max(1, |phi_k|).
    """
    q = np.asarray(q, dtype=complex)
    _check_size(sep, q)
    target = endpoint_phi(sep, q)
    dev = 0.0
    for k, qk in enumerate(q):
        h = step if step is not None else HJ_STEP * max(1.0, abs(qk))

        def term(z, k=k):
            v = _segment(sep, k, z, lambda y: _phi_on(sep, k, y), QUAD_RTOL)
            return 0.0 if v is None else complex(np.ravel(v)[0])

        d = (-term(qk + 2 * h) + 8 * term(qk + h) - 8 * term(qk - h) + term(qk - 2 * h)) / (12 * h)
        dev = max(dev, abs(d - target[k]) / max(1.0, abs(target[k])))
    return float(dev)


def reduced_consistency(sep, k, state):
    """|dq from Hamilton's equations with recovered momenta - reduced dq|, scaled."""
    spec = flow.FlowSpec(sep.family, "single_h", k)
    p = recover_momenta(sep, state.q[None, :])[0]
    _, dq_h = flow.hamilton_rhs(spec, PhaseState(p, state.q))
    dq_r = flow.reduced_rhs(spec, sep.P0, state.q)
    return float(np.max(np.abs(dq_h - dq_r)) / max(1.0, float(np.max(np.abs(dq_r)))))
