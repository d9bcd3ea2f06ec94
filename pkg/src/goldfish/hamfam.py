"""Eta families, phase-space states and the commuting Hamiltonians h_k.

The family polynomial H(z|p,q) is the degree N-1 interpolant taking the value
eta_k(p_k) at z = q_k.  Its coefficients (leading first) are h_1..h_N.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import polycore
from .errors import InconsistentFamily, UnknownFamily, UnsupportedFamily
from .polycore import NodeValueSet, Polynomial

#: tolerance for the direct Lagrange-sum route against the interpolation route
ROUTE_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class PhaseState:
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=complex).ravel()
        q = np.array(self.q, dtype=complex).ravel()
        if p.size != q.size or p.size < 1:
            raise ValueError("p and q must be non-empty and of equal length")
        polycore.check_separation(q)
        p.flags.writeable = False
        q.flags.writeable = False
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def N(self):
        return self.p.size

    def translated(self, a):
        return PhaseState(self.p, self.q + a)


@dataclass(frozen=True)
class EtaMember:
    """One coordinate's (eta, eta', phi) triple; all three act elementwise on arrays."""

    eta: Callable
    deta: Callable
    phi: Callable


@dataclass(frozen=True, eq=False)
class EtaFamily:
    """N member triples plus a sampling domain ``(re_min, re_max, im_min, im_max)`` for p."""

    name: str
    members: tuple
    domain: tuple = (-1.0, 1.0, -1.0, 1.0)
    uniform: bool = field(default=False)

    @property
    def N(self):
        return len(self.members)

    @property
    def is_goldfish(self):
        return self.name == "goldfish"

    def _apply(self, attr, x):
        x = np.asarray(x, dtype=complex)
        if self.uniform:
            return np.asarray(getattr(self.members[0], attr)(x), dtype=complex)
        if x.shape[-1] != self.N:
            raise ValueError(f"expected {self.N} components, got {x.shape[-1]}")
        return np.stack([np.asarray(getattr(m, attr)(x[..., k]), dtype=complex)
                         for k, m in enumerate(self.members)], axis=-1)

    def eta(self, p):
        return self._apply("eta", p)

    def deta(self, p):
        return self._apply("deta", p)

    def phi(self, x):
        return self._apply("phi", x)

    @classmethod
    def custom(cls, members: Sequence[EtaMember], domain=(-1.0, 1.0, -1.0, 1.0),
               name="custom", seed=0, samples=32):
        """Register a user family; raises InconsistentFamily if the triples disagree."""
        fam = cls(name=name, members=tuple(members), domain=tuple(domain))
        report = check_family(fam, np.random.default_rng(seed), samples)
        if not report["passed"]:
            raise InconsistentFamily(
                f"family {name!r} failed self-consistency: inverse residual "
                f"{report['inverse_residual']:.2e}, derivative residual "
                f"{report['derivative_residual']:.2e}")
        return fam


_GOLDFISH = EtaMember(np.exp, np.exp, np.log)
_LINEAR = EtaMember(lambda p: p, lambda p: np.ones_like(p), lambda x: x)


def builtin_family(name, N, phi_offset=0.0):
    """Built-in families: ``goldfish`` (eta = exp) and ``linear`` (eta = identity).

    ``phi_offset`` shifts the inverse and exists only as a negative control for
    the registration check; any nonzero value makes the triple inconsistent.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if name == "goldfish":
        member = _GOLDFISH
    elif name == "linear":
        member = _LINEAR
    else:
        raise UnknownFamily(f"unknown family {name!r}")
    if phi_offset:
        member = EtaMember(member.eta, member.deta,
                           lambda x, _phi=member.phi: _phi(x) + phi_offset)
    return EtaFamily(name=name, members=(member,) * N, uniform=True)


def sample_domain(fam, rng, size):
    lo_r, hi_r, lo_i, hi_i = fam.domain
    return rng.uniform(lo_r, hi_r, size) + 1j * rng.uniform(lo_i, hi_i, size)


def check_family(fam, rng, samples=32, inverse_tol=1e-10, derivative_tol=1e-6):
    """Sample the family's domain and check phi(eta(p)) = p and eta' against finite differences."""
    p = sample_domain(fam, rng, (samples, fam.N))
    inv = np.max(np.abs(fam.phi(fam.eta(p)) - p))
    step = 1e-5
    fd = (fam.eta(p + step) - fam.eta(p - step)) / (2 * step)
    d = fam.deta(p)
    der = np.max(np.abs(fd - d) / np.maximum(1.0, np.abs(d)))
    return {
        "inverse_residual": float(inv),
        "derivative_residual": float(der),
        "passed": bool(inv <= inverse_tol and der <= derivative_tol),
    }


@dataclass(frozen=True, eq=False)
class ObservableSet:
    """h_1..h_N, e_1..e_N and total momentum P at one state.

    ``route_discrepancy`` records how far the two independent constructions of
    h disagreed (relative).
    """

    h: np.ndarray
    e: np.ndarray
    P: complex
    route_discrepancy: float = 0.0

    @property
    def N(self):
        return self.h.size

    @property
    def h_ext(self):
        """(h_0, h_1, ..., h_N) with h_0 = 0."""
        return np.concatenate([[0.0], self.h]).astype(complex)

    @property
    def e_ext(self):
        """(e_0, e_1, ..., e_N) with e_0 = -1."""
        return np.concatenate([[-1.0], self.e]).astype(complex)


def _check_sizes(fam, state):
    if fam.N != state.N:
        raise ValueError(f"family has {fam.N} members but state has N = {state.N}")


def family_polynomial(fam, state):
    _check_sizes(fam, state)
    return polycore.interpolate(NodeValueSet(state.q, fam.eta(state.p)))


def h_direct(fam, state):
    """h_k from the explicit sum over r of eta_r(p_r) de_k/dq_r / prod_{l != r}(q_r - q_l).

    de_k/dq_r = (-1)**(k-1) sigma_{k-1}(q without q_r), obtained from the
    elementary symmetric functions of the N-1 remaining positions.
    """
    _check_sizes(fam, state)
    q = state.q
    N = state.N
    eta = fam.eta(state.p)
    w = polycore.barycentric_weights(q)
    h = np.zeros(N, dtype=complex)
    for r in range(N):
        rest = np.delete(q, r)
        # (-1)**(k-1) sigma_{k-1} for k = 1..N, built from e_j(rest) = (-1)**(j-1) sigma_j
        grad = np.empty(N, dtype=complex)
        grad[0] = 1.0
        if N > 1:
            grad[1:] = -polycore.elementary_sym(rest)
        h += eta[r] * grad * w[r]
    return h


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b))))


def observables(fam, state):
    h = family_polynomial(fam, state).coeffs.copy()
    disc = _rel(h, h_direct(fam, state))
    return ObservableSet(h=h, e=polycore.elementary_sym(state.q),
                         P=complex(np.sum(state.p)), route_discrepancy=disc)


def deformed_tilde(fam, alpha, state):
    """Coefficients of the interpolant through e^{p_k} + alpha q_k^N.

    The returned set carries h-tilde in its ``h`` slot; ``route_discrepancy``
    compares against h + alpha e.
    """
    if not fam.is_goldfish:
        raise UnsupportedFamily("the deformed family is defined for the goldfish only")
    _check_sizes(fam, state)
    q = state.q
    vals = fam.eta(state.p) + alpha * q ** state.N
    ht = polycore.interpolate(NodeValueSet(q, vals)).coeffs.copy()
    base = observables(fam, state)
    disc = _rel(ht, base.h + alpha * base.e)
    return ObservableSet(h=ht, e=base.e, P=base.P, route_discrepancy=disc)


def general_H(fam, lam, mu, state):
    """sum_k lambda_k h_k + mu e_1."""
    if not fam.is_goldfish:
        raise UnsupportedFamily("the general Hamiltonian is defined for the goldfish only")
    obs = observables(fam, state)
    lam = np.asarray(lam, dtype=complex)
    if lam.size != state.N:
        raise ValueError("lambda must have N components")
    return complex(lam @ obs.h + mu * obs.e[0])


def h1_goldfish_direct(state):
    """h_1 = sum_r e^{p_r} prod_{s != r} (q_r - q_s)^{-1}."""
    return complex(np.sum(np.exp(state.p) * polycore.barycentric_weights(state.q)))


def random_state(rng, N, box=1.0, min_sep=0.1, max_tries=10000):
    """p uniform in the square [-box, box]^2; q likewise, rejected until separated."""
    p = rng.uniform(-box, box, N) + 1j * rng.uniform(-box, box, N)
    for _ in range(max_tries):
        q = rng.uniform(-box, box, N) + 1j * rng.uniform(-box, box, N)
        if polycore.min_separation(q) >= min_sep:
            return PhaseState(p, q)
    raise RuntimeError("could not sample separated positions")
