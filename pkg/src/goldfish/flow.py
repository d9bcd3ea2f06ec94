"""Time evolution: direct Hamiltonian integration, the reduced q-only flow and
the exact solutions in elementary-symmetric coordinates.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.linalg import expm

from . import _dopri, poisson, polycore
from .errors import (BranchAmbiguity, DegenerateConfiguration, StepSizeUnderflow,
                     TrajectoryCollision, UnsupportedFamily, ZeroDeformation, ZeroDenominator, ZeroH1)
from .hamfam import EtaFamily, ObservableSet, PhaseState, observables
from .polycore import Polynomial

log = logging.getLogger(__name__)

RK_RTOL = 1e-10
RK_ATOL = 1e-12
COLLISION_RTOL = 1e-6
KINDS = ("single_h", "tilde_h", "general")


@dataclass(frozen=True, eq=False)
class FlowSpec:
    """Which Hamiltonian to flow, for which family, over which time window.

    kind ``single_h`` flows h_k; ``tilde_h`` flows h_k + alpha e_k; ``general``
    flows sum_k lam_k h_k + mu e_1.
    """

    family: EtaFamily
    kind: str = "single_h"
    k: int = 1
    alpha: complex = 0.0
    lam: tuple = ()
    mu: complex = 0.0
    t_span: tuple = (0.0, 1.0)
    sample_count: int = 101

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown flow kind {self.kind!r}")
        if self.kind in ("tilde_h", "general") and not self.family.is_goldfish:
            raise UnsupportedFamily(f"{self.kind} flows need the goldfish family")
        if self.kind != "general" and not 1 <= self.k <= self.family.N:
            raise ValueError(f"k = {self.k} outside 1..{self.family.N}")
        if self.kind == "general" and len(self.lam) != self.family.N:
            raise ValueError("general flow needs N lambda coefficients")
        if self.t_span[1] < self.t_span[0]:
            raise ValueError("t_span must be non-decreasing")
        if self.sample_count < 1:
            raise ValueError("sample_count must be positive")
        object.__setattr__(self, "lam", tuple(complex(x) for x in self.lam))

    @property
    def N(self):
        return self.family.N

    def hamiltonian(self):
        if self.kind == "single_h":
            return poisson.h(self.k)
        if self.kind == "tilde_h":
            return poisson.htilde(self.k, self.alpha)
        return poisson.general(self.lam, self.mu)

    def times(self):
        t0, t1 = self.t_span
        if t0 == t1:
            return np.array([float(t0)])
        return np.linspace(t0, t1, self.sample_count)

    def conserved(self):
        """Observables conserved along this flow."""
        N = self.N
        if self.kind == "single_h":
            return [poisson.h(j) for j in range(1, N + 1)]
        if self.kind == "tilde_h":
            return [poisson.htilde(j, self.alpha) for j in range(1, N + 1)]
        return [self.hamiltonian()]


@dataclass(frozen=True, eq=False)
class Trajectory:
    spec: FlowSpec
    times: np.ndarray
    states: tuple
    observables: tuple
    drift: dict = field(default_factory=dict)

    @property
    def p(self):
        return np.array([s.p for s in self.states])

    @property
    def q(self):
        return np.array([s.q for s in self.states])

    @property
    def h(self):
        return np.array([o.h for o in self.observables])

    @property
    def e(self):
        return np.array([o.e for o in self.observables])

    @property
    def P(self):
        return np.array([o.P for o in self.observables])


def hamilton_rhs(spec, state):
    """(dp/dt, dq/dt) = (-dH/dq, dH/dp) from the analytic gradients."""
    dP, dQ = poisson.jacobian([spec.hamiltonian()], spec.family, state)
    return -dQ[0], dP[0]


def _collision_guard(times, q_slice):
    def check(t, y):
        q = y[q_slice]
        if polycore.min_separation(q) < polycore.separation_tolerance(q):
            row = int(np.searchsorted(times, t, side="right")) - 1
            raise TrajectoryCollision(f"positions collided near t = {t:.6g}", t=t, row=row)
    return check


def _run(fun, times, y0, t_span, rtol, atol, q_slice):
    try:
        sol = _dopri.solve(fun, t_span, y0, times, rtol=rtol, atol=atol,
                           check=_collision_guard(times, q_slice))
    except DegenerateConfiguration as exc:
        raise TrajectoryCollision(f"positions collided during a step: {exc}") from exc
    except StepSizeUnderflow as exc:
        # a square-root branch point stalls the stepper before the positions merge to round-off
        q = exc.y[q_slice] if exc.y is not None else None
        if q is not None and q.size > 1 and polycore.min_separation(q) < COLLISION_RTOL * max(1.0, np.max(np.abs(q))):
            row = int(np.searchsorted(times, exc.t, side="right")) - 1
            raise TrajectoryCollision(f"positions collided near t = {exc.t:.6g}", t=exc.t, row=row) from exc
        raise
    return sol


def integrate(spec, initial, rtol=RK_RTOL, atol=RK_ATOL):
    """Integrate Hamilton's equations for ``spec`` from ``initial``."""
    N = initial.N
    if N != spec.N:
        raise ValueError("state and family sizes differ")
    H = spec.hamiltonian()
    fam = spec.family

    def fun(t, y):
        st = poisson._unchecked_state(y[:N], y[N:])
        dP, dQ = poisson.jacobian([H], fam, st)
        return np.concatenate([-dQ[0], dP[0]])

    times = spec.times()
    y0 = np.concatenate([initial.p, initial.q])
    sol = _run(fun, times, y0, spec.t_span, rtol, atol, slice(N, None))
    log.debug("integrate: %d accepted, %d rejected steps", sol.naccept, sol.nreject)
    states = tuple(PhaseState(y[:N], y[N:]) for y in sol.y)
    obs = tuple(observables(fam, s) for s in states)
    traj = Trajectory(spec, times, states, obs)
    return Trajectory(spec, times, states, obs, drift_report(traj, spec.conserved()))


def reduced_rhs(spec, P0, q):
    """dq_j = eta_j'(phi_j[P0(q_j)]) de_k/dq_j / prod_{r != j}(q_j - q_r).

    For the goldfish eta' o phi is the identity, so the velocity is
    P0(q_j) times the Lagrange factor and no logarithm is taken.
    """
    if spec.kind != "single_h":
        raise ValueError("the reduced flow exists for single_h specs only")
    q = np.asarray(q, dtype=complex)
    fam = spec.family
    x = polycore.evaluate(P0, q)
    if np.any(np.abs(x) <= 1e-300) and fam.is_goldfish:
        raise BranchAmbiguity("P0 vanishes at a particle position; log branch undefined")
    speed = x if fam.is_goldfish else fam.deta(fam.phi(x))
    if spec.k == 1:
        return speed * polycore.barycentric_weights(q)
    return speed * polycore.lagrange_matrix(q)[spec.k - 1]


def integrate_reduced(spec, P0, q0, rtol=RK_RTOL, atol=RK_ATOL):
    """Integrate the reduced flow; returns q at ``spec.times()`` with shape (T, N)."""
    times = spec.times()
    sol = _run(lambda t, q: reduced_rhs(spec, P0, q), times, np.asarray(q0, complex),
               spec.t_span, rtol, atol, slice(None))
    return sol.y


def exact_goldfish(initial, t):
    """e_k(t) = e_k(0) + h_k t under the flow of h_1 (``t`` scalar or array)."""
    t = np.asarray(t, dtype=float)
    return initial.e + np.multiply.outer(t, initial.h)


def positions_from_e(e_series, q0):
    """Roots of z^N - sum e_k z^{N-k} along a time series, labels continued from ``q0``."""
    prev = polycore.RootSet(q0, ordered=True)
    out = []
    for ev in np.atleast_2d(e_series):
        rs = polycore.roots(np.concatenate([[1.0], -ev]))
        prev = polycore.match_roots(prev, rs)
        out.append(prev.roots)
    return np.array(out)


def exact_linear_flow(k, initial, t):
    """e(t) from exp(t A^(k)(h)) applied to (e_0, ..., e_N); returns e_1..e_N."""
    A = poisson.build_A(k, initial.h_ext).entries
    e0 = initial.e_ext
    t = np.asarray(t, dtype=float)
    res = np.array([expm(tt * A) @ e0 for tt in np.atleast_1d(t)])
    return res[0, 1:] if t.ndim == 0 else res[:, 1:]


def _h1_nonzero(initial):
    h1 = initial.h[0]
    if abs(h1) <= 1e-14 * max(1.0, np.max(np.abs(initial.h))):
        raise ZeroH1("h_1 vanishes; the ratios h_k/h_1 are undefined")
    return h1


def exact_tilde_flow(initial, alpha, t):
    """(h(t), e(t)) under the flow of h_1 + alpha e_1.

    h_1 decays as e^{-alpha t}, the ratios h_k/h_1 stay fixed, and every
    h_k + alpha e_k is conserved, which fixes e_k(t).
    """
    if alpha == 0:
        raise ZeroDeformation("alpha = 0: use exact_goldfish")
    h1 = _h1_nonzero(initial)
    rho = initial.h / h1
    t = np.asarray(t, dtype=float)
    h1t = h1 * np.exp(-alpha * t)
    ht = np.multiply.outer(h1t, rho)
    tilde0 = initial.h + alpha * initial.e
    et = (tilde0 - ht) / alpha
    return ht, et


def general_clock(h1, mu, t):
    """tau(t) = integral_0^t h_1(0) e^{-mu s} ds, with a series below |mu t| < 1e-8."""
    t = np.asarray(t, dtype=float)
    x = mu * t
    small = np.abs(x) < 1e-8
    safe = np.where(small, 1.0, x)
    closed = h1 * (1 - np.exp(-safe)) / np.where(small, 1.0, mu if mu != 0 else 1.0)
    series = h1 * t * (1 - x / 2 + x * x / 6)
    return np.where(small, series, closed)


def general_matrix(lam, rho_ext):
    """sum_k lam_k A^(k)(rho): the constant generator of e in the clock tau."""
    N = len(rho_ext) - 1
    B = np.zeros((N + 1, N + 1), dtype=complex)
    for k, lk in enumerate(lam, start=1):
        if lk != 0:
            B += lk * poisson.build_A(k, rho_ext).entries
    return B


def exact_general_flow(initial, lam, mu, t):
    """(h(t), e(t)) under sum_k lam_k h_k + mu e_1."""
    h1 = _h1_nonzero(initial)
    rho_ext = initial.h_ext / h1
    B = general_matrix(lam, rho_ext)
    t = np.asarray(t, dtype=float)
    tau = general_clock(h1, mu, t)
    e0 = initial.e_ext
    e = np.array([expm(tt * B) @ e0 for tt in np.atleast_1d(tau)])[:, 1:]
    ht = np.multiply.outer(np.exp(-mu * t), initial.h)
    if t.ndim == 0:
        return ht, e[0]
    return ht, e


def moments(q):
    """Power sums sum_k q_k^{N-l+1} / (N-l+1) for l = 1..N."""
    q = np.asarray(q, dtype=complex)
    N = q.shape[-1]
    return np.stack([np.sum(q ** (N - l + 1), axis=-1) / (N - l + 1)
                     for l in range(1, N + 1)], axis=-1)


@dataclass(frozen=True, eq=False)
class SuperIntegrals:
    Lambda: np.ndarray
    Phi: Optional[np.ndarray]
    phi_note: str = ""


def lambda_table(obs):
    """Lambda_{k,l} = e_k h_l - e_l h_k."""
    eh = np.outer(obs.e, obs.h)
    return eh - eh.T


def phi_vector(k, fam, state, obs=None):
    """exp(-tau A^(k)(h)) e with tau = P / ((N-k+1) h_{k-1})."""
    if not fam.is_goldfish:
        raise UnsupportedFamily("superintegrals are built for the goldfish family")
    obs = obs or observables(fam, state)
    N = state.N
    h_prev = obs.h_ext[k - 1]
    if abs(h_prev) <= 1e-14 * max(1.0, np.max(np.abs(obs.h))):
        raise ZeroDenominator(f"h_{k - 1} = 0, so P does not measure time for h_{k}")
    tau = obs.P / ((N - k + 1) * h_prev)
    A = poisson.build_A(k, obs.h_ext).entries
    return expm(-tau * A) @ obs.e_ext


def superintegrals(spec, state):
    if spec.kind != "single_h":
        raise ValueError("superintegrals are defined for single_h flows")
    obs = observables(spec.family, state)
    lam = lambda_table(obs)
    try:
        phi = phi_vector(spec.k, spec.family, state, obs)
        note = ""
    except ZeroDenominator as exc:
        phi, note = None, str(exc)
    return SuperIntegrals(lam, phi, note)


def jacobian_rank(fam, state, rtol=1e-8):
    """Rank of d(h_1..h_N, Lambda_{1,2}..Lambda_{1,N}) / d(p, q) and its singular values."""
    N = state.N
    obs = [poisson.h(k) for k in range(1, N + 1)] + \
          [poisson.Lam(1, k) for k in range(2, N + 1)]
    dP, dQ = poisson.jacobian(obs, fam, state)
    J = np.hstack([dP, dQ])
    sv = np.linalg.svd(J, compute_uv=False)
    return int(np.sum(sv > rtol * sv[0])), sv


def drift_report(traj, conserved):
    """max_t |f(t) - f(0)| / max(1, |f(0)|) for each observable."""
    spec = traj.spec
    obs = [poisson.parse_observable(c, alpha=spec.alpha, lam=spec.lam, mu=spec.mu)
           for c in conserved]
    vals = np.array([poisson.values(obs, spec.family, s) for s in traj.states])
    ref = vals[0]
    drift = np.max(np.abs(vals - ref), axis=0) / np.maximum(1.0, np.abs(ref))
    return {o.name: float(d) for o, d in zip(obs, drift)}


def momentum_law_residual(traj):
    """max_t |P(t) - P(0) - (N-k+1) h_{k-1}(0) t|, scaled, for a single_h trajectory."""
    spec = traj.spec
    N, k = spec.N, spec.k
    o0 = traj.observables[0]
    slope = (N - k + 1) * o0.h_ext[k - 1]
    t = traj.times - traj.times[0]
    dev = traj.P - o0.P - slope * t
    return float(np.max(np.abs(dev)) / max(1.0, abs(o0.P), abs(slope) * np.max(np.abs(t), initial=0)))


@dataclass(frozen=True, eq=False)
class TriangleResult:
    times: np.ndarray
    q_direct: np.ndarray
    q_reduced: np.ndarray
    q_exact: np.ndarray
    max_deviation: float


def oracle_triangle(fam, initial, t_span=(0.0, 1.0), sample_count=100):
    """Goldfish h_1 flow three ways: Hamilton's equations, the reduced flow and
    exact coefficient motion followed by root matching."""
    spec = FlowSpec(fam, "single_h", 1, t_span=t_span, sample_count=sample_count)
    traj = integrate(spec, initial)
    P0 = Polynomial(traj.observables[0].h)
    qr = integrate_reduced(spec, P0, initial.q)
    e_t = exact_goldfish(traj.observables[0], traj.times - t_span[0])
    qe = positions_from_e(e_t, initial.q)
    qd = traj.q
    dev = max(np.max(np.abs(qd - qr)), np.max(np.abs(qd - qe)), np.max(np.abs(qr - qe)))
    return TriangleResult(traj.times, qd, qr, qe, float(dev))
