"""Poisson brackets of the observables and the structural identities they obey.

Convention: {p_i, q_j} = delta_ij, so

    {f, g} = sum_j (df/dp_j dg/dq_j - df/dq_j dg/dp_j)

and the time derivative of f along the flow of H is {H, f}.

Two gradient routes are available everywhere: ``"analytic"`` differentiates the
Lagrange representation in closed form, ``"finite_diff"`` uses central
differences along the real and imaginary axes of every coordinate.
"""

import re
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import polycore
from .errors import IndexOutOfRange, UnknownObservable, UnsupportedFamily
from .hamfam import PhaseState, builtin_family
from .polycore import Polynomial

FD_STEP = 1e-6
FD_TOL = 1e-6


def scale_of(*terms):
    """max(1, largest magnitude among the given scalars/arrays)."""
    m = 1.0
    for t in terms:
        a = np.abs(np.asarray(t))
        if a.size:
            m = max(m, float(np.max(a)))
    return m


# ---------------------------------------------------------------------------
# observables

@dataclass(frozen=True)
class Observable:
    """A named scalar function of (p, q).

    kind is one of ``h``, ``e``, ``P``, ``htilde``, ``Lambda``, ``H`` or
    ``custom``; ``custom`` observables carry ``func(fam, state)`` and only
    support finite-difference gradients.
    """

    kind: str
    k: int = 0
    l: int = 0
    alpha: complex = 0.0
    lam: tuple = ()
    mu: complex = 0.0
    func: Optional[Callable] = None
    label: str = ""

    @property
    def name(self):
        if self.label:
            return self.label
        return {
            "h": f"h{self.k}", "e": f"e{self.k}", "P": "P",
            "htilde": f"htilde{self.k}", "Lambda": f"Lambda{self.k},{self.l}",
            "H": "H",
        }.get(self.kind, "custom")


def h(k):
    return Observable("h", k)


def e(k):
    return Observable("e", k)


P = Observable("P")


def htilde(k, alpha):
    return Observable("htilde", k, alpha=complex(alpha))


def Lam(k, l):
    return Observable("Lambda", k, l)


def general(lam, mu):
    return Observable("H", lam=tuple(complex(x) for x in lam), mu=complex(mu))


def custom(func, label="custom"):
    return Observable("custom", func=func, label=label)


_ID = re.compile(r"^(h|e|P|htilde|ht|Lambda|L|H)(\d*)(?:,(\d+))?$")


def parse_observable(ident, alpha=None, lam=None, mu=None):
    """Turn ``"h2"``, ``"e1"``, ``"P"``, ``"htilde3"``, ``"Lambda1,2"`` or ``"H"`` into an Observable."""
    if isinstance(ident, Observable):
        return ident
    m = _ID.match(str(ident).replace(" ", ""))
    if not m:
        raise UnknownObservable(f"cannot parse observable {ident!r}")
    kind, i, j = m.groups()
    if kind in ("h", "e", "htilde", "ht") and (not i or j):
        raise UnknownObservable(f"{ident!r} needs exactly one index")
    if kind in ("Lambda", "L") and not (i and j):
        raise UnknownObservable(f"{ident!r} needs two indices")
    if kind in ("P", "H") and (i or j):
        raise UnknownObservable(f"{ident!r} takes no index")
    if kind == "h":
        return h(int(i))
    if kind == "e":
        return e(int(i))
    if kind == "P":
        return P
    if kind in ("htilde", "ht"):
        if alpha is None:
            raise UnknownObservable("htilde needs alpha")
        return htilde(int(i), alpha)
    if kind in ("Lambda", "L"):
        return Lam(int(i), int(j))
    if lam is None or mu is None:
        raise UnknownObservable("H needs lambda and mu")
    return general(lam, mu)


def _check_index(obs, N):
    if obs.kind in ("h", "e", "htilde"):
        idx = (obs.k,)
    elif obs.kind == "Lambda":
        idx = (obs.k, obs.l)
    else:
        idx = ()
    for i in idx:
        if not 1 <= i <= N:
            raise UnknownObservable(f"index {i} of {obs.name} outside 1..{N}")
    if obs.kind == "H" and len(obs.lam) != N:
        raise UnknownObservable("H needs N lambda coefficients")


# ---------------------------------------------------------------------------
# values

def _raw(fam, p, q, alphas=()):
    """h, e, P and the deformed coefficients for each alpha, without route checks."""
    N = q.size
    M = polycore.lagrange_matrix(q)
    eta = fam.eta(p)
    hv = M @ eta
    ev = polycore.elementary_sym(q)
    tilde = {a: M @ (eta + a * q ** N) for a in alphas}
    return hv, ev, complex(np.sum(p)), tilde


def _needs_goldfish(obs, fam):
    if obs.kind in ("htilde", "H", "Lambda") and not fam.is_goldfish:
        raise UnsupportedFamily(f"{obs.name} is defined for the goldfish family only")


def values(obs_list, fam, state):
    """Values of several observables at one state (interpolation route)."""
    obs_list = [parse_observable(o) for o in obs_list]
    for o in obs_list:
        _check_index(o, state.N)
        _needs_goldfish(o, fam)
    alphas = tuple({o.alpha for o in obs_list if o.kind == "htilde"})
    hv, ev, Pv, tilde = _raw(fam, state.p, state.q, alphas)
    out = np.empty(len(obs_list), dtype=complex)
    for i, o in enumerate(obs_list):
        if o.kind == "h":
            out[i] = hv[o.k - 1]
        elif o.kind == "e":
            out[i] = ev[o.k - 1]
        elif o.kind == "P":
            out[i] = Pv
        elif o.kind == "htilde":
            out[i] = tilde[o.alpha][o.k - 1]
        elif o.kind == "Lambda":
            out[i] = ev[o.k - 1] * hv[o.l - 1] - ev[o.l - 1] * hv[o.k - 1]
        elif o.kind == "H":
            out[i] = np.asarray(o.lam) @ hv + o.mu * ev[0]
        else:
            out[i] = o.func(fam, state)
    return out


def value(obs, fam, state, **params):
    return values([parse_observable(obs, **params)], fam, state)[0]


# ---------------------------------------------------------------------------
# gradients

@dataclass(frozen=True, eq=False)
class Gradient:
    dp: np.ndarray
    dq: np.ndarray


class _Kernel:
    """Per-state quantities shared by all analytic gradients."""

    def __init__(self, fam, state):
        q, p = state.q, state.p
        self.N = N = state.N
        self.q = q
        self.M = polycore.lagrange_matrix(q)
        self.eta = fam.eta(p)
        self.deta = fam.deta(p)
        self.h = self.M @ self.eta
        self.e = polycore.elementary_sym(q)
        self.dH = polycore.evaluate(Polynomial(self.h).derivative(), q)
        # E_N'(q_j) = prod_{k != j} (q_j - q_k)
        self.dEN = 1.0 / polycore.barycentric_weights(q)
        # de_k/dq_j is the z^{N-k} coefficient of E_N(z)/(z - q_j) = L_j(z) E_N'(q_j)
        self.De = self.M * self.dEN[None, :]
        self._tilde = {}

    def grad_h(self, k):
        row = self.M[k - 1]
        return row * self.deta, -row * self.dH

    def grad_e(self, k):
        return np.zeros(self.N, dtype=complex), self.De[k - 1].copy()

    def grad_htilde(self, k, alpha):
        # generic node-family rule: values e^{p_j} + alpha q_j^N, dq gets the explicit q-dependence
        if alpha not in self._tilde:
            N, q = self.N, self.q
            coeffs = self.M @ (self.eta + alpha * q ** N)
            dHt = polycore.evaluate(Polynomial(coeffs).derivative(), q)
            self._tilde[alpha] = alpha * N * q ** (N - 1) - dHt
        row = self.M[k - 1]
        return row * self.deta, row * self._tilde[alpha]

    def grad(self, obs):
        if obs.kind == "h":
            return self.grad_h(obs.k)
        if obs.kind == "e":
            return self.grad_e(obs.k)
        if obs.kind == "P":
            return np.ones(self.N, dtype=complex), np.zeros(self.N, dtype=complex)
        if obs.kind == "htilde":
            return self.grad_htilde(obs.k, obs.alpha)
        if obs.kind == "Lambda":
            k, l = obs.k, obs.l
            hkp, hkq = self.grad_h(k)
            hlp, hlq = self.grad_h(l)
            _, ekq = self.grad_e(k)
            _, elq = self.grad_e(l)
            ek, el, hk, hl = self.e[k - 1], self.e[l - 1], self.h[k - 1], self.h[l - 1]
            dp = ek * hlp - el * hkp
            dq = ek * hlq + hl * ekq - el * hkq - hk * elq
            return dp, dq
        if obs.kind == "H":
            dp = np.zeros(self.N, dtype=complex)
            dq = np.zeros(self.N, dtype=complex)
            for k, lam in enumerate(obs.lam, start=1):
                if lam != 0:
                    a, b = self.grad_h(k)
                    dp += lam * a
                    dq += lam * b
            dq += obs.mu * self.De[0]
            return dp, dq
        raise UnknownObservable(f"no analytic gradient for {obs.name}")


def _fd_jacobian(fun, p, q, step=FD_STEP):
    """Central differences of a vector function of (p, q) along both real and imaginary axes."""
    N = p.size
    f0 = np.asarray(fun(p, q))
    dP = np.empty((f0.size, N), dtype=complex)
    dQ = np.empty((f0.size, N), dtype=complex)
    for which, x, out in ((0, p, dP), (1, q, dQ)):
        for j in range(N):
            hstep = step * max(1.0, abs(x[j]))
            acc = 0.0
            for direction in (1.0, 1j):
                d = np.zeros(N, dtype=complex)
                d[j] = hstep * direction
                if which == 0:
                    fp, fm = fun(p + d, q), fun(p - d, q)
                else:
                    fp, fm = fun(p, q + d), fun(p, q - d)
                acc = acc + (np.asarray(fp) - np.asarray(fm)) / (2 * hstep * direction)
            out[:, j] = acc / 2
    return dP, dQ


def jacobian(obs_list, fam, state, route="analytic"):
    """Gradients of several observables as arrays ``(dP, dQ)`` of shape (m, N)."""
    obs_list = [parse_observable(o) for o in obs_list]
    for o in obs_list:
        _check_index(o, state.N)
        _needs_goldfish(o, fam)
    if route == "finite_diff":
        def fun(p, q):
            return values(obs_list, fam, _unchecked_state(p, q))
        return _fd_jacobian(fun, state.p, state.q)
    if route != "analytic":
        raise ValueError(f"unknown route {route!r}")
    kern = _Kernel(fam, state)
    dP = np.empty((len(obs_list), state.N), dtype=complex)
    dQ = np.empty_like(dP)
    custom_idx = []
    for i, o in enumerate(obs_list):
        if o.kind == "custom":
            custom_idx.append(i)
            continue
        dP[i], dQ[i] = kern.grad(o)
    if custom_idx:
        sub = [obs_list[i] for i in custom_idx]
        cp, cq = _fd_jacobian(lambda p, q: values(sub, fam, _unchecked_state(p, q)),
                              state.p, state.q)
        dP[custom_idx], dQ[custom_idx] = cp, cq
    return dP, dQ


def _unchecked_state(p, q):
    st = object.__new__(PhaseState)
    object.__setattr__(st, "p", np.asarray(p, dtype=complex))
    object.__setattr__(st, "q", np.asarray(q, dtype=complex))
    return st


def gradient(obs, fam, state, route="analytic", **params):
    dP, dQ = jacobian([parse_observable(obs, **params)], fam, state, route)
    return Gradient(dP[0], dQ[0])


def bracket_matrix(fs, gs, fam, state, route="analytic"):
    """Matrix of {f_i, g_j}."""
    fP, fQ = jacobian(fs, fam, state, route)
    gP, gQ = jacobian(gs, fam, state, route)
    return fP @ gQ.T - fQ @ gP.T


def bracket(f, g, fam, state, route="analytic", alpha=None, lam=None, mu=None):
    f = parse_observable(f, alpha=alpha, lam=lam, mu=mu)
    g = parse_observable(g, alpha=alpha, lam=lam, mu=mu)
    return complex(bracket_matrix([f], [g], fam, state, route)[0, 0])


# ---------------------------------------------------------------------------
# polynomial families given by their node values

@dataclass(frozen=True)
class NodeFamily:
    """Degree N-1 polynomial family specified by its values at the nodes q_k.

    ``values(p, q)`` returns the N node values; ``jac_p``/``jac_q`` return the
    N x N Jacobians d value_k / d p_j and d value_k / d q_j.  When they are
    omitted, finite differences are used.
    """

    values: Callable
    jac_p: Optional[Callable] = None
    jac_q: Optional[Callable] = None
    label: str = "custom"

    def jacobians(self, p, q):
        if self.jac_p is not None and self.jac_q is not None:
            return np.asarray(self.jac_p(p, q), complex), np.asarray(self.jac_q(p, q), complex)
        return _fd_jacobian(self.values, p, q)


def eta_nodes(fam):
    """The family polynomial H: node values eta_k(p_k)."""
    return NodeFamily(lambda p, q: fam.eta(p),
                      lambda p, q: np.diag(fam.deta(p)),
                      lambda p, q: np.zeros((q.size, q.size), complex),
                      label=f"H[{fam.name}]")


def power_nodes():
    """The polynomial z^N - E_N(z): node values q_k^N."""
    return NodeFamily(lambda p, q: q ** q.size,
                      lambda p, q: np.zeros((q.size, q.size), complex),
                      lambda p, q: np.diag(q.size * q ** (q.size - 1)),
                      label="E")


def tilde_nodes(fam, alpha):
    """Deformed goldfish polynomial: node values e^{p_k} + alpha q_k^N."""
    return NodeFamily(lambda p, q: fam.eta(p) + alpha * q ** q.size,
                      lambda p, q: np.diag(fam.deta(p)),
                      lambda p, q: np.diag(alpha * q.size * q ** (q.size - 1)),
                      label=f"Htilde[{alpha}]")


def q_only_nodes(func, label="q-only"):
    """Node values depending on q alone (p-Jacobian vanishes, q-Jacobian by finite differences)."""
    return NodeFamily(lambda p, q: func(q), label=label)


@dataclass(frozen=True, eq=False)
class CoefficientBracketTable:
    """{a_r, b_s} table together with its node-pair validation."""

    table: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    residual: float


def coefficient_bracket_poly(famA, famB, state):
    """Table of brackets between the coefficients of two node-defined polynomials.

    The table is obtained from exact coefficient gradients (a = M alpha with
    M the inverse Vandermonde matrix).  It is validated by evaluating the
    double sum at every node pair (q_k, q_l) and comparing with the three-term
    node formula {alpha_k, beta_l} + A'(q_k) d beta_l/dp_k - B'(q_l) d alpha_k/dp_l.
    """
    p, q = state.p, state.q
    N = state.N
    M = polycore.lagrange_matrix(q)
    alpha, beta = np.asarray(famA.values(p, q), complex), np.asarray(famB.values(p, q), complex)
    Jap, Jaq = famA.jacobians(p, q)
    Jbp, Jbq = famB.jacobians(p, q)
    a, b = M @ alpha, M @ beta
    dA = polycore.evaluate(Polynomial(a).derivative(), q)
    dB = polycore.evaluate(Polynomial(b).derivative(), q)
    Ap, Aq = M @ Jap, M @ (Jaq - np.diag(dA))
    Bp, Bq = M @ Jbp, M @ (Jbq - np.diag(dB))
    table = Ap @ Bq.T - Aq @ Bp.T
    V = np.vander(q, N)
    lhs = V @ table @ V.T
    node_bracket = Jap @ Jbq.T - Jaq @ Jbp.T
    second = dA[:, None] * Jbp.T
    third = dB[None, :] * Jap
    rhs = node_bracket + second - third
    res = float(np.max(np.abs(lhs - rhs)) / scale_of(node_bracket, second, third, lhs))
    return CoefficientBracketTable(table, lhs, rhs, res)


# ---------------------------------------------------------------------------
# goldfish structure

def _goldfish(state):
    return builtin_family("goldfish", state.N)


@dataclass(frozen=True, eq=False)
class RBracketReport:
    R: np.ndarray            # R[k, l] = R(q_k, q_l)
    expected: np.ndarray
    residual: float
    symmetry_residual: float


def h_e_brackets(state, route="analytic", fam=None):
    """Matrix B[k-1, l-1] = {h_k, e_l} for the goldfish family."""
    fam = fam or _goldfish(state)
    N = state.N
    return bracket_matrix([h(k) for k in range(1, N + 1)],
                          [e(l) for l in range(1, N + 1)], fam, state, route)


def r_bracket_check(state, route="analytic"):
    """Compare R(z, w) = {H(w), E(z)} at node pairs with e^{p_k} delta_kl prod_{r != k}(q_k - q_r)."""
    N = state.N
    B = h_e_brackets(state, route)
    V = np.vander(state.q, N)
    # R(q_k, q_l) = sum_{a,b} {h_a, e_b} q_l^{N-a} q_k^{N-b}
    R = (V @ B @ V.T).T
    expected = np.diag(np.exp(state.p) / polycore.barycentric_weights(state.q))
    res = float(np.max(np.abs(R - expected)) / scale_of(R, expected))
    sym = float(np.max(np.abs(B - B.T)) / scale_of(B))
    return RBracketReport(R, expected, res, sym)


def closure_rhs(k, l, e_ext, h_ext):
    """Bilinear expression for {h_k, e_l} in terms of e_0..e_N and h_0..h_N.

    {h_k, e_l} = sum_{m=max(k,l)}^{k+l-1} (e_m h_{k+l-1-m} - e_{k+l-1-m} h_m),
    with e_0 = -1, h_0 = 0 and every index above N dropped.
    """
    N = len(e_ext) - 1
    if k == 0 or l == 0:
        return 0.0
    total = 0.0
    for m in range(max(k, l), k + l):
        j = k + l - 1 - m
        if m <= N:
            total += e_ext[m] * h_ext[j]
            total -= e_ext[j] * h_ext[m]
    return total


def closure_table(N, k):
    """Integer tensor C[j, i, n] with {h_k, e_j} = sum_{i,n} C[j, i, n] e_i h_n (extended indices)."""
    if not 1 <= k <= N:
        raise IndexOutOfRange(f"k = {k} outside 1..{N}")
    C = np.zeros((N + 1, N + 1, N + 1), dtype=np.int64)
    for j in range(1, N + 1):
        for m in range(max(k, j), k + j):
            r = k + j - 1 - m
            if m <= N:
                C[j, m, r] += 1
                C[j, r, m] -= 1
    return C


@dataclass(frozen=True)
class ClosureResidual:
    closed_form: Optional[float]
    recursion: Optional[float]


def closure_identity_check(k, l, state, route="analytic", brackets=None):
    """Residuals of the bilinear closure (1 <= k, l <= N) and of the recursion

        e_k h_l - e_l h_k + {h_{k+1}, e_l} - {h_k, e_{l+1}} = 0    (0 <= k, l <= N-1)

    with e_0 = -1, h_0 = 0.  A residual is ``None`` when (k, l) lies outside its range.
    """
    N = state.N
    closed_ok = 1 <= k <= N and 1 <= l <= N
    rec_ok = 0 <= k <= N - 1 and 0 <= l <= N - 1
    if not (closed_ok or rec_ok):
        raise IndexOutOfRange(f"(k, l) = ({k}, {l}) outside the checked ranges for N = {N}")
    B = h_e_brackets(state, route) if brackets is None else brackets
    Bx = np.zeros((N + 1, N + 1), dtype=complex)
    Bx[1:, 1:] = B
    obs = _Kernel(_goldfish(state), state)
    e_ext = np.concatenate([[-1.0], obs.e])
    h_ext = np.concatenate([[0.0], obs.h])
    closed = rec = None
    if closed_ok:
        rhs = closure_rhs(k, l, e_ext, h_ext)
        terms = [e_ext[i] * h_ext[n] for i in range(N + 1) for n in range(N + 1)]
        closed = float(abs(Bx[k, l] - rhs) / scale_of(Bx[k, l], terms))
    if rec_ok:
        r = e_ext[k] * h_ext[l] - e_ext[l] * h_ext[k] + Bx[k + 1, l] - Bx[k, l + 1]
        rec = float(abs(r) / scale_of(e_ext[k] * h_ext[l], e_ext[l] * h_ext[k],
                                      Bx[k + 1, l], Bx[k, l + 1]))
    return ClosureResidual(closed, rec)


@dataclass(frozen=True, eq=False)
class StructureMatrix:
    """A^(k)(h) over indices 0..N: de/dt = A e for the flow of h_k with h frozen."""

    entries: np.ndarray
    k: int
    table: np.ndarray


def build_A(k, h_ext):
    h_ext = np.asarray(h_ext, dtype=complex)
    if h_ext[0] != 0:
        raise ValueError("h_ext[0] must be the h_0 = 0 entry")
    N = h_ext.size - 1
    C = closure_table(N, k)
    return StructureMatrix(np.einsum("jin,n->ji", C, h_ext), k, C)


@dataclass(frozen=True)
class CommutatorResidual:
    norm: float
    scale: float

    @property
    def relative(self):
        return self.norm / self.scale ** 2


def commutator_check(k, l, h_ext):
    A = build_A(k, h_ext).entries
    B = build_A(l, h_ext).entries
    comm = A @ B - B @ A
    return CommutatorResidual(float(np.max(np.abs(comm))), scale_of(A, B))


@dataclass(frozen=True)
class TranslationResidual:
    law: float
    double_bracket: float


def translation_check(k, fam, state, route="analytic"):
    """{h_k, P} = (N-k+1) h_{k-1} and {h_k, {h_k, P}} = 0, both scaled."""
    N = state.N
    if not 1 <= k <= N:
        raise IndexOutOfRange(f"k = {k} outside 1..{N}")
    hv = values([h(j) for j in range(1, N + 1)], fam, state)
    h_prev = hv[k - 2] if k >= 2 else 0.0
    lhs = bracket(h(k), P, fam, state, route)
    expected = (N - k + 1) * h_prev
    law = float(abs(lhs - expected) / scale_of(lhs, expected))

    # {h_k, g} is the derivative of g along the flow of h_k: one directional
    # derivative (five-point stencil) along the Hamiltonian vector field
    fP, fQ = jacobian([h(k)], fam, state, route)
    Xp, Xq = -fQ[0], fP[0]
    speed = max(np.abs(Xp).max(), np.abs(Xq).max())
    if speed == 0:
        return TranslationResidual(law, 0.0)
    eps = 1e-3 / speed

    def g(t):
        st = _unchecked_state(state.p + t * Xp, state.q + t * Xq)
        return bracket(h(k), P, fam, st, "analytic")

    dbl = (-g(2 * eps) + 8 * g(eps) - 8 * g(-eps) + g(-2 * eps)) / (12 * eps)
    return TranslationResidual(law, float(abs(dbl) / max(1.0, abs(lhs) * speed)))


def involution_residual(fam, state, alpha=None, route="analytic"):
    """max_{k,l} |{f_k, f_l}| / max(|f_k f_l|, 1) for f = h (or h-tilde when alpha is given)."""
    N = state.N
    obs = [h(k) for k in range(1, N + 1)] if alpha is None else \
        [htilde(k, alpha) for k in range(1, N + 1)]
    B = bracket_matrix(obs, obs, fam, state, route)
    v = values(obs, fam, state)
    denom = np.maximum(np.abs(np.outer(v, v)), 1.0)
    return float(np.max(np.abs(B) / denom))


def lambda_commutation_residual(state, route="analytic"):
    """max over k, l of |{h_1, Lambda_{k,l}}|, scaled by the largest gradient product."""
    N = state.N
    fam = _goldfish(state)
    lams = [Lam(k, l) for k in range(1, N + 1) for l in range(1, N + 1)]
    fP, fQ = jacobian([h(1)], fam, state, route)
    gP, gQ = jacobian(lams, fam, state, route)
    B = fP @ gQ.T - fQ @ gP.T
    terms = np.abs(fP).max() * np.abs(gQ).max() + np.abs(fQ).max() * np.abs(gP).max()
    return float(np.max(np.abs(B)) / max(1.0, terms))


def route_agreement(obs_list, fam, state):
    """Largest relative difference between analytic and finite-difference brackets."""
    a = bracket_matrix(obs_list, obs_list, fam, state, "analytic")
    f = bracket_matrix(obs_list, obs_list, fam, state, "finite_diff")
    aP, aQ = jacobian(obs_list, fam, state, "analytic")
    terms = np.abs(aP).max() * np.abs(aQ).max()
    return float(np.max(np.abs(a - f)) / max(1.0, terms, np.abs(a).max()))
