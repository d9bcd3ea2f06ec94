"""Complex polynomial arithmetic, Lagrange interpolation and root handling.

Coefficients are always stored leading-first: ``coeffs[0] * z**d + ... + coeffs[d]``.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import AmbiguousMatching, DegenerateConfiguration, ZeroLeadingCoefficient

#: relative separation below which nodes count as coincident
SEP_RTOL = 1e-8
#: coefficient-wise reconstruction tolerance for extracted roots
ROOT_TOL = 1e-8
#: assignment-cost gap (relative to position scale) that flags a near collision
MATCH_TOL = 1e-8


def _as_complex_vector(x):
    return np.atleast_1d(np.asarray(x, dtype=complex)).ravel()


def _frozen(arr):
    arr = np.array(arr, dtype=complex)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Immutable complex polynomial, coefficients leading-first."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = _as_complex_vector(self.coeffs)
        if c.size == 0:
            raise ValueError("a polynomial needs at least one coefficient")
        object.__setattr__(self, "coeffs", _frozen(c))

    @property
    def degree(self):
        return self.coeffs.size - 1

    def __call__(self, z):
        return evaluate(self, z)

    def derivative(self):
        d = self.degree
        if d == 0:
            return Polynomial([0.0])
        return Polynomial(self.coeffs[:-1] * np.arange(d, 0, -1))

    def trimmed(self):
        """Copy with leading zero coefficients removed (keeps at least one)."""
        nz = np.flatnonzero(self.coeffs)
        if nz.size == 0:
            return Polynomial([0.0])
        return Polynomial(self.coeffs[nz[0]:])

    def __repr__(self):
        return f"Polynomial({np.array2string(self.coeffs, precision=6)})"


@dataclass(frozen=True, eq=False)
class NodeValueSet:
    """Interpolation data: ``values[k]`` is prescribed at ``nodes[k]``."""

    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        nodes = _as_complex_vector(self.nodes)
        values = _as_complex_vector(self.values)
        if nodes.shape != values.shape:
            raise ValueError("nodes and values must have the same length")
        object.__setattr__(self, "nodes", _frozen(nodes))
        object.__setattr__(self, "values", _frozen(values))


@dataclass(frozen=True, eq=False)
class RootSet:
    roots: np.ndarray
    residual: float = 0.0
    ordered: bool = False

    def __post_init__(self):
        object.__setattr__(self, "roots", _frozen(_as_complex_vector(self.roots)))

    def __len__(self):
        return self.roots.size


def evaluate(poly, z):
    """Horner evaluation; ``z`` may be a scalar or an array."""
    c = poly.coeffs if isinstance(poly, Polynomial) else _as_complex_vector(poly)
    z = np.asarray(z, dtype=complex)
    acc = np.zeros_like(z) + c[0]
    for a in c[1:]:
        acc = acc * z + a
    return acc[()] if acc.ndim == 0 else acc


def separation_tolerance(nodes):
    nodes = _as_complex_vector(nodes)
    scale = np.max(np.abs(nodes)) if nodes.size else 0.0
    return SEP_RTOL * max(1.0, scale)


def min_separation(nodes):
    nodes = _as_complex_vector(nodes)
    if nodes.size < 2:
        return np.inf
    d = np.abs(nodes[:, None] - nodes[None, :])
    np.fill_diagonal(d, np.inf)
    return float(d.min())


def check_separation(nodes):
    """Raise DegenerateConfiguration if any two nodes nearly coincide."""
    sep = min_separation(nodes)
    tol = separation_tolerance(nodes)
    if sep < tol:
        raise DegenerateConfiguration(
            f"node separation {sep:.3e} below tolerance {tol:.3e}")


def barycentric_weights(nodes):
    """w_r = 1 / prod_{k != r} (q_r - q_k)."""
    nodes = _as_complex_vector(nodes)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def barycentric_evaluate(data, z, weights=None):
    """Evaluate the interpolant of ``data`` at ``z`` in O(N) per point.

    Uses the second (true) barycentric form.  Points within round-off of a
    node return the prescribed value, which also keeps w / (z - q) finite.
    """
    nodes, values = data.nodes, data.values
    w = barycentric_weights(nodes) if weights is None else weights
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    diff = z[:, None] - nodes[None, :]
    scale = max(1.0, float(np.max(np.abs(nodes))))
    hit = np.abs(diff) <= np.finfo(float).eps * scale
    diff[hit] = 1.0
    t = w[None, :] / diff
    out = (t @ values) / t.sum(axis=1)
    rows, cols = np.nonzero(hit)
    out[rows] = values[cols]
    return out


def monic_from_roots(q):
    """Coefficients of prod_k (z - q_k); degree N, leading coefficient 1."""
    q = _as_complex_vector(q)
    c = np.zeros(q.size + 1, dtype=complex)
    c[0] = 1.0
    for i, r in enumerate(q):
        c[1:i + 2] -= r * c[:i + 1]
    return Polynomial(c)


def elementary_sym(q):
    """Signed elementary symmetric functions e_1..e_N.

    e_k = (-1)**(k-1) * sigma_k(q); equivalently the coefficients of
    z**N - prod(z - q_k).  Computed by the sigma_k recurrence, independently
    of :func:`monic_from_roots`.
    """
    q = _as_complex_vector(q)
    n = q.size
    sigma = np.zeros(n + 1, dtype=complex)
    sigma[0] = 1.0
    for i, r in enumerate(q):
        sigma[1:i + 2] += r * sigma[:i + 1].copy()
    signs = np.where(np.arange(1, n + 1) % 2 == 1, 1.0, -1.0)
    return signs * sigma[1:]


def deflate(poly_coeffs, r):
    """Synthetic division by (z - r); returns the quotient, dropping the remainder."""
    c = _as_complex_vector(poly_coeffs)
    out = np.empty(c.size - 1, dtype=complex)
    acc = 0.0
    for i in range(c.size - 1):
        acc = acc * r + c[i]
        out[i] = acc
    return out


def lagrange_matrix(nodes):
    """Matrix M with column r holding the coefficients of the Lagrange basis L_r.

    L_r(z) = prod_{k != r} (z - q_k) / (q_r - q_k), so the interpolant of values
    v has coefficient vector ``M @ v``.  M is the inverse of the Vandermonde
    matrix of the nodes.
    """
    nodes = _as_complex_vector(nodes)
    check_separation(nodes)
    full = monic_from_roots(nodes).coeffs
    w = barycentric_weights(nodes)
    cols = [deflate(full, r) * w[i] for i, r in enumerate(nodes)]
    return np.array(cols).T


def interpolate(data):
    """Unique polynomial of degree <= N-1 through ``data`` (Lagrange form)."""
    return Polynomial(lagrange_matrix(data.nodes) @ data.values)


def _polish(c, z, iterations=2):
    dc = c[:-1] * np.arange(c.size - 1, 0, -1)
    for _ in range(iterations):
        f = evaluate(c, z)
        df = evaluate(dc, z)
        ok = df != 0
        step = np.where(ok, f / np.where(ok, df, 1.0), 0.0)
        trial = z - step
        better = np.abs(evaluate(c, trial)) <= np.abs(f)
        z = np.where(better, trial, z)
    return z


def roots(poly):
    """Roots via eigenvalues of the (balanced) companion matrix.

    A couple of Newton corrections on the original polynomial are applied and
    kept only where they reduce the residual.
    """
    c = poly.coeffs if isinstance(poly, Polynomial) else _as_complex_vector(poly)
    if c[0] == 0:
        raise ZeroLeadingCoefficient("leading coefficient is zero")
    monic = c / c[0]
    d = monic.size - 1
    if d == 0:
        return RootSet(np.zeros(0, dtype=complex), 0.0)
    comp = np.zeros((d, d), dtype=complex)
    comp[0, :] = -monic[1:]
    comp[1:, :-1] = np.eye(d - 1)
    z = np.linalg.eigvals(comp)
    if d > 1:
        z = _polish(monic, z)
    recon = monic_from_roots(z).coeffs
    residual = float(np.max(np.abs(recon - monic)) / max(1.0, np.max(np.abs(monic))))
    if residual > ROOT_TOL:
        warnings.warn(f"root reconstruction residual {residual:.2e} exceeds {ROOT_TOL:.0e}",
                      RuntimeWarning, stacklevel=2)
    return RootSet(z, residual)


def match_roots(prev, nxt, match_tol=MATCH_TOL):
    """Reorder ``nxt`` so that entry k continues trajectory k of ``prev``.

    Minimises sum_k |prev_k - next_sigma(k)| by optimal assignment.  If the
    second-best assignment is within ``match_tol * max(1, max|prev|)`` of the
    best one, an :class:`AmbiguousMatching` warning is issued.
    """
    a = prev.roots if isinstance(prev, RootSet) else _as_complex_vector(prev)
    b = nxt.roots if isinstance(nxt, RootSet) else _as_complex_vector(nxt)
    if a.size != b.size:
        raise ValueError("root sets differ in size")
    residual = nxt.residual if isinstance(nxt, RootSet) else 0.0
    if a.size == 0:
        return RootSet(b, residual, ordered=True)
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    best = cost[rows, cols].sum()
    if a.size > 1:
        # second-best assignment differs from the best in at least one pair
        second = np.inf
        for i, j in zip(rows, cols):
            forbidden = cost.copy()
            forbidden[i, j] = np.inf
            try:
                r2, c2 = linear_sum_assignment(forbidden)
            except ValueError:
                continue
            second = min(second, forbidden[r2, c2].sum())
        gap_tol = match_tol * max(1.0, float(np.max(np.abs(a))))
        if second - best < gap_tol:
            warnings.warn(f"ambiguous root matching: cost gap {second - best:.2e}",
                          AmbiguousMatching, stacklevel=2)
    out = np.empty_like(b)
    out[rows] = b[cols]
    return RootSet(out, residual, ordered=True)
