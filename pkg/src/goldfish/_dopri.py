"""Dormand-Prince 5(4) with PI step-size control and 4th-order dense output.

Works on complex state vectors.  Follows the controller and continuous
extension of Hairer, Norsett & Wanner's DOPRI5.
"""

from dataclasses import dataclass

import numpy as np

from .errors import StepSizeUnderflow

C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between the 5th- and embedded 4th-order weights
E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# dense output
D = np.array([-12715105075 / 11282082432, 0.0, 87487479700 / 32700410799,
              -10690763975 / 1880347072, 701980252875 / 199316789632,
              -1453857185 / 822651844, 69997945 / 29380423])

SAFE = 0.9
FAC_MIN = 0.2      # a step shrinks by at most this factor
FAC_MAX = 10.0     # and grows by at most this one
BETA = 0.04
EXPO = 0.2 - 0.75 * BETA


@dataclass
class Solution:
    t: np.ndarray
    y: np.ndarray          # shape (len(t), n)
    nfev: int
    naccept: int
    nreject: int


def _norm(err, y0, y1, rtol, atol):
    sk = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean(np.abs(err / sk) ** 2)))


def _initial_step(fun, t0, y0, f0, rtol, atol, span):
    sk = atol + rtol * np.abs(y0)
    d0 = np.sqrt(np.mean(np.abs(y0 / sk) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f0 / sk) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + h0 * f0
    f1 = fun(t0 + h0, y1)
    d2 = np.sqrt(np.mean(np.abs((f1 - f0) / sk) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, span)


def solve(fun, t_span, y0, t_eval, rtol=1e-10, atol=1e-12, check=None, max_steps=200000):
    """Integrate y' = fun(t, y) over ``t_span`` and return samples at ``t_eval``.

    ``check(t, y)`` is called after every accepted step and may raise to abort.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 < t0:
        raise ValueError("t_span must be non-decreasing")
    t_eval = np.asarray(t_eval, dtype=float)
    y = np.array(y0, dtype=complex)
    out = np.empty((t_eval.size, y.size), dtype=complex)
    nfev = naccept = nreject = 0

    i_out = 0
    while i_out < t_eval.size and t_eval[i_out] <= t0:
        out[i_out] = y
        i_out += 1
    if t1 == t0 or i_out == t_eval.size:
        out[i_out:] = y
        return Solution(t_eval, out, nfev, naccept, nreject)

    f = fun(t0, y)
    nfev += 1
    h = _initial_step(fun, t0, y, f, rtol, atol, t1 - t0)
    nfev += 1
    t = t0
    facold = 1e-4
    k = [None] * 7
    for _ in range(max_steps):
        if t >= t1:
            break
        last = h >= t1 - t
        if last:
            h = t1 - t
        if h <= 16 * np.finfo(float).eps * max(1.0, abs(t)):
            raise StepSizeUnderflow(f"step size underflow at t = {t:.6g}", t=t, y=y)
        k[0] = f
        for s in range(1, 7):
            ys = y + h * sum(a * k[j] for j, a in enumerate(A[s]) if a != 0.0)
            k[s] = fun(t + C[s] * h, ys)
        nfev += 6
        # stage 7 is evaluated at the 5th-order solution (FSAL)
        y_new = y + h * sum(b * k[j] for j, b in enumerate(B) if b != 0.0)
        err = h * sum(ec * k[j] for j, ec in enumerate(E) if ec != 0.0)
        err_norm = _norm(err, y, y_new, rtol, atol)
        fac11 = max(err_norm, 1e-300) ** EXPO
        if err_norm <= 1.0:
            fac = fac11 / facold ** BETA
            fac = min(1 / FAC_MIN, max(1 / FAC_MAX, fac / SAFE))
            facold = max(err_norm, 1e-4)
            t_new = t1 if last else t + h
            if check is not None:
                check(t_new, y_new)
            # dense output on (t, t_new]
            if i_out < t_eval.size and t_eval[i_out] <= t_new:
                ydiff = y_new - y
                bspl = h * k[0] - ydiff
                r4 = ydiff - h * k[6] - bspl
                r5 = h * sum(d * k[j] for j, d in enumerate(D) if d != 0.0)
                while i_out < t_eval.size and t_eval[i_out] <= t_new:
                    th = (t_eval[i_out] - t) / h
                    th1 = 1.0 - th
                    out[i_out] = y + th * (ydiff + th1 * (bspl + th * (r4 + th1 * r5)))
                    i_out += 1
            y, f, t = y_new, k[6], t_new
            naccept += 1
            h = h / fac
        else:
            nreject += 1
            h = h / min(1 / FAC_MIN, fac11 / SAFE)
    else:
        raise StepSizeUnderflow(f"exceeded {max_steps} steps before reaching t = {t1}", t=t, y=y)
    out[i_out:] = y
    return Solution(t_eval, out, nfev, naccept, nreject)
