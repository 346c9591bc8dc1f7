"""Bessel kernel: J/I/K evaluation, first zeros, and the interface ratio maps.

The coupled-system dispersion relations only ever see Bessel functions through
four quantities: the first zero ``j_tau`` of ``J_tau``, the increasing ratios

    h_u(r) = r * J_{tau+1}(r) / J_tau(r)      on (0, j_tau),
    h_v(r) = r * K_{tau+1}(r) / K_tau(r)      on (0, inf),

and their inverses ``k_u``/``k_v``.  Orders are half-integer steps
``tau = -1/2, 0, 1/2, ..., 50`` (the cross-section order for dimensions
``N = 2..103``).  ``h_u`` is evaluated through a Lentz continued fraction for
``J_{tau+1}/J_tau`` so that it stays accurate up to its pole at ``j_tau``,
where a plain quotient of nearly vanishing values loses digits.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import iv, jv, kv, kve

from ._rootfind import bracket_root, vector_bisect
from .params import DomainError

MAX_ORDER = 50.0

# Values of h_u above this are treated as +infinity by callers; keeps the
# exchange quotient chi_u finite representable near the pole at j_tau.
HU_CAP = 1e15

# Below this radius k_v gives up shrinking its bracket and reports ~0
# (relevant only for N=3, where h_v decays like 1/log(1/r)).
_KV_FLOOR = 1e-280


def validate_order(tau: float) -> float:
    """Check that ``tau`` is a supported half-integer order and return it."""
    t = float(tau)
    if not np.isfinite(t) or 2.0 * t != round(2.0 * t):
        raise DomainError(f"order must lie on the half-integer grid, got {tau!r}")
    if t < -0.5 or t > MAX_ORDER:
        raise DomainError(f"order must lie in [-1/2, {MAX_ORDER}], got {tau!r}")
    return t


def order_for_dimension(N: int) -> float:
    """Cross-section Bessel order for spatial dimension ``N``."""
    if not 2 <= N <= 103:
        raise DomainError(f"dimension must lie in [2, 103], got {N!r}")
    return (N - 3) / 2.0


def bessel_j(tau: float, r):
    """Bessel function of the first kind ``J_tau(r)`` for ``r >= 0``."""
    t = validate_order(tau)
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0):
        raise DomainError("bessel_j requires r >= 0")
    out = jv(t, arr)
    return float(out) if np.isscalar(r) else out


def bessel_k(tau: float, r):
    """Modified Bessel function of the second kind ``K_tau(r)`` for ``r > 0``."""
    t = validate_order(tau)
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("bessel_k requires r > 0")
    out = kv(t, arr)
    return float(out) if np.isscalar(r) else out


def bessel_i(tau: float, r):
    """Modified Bessel function of the first kind ``I_tau(r)`` for ``r > 0``."""
    t = validate_order(tau)
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("bessel_i requires r > 0")
    out = iv(t, arr)
    return float(out) if np.isscalar(r) else out


@lru_cache(maxsize=None)
def _first_zero_cached(twice_tau: int) -> float:
    tau = twice_tau / 2.0
    # J_tau > 0 on (0, j_tau); scan for the first sign change.  Exact zeros
    # from underflow at small r count as "still positive".
    step = 0.05
    r_prev = 1e-3
    v_prev = jv(tau, r_prev)
    r = r_prev + step
    while r < 75.0:
        v = jv(tau, r)
        if v < 0.0:
            return bracket_root(lambda x: jv(tau, x), r_prev, r, xtol=1e-13)
        if v > 0.0:
            r_prev, v_prev = r, v
        r += step
    raise DomainError(f"first zero of J_{tau} not found below r=75")


def first_zero_j(tau: float) -> float:
    """First positive zero ``j_tau`` of ``J_tau``."""
    t = validate_order(tau)
    return _first_zero_cached(int(round(2.0 * t)))


def _j_ratio_cf(tau: float, r: np.ndarray, max_iter: int = 600, tol: float = 5e-16) -> np.ndarray:
    """``J_{tau+1}(r) / J_tau(r)`` by the modified Lentz continued fraction.

    f = 1 / (b1 - 1 / (b2 - 1 / (b3 - ...))),  b_k = 2 (tau + k) / r.

    Converges for every r > 0 (the CF of the minimal recurrence solution) and
    keeps full relative accuracy where the ratio blows up at zeros of J_tau.
    """
    tiny = 1e-290
    f = np.full(r.shape, tiny)
    C = f.copy()
    D = np.zeros_like(r)
    done = np.zeros(r.shape, dtype=bool)
    for k in range(1, max_iter + 1):
        b = 2.0 * (tau + k) / r
        a = 1.0 if k == 1 else -1.0
        D = b + a * D
        D = np.where(D == 0.0, tiny, D)
        C = b + a / C
        C = np.where(C == 0.0, tiny, C)
        D = 1.0 / D
        delta = C * D
        f = np.where(done, f, f * delta)
        done |= np.abs(delta - 1.0) < tol
        if done.all():
            break
    return f


def h_u(tau: float, r):
    """Increasing ratio ``r J_{tau+1}(r) / J_tau(r)`` on ``(0, j_tau)``.

    Values beyond ``HU_CAP`` (approach to the pole) are clamped to ``HU_CAP``.
    """
    t = validate_order(tau)
    jt = first_zero_j(t)
    arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(arr <= 0) or np.any(arr >= jt):
        raise DomainError(f"h_u requires 0 < r < j_tau = {jt}")
    val = arr * _j_ratio_cf(t, arr)
    bad = ~np.isfinite(val) | (val < 0.0) | (val > HU_CAP)
    if bad.any():
        # Sign flips can only come from float noise within a whisker of the
        # pole; anywhere else they would mean a broken evaluation.
        if np.any(bad & (arr < 0.99 * jt) & (val < 0.0)):
            raise ArithmeticError("h_u evaluation failed away from its pole")
        val = np.where(bad, HU_CAP, val)
    return float(val[0]) if np.isscalar(r) else val


# Beyond this radius the scaled-K quotient is replaced by its large-argument
# expansion r + tau + 1/2 + (4 tau^2 - 1)/(8 r); kve itself NaNs near 2e9.
_HV_ASYMPTOTIC_FROM = 1e6


def h_v(tau: float, r):
    """Increasing ratio ``r K_{tau+1}(r) / K_tau(r)`` on ``(0, inf)``.

    Evaluated with exponentially scaled K to stay finite for large ``r``;
    tends to ``max(0, N-3)`` as ``r -> 0`` with ``N = 2 tau + 3``.
    """
    t = validate_order(tau)
    arr = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(arr <= 0):
        raise DomainError("h_v requires r > 0")
    big = arr > _HV_ASYMPTOTIC_FROM
    safe = np.where(big, 1.0, arr)
    val = safe * kve(t + 1.0, safe) / kve(t, safe)
    if big.any():
        val = np.where(big, arr + (t + 0.5) + (4.0 * t * t - 1.0) / (8.0 * arr), val)
    return float(val[0]) if np.isscalar(r) else val


def k_u(tau: float, s):
    """Inverse of ``h_u``: the radius in ``(0, j_tau)`` with ``h_u = s``."""
    t = validate_order(tau)
    jt = first_zero_j(t)
    hi = jt * (1.0 - 1e-13)
    if np.isscalar(s):
        sv = float(s)
        if sv <= 0:
            raise DomainError("k_u requires s > 0")
        if h_u(t, hi) <= sv:
            return hi
        lo = jt / 4.0
        while h_u(t, lo) >= sv:
            lo /= 4.0
            if lo < 1e-280:
                return lo
        return bracket_root(lambda x: h_u(t, x) - sv, lo, hi)
    arr = np.asarray(s, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("k_u requires s > 0")
    lo = np.full(arr.shape, 1e-280)
    hi_arr = np.full(arr.shape, hi)
    return vector_bisect(lambda x: h_u(t, x) - arr, lo, hi_arr)


def k_v(tau: float, s):
    """Inverse of ``h_v``: the radius with ``h_v = s``; needs ``s > max(0, N-3)``.

    For N = 3 the true inverse decays like exp(-1/s) as s -> 0; radii below
    the floating range are reported as the bracket floor (effectively 0).
    """
    t = validate_order(tau)
    s_low = max(0.0, 2.0 * t)  # N - 3 with N = 2 tau + 3
    if np.isscalar(s):
        sv = float(s)
        if sv <= s_low:
            raise DomainError(f"k_v requires s > {s_low}")
        lo = min(1.0, sv)
        while h_v(t, lo) >= sv:
            lo /= 4.0
            if lo < _KV_FLOOR:
                return lo
        return bracket_root(lambda x: h_v(t, x) - sv, lo, sv + 1.0)
    arr = np.asarray(s, dtype=float)
    if np.any(arr <= s_low):
        raise DomainError(f"k_v requires s > {s_low}")
    lo = np.full(arr.shape, _KV_FLOOR)
    return vector_bisect(lambda x: h_v(t, x) - arr, lo, arr + 1.0)
