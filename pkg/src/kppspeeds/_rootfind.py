"""Bracketed root finding, monotone-predicate bisection and quadrature helpers.

Every solver in the package goes through these: roots are only ever refined
inside a sign-changing bracket (no unguarded Newton), and boolean predicates
that are monotone in their argument are inverted by plain bisection.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.optimize import brentq


_BRENTQ_RTOL_MIN = 8.9e-16  # scipy's floor: 4 * machine epsilon


def bracket_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    rtol: float = _BRENTQ_RTOL_MIN,
    xtol: float = 1e-300,
) -> float:
    """Root of ``f`` inside the sign-changing bracket ``[lo, hi]``.

    Brent's method: bisection interleaved with secant / inverse-quadratic
    steps, convergence guaranteed by the bracket.
    """
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError(f"no sign change on bracket [{lo}, {hi}]: f={flo}, {fhi}")
    return float(brentq(f, lo, hi, rtol=max(rtol, _BRENTQ_RTOL_MIN), xtol=xtol, maxiter=300))


def shrink_to_bracket(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    grow: bool = False,
    factor: float = 4.0,
    limit: float = 1e-250,
) -> tuple[float, float]:
    """Shrink ``lo`` toward 0 (and optionally grow ``hi``) until f changes sign.

    Assumes ``f`` is increasing with a root in ``(0, inf)``.
    """
    while f(lo) >= 0.0:
        lo /= factor
        if lo < limit:
            raise ValueError("could not bracket root from below")
    while f(hi) <= 0.0:
        if not grow:
            raise ValueError("upper bracket endpoint does not enclose the root")
        hi *= factor
        if hi > 1.0 / limit:
            raise ValueError("could not bracket root from above")
    return lo, hi


def vector_bisect(
    f: Callable[[np.ndarray], np.ndarray],
    lo: np.ndarray,
    hi: np.ndarray,
    *,
    iters: int = 90,
    secant_steps: int = 2,
) -> np.ndarray:
    """Elementwise root of increasing ``f`` on per-lane brackets ``[lo, hi]``.

    Plain bisection (bracket width shrinks by 2**-iters) followed by a couple
    of safeguarded secant polishing steps.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = f(mid) < 0.0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    x = 0.5 * (lo + hi)
    for _ in range(secant_steps):
        fl, fh = f(lo), f(hi)
        denom = fh - fl
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(denom != 0.0, lo - fl * (hi - lo) / denom, x)
        x = np.clip(step, lo, hi)
    return x


def smallest_true(
    pred: Callable[[float], bool],
    lo: float,
    hi: float,
    *,
    rtol: float = 1e-12,
    grow: bool = True,
    max_grow: int = 60,
) -> float:
    """Smallest ``x`` in ``(lo, hi]`` where the monotone predicate flips to True.

    ``pred`` must be False at ``lo``; ``hi`` is grown geometrically if it is
    not yet True there.
    """
    if pred(lo):
        return lo
    grown = 0
    while not pred(hi):
        if not grow or grown >= max_grow:
            raise ValueError("predicate never became true on the search range")
        lo, hi = hi, hi * 1.6 + 1.0
        grown += 1
    while hi - lo > rtol * max(abs(hi), 1e-30):
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    tol: float = 1e-12,
    max_depth: int = 30,
) -> float:
    """Adaptive Simpson quadrature of ``f`` on ``[a, b]`` to absolute ``tol``."""
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, fa, b, fb, m, fm, whole, tol, depth):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = left + right - whole
        if depth <= 0 or abs(err) <= 15.0 * tol:
            return left + right + err / 15.0
        return recurse(a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) + recurse(
            m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1
        )

    return recurse(a, fa, b, fb, m, fm, whole, tol, max_depth)


def golden_min(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    rtol: float = 1e-12,
) -> tuple[float, float]:
    """Golden-section minimum of unimodal ``f`` on ``[lo, hi]``: ``(x, f(x))``."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > rtol * max(abs(a), abs(b), 1e-30):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = c if fc < fd else d
    return x, min(fc, fd)
