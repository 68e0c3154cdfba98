"""Low-level numerical routines: adaptive Simpson quadrature and bisection.

These are deliberately plain implementations with explicit tolerances so that
every caller in the package shares one quadrature and one root-finding policy.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericalError

# Subdivision stops once an interval is this small relative to the whole
# integration range; prevents infinite descent on non-smooth integrands.
_MIN_REL_WIDTH = 1e-14


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-10,
                     initial_panels: int = 8) -> float:
    """Integrate f over [a, b] with adaptive Simpson subdivision.

    The local acceptance test is the classic |S2 - S1| <= 15*tol with the
    Richardson correction term added to the accepted value. The range is first
    cut into uniform panels so a feature narrower than the whole interval
    cannot hide between the initial sample points.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise NumericalError(f"non-finite integration bounds [{a}, {b}]")
    if tol <= 0:
        raise NumericalError(f"quadrature tolerance must be positive, got {tol}")
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b = b, a
        sign = -1.0

    min_width = (b - a) * _MIN_REL_WIDTH
    panels = max(1, int(initial_panels))
    edges = [a + (b - a) * i / panels for i in range(panels + 1)]
    edges[-1] = b

    total = 0.0
    # Each stack entry: (a, b, fa, fm, fb, simpson_estimate, local_tol)
    stack = []
    panel_tol = tol / panels
    for xa, xb in zip(edges[:-1], edges[1:]):
        fa = f(xa)
        fb = f(xb)
        m = 0.5 * (xa + xb)
        fm = f(m)
        whole = (xb - xa) / 6.0 * (fa + 4.0 * fm + fb)
        stack.append((xa, xb, fa, fm, fb, whole, panel_tol))
    while stack:
        xa, xb, ya, ym, yb, s_whole, loc_tol = stack.pop()
        xm = 0.5 * (xa + xb)
        lm = 0.5 * (xa + xm)
        rm = 0.5 * (xm + xb)
        ylm = f(lm)
        yrm = f(rm)
        h6 = (xb - xa) / 12.0
        s_left = h6 * (ya + 4.0 * ylm + ym)
        s_right = h6 * (ym + 4.0 * yrm + yb)
        err = s_left + s_right - s_whole
        if abs(err) <= 15.0 * loc_tol or (xb - xa) <= min_width:
            total += s_left + s_right + err / 15.0
        else:
            half_tol = 0.5 * loc_tol
            stack.append((xa, xm, ya, ylm, ym, s_left, half_tol))
            stack.append((xm, xb, ym, yrm, yb, s_right, half_tol))
    return sign * total


def bisect_scalar(f, lo: float, hi: float, *, xtol: float = 1e-12,
                  max_iter: int = 200) -> float:
    """Root of a monotone f on [lo, hi] by bisection.

    Requires f(lo) and f(hi) to bracket zero (either orientation).
    """
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise NumericalError(
            f"bisection bracket does not straddle a root: f({lo})={flo}, f({hi})={fhi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol:
            return mid
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if flo * fmid < 0.0:
            hi = mid
        else:
            lo = mid
            flo = fmid
    return 0.5 * (lo + hi)


def bisect_monotone_vec(fn, lo, hi, targets, *, increasing: bool,
                        xtol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """Vectorized bisection: solve fn(x) = target for each target.

    fn must be monotone on [lo, hi] and accept ndarray input. lo/hi may be
    scalars or arrays broadcastable against targets.
    """
    targets = np.asarray(targets, dtype=float)
    lo_arr = np.broadcast_to(np.asarray(lo, dtype=float), targets.shape).copy()
    hi_arr = np.broadcast_to(np.asarray(hi, dtype=float), targets.shape).copy()
    for _ in range(max_iter):
        if targets.size == 0:
            break
        width = np.max(hi_arr - lo_arr) if targets.size else 0.0
        if width <= xtol:
            break
        mid = 0.5 * (lo_arr + hi_arr)
        vals = fn(mid)
        if increasing:
            go_right = vals < targets
        else:
            go_right = vals > targets
        lo_arr = np.where(go_right, mid, lo_arr)
        hi_arr = np.where(go_right, hi_arr, mid)
    return 0.5 * (lo_arr + hi_arr)
