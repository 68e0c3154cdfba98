"""Least concave majorant of the acceptance-level moment curve.

The curve q -> moment_at_level(q) on [0, 1] is sampled on a dense grid, its
upper concave hull is taken with a monotone chain, and hull segments that
bridge over strictly lower samples are recorded as chords. One refinement
pass re-samples around each chord endpoint so the detected tangency points
are sharp to roughly the square of the grid resolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .kernel import KernelContext

DEFAULT_GRID_SIZE = 4096
DEFAULT_TOUCH_REL = 1e-8
REFINE_POINTS = 64


@dataclass(frozen=True)
class Touch:
    """The majorant touches the curve at q: the optimum is a single offset."""
    q: float


@dataclass(frozen=True)
class Chord:
    """The majorant is linear over [q1, q2] and strictly above the curve inside."""
    q1: float
    q2: float


def _upper_hull_indices(qs: np.ndarray, vals: np.ndarray) -> list[int]:
    """Indices of the upper concave hull; collinear points are kept."""
    kept: list[int] = []
    for i in range(qs.size):
        while len(kept) >= 2:
            a, b = kept[-2], kept[-1]
            cross = ((qs[b] - qs[a]) * (vals[i] - vals[a])
                     - (qs[i] - qs[a]) * (vals[b] - vals[a]))
            if cross > 0.0:  # middle point strictly below the a->i chord
                kept.pop()
            else:
                break
        kept.append(i)
    return kept


class Envelope:
    """Piecewise-linear least concave majorant with chord classification."""

    def __init__(self, source_qs, source_vals, curve=None, touch_tolerance=None):
        qs = np.asarray(source_qs, dtype=float)
        vals = np.asarray(source_vals, dtype=float)
        if qs.ndim != 1 or qs.size < 2 or qs.shape != vals.shape:
            raise DomainError("envelope needs matching 1-d sample arrays, >= 2 points")
        if np.any(np.diff(qs) <= 0):
            raise DomainError("envelope sample grid must be strictly increasing")
        if not (np.all(np.isfinite(qs)) and np.all(np.isfinite(vals))):
            raise NumericalError("envelope samples contain non-finite values")
        self.source_qs = qs
        self.source_vals = vals
        self._curve = curve
        if touch_tolerance is None:
            touch_tolerance = DEFAULT_TOUCH_REL * max(1.0, float(np.max(np.abs(vals))))
        self.touch_tolerance = float(touch_tolerance)

        hull = _upper_hull_indices(qs, vals)
        self.breakpoint_qs = qs[hull]
        self.breakpoint_vals = vals[hull]
        # A segment is a chord when it bridges over samples that sit strictly
        # below it; single-cell segments follow the curve by construction.
        flags = []
        for a, b in zip(hull[:-1], hull[1:]):
            if b - a <= 1:
                flags.append(False)
                continue
            t = (qs[a + 1:b] - qs[a]) / (qs[b] - qs[a])
            line = vals[a] + t * (vals[b] - vals[a])
            flags.append(bool(np.max(line - vals[a + 1:b]) > self.touch_tolerance))
        self._chord_flags = np.asarray(flags, dtype=bool)

    # --- queries -----------------------------------------------------------

    def evaluate(self, q):
        """Majorant value at q (piecewise-linear between breakpoints)."""
        arr = np.asarray(q, dtype=float)
        if np.any((arr < -1e-12) | (arr > 1.0 + 1e-12)) or not np.all(np.isfinite(arr)):
            raise DomainError("envelope argument must lie in [0, 1]")
        arr = np.clip(arr, self.breakpoint_qs[0], self.breakpoint_qs[-1])
        out = np.interp(arr, self.breakpoint_qs, self.breakpoint_vals)
        return float(out) if np.ndim(q) == 0 else out

    def curve_value(self, q):
        """Underlying sampled curve at q: exact when a curve callable is known."""
        if self._curve is not None:
            return self._curve(q)
        out = np.interp(q, self.source_qs, self.source_vals)
        return float(out) if np.ndim(q) == 0 else out

    def chords(self) -> list[Chord]:
        out = []
        for i, is_chord in enumerate(self._chord_flags):
            if is_chord:
                out.append(Chord(float(self.breakpoint_qs[i]),
                                 float(self.breakpoint_qs[i + 1])))
        return out

    def supporting_chord(self, q: float):
        """Touch(q) where the majorant meets the curve, else the hull Chord.

        Touch is decided on the chord structure rather than the pointwise
        interpolation gap: between adjacent grid samples the piecewise-linear
        majorant sits above a strictly concave curve by O(grid step^2), which
        can exceed the touch tolerance without any true chord being present.
        """
        q = float(q)
        if not 0.0 < q <= 1.0 + 1e-12:
            raise DomainError("supporting_chord argument must lie in (0, 1]")
        q = min(q, 1.0)
        bq = self.breakpoint_qs
        if q >= bq[-1]:
            return Touch(float(bq[-1]))
        i = int(np.searchsorted(bq, q, side="right")) - 1
        i = max(i, 0)
        if q == bq[i] or not self._chord_flags[i]:
            return Touch(q)
        gap = self.evaluate(q) - self.curve_value(q)
        if gap <= self.touch_tolerance:
            return Touch(q)
        return Chord(float(bq[i]), float(bq[i + 1]))

    def is_touch(self, q) -> np.ndarray:
        """Vectorized touch/chord classification (True where Touch)."""
        arr = np.atleast_1d(np.asarray(q, dtype=float))
        out = np.empty(arr.shape, dtype=bool)
        for i, qi in enumerate(arr):
            out[i] = True if qi <= 0.0 else isinstance(self.supporting_chord(qi), Touch)
        return out


def envelope_from_samples(qs, vals, curve=None, touch_tolerance=None) -> Envelope:
    """Upper concave hull of explicit samples (no refinement pass)."""
    return Envelope(qs, vals, curve=curve, touch_tolerance=touch_tolerance)


def build_envelope(ctx: KernelContext, grid_size: int = DEFAULT_GRID_SIZE,
                   touch_tolerance: float | None = None,
                   refine_points: int = REFINE_POINTS) -> Envelope:
    """Sample moment_at_level on [0, 1] and take its least concave majorant.

    After the first hull, refine_points extra samples are inserted around each
    chord endpoint (within its neighboring grid cells) and the hull is rebuilt
    once, sharpening detected tangencies.
    """
    if grid_size < 33:
        raise DomainError(f"grid_size too small for a stable hull: {grid_size}")
    qs = np.linspace(0.0, 1.0, grid_size)
    vals = np.asarray(ctx.moment_at_level(qs), dtype=float)
    env = Envelope(qs, vals, curve=ctx.moment_at_level, touch_tolerance=touch_tolerance)

    chords = env.chords()
    if not chords or refine_points <= 0:
        return env
    step = qs[1] - qs[0]
    extra = []
    for ch in chords:
        for endpoint in (ch.q1, ch.q2):
            lo = max(0.0, endpoint - step)
            hi = min(1.0, endpoint + step)
            extra.append(np.linspace(lo, hi, refine_points))
    all_qs = np.unique(np.concatenate([qs] + extra))
    new_mask = ~np.isin(all_qs, qs)
    all_vals = np.empty_like(all_qs)
    all_vals[~new_mask] = vals[np.searchsorted(qs, all_qs[~new_mask])]
    if np.any(new_mask):
        all_vals[new_mask] = np.asarray(ctx.moment_at_level(all_qs[new_mask]), dtype=float)
    return Envelope(all_qs, all_vals, curve=ctx.moment_at_level,
                    touch_tolerance=touch_tolerance)
