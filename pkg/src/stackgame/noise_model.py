"""Honest-node noise models and the scalar data model.

The honest node reports value + noise, where the noise is symmetric, bounded
on [-delta, delta], and has a strictly increasing CDF on its support. Four
families are built in: uniform, truncated-normal, triangular, and tabulated
(a two-column x/pdf grid). Sampling is by inverse-CDF transform so that every
model, including tabulated ones, draws from exactly the CDF it reports.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import special

from .errors import DomainError
from .numerics import adaptive_simpson, bisect_monotone_vec

KINDS = ("uniform", "truncated-normal", "triangular", "tabulated")

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)
_INV_CDF_XTOL = 1e-12
_INV_CDF_MAX_ITER = 200


class HonestNoiseModel:
    """Symmetric bounded noise model with pdf/cdf/inverse-cdf/sampling.

    Use the module-level factories (uniform, truncated_normal, triangular,
    tabulated, tabulated_from_csv, from_spec) rather than the constructor.
    """

    def __init__(self, kind: str, delta: float, params: dict,
                 table: tuple | None = None):
        if kind not in KINDS:
            raise DomainError(f"unknown noise kind {kind!r}; expected one of {KINDS}")
        if not (math.isfinite(delta) and delta > 0):
            raise DomainError(f"delta must be positive and finite, got {delta}")
        self.kind = kind
        self.delta = float(delta)
        self.params = dict(params)
        if kind == "truncated-normal":
            sigma = self.params.get("sigma")
            if sigma is None or not (math.isfinite(sigma) and sigma > 0):
                raise DomainError(f"truncated-normal requires sigma > 0, got {sigma}")
            self._sigma = float(sigma)
            # probability mass of the untruncated normal on [-delta, delta]
            self._trunc_mass = math.erf(self.delta / (self._sigma * _SQRT2))
        if kind == "tabulated":
            if table is None:
                raise DomainError("tabulated models need an (x, pdf) grid")
            xs, ps = table
            xs = np.asarray(xs, dtype=float)
            ps = np.asarray(ps, dtype=float)
            if xs.ndim != 1 or xs.size < 3 or xs.shape != ps.shape:
                raise DomainError("tabulated grid needs matching 1-d x/pdf arrays, >= 3 points")
            if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ps))):
                raise DomainError("tabulated grid contains non-finite entries")
            if np.any(np.diff(xs) <= 0):
                raise DomainError("tabulated x grid must be strictly increasing")
            cum = np.concatenate(([0.0], np.cumsum(np.diff(xs) * 0.5 * (ps[1:] + ps[:-1]))))
            if cum[-1] <= 0:
                raise DomainError("tabulated pdf has nonpositive total mass")
            ps = ps / cum[-1]
            cum = cum / cum[-1]
            self._tab_x = xs
            self._tab_p = ps
            self._tab_cum = cum

    def __repr__(self):
        return f"HonestNoiseModel(kind={self.kind!r}, delta={self.delta}, params={self.params})"

    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "tabulated":
            return float(self._tab_x[0]), float(self._tab_x[-1])
        return -self.delta, self.delta

    # --- densities -------------------------------------------------------

    def pdf(self, x):
        """Probability density, zero outside the support."""
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        d = self.delta
        if self.kind == "uniform":
            out = np.where(np.abs(arr) <= d, 1.0 / (2.0 * d), 0.0)
        elif self.kind == "triangular":
            out = np.where(np.abs(arr) <= d, (d - np.abs(arr)) / (d * d), 0.0)
        elif self.kind == "truncated-normal":
            s = self._sigma
            core = np.exp(-0.5 * (arr / s) ** 2) / (s * _SQRT2PI * self._trunc_mass)
            out = np.where(np.abs(arr) <= d, core, 0.0)
        else:
            out = np.interp(arr, self._tab_x, self._tab_p, left=0.0, right=0.0)
            lo, hi = self.support
            out = np.where((arr < lo) | (arr > hi), 0.0, out)
        return float(out[0]) if scalar else out

    def pdf_scalar(self, x: float) -> float:
        """Fast scalar density for quadrature inner loops."""
        d = self.delta
        if self.kind == "uniform":
            return 1.0 / (2.0 * d) if -d <= x <= d else 0.0
        if self.kind == "triangular":
            return (d - abs(x)) / (d * d) if -d <= x <= d else 0.0
        if self.kind == "truncated-normal":
            if not -d <= x <= d:
                return 0.0
            s = self._sigma
            return math.exp(-0.5 * (x / s) ** 2) / (s * _SQRT2PI * self._trunc_mass)
        lo, hi = self.support
        if not lo <= x <= hi:
            return 0.0
        return float(np.interp(x, self._tab_x, self._tab_p))

    def cdf(self, x):
        """Cumulative distribution, clamped to [0, 1] outside the support."""
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        d = self.delta
        if self.kind == "uniform":
            out = np.clip((arr + d) / (2.0 * d), 0.0, 1.0)
        elif self.kind == "triangular":
            neg = (arr + d) ** 2 / (2.0 * d * d)
            pos = 1.0 - (d - arr) ** 2 / (2.0 * d * d)
            out = np.clip(np.where(arr <= 0.0, neg, pos), 0.0, 1.0)
        elif self.kind == "truncated-normal":
            s = self._sigma
            e = special.erf(arr / (s * _SQRT2))
            out = np.clip((e + self._trunc_mass) / (2.0 * self._trunc_mass), 0.0, 1.0)
            out = np.where(arr <= -d, 0.0, np.where(arr >= d, 1.0, out))
        else:
            xs, ps, cum = self._tab_x, self._tab_p, self._tab_cum
            idx = np.clip(np.searchsorted(xs, arr, side="right") - 1, 0, xs.size - 2)
            x0 = xs[idx]
            t = arr - x0
            slope = (ps[idx + 1] - ps[idx]) / (xs[idx + 1] - xs[idx])
            # exact integral of the linear interpolant within the cell
            out = cum[idx] + t * (ps[idx] + 0.5 * slope * t)
            out = np.where(arr <= xs[0], 0.0, np.where(arr >= xs[-1], 1.0, out))
            out = np.clip(out, 0.0, 1.0)
        return float(out[0]) if scalar else out

    def inv_cdf(self, p):
        """Inverse CDF by bisection (1e-12 absolute tolerance on x)."""
        arr = np.asarray(p, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        if np.any((arr < 0.0) | (arr > 1.0)) or not np.all(np.isfinite(arr)):
            raise DomainError("inverse CDF argument must lie in [0, 1]")
        lo, hi = self.support
        out = bisect_monotone_vec(self.cdf, lo, hi, arr, increasing=True,
                                  xtol=_INV_CDF_XTOL, max_iter=_INV_CDF_MAX_ITER)
        out = np.where(arr <= 0.0, lo, np.where(arr >= 1.0, hi, out))
        return float(out[0]) if scalar else out

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Draw count variates via the inverse-CDF transform of rng.random."""
        if count < 0:
            raise DomainError(f"sample count must be nonnegative, got {count}")
        return np.atleast_1d(self.inv_cdf(rng.random(count)))

    @cached_property
    def second_moment(self) -> float:
        """E[x^2]; integrated in halves so kinks at 0 do not slow quadrature."""
        lo, hi = self.support
        f = lambda x: x * x * self.pdf_scalar(x)
        return adaptive_simpson(f, lo, 0.0, 1e-12) + adaptive_simpson(f, 0.0, hi, 1e-12)


# --- factories -------------------------------------------------------------

def uniform(delta: float) -> HonestNoiseModel:
    return HonestNoiseModel("uniform", delta, {})


def truncated_normal(delta: float, sigma: float) -> HonestNoiseModel:
    return HonestNoiseModel("truncated-normal", delta, {"sigma": float(sigma)})


def triangular(delta: float) -> HonestNoiseModel:
    return HonestNoiseModel("triangular", delta, {})


def tabulated(xs, pdf_vals) -> HonestNoiseModel:
    xs = np.asarray(xs, dtype=float)
    delta = float(np.max(np.abs(xs[[0, -1]])))
    return HonestNoiseModel("tabulated", delta, {}, table=(xs, pdf_vals))


def tabulated_from_csv(path) -> HonestNoiseModel:
    """Load a two-column (x, pdf) CSV; a non-numeric first row is a header."""
    xs, ps = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                x, p = float(row[0]), float(row[1])
            except ValueError:
                if not xs:
                    continue  # header row
                raise DomainError(f"non-numeric row {row!r} in {path}")
            xs.append(x)
            ps.append(p)
    if len(xs) < 3:
        raise DomainError(f"tabulated CSV {path} needs at least 3 rows")
    model = tabulated(xs, ps)
    model.params["csv"] = str(path)
    return model


def from_spec(spec: dict, base_dir=None) -> HonestNoiseModel:
    """Build a model from a config mapping {kind, delta, params}."""
    kind = spec.get("kind", "uniform")
    delta = spec.get("delta", 1.0)
    params = dict(spec.get("params", {}))
    if kind == "uniform":
        return uniform(delta)
    if kind == "triangular":
        return triangular(delta)
    if kind == "truncated-normal":
        if "sigma" not in params:
            raise DomainError("truncated-normal noise requires params.sigma")
        return truncated_normal(delta, params["sigma"])
    if kind == "tabulated":
        if "csv" in params:
            path = Path(params["csv"])
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            model = tabulated_from_csv(path)
        elif "xs" in params and "pdf" in params:
            model = tabulated(params["xs"], params["pdf"])
        else:
            raise DomainError("tabulated noise requires params.csv or params.xs/params.pdf")
        if "delta" in spec and abs(model.delta - float(spec["delta"])) > 1e-9:
            raise DomainError(
                f"tabulated grid implies delta={model.delta}, config says {spec['delta']}")
        return model
    raise DomainError(f"unknown noise kind {kind!r}; expected one of {KINDS}")


# --- validation ------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> tuple[CheckResult, ...]:
        return tuple(c for c in self.checks if not c.passed)

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                       for c in self.checks],
        }


def validate(model: HonestNoiseModel, grid_points: int = 1025) -> ValidationReport:
    """Check the distributional assumptions and report violations.

    Checks: zero density outside the support, nonnegativity, symmetry of the
    pdf, unit normalization (quadrature), CDF endpoints, and strict CDF
    increase on a grid (tolerance 1e-12 between adjacent points).
    """
    d = model.delta
    lo, hi = model.support
    grid = np.linspace(lo, hi, grid_points)
    pdf_grid = model.pdf(grid)
    checks = []

    outside = np.array([lo - 2 * d, lo - d * 1e-6 - 1e-12, hi + d * 1e-6 + 1e-12, hi + 2 * d])
    out_mass = float(np.max(np.abs(model.pdf(outside))))
    checks.append(CheckResult("support", out_mass == 0.0,
                              f"max |pdf| outside support = {out_mass}"))

    min_pdf = float(np.min(pdf_grid))
    checks.append(CheckResult("nonnegative", min_pdf >= 0.0, f"min pdf = {min_pdf}"))

    sym_tol = 1e-12 * max(1.0, float(np.max(np.abs(pdf_grid))))
    sym_gap = float(np.max(np.abs(model.pdf(grid) - model.pdf(-grid))))
    checks.append(CheckResult("symmetry", sym_gap <= sym_tol,
                              f"max |pdf(x) - pdf(-x)| = {sym_gap}"))

    total = (adaptive_simpson(model.pdf_scalar, lo, 0.5 * (lo + hi), 1e-10)
             + adaptive_simpson(model.pdf_scalar, 0.5 * (lo + hi), hi, 1e-10))
    checks.append(CheckResult("normalization", abs(total - 1.0) <= 1e-8,
                              f"integral of pdf = {total}"))

    c_lo, c_hi = float(model.cdf(lo)), float(model.cdf(hi))
    checks.append(CheckResult("cdf_endpoints",
                              c_lo <= 1e-12 and abs(c_hi - 1.0) <= 1e-12,
                              f"cdf({lo}) = {c_lo}, cdf({hi}) = {c_hi}"))

    steps = np.diff(model.cdf(grid))
    min_step = float(np.min(steps))
    checks.append(CheckResult("cdf_strictly_increasing", min_step > 1e-12,
                              f"min CDF increment on {grid_points}-point grid = {min_step}"))

    return ValidationReport(tuple(checks))


# --- the scalar being estimated ---------------------------------------------

@dataclass(frozen=True)
class DataModel:
    """The collected value: uniform on [-m, m], with m far above the noise."""
    m: float

    def __post_init__(self):
        if not (math.isfinite(self.m) and self.m > 0):
            raise DomainError(f"data half-range m must be positive, got {self.m}")

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.uniform(-self.m, self.m, count)
