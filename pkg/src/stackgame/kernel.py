"""Acceptance kernel of a replicated atom against the honest noise.

An adversary that replicates a single offset z across its nodes is accepted
exactly when the honest noise lands within eta*delta of it. On the offset
range [(eta-1)*delta, (eta+1)*delta] this defines:

  accept_prob(z)   -- probability of acceptance, 1 - F(z - eta*delta)
  error_moment(z)  -- integral of (x + z)^2 f(x) over the accepting x;
                      note (x + z)/2 is the midrange estimation error, so
                      error_moment(z)/4 is the unnormalized conditional MSE
  moment_at_level(q) -- error_moment at the offset whose acceptance is q

moment_at_level is the curve whose least concave majorant drives the whole
trade-off analysis downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UndefinedConditionalError
from .noise_model import HonestNoiseModel
from .numerics import adaptive_simpson, bisect_monotone_vec

# fp slack when checking offsets against the closed domain
_EDGE_SLACK = 1e-9
_K_FLOOR = 1e-15


@dataclass(frozen=True)
class KernelContext:
    """A (threshold multiple, honest noise, quadrature tolerance) bundle."""
    eta: float
    noise: HonestNoiseModel
    quad_tol: float = 1e-10

    def __post_init__(self):
        if not (math.isfinite(self.eta) and self.eta >= 2.0):
            raise DomainError(f"threshold multiple eta must be >= 2, got {self.eta}")
        if self.quad_tol <= 0:
            raise DomainError(f"quad_tol must be positive, got {self.quad_tol}")

    @property
    def delta(self) -> float:
        return self.noise.delta

    @property
    def z_lo(self) -> float:
        return (self.eta - 1.0) * self.delta

    @property
    def z_hi(self) -> float:
        return (self.eta + 1.0) * self.delta

    def _check_z(self, z) -> np.ndarray:
        arr = np.asarray(z, dtype=float)
        slack = _EDGE_SLACK * self.delta
        if np.any(arr < self.z_lo - slack) or np.any(arr > self.z_hi + slack):
            raise DomainError(
                f"offset outside [{self.z_lo}, {self.z_hi}] for eta={self.eta}, "
                f"delta={self.delta}")
        return np.clip(arr, self.z_lo, self.z_hi)

    # --- forward kernel ----------------------------------------------------

    def accept_prob(self, z):
        """P(honest noise >= z - eta*delta) = 1 - F(z - eta*delta)."""
        arr = self._check_z(z)
        out = 1.0 - self.noise.cdf(arr - self.eta * self.delta)
        return float(out) if np.ndim(z) == 0 else np.asarray(out)

    def error_moment(self, z):
        """integral of (x+z)^2 f(x) over x in [z - eta*delta, delta]."""
        arr = self._check_z(z)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        d, eta = self.delta, self.eta
        if self.noise.kind == "uniform":
            lo = arr - eta * d
            out = ((d + arr) ** 3 - (lo + arr) ** 3) / (6.0 * d)
        else:
            out = np.empty_like(arr)
            for i, zi in enumerate(arr):
                out[i] = error_moment_quad(self, float(zi))
        out = np.maximum(out, 0.0)
        return float(out[0]) if scalar else out

    # --- inverse kernel ------------------------------------------------------

    def accept_prob_inv(self, q):
        """Offset achieving acceptance probability q (bisection, 1e-12 on z)."""
        arr = np.asarray(q, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        if np.any((arr < 0.0) | (arr > 1.0)) or not np.all(np.isfinite(arr)):
            raise DomainError("acceptance level must lie in [0, 1]")
        d, eta = self.delta, self.eta
        if self.noise.kind == "uniform":
            out = (eta + 1.0) * d - 2.0 * d * arr
        else:
            out = bisect_monotone_vec(
                lambda zz: 1.0 - self.noise.cdf(zz - eta * d),
                self.z_lo, self.z_hi, arr, increasing=False,
                xtol=1e-12, max_iter=200)
            out = np.where(arr <= 0.0, self.z_hi, np.where(arr >= 1.0, self.z_lo, out))
        return float(out[0]) if scalar else out

    def moment_at_level(self, q):
        """error_moment at the offset whose acceptance probability is q."""
        return self.error_moment(self.accept_prob_inv(q))

    def atom_mse(self, z):
        """Conditional MSE of a replicated atom: error_moment / (4 accept_prob)."""
        k = self.accept_prob(z)
        if np.any(np.asarray(k) <= _K_FLOOR):
            raise UndefinedConditionalError(
                f"acceptance probability vanishes at offset {z}; conditional MSE undefined")
        return self.error_moment(z) / (4.0 * k)


# --- direct quadrature (generic path; cross-check for the closed forms) -----

def accept_prob_quad(ctx: KernelContext, z: float) -> float:
    """accept_prob by adaptive Simpson on the density itself."""
    ctx._check_z(z)
    return adaptive_simpson(ctx.noise.pdf_scalar, z - ctx.eta * ctx.delta,
                            ctx.delta, ctx.quad_tol)


def error_moment_quad(ctx: KernelContext, z: float) -> float:
    """error_moment by adaptive Simpson on (x+z)^2 f(x)."""
    ctx._check_z(z)
    pdf = ctx.noise.pdf_scalar
    return adaptive_simpson(lambda x: (x + z) ** 2 * pdf(x),
                            z - ctx.eta * ctx.delta, ctx.delta, ctx.quad_tol)
