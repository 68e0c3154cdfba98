"""Maximum conditional MSE at a given acceptance level, two ways.

The formula path divides the concave-envelope value by 4*alpha. The oracle
path ignores the formula entirely: it brute-forces the best atomic noise
distribution on a dense offset grid, subject to achieved acceptance >= alpha.
For mixtures the objective is a ratio of two weight-linear forms, so on any
two-atom segment it is monotone in the mixing weight and the optimum sits at
a vertex (single atom) or at the weight where the acceptance constraint
binds. Singles plus binding pairs therefore cover the search space; a random
three-atom probe in the tests spot-checks this reduction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .envelope import Envelope, build_envelope
from .errors import DomainError
from .kernel import KernelContext
from .numerics import adaptive_simpson

ALPHA_MIN = 1e-3
DEFAULT_ORACLE_GRID = 2048


def c_alpha(env: Envelope, alpha):
    """Worst-case conditional MSE at acceptance level alpha: envelope/(4 alpha).

    Off chord intervals the majorant coincides with the underlying curve, so
    the exact curve is evaluated there instead of the piecewise-linear hull,
    which would sit O(grid step^2) low on strictly concave stretches.
    """
    arr = np.asarray(alpha, dtype=float)
    if np.any((arr <= 0.0) | (arr > 1.0)) or not np.all(np.isfinite(arr)):
        raise DomainError("acceptance level must lie in (0, 1]")
    flat = np.atleast_1d(arr)
    vals = np.atleast_1d(np.asarray(env.evaluate(flat), dtype=float))
    on_chord = np.zeros(flat.shape, dtype=bool)
    for ch in env.chords():
        on_chord |= (flat > ch.q1) & (flat < ch.q2)
    if np.any(~on_chord):
        vals[~on_chord] = np.asarray(env.curve_value(flat[~on_chord]), dtype=float)
    out = vals.reshape(arr.shape) / (4.0 * arr)
    return float(out) if np.ndim(alpha) == 0 else out


def zero_limit(env: Envelope) -> float:
    """Limit of c_alpha as alpha -> 0: right slope of the majorant at 0, over 4."""
    q0, q1 = env.breakpoint_qs[0], env.breakpoint_qs[1]
    v0, v1 = env.breakpoint_vals[0], env.breakpoint_vals[1]
    return float((v1 - v0) / (q1 - q0) / 4.0)


# --- extended atom functionals (any offset, not just the kernel domain) -----

def atom_accept_prob(ctx: KernelContext, z: float) -> float:
    """Acceptance probability of a replicated atom at any offset.

    Offsets below (eta-1)*delta are always accepted; beyond (eta+1)*delta
    never. The sign of z is irrelevant for a symmetric honest density.
    """
    az = abs(float(z))
    if az <= ctx.z_lo:
        return 1.0
    if az > ctx.z_hi:
        return 0.0
    return float(ctx.accept_prob(az))


def atom_error_moment(ctx: KernelContext, z: float) -> float:
    """Acceptance-restricted second moment of (honest + z) at any offset."""
    az = abs(float(z))
    if az > ctx.z_hi:
        return 0.0
    if az >= ctx.z_lo:
        return float(ctx.error_moment(az))
    lo, hi = ctx.noise.support
    pdf = ctx.noise.pdf_scalar
    f = lambda x: (x + az) ** 2 * pdf(x)
    return (adaptive_simpson(f, lo, 0.0, ctx.quad_tol)
            + adaptive_simpson(f, 0.0, hi, ctx.quad_tol))


@dataclass(frozen=True)
class OracleTable:
    """Tabulated atom functionals on an offset grid over [0, (eta+1)*delta]."""
    zs: np.ndarray
    accept: np.ndarray
    moment: np.ndarray


def build_oracle_table(ctx: KernelContext, grid_size: int = DEFAULT_ORACLE_GRID) -> OracleTable:
    """Evaluate the extended atom functionals on a dense offset grid.

    The grid is uniform over [0, (eta+1)*delta] with (eta-1)*delta appended so
    the boundary between always-accepted and partially-accepted offsets is
    represented exactly (it carries the full-acceptance optimum).
    """
    if grid_size < 64:
        raise DomainError(f"oracle grid too small: {grid_size}")
    zs = np.unique(np.append(np.linspace(0.0, ctx.z_hi, grid_size), ctx.z_lo))
    accept = np.empty_like(zs)
    moment = np.empty_like(zs)
    inner = zs < ctx.z_lo
    if np.any(inner):
        # expand (x+z)^2 once: full-support partial moments do not depend on z
        lo, hi = ctx.noise.support
        pdf = ctx.noise.pdf_scalar
        m0 = (adaptive_simpson(pdf, lo, 0.0, ctx.quad_tol)
              + adaptive_simpson(pdf, 0.0, hi, ctx.quad_tol))
        m1 = (adaptive_simpson(lambda x: x * pdf(x), lo, 0.0, ctx.quad_tol)
              + adaptive_simpson(lambda x: x * pdf(x), 0.0, hi, ctx.quad_tol))
        m2 = (adaptive_simpson(lambda x: x * x * pdf(x), lo, 0.0, ctx.quad_tol)
              + adaptive_simpson(lambda x: x * x * pdf(x), 0.0, hi, ctx.quad_tol))
        zi = zs[inner]
        accept[inner] = 1.0
        moment[inner] = m2 + 2.0 * zi * m1 + zi * zi * m0
    domain = ~inner
    accept[domain] = ctx.accept_prob(zs[domain])
    moment[domain] = ctx.error_moment(zs[domain])
    return OracleTable(zs=zs, accept=accept, moment=moment)


def oracle_c2(ctx: KernelContext, alpha: float,
              grid_size: int = DEFAULT_ORACLE_GRID,
              table: OracleTable | None = None) -> float:
    """Brute-force worst conditional MSE with acceptance >= alpha (two nodes)."""
    value, _ = oracle_c2_witness(ctx, alpha, grid_size=grid_size, table=table)
    return value


def oracle_c2_witness(ctx: KernelContext, alpha: float,
                      grid_size: int = DEFAULT_ORACLE_GRID,
                      table: OracleTable | None = None):
    """oracle_c2 plus the attaining atoms as ((z, weight), ...)."""
    alpha = float(alpha)
    if not 0.0 < alpha <= 1.0:
        raise DomainError("acceptance level must lie in (0, 1]")
    if table is None:
        table = build_oracle_table(ctx, grid_size)
    zs, k, nu = table.zs, table.accept, table.moment

    best = -np.inf
    witness = None

    feasible = k >= alpha - 1e-12
    if np.any(feasible):
        ratios = nu[feasible] / (4.0 * k[feasible])
        i = int(np.argmax(ratios))
        best = float(ratios[i])
        zi = float(zs[feasible][i])
        witness = ((zi, 1.0),)

    hi_mask = k > alpha
    lo_mask = k < alpha
    if np.any(hi_mask) and np.any(lo_mask):
        k_hi = k[hi_mask][:, None]
        k_lo = k[lo_mask][None, :]
        w = (alpha - k_lo) / (k_hi - k_lo)  # in (0, 1) by construction
        num = w * nu[hi_mask][:, None] + (1.0 - w) * nu[lo_mask][None, :]
        ratios = num / (4.0 * alpha)
        flat = int(np.argmax(ratios))
        val = float(ratios.flat[flat])
        if val > best:
            best = val
            i, j = np.unravel_index(flat, ratios.shape)
            w_ij = float(w[i, j])
            witness = ((float(zs[hi_mask][i]), w_ij),
                       (float(zs[lo_mask][j]), 1.0 - w_ij))

    if witness is None:
        raise DomainError(f"no feasible atom reaches acceptance {alpha}")
    return best, witness


# --- the curve ---------------------------------------------------------------

@dataclass(frozen=True)
class TradeoffCurve:
    eta: float
    alphas: np.ndarray
    values: np.ndarray
    envelope: Envelope

    @property
    def zero_limit(self) -> float:
        return zero_limit(self.envelope)


def build_curve(ctx: KernelContext, alpha_grid,
                grid_size: int | None = None) -> TradeoffCurve:
    """Evaluate the formula-side curve on an acceptance grid.

    Levels below ALPHA_MIN are rejected: the curve is only reported where the
    acceptance floor keeps the conditional MSE statistically meaningful.
    """
    alphas = np.unique(np.asarray(alpha_grid, dtype=float))
    if alphas.size == 0:
        raise DomainError("alpha grid is empty")
    if np.any(alphas < ALPHA_MIN - 1e-15) or np.any(alphas > 1.0):
        raise DomainError(f"alpha grid must lie within [{ALPHA_MIN}, 1]")
    env = build_envelope(ctx) if grid_size is None else build_envelope(ctx, grid_size)
    values = c_alpha(env, alphas)
    if not np.all(np.isfinite(values)):
        raise DomainError("trade-off curve evaluated to non-finite values")
    return TradeoffCurve(eta=ctx.eta, alphas=alphas, values=values, envelope=env)
