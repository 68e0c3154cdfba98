"""Monte Carlo game simulator and the exact scenario-reduction checks.

One honest node draws from the noise model; the other n-1 nodes are the
adversary's. The collector accepts when the report spread is within
eta*delta (inclusive) and estimates by the midrange. Acceptance and the
estimation error depend only on the noise vector (the collected value shifts
every report equally), so statistics are accumulated in noise space where
that identity is exact and independent of the data magnitude.

Trials are split into fixed-size chunks; each chunk draws from its own
counter-based substream (Philox keyed by the seed, jumped by the chunk
index) and partial sums are merged in chunk order, so results are bitwise
reproducible for a given (seed, trials, chunk size) regardless of worker
count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConditioningError, DomainError, NumericalError
from .noise_model import DataModel, HonestNoiseModel
from .strategy import AtomicAdversary

DEFAULT_CHUNK_SIZE = 65536
_DEBUG_TRIALS_PER_CHUNK = 128
_PILOT_DRAWS = 10_000
_MIN_CONDITION_PROB = 1e-4
_MAX_REJECTION_ROUNDS = 100_000


def accept(y, eta: float, delta: float) -> bool:
    """Collector's rule: accept when max(y) - min(y) <= eta * delta."""
    arr = np.asarray(y, dtype=float)
    if arr.size < 2:
        raise DomainError("acceptance needs at least two reports")
    if eta < 2.0 or delta <= 0.0:
        raise DomainError(f"need eta >= 2 and delta > 0, got eta={eta}, delta={delta}")
    return bool(np.max(arr) - np.min(arr) <= eta * delta)


def estimate(y) -> float:
    """Midrange estimator: (max(y) + min(y)) / 2."""
    arr = np.asarray(y, dtype=float)
    if arr.size < 1:
        raise DomainError("estimate needs at least one report")
    return float(0.5 * (np.max(arr) + np.min(arr)))


# --- adversary strategies ----------------------------------------------------

class ReplicatedStrategy:
    """One draw from an atom mixture, copied to every controlled node.

    Any atom list is allowed here (including a point mass at zero); the
    strategies constructed from the trade-off optimum restrict offsets to the
    replicated-atom domain, but the simulator itself does not care.
    """

    u_dependent = False
    n_adv = None  # works for any number of controlled nodes

    def __init__(self, locations, weights):
        self.locations = np.asarray(locations, dtype=float)
        self.weights = np.asarray(weights, dtype=float)
        if self.locations.ndim != 1 or self.locations.shape != self.weights.shape:
            raise DomainError("locations and weights must be matching 1-d arrays")
        if np.any(self.weights <= 0) or abs(float(np.sum(self.weights)) - 1.0) > 1e-9:
            raise DomainError("weights must be positive and sum to 1")

    @classmethod
    def from_atomic(cls, adv: AtomicAdversary) -> "ReplicatedStrategy":
        return cls(adv.locations(), adv.weights())

    def sample(self, rng: np.random.Generator, count: int, n_adv: int) -> np.ndarray:
        idx = rng.choice(self.locations.size, size=count, p=self.weights)
        return np.broadcast_to(self.locations[idx], (n_adv, count))


class CustomJointStrategy:
    """Arbitrary joint noise sampler for a fixed number of controlled nodes.

    sampler(rng, count, n_adv) -> array (n_adv, count); when u_dependent is
    set the sampler also receives the collected values (exploratory only: the
    formal analysis covers value-independent strategies).
    """

    def __init__(self, sampler, n_adv: int, u_dependent: bool = False):
        if n_adv < 1:
            raise DomainError(f"need at least one controlled node, got {n_adv}")
        self.sampler = sampler
        self.n_adv = int(n_adv)
        self.u_dependent = bool(u_dependent)

    def sample(self, rng: np.random.Generator, count: int, n_adv: int,
               u: np.ndarray | None = None) -> np.ndarray:
        if n_adv != self.n_adv:
            raise DomainError(f"strategy is for {self.n_adv} controlled nodes, asked {n_adv}")
        if self.u_dependent:
            out = self.sampler(rng, count, n_adv, u)
        else:
            out = self.sampler(rng, count, n_adv)
        out = np.asarray(out, dtype=float)
        if out.shape != (n_adv, count):
            raise DomainError(f"sampler returned shape {out.shape}, expected {(n_adv, count)}")
        return out


class ConditionedStrategy:
    """Rejection-sampled restriction to pairwise spread <= eta * delta."""

    u_dependent = False

    def __init__(self, base, eta: float, delta: float):
        if base.u_dependent:
            raise DomainError("cannot condition a value-dependent strategy")
        self.base = base
        self.eta = float(eta)
        self.delta = float(delta)
        self.n_adv = base.n_adv

    def sample(self, rng: np.random.Generator, count: int, n_adv: int) -> np.ndarray:
        bound = self.eta * self.delta
        out = np.empty((n_adv, count))
        filled = 0
        for _ in range(_MAX_REJECTION_ROUNDS):
            if filled >= count:
                return out
            need = count - filled
            draw = self.base.sample(rng, need, n_adv)
            ok = (draw.max(axis=0) - draw.min(axis=0)) <= bound
            good = draw[:, ok]
            take = min(good.shape[1], need)
            out[:, filled:filled + take] = good[:, :take]
            filled += take
        raise NumericalError("rejection sampling failed to fill the batch")


def condition_noncancelling(adv, eta: float, delta: float,
                            rng: np.random.Generator,
                            pilot_draws: int = _PILOT_DRAWS,
                            min_prob: float = _MIN_CONDITION_PROB):
    """Condition a joint strategy on bounded pairwise spread.

    Replicated strategies already satisfy the event (all noises equal), so
    they pass through unchanged. Otherwise a pilot run estimates the event
    probability and the call refuses when it is negligible, since rejection
    sampling would stall and the conditional law would be meaningless anyway.
    """
    if isinstance(adv, ReplicatedStrategy):
        return adv
    if adv.u_dependent:
        raise DomainError("conditioning applies to value-independent strategies only")
    if adv.n_adv == 1:
        return adv
    pilot = adv.sample(rng, pilot_draws, adv.n_adv)
    p_hat = float(np.mean((pilot.max(axis=0) - pilot.min(axis=0)) <= eta * delta))
    if p_hat < min_prob:
        raise ConditioningError(
            f"pairwise-bounded event has pilot probability {p_hat} "
            f"(< {min_prob}) over {pilot_draws} draws; refusing to condition")
    return ConditionedStrategy(adv, eta, delta)


# --- the simulation loop ------------------------------------------------------

@dataclass(frozen=True)
class GameConfig:
    n_nodes: int
    eta: float
    data: DataModel
    noise: HonestNoiseModel
    trials: int
    seed: int
    chunk_size: int = DEFAULT_CHUNK_SIZE
    debug: bool = False

    def __post_init__(self):
        if self.n_nodes < 2:
            raise DomainError(f"need at least 2 nodes, got {self.n_nodes}")
        if self.eta < 2.0:
            raise DomainError(f"threshold multiple eta must be >= 2, got {self.eta}")
        if self.trials < 1:
            raise DomainError(f"need at least one trial, got {self.trials}")
        if self.chunk_size < 1:
            raise DomainError(f"chunk size must be positive, got {self.chunk_size}")


@dataclass(frozen=True)
class SimulationResult:
    trials: int
    accepted_count: int
    pa_hat: float
    pa_stderr: float
    mse_hat: float | None
    mse_stderr: float | None

    def to_json_dict(self) -> dict:
        return {
            "trials": self.trials,
            "accepted_count": self.accepted_count,
            "pa_hat": self.pa_hat,
            "pa_stderr": self.pa_stderr,
            "mse_hat": self.mse_hat,
            "mse_stderr": self.mse_stderr,
        }


def _chunk_stats(cfg: GameConfig, strategy, chunk_index: int, count: int):
    bitgen = np.random.Philox(key=cfg.seed)
    if chunk_index:
        bitgen = bitgen.jumped(chunk_index)
    rng = np.random.Generator(bitgen)
    # fixed draw order (values, honest noise, adversary noise) is part of the
    # reproducibility contract
    u = cfg.data.sample(rng, count)
    honest = cfg.noise.sample(rng, count)
    n_adv = cfg.n_nodes - 1
    if strategy.u_dependent:
        adv = strategy.sample(rng, count, n_adv, u=u)
    else:
        adv = strategy.sample(rng, count, n_adv)
    nmax = np.maximum(honest, adv.max(axis=0))
    nmin = np.minimum(honest, adv.min(axis=0))
    mask = (nmax - nmin) <= cfg.eta * cfg.noise.delta
    err = 0.5 * (nmax[mask] + nmin[mask])
    e2 = err * err
    if cfg.debug:
        _debug_identities(cfg, u, honest, adv, nmax, nmin, mask)
    return count, int(np.count_nonzero(mask)), float(np.sum(e2)), float(np.sum(e2 * e2))


def _debug_identities(cfg, u, honest, adv, nmax, nmin, mask):
    """Per-trial consistency: the error identity is exact in noise space."""
    bound = cfg.eta * cfg.noise.delta
    for i in range(min(u.size, _DEBUG_TRIALS_PER_CHUNK)):
        row = np.concatenate(([honest[i]], adv[:, i]))
        assert accept(row, cfg.eta, cfg.noise.delta) == bool(mask[i])
        mid = estimate(row)
        assert mid == 0.5 * (nmax[i] + nmin[i])
        # shifted by the collected value, the identity holds to rounding of u+n
        shifted = estimate(u[i] + row) - u[i]
        assert abs(shifted - mid) <= 1e-9 * max(1.0, abs(u[i]))


def run_monte_carlo(cfg: GameConfig, strategy, n_workers: int = 1) -> SimulationResult:
    """Estimate acceptance probability and conditional MSE for a strategy.

    When no trial is accepted the conditional MSE is reported as absent
    (None) rather than zero. pa_stderr is the binomial standard error;
    mse_stderr is the sample standard error of the squared errors among
    accepted trials.
    """
    fixed_arity = getattr(strategy, "n_adv", None)
    if fixed_arity is not None and fixed_arity != cfg.n_nodes - 1:
        raise DomainError(
            f"strategy is for {fixed_arity} controlled nodes, config has {cfg.n_nodes - 1}")
    chunks = []
    offset = 0
    index = 0
    while offset < cfg.trials:
        count = min(cfg.chunk_size, cfg.trials - offset)
        chunks.append((index, count))
        offset += count
        index += 1

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(lambda c: _chunk_stats(cfg, strategy, *c), chunks))
    else:
        parts = [_chunk_stats(cfg, strategy, i, n) for i, n in chunks]

    accepted = 0
    s2 = 0.0
    s4 = 0.0
    for _, acc, p2, p4 in parts:  # merged in chunk order
        accepted += acc
        s2 += p2
        s4 += p4

    pa_hat = accepted / cfg.trials
    pa_stderr = math.sqrt(pa_hat * (1.0 - pa_hat) / cfg.trials)
    if accepted == 0:
        return SimulationResult(cfg.trials, 0, pa_hat, pa_stderr, None, None)
    mse_hat = s2 / accepted
    var_e2 = max(s4 / accepted - mse_hat * mse_hat, 0.0)
    mse_stderr = math.sqrt(var_e2 / accepted)
    return SimulationResult(cfg.trials, accepted, pa_hat, pa_stderr, mse_hat, mse_stderr)


# --- scenario reductions (exact, noise-space) ---------------------------------

def scenario_reduce(honest_noise: float, adv_noises):
    """Replace every adversarial noise by the one largest in magnitude.

    Ties go to the first index. Returns the reduced adversarial vector and
    the equivalent two-node pair (honest, dominant noise).
    """
    adv = np.asarray(adv_noises, dtype=float)
    if adv.ndim != 1 or adv.size == 0:
        raise DomainError("need a nonempty 1-d adversarial noise vector")
    i = int(np.argmax(np.abs(adv)))
    n_abs = float(adv[i])
    return np.full(adv.shape, n_abs), (float(honest_noise), n_abs)


@dataclass(frozen=True)
class ScenarioCheck:
    skipped: bool
    reason: str = ""
    accept_full: bool | None = None
    accept_reduced: bool | None = None
    accept_pair: bool | None = None
    acceptance_match: bool | None = None
    error_bound_ok: bool | None = None  # None when the full scenario rejects
    pair_match: bool | None = None
    midrange_full: float | None = None
    midrange_reduced: float | None = None

    @property
    def passed(self) -> bool:
        if self.skipped:
            return False
        return (bool(self.acceptance_match)
                and self.error_bound_ok in (None, True)
                and bool(self.pair_match))


def check_scenario_equivalence(honest_noise: float, adv_noises, eta: float,
                               delta: float) -> ScenarioCheck:
    """Exact reduction checks for one realization.

    Requires the adversarial noises to be pairwise within eta*delta of each
    other (realizations outside that event are reported as skipped). Checks:
    (a) replacing all adversarial noises by the dominant one preserves the
    acceptance decision; (b) on acceptance it cannot shrink the midrange
    error magnitude; (c) the reduced scenario matches the two-node pair
    exactly. All comparisons are exact, no tolerances.
    """
    adv = np.asarray(adv_noises, dtype=float)
    if adv.ndim != 1 or adv.size == 0:
        raise DomainError("need a nonempty 1-d adversarial noise vector")
    bound = eta * delta
    if adv.size > 1 and (np.max(adv) - np.min(adv)) > bound:
        return ScenarioCheck(skipped=True,
                             reason="adversarial noises exceed pairwise spread bound")
    reduced, (h, n_abs) = scenario_reduce(honest_noise, adv)

    full = np.concatenate(([honest_noise], adv))
    fmax, fmin = float(np.max(full)), float(np.min(full))
    acc1 = (fmax - fmin) <= bound
    mid1 = 0.5 * (fmax + fmin)

    # reduced scenario goes through the n-node vector, the pair through plain
    # scalar comparisons: two genuinely different code paths for one identity
    red_full = np.concatenate(([honest_noise], reduced))
    rmax, rmin = float(np.max(red_full)), float(np.min(red_full))
    acc2 = (rmax - rmin) <= bound
    mid2 = 0.5 * (rmax + rmin)

    pmax, pmin = (h, n_abs) if h >= n_abs else (n_abs, h)
    acc3 = (pmax - pmin) <= bound
    mid3 = 0.5 * (pmax + pmin)

    return ScenarioCheck(
        skipped=False,
        accept_full=bool(acc1),
        accept_reduced=bool(acc2),
        accept_pair=bool(acc3),
        acceptance_match=bool(acc1 == acc2),
        error_bound_ok=None if not acc1 else bool(abs(mid1) <= abs(mid2)),
        pair_match=bool(acc2 == acc3 and (not acc2 or mid2 == mid3)),
        midrange_full=mid1,
        midrange_reduced=mid2,
    )


def run_scenario_suite(noise: HonestNoiseModel, eta: float, n_realizations: int,
                       n_adv: int, seed: int) -> dict:
    """Vectorized scenario-reduction suite over random valid realizations.

    Adversarial noises are drawn as a common center plus offsets within
    +/- eta*delta/2, which guarantees the pairwise-spread precondition, with
    centers wide enough to exercise both accepted and rejected realizations.
    """
    if n_realizations < 1 or n_adv < 1:
        raise DomainError("need at least one realization and one adversarial node")
    delta = noise.delta
    bound = eta * delta
    rng = np.random.default_rng(seed)
    center = rng.uniform(-(eta + 1.0) * delta, (eta + 1.0) * delta, n_realizations)
    offsets = rng.uniform(-0.5 * bound, 0.5 * bound, (n_adv, n_realizations))
    adv = center + offsets
    honest = noise.sample(rng, n_realizations)

    amax = adv.max(axis=0)
    amin = adv.min(axis=0)
    fmax = np.maximum(honest, amax)
    fmin = np.minimum(honest, amin)
    acc1 = (fmax - fmin) <= bound
    mid1 = 0.5 * (fmax + fmin)

    pick = np.argmax(np.abs(adv), axis=0)
    n_abs = np.take_along_axis(adv, pick[None, :], axis=0)[0]
    rmax = np.maximum(honest, n_abs)
    rmin = np.minimum(honest, n_abs)
    acc2 = (rmax - rmin) <= bound
    mid2 = 0.5 * (rmax + rmin)

    # two-node pair: identical extremes as the reduced scenario, so equality
    # checks below compare independently recomputed values
    pmax = np.where(honest >= n_abs, honest, n_abs)
    pmin = np.where(honest >= n_abs, n_abs, honest)
    acc3 = (pmax - pmin) <= bound
    mid3 = 0.5 * (pmax + pmin)

    acceptance_mismatch = int(np.count_nonzero(acc1 != acc2))
    error_violations = int(np.count_nonzero(acc1 & (np.abs(mid1) > np.abs(mid2))))
    pair_mismatch = int(np.count_nonzero((acc2 != acc3) | (acc2 & (mid2 != mid3))))
    return {
        "realizations": int(n_realizations),
        "adversarial_nodes": int(n_adv),
        "accepted": int(np.count_nonzero(acc1)),
        "acceptance_mismatches": acceptance_mismatch,
        "error_bound_violations": error_violations,
        "pair_mismatches": pair_mismatch,
        "passed": acceptance_mismatch == 0 and error_violations == 0 and pair_mismatch == 0,
    }


# --- dominance ----------------------------------------------------------------

@dataclass(frozen=True)
class DominanceEntry:
    label: str
    pa_hat: float
    mse_hat: float | None
    utility: float | None
    utility_stderr: float | None
    violation: bool
    note: str = ""


@dataclass(frozen=True)
class DominanceReport:
    optimum: DominanceEntry
    entries: tuple
    violation_labels: tuple

    @property
    def passed(self) -> bool:
        return len(self.violation_labels) == 0

    def to_json_dict(self) -> dict:
        def entry(e):
            return {"label": e.label, "pa_hat": e.pa_hat, "mse_hat": e.mse_hat,
                    "utility": e.utility, "utility_stderr": e.utility_stderr,
                    "violation": e.violation, "note": e.note}
        return {"passed": self.passed,
                "optimum": entry(self.optimum),
                "candidates": [entry(e) for e in self.entries],
                "violations": list(self.violation_labels)}


def _utility_sigma(adv_utility, mse, pa, mse_sd, pa_sd) -> float:
    """First-order error propagation through the utility surface."""
    hm = 1e-6 * max(1.0, abs(mse))
    dm = (adv_utility.value(mse + hm, pa) - adv_utility.value(mse - hm, pa)) / (2 * hm)
    hp = 1e-6
    dp = (adv_utility.value(mse, pa + hp) - adv_utility.value(mse, pa - hp)) / (2 * hp)
    return math.sqrt((dm * mse_sd) ** 2 + (dp * pa_sd) ** 2)


def dominance_check(cfg: GameConfig, spec, candidates, optimum,
                    n_workers: int = 1) -> DominanceReport:
    """Monte Carlo test that no candidate beats the optimum's utility.

    All runs share the same seed, so candidate-vs-optimum comparisons use
    common random numbers. A candidate is flagged only when its estimated
    utility exceeds the optimum's by more than 4 combined standard errors.
    Candidates with no accepted trials have undefined utility and cannot be
    flagged; they are recorded with a note.
    """
    opt_res = run_monte_carlo(cfg, optimum, n_workers=n_workers)
    if opt_res.mse_hat is None:
        raise NumericalError("optimum strategy produced no accepted trials")
    opt_util = float(spec.adversary.value(opt_res.mse_hat, opt_res.pa_hat))
    opt_sigma = _utility_sigma(spec.adversary, opt_res.mse_hat, opt_res.pa_hat,
                               opt_res.mse_stderr, opt_res.pa_stderr)
    opt_entry = DominanceEntry("optimum", opt_res.pa_hat, opt_res.mse_hat,
                               opt_util, opt_sigma, False)

    entries = []
    violations = []
    for label, strat in candidates:
        res = run_monte_carlo(cfg, strat, n_workers=n_workers)
        if res.mse_hat is None:
            entries.append(DominanceEntry(label, res.pa_hat, None, None, None,
                                          False, note="no accepted trials"))
            continue
        util = float(spec.adversary.value(res.mse_hat, res.pa_hat))
        sigma = _utility_sigma(spec.adversary, res.mse_hat, res.pa_hat,
                               res.mse_stderr, res.pa_stderr)
        combined = math.sqrt(sigma * sigma + opt_sigma * opt_sigma)
        bad = util > opt_util + 4.0 * combined
        entries.append(DominanceEntry(label, res.pa_hat, res.mse_hat, util, sigma, bad))
        if bad:
            violations.append(label)
    return DominanceReport(opt_entry, tuple(entries), tuple(violations))
