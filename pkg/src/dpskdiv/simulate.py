"""Monte Carlo link simulator for DPSK diversity reception.

Each trial draws one correlated fading pair per branch and one pair of
matched-filter outputs; the detectors only ever see the (previous, current)
joint statistics, so no full time series is needed.  The Doppler spectrum
enters solely through rho, computed by the channel module.

Reproducibility contract
------------------------
Trials are split into fixed-size batches of TRIALS_PER_BATCH.  Batch b is
generated from its own counter-based stream, Philox keyed by the 64-bit
seed with counter b << 64, so any assignment of batches to workers yields
the same totals.  Within a batch the draw order is: one uniform per trial
for the data bits, then a (trials, L, 8) uniform block, columns 0:4 for the
fading pair and 4:8 for the noise, mapped to normals by Box-Muller on
consecutive pairs.  Changing TRIALS_PER_BATCH changes the stream layout and
therefore the estimates; it is a contract constant, not a tuning knob.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .bep import DecisionStatistics, optimum_weights
from .channel import BranchParams, Detector, DiversityConfig, validate_config
from .errors import ConfigError

TRIALS_PER_BATCH = 1 << 17
_MASK64 = (1 << 64) - 1
_MIN_ERRORS_FOR_STOP = 100


@dataclass(frozen=True)
class SimScale:
    """Energy and noise scale of the simulation.

    Defaults pin eb = n0 = 1; the library's gamma values assume these, and
    the per-branch fading power r0 = gamma/2 keeps gamma = 2*eb*r0/n0.
    Overriding n0 (e.g. to 0 for noiseless checks) rescales the noise only.
    """

    eb: float = 1.0
    n0: float = 1.0

    def r0(self, branch: BranchParams) -> float:
        return 0.5 * branch.gamma


@dataclass(frozen=True)
class FadingPair:
    a_prev: complex
    a_curr: complex


@dataclass(frozen=True)
class Observation:
    z_prev: complex
    z_curr: complex


@dataclass(frozen=True)
class BepEstimate:
    errors: int
    trials: int
    p_hat: float
    ci95_halfwidth: float
    seed: int
    detector: Detector
    early_stopped: bool = False


def _normals(u: np.ndarray) -> np.ndarray:
    """Box-Muller on consecutive pairs along the last axis (even length)."""
    r = np.sqrt(-2.0 * np.log(1.0 - u[..., 0::2]))
    theta = 2.0 * np.pi * u[..., 1::2]
    out = np.empty_like(u)
    out[..., 0::2] = r * np.cos(theta)
    out[..., 1::2] = r * np.sin(theta)
    return out


def sample_fading_pair(branch: BranchParams, scale: SimScale, rng: np.random.Generator,
                       size: Optional[int] = None) -> FadingPair:
    """Draw matched-filter fading gains for two adjacent bits.

    a_curr = rho * a_prev + sqrt(1 - rho^2) * g with g independent and
    identically scaled, which realizes exactly the pairwise covariance the
    error probability depends on.  With size=None the fields are scalars;
    otherwise length-size arrays.
    """
    shape = () if size is None else (int(size),)
    g = _normals(rng.random(shape + (4,)))
    sd = math.sqrt(scale.r0(branch))
    a_prev = sd * (g[..., 0] + 1j * g[..., 1])
    innov = sd * (g[..., 2] + 1j * g[..., 3])
    a_curr = branch.rho * a_prev + math.sqrt(1.0 - branch.rho ** 2) * innov
    if size is None:
        return FadingPair(complex(a_prev), complex(a_curr))
    return FadingPair(a_prev, a_curr)


def make_observation(pair: FadingPair, delta_phi: float, scale: SimScale,
                     rng: np.random.Generator) -> Observation:
    """Matched-filter outputs for the two bits, phase difference 0 or pi."""
    if delta_phi == 0.0:
        rot = 1.0
    elif delta_phi == math.pi:
        rot = -1.0
    else:
        raise ConfigError(f"delta_phi must be 0 or pi, got {delta_phi}")
    shape = np.shape(pair.a_prev)
    g = _normals(rng.random(shape + (4,)))
    nsd = math.sqrt(scale.n0 / 2.0)
    seb = math.sqrt(scale.eb)
    z_prev = seb * pair.a_prev + nsd * (g[..., 0] + 1j * g[..., 1])
    z_curr = seb * rot * pair.a_curr + nsd * (g[..., 2] + 1j * g[..., 3])
    if shape == ():
        return Observation(complex(z_prev), complex(z_curr))
    return Observation(z_prev, z_curr)


def decide(obs: Sequence[Observation], weights: Sequence[float]) -> int:
    """Sign detector: 0 if Re[sum w_i z_curr conj(z_prev)] >= 0, else 1.

    An exactly zero statistic decides 0 (measure-zero tie, fixed for
    determinism).
    """
    if len(obs) != len(weights):
        raise ConfigError("observation/weight length mismatch")
    stat = math.fsum(w * (ob.z_curr * ob.z_prev.conjugate()).real
                     for ob, w in zip(obs, weights))
    return 1 if stat < 0.0 else 0


def decision_statistics(obs: Sequence[Observation], weights: Sequence[float]) -> DecisionStatistics:
    """Split the combiner output into its two nonnegative halves x - y."""
    if len(obs) != len(weights):
        raise ConfigError("observation/weight length mismatch")
    x = math.fsum(w * abs(ob.z_curr + ob.z_prev) ** 2 / 4.0 for ob, w in zip(obs, weights))
    y = math.fsum(w * abs(ob.z_curr - ob.z_prev) ** 2 / 4.0 for ob, w in zip(obs, weights))
    return DecisionStatistics(x=x, y=y)


def loglik_metric(obs: Sequence[Observation], branches: Sequence[BranchParams],
                  scale: SimScale, m: int):
    """Log-likelihood of the observations under phase difference pi*m.

    Sums, per branch, the log density of z_curr conditioned on z_prev (a
    complex Gaussian whose mean is proportional to z_prev rotated by the
    hypothesis) plus the marginal log density of z_prev; the hypothesis-
    independent constant is dropped.  Broadcasts over array-valued fields.
    """
    if m not in (0, 1):
        raise ConfigError(f"hypothesis m must be 0 or 1, got {m}")
    if len(obs) != len(branches):
        raise ConfigError("observation/branch length mismatch")
    sign = 1.0 if m == 0 else -1.0
    eb = scale.eb
    n0 = scale.n0
    acc = 0.0
    for ob, br in zip(obs, branches):
        r0 = scale.r0(br)
        r1 = br.rho * r0
        s2 = 2.0 * eb * r0 + n0
        mean_coef = 2.0 * r1 * eb / s2
        var_c = s2 - (2.0 * eb * r1) ** 2 / s2
        diff = ob.z_curr - sign * mean_coef * ob.z_prev
        acc = acc + (
            -np.log(np.pi * var_c) - np.abs(diff) ** 2 / var_c
            - np.log(np.pi * s2) - np.abs(ob.z_prev) ** 2 / s2
        )
    if np.ndim(acc) == 0:
        return float(acc)
    return acc


def _detector_weights(cfg: DiversityConfig) -> np.ndarray:
    if cfg.detector is Detector.OPTIMUM:
        return np.array(optimum_weights(cfg.branches))
    return np.ones(len(cfg.branches))


def _batch_rng(seed: int, batch: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=batch << 64))


def _count_errors(rng: np.random.Generator, n: int, rho: np.ndarray, r0: np.ndarray,
                  weights: np.ndarray, scale: SimScale) -> int:
    bits = rng.random(n) < 0.5
    g = _normals(rng.random((n, len(rho), 8)))
    sd = np.sqrt(r0)
    a_prev = sd * (g[..., 0] + 1j * g[..., 1])
    a_curr = rho * a_prev + np.sqrt(1.0 - rho ** 2) * sd * (g[..., 2] + 1j * g[..., 3])
    nsd = math.sqrt(scale.n0 / 2.0)
    seb = math.sqrt(scale.eb)
    z_prev = seb * a_prev + nsd * (g[..., 4] + 1j * g[..., 5])
    rot = np.where(bits, -1.0, 1.0)[:, None]
    z_curr = seb * rot * a_curr + nsd * (g[..., 6] + 1j * g[..., 7])
    stat = (z_curr * np.conj(z_prev)).real @ weights
    detected = stat < 0.0
    return int(np.count_nonzero(detected != bits))


def estimate_bep(cfg: DiversityConfig, trials: int, seed: int, workers: int = 1,
                 stop_rel_tol: Optional[float] = None) -> BepEstimate:
    """Estimate the bit error probability by simulating random bits.

    Batch totals are worker-count invariant; with stop_rel_tol set, the run
    ends once the 95% half-width drops below stop_rel_tol * p_hat with at
    least 100 errors seen, checked after each wave of `workers` batches, so
    early-stopped results depend on the worker count and are flagged.
    """
    cfg = validate_config(cfg)
    trials = int(trials)
    if trials < 1:
        raise ConfigError(f"trials={trials} must be >= 1")
    workers = int(workers)
    if workers < 1:
        raise ConfigError(f"workers={workers} must be >= 1")
    if stop_rel_tol is not None and not stop_rel_tol > 0.0:
        raise ConfigError(f"stop_rel_tol={stop_rel_tol} must be positive")
    seed = int(seed) & _MASK64
    rho = np.array([br.rho for br in cfg.branches])
    r0 = np.array([0.5 * br.gamma for br in cfg.branches])
    weights = _detector_weights(cfg)
    scale = SimScale()

    n_batches = (trials + TRIALS_PER_BATCH - 1) // TRIALS_PER_BATCH

    def run_batch(b: int) -> int:
        size = min(TRIALS_PER_BATCH, trials - b * TRIALS_PER_BATCH)
        return _count_errors(_batch_rng(seed, b), size, rho, r0, weights, scale)

    errors = 0
    done = 0
    early = False
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for wave_start in range(0, n_batches, workers):
            wave = range(wave_start, min(wave_start + workers, n_batches))
            if pool is None:
                counts = [run_batch(b) for b in wave]
            else:
                counts = list(pool.map(run_batch, wave))
            errors += sum(counts)
            done = min((wave[-1] + 1) * TRIALS_PER_BATCH, trials)
            if stop_rel_tol is not None and errors >= _MIN_ERRORS_FOR_STOP:
                p = errors / done
                ci = 1.96 * math.sqrt(p * (1.0 - p) / done)
                if ci < stop_rel_tol * p:
                    early = True
                    break
    finally:
        if pool is not None:
            pool.shutdown()
    p_hat = errors / done
    ci = 1.96 * math.sqrt(p_hat * (1.0 - p_hat) / done)
    return BepEstimate(errors=errors, trials=done, p_hat=p_hat, ci95_halfwidth=ci,
                       seed=seed, detector=cfg.detector, early_stopped=early)
