"""Synthetic detector click streams and their closed-form expectations.

Pulsed light
------------
For light in a single temporal mode the n-photon coincidence density
factorizes: measuring photons at times t_1..t_n has density proportional
to the pair/triple/... factorial moment of the photon-number distribution
times the product |v(t_1)|^2 ... |v(t_n)|^2.  Conditional on the photon
number, arrival times therefore carry no information about the state and
are i.i.d. draws from the intensity profile |v(t)|^2.  That gives the
sampling oracle used here, pulse by pulse:

1. draw n from P_n,
2. keep each photon independently with the detector efficiency s
   (binomial thinning),
3. give each kept photon an arrival time drawn i.i.d. from |v(t)|^2
   centered in the pulse slot,
4. optionally blur times with Gaussian jitter and apply non-paralyzable
   dead-time removal.

The matching analytic curves are

    pc(t) = s * (F2 / nbar) * |v(t)|^2        per-pulse conditional rate
    D(tau) = N s^2 F2 * eta(tau)              pair time-difference density
    Ip(N) = N s nbar                          expected total clicks

with nbar and F2 the first and second factorial moments of P_n, so that
D(tau) = Ip^2 g2q eta(tau) / N holds identically.

Stationary chaotic light
------------------------
A complex circular-Gaussian field is synthesized by filtering white noise
with a kernel whose correlation time is 1/bandwidth (integrated-|g1|^2
convention); clicks then come from an inhomogeneous Poisson process driven
by the squared field magnitude (a Cox process).  That reproduces the
bunching peak g2(0) = 2 of chaotic light with baseline 1.

Determinism: all randomness flows from the seed through fixed-size work
blocks (`rngutil`), so identical (seed, config) gives a bit-identical
stream for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.signal import oaconvolve
from scipy.special import ndtri

from . import modes as _modes
from . import states as _states
from .rngutil import block_generator, derive_roots
from .streams import ClickStream

__all__ = [
    "DetectorModel",
    "PulseTrainConfig",
    "StationaryThermalConfig",
    "simulate_pulse_train",
    "simulate_stationary_thermal",
    "simulate_stationary_poisson",
    "analytic_pc",
    "analytic_D",
    "analytic_Ip",
]

_PULSE_BLOCK = 1 << 14
_FIELD_CHUNK = 1 << 20


@dataclass(frozen=True)
class DetectorModel:
    """Detection efficiency plus optional timing jitter and dead time.

    The defaults describe the ideal detector for which efficiency enters
    every expectation as a pure prefactor.
    """

    efficiency: float = 1.0
    timing_jitter_sigma: float = 0.0
    dead_time: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.efficiency <= 1.0:
            raise ValueError("efficiency must lie in [0, 1]")
        if self.timing_jitter_sigma < 0 or self.dead_time < 0:
            raise ValueError("jitter and dead time must be >= 0")


@dataclass(frozen=True)
class PulseTrainConfig:
    """A train of identical, well-separated pulses.

    The repetition period must exceed ten times the mode width so that
    each pulse stays single-mode within its own slot; pulse i is centered
    at (i + 1/2) * repetition_period plus the mode's own center offset.
    """

    num_pulses: int
    repetition_period: float
    mode: _modes.TemporalMode

    def __post_init__(self):
        if self.num_pulses < 1 or self.num_pulses != int(self.num_pulses):
            raise ValueError("num_pulses must be a positive integer")
        if not self.repetition_period > 0:
            raise ValueError("repetition_period must be positive")
        spread = self.mode.width * math.sqrt(2.0 * self.mode.order + 1.0)
        if not self.repetition_period > 10.0 * spread:
            raise ValueError(
                f"repetition_period {self.repetition_period:g} must exceed 10x "
                f"the pulse width {spread:g}: pulses would overlap")


@dataclass(frozen=True)
class StationaryThermalConfig:
    """Chaotic (thermal) stationary source.

    ``mean_rate`` is the pre-efficiency mean photocount rate;
    ``spectral_bandwidth`` fixes the field correlation time 1/bandwidth
    (the integral of |g1|^2).  The field grid must resolve that time:
    field_timestep <= 1/(20 bandwidth), which is also the default.
    """

    mean_rate: float
    spectral_bandwidth: float
    duration: float
    field_timestep: float | None = None
    spectral_shape: str = "gaussian"

    def __post_init__(self):
        if self.mean_rate < 0 or self.spectral_bandwidth <= 0 or self.duration <= 0:
            raise ValueError("rate must be >= 0, bandwidth and duration positive")
        limit = 1.0 / (20.0 * self.spectral_bandwidth)
        if self.field_timestep is None:
            object.__setattr__(self, "field_timestep", limit)
        elif not 0 < self.field_timestep <= limit * (1 + 1e-12):
            raise ValueError(
                f"field_timestep must be <= 1/(20*bandwidth) = {limit:g}")
        if self.duration * self.spectral_bandwidth < 10.0:
            raise ValueError("duration must be much longer than 1/bandwidth")
        if self.spectral_shape not in ("gaussian", "lorentzian"):
            raise ValueError("spectral_shape must be 'gaussian' or 'lorentzian'")


# ---------------------------------------------------------------------------
# pulsed simulation


def _sample_arrival_offsets(mode, count, rng):
    """Arrival times relative to the pulse center, i.i.d. from |v(t)|^2."""
    if count == 0:
        return np.empty(0)
    if mode.kind == "gaussian":
        # |v|^2 is Gaussian with s.d. width/sqrt(2); inverse CDF is exact
        sigma = mode.width / math.sqrt(2.0)
        return mode.center + ndtri(rng.random(count)) * sigma
    t, _ = _modes._grid(mode)
    lo, hi = float(t[0]), float(t[-1])
    bound = float(np.max(_modes.intensity_profile(mode, t))) * 1.001
    accept_rate = max(1.0 / ((hi - lo) * bound), 1e-3)
    out = np.empty(count)
    filled = 0
    while filled < count:
        m = max(1024, int(1.5 * (count - filled) / accept_rate))
        cand = lo + (hi - lo) * rng.random(m)
        keep = rng.random(m) * bound <= _modes.intensity_profile(mode, cand)
        good = cand[keep]
        take = min(good.size, count - filled)
        out[filled:filled + take] = good[:take]
        filled += take
    return out


def _pulse_block(cdf, mode, detector, period, lo, hi, root, block):
    rng = block_generator(root, block)
    n = np.searchsorted(cdf, rng.random(hi - lo), side="right")
    n = np.minimum(n, cdf.size - 1)
    kept = rng.binomial(n, detector.efficiency) if detector.efficiency < 1.0 else n
    total = int(kept.sum())
    pulse_idx = np.repeat(np.arange(lo, hi, dtype=np.int64), kept)
    times = (pulse_idx + 0.5) * period + _sample_arrival_offsets(mode, total, rng)
    if detector.timing_jitter_sigma > 0 and total:
        times = times + ndtri(rng.random(total)) * detector.timing_jitter_sigma
    return pulse_idx, times


def _dead_time_filter(pulse_idx, times, dead):
    if dead <= 0 or times.size == 0:
        return pulse_idx, times
    keep = np.ones(times.size, dtype=bool)
    last = -math.inf
    for i, t in enumerate(times):
        if t - last < dead:
            keep[i] = False
        else:
            last = t
    return pulse_idx[keep], times[keep]


def _detector_dict(d: DetectorModel) -> dict:
    return {"efficiency": d.efficiency,
            "timing_jitter_sigma": d.timing_jitter_sigma,
            "dead_time": d.dead_time}


def simulate_pulse_train(state: _states.QuantumState, detector: DetectorModel,
                         train: PulseTrainConfig, seed, workers: int = 1) -> ClickStream:
    """Monte Carlo click stream for a pulse train.

    Work is split into fixed blocks of pulses, each with its own
    counter-based substream, so the output is identical for any
    ``workers`` value; the merged records are time sorted.
    """
    cdf = np.cumsum(state.pn)
    root = derive_roots(seed)[0]
    n_blocks = (train.num_pulses + _PULSE_BLOCK - 1) // _PULSE_BLOCK

    def run(block):
        lo = block * _PULSE_BLOCK
        hi = min(lo + _PULSE_BLOCK, train.num_pulses)
        return _pulse_block(cdf, train.mode, detector, train.repetition_period,
                            lo, hi, root, block)

    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_blocks)))
    else:
        parts = [run(b) for b in range(n_blocks)]
    pulse_idx = np.concatenate([p for p, _ in parts])
    times = np.concatenate([t for _, t in parts])
    order = np.argsort(times, kind="stable")
    pulse_idx, times = pulse_idx[order], times[order]
    pulse_idx, times = _dead_time_filter(pulse_idx, times, detector.dead_time)
    meta = {
        "kind": "pulsed",
        "seed": int(seed),
        "state": state.label,
        "mode": train.mode.label,
        "detector": _detector_dict(detector),
        "train": {"num_pulses": int(train.num_pulses),
                  "repetition_period": train.repetition_period},
    }
    return ClickStream(pulse_idx, times, meta)


# ---------------------------------------------------------------------------
# stationary simulation


def _field_kernel(cfg: StationaryThermalConfig, dt: float) -> np.ndarray:
    """Filter impulse response whose autocorrelation is the field g1.

    Gaussian: |g1(tau)|^2 = exp(-pi tau^2 bandwidth^2), so the integrated
    coherence time int |g1|^2 dtau equals 1/bandwidth; the lorentzian
    option gives g1 = exp(-|tau| * bandwidth) with the same integral.
    """
    if cfg.spectral_shape == "gaussian":
        sigma_h = 1.0 / (math.sqrt(2.0 * math.pi) * cfg.spectral_bandwidth)
        half = int(math.ceil(6.0 * sigma_h / dt))
        k = np.arange(-half, half + 1) * dt
        ker = np.exp(-k**2 / (2.0 * sigma_h**2))
    else:
        # one-sided exponential kernel: g1 = exp(-bandwidth |tau|), whose
        # squared magnitude integrates to 1/bandwidth as well
        tau_l = 1.0 / cfg.spectral_bandwidth
        n_k = int(math.ceil(12.0 * tau_l / dt))
        ker = np.exp(-np.arange(n_k + 1) * dt / tau_l)
    return ker / math.sqrt(float(np.sum(ker**2)))


def _field_intensity_chunks(cfg, kernel, root_noise, n_grid):
    """Yield |E|^2 per chunk with exact convolution carry across chunks.

    The kernel has unit power and the white noise unit variance per
    quadrature pair, so |E|^2 has ensemble mean 2; chunk content depends
    only on (root, chunk index), never on how chunks are scheduled.
    """
    carry = np.zeros(kernel.size - 1, dtype=complex)
    for c in range(0, (n_grid + _FIELD_CHUNK - 1) // _FIELD_CHUNK):
        lo = c * _FIELD_CHUNK
        length = min(_FIELD_CHUNK, n_grid - lo)
        rng = block_generator(root_noise, c)
        noise = rng.standard_normal(length) + 1j * rng.standard_normal(length)
        y = oaconvolve(noise, kernel, mode="full")
        if carry.size:
            y[:carry.size] += carry
        carry = y[length:]
        seg = y[:length]
        yield lo, (seg.real**2 + seg.imag**2)


def simulate_stationary_thermal(cfg: StationaryThermalConfig,
                                detector: DetectorModel, seed) -> ClickStream:
    """Cox-process click stream for stationary chaotic light.

    The instantaneous rate is |E(t)|^2 scaled so its ensemble mean equals
    efficiency * mean_rate; clicks are Poisson within each field timestep
    and placed uniformly inside it.
    """
    dt = cfg.field_timestep
    n_grid = int(round(cfg.duration / dt))
    kernel = _field_kernel(cfg, dt)
    roots = derive_roots(seed)
    # unit-power kernel and unit-variance complex noise give E|E|^2 = 2
    scale = detector.efficiency * cfg.mean_rate / 2.0

    all_times = []
    for lo, intensity in _field_intensity_chunks(cfg, kernel, roots[1], n_grid):
        rng = block_generator(roots[2], lo // _FIELD_CHUNK)
        counts = rng.poisson(intensity * (scale * dt))
        total = int(counts.sum())
        if total:
            cell = np.repeat(np.arange(intensity.size), counts)
            all_times.append((lo + cell + rng.random(total)) * dt)
    times = np.concatenate(all_times) if all_times else np.empty(0)
    if detector.timing_jitter_sigma > 0 and times.size:
        rng = block_generator(roots[3], 0)
        times = times + ndtri(rng.random(times.size)) * detector.timing_jitter_sigma
    times = np.sort(times)
    idx = np.full(times.size, -1, dtype=np.int64)
    idx, times = _dead_time_filter(idx, times, detector.dead_time)
    meta = {
        "kind": "stationary",
        "seed": int(seed),
        "state": None,
        "mode": None,
        "detector": _detector_dict(detector),
        "stationary": {"mean_rate": cfg.mean_rate,
                       "spectral_bandwidth": cfg.spectral_bandwidth,
                       "duration": cfg.duration,
                       "field_timestep": cfg.field_timestep,
                       "spectral_shape": cfg.spectral_shape},
    }
    return ClickStream(idx, times, meta)


def simulate_stationary_poisson(mean_rate: float, duration: float, seed,
                                detector: DetectorModel | None = None) -> ClickStream:
    """Constant-rate control source (no intensity fluctuations, flat g2)."""
    if mean_rate < 0 or duration <= 0:
        raise ValueError("rate must be >= 0 and duration positive")
    s = detector.efficiency if detector is not None else 1.0
    rng = block_generator(derive_roots(seed)[0], 0)
    total = int(rng.poisson(mean_rate * s * duration))
    times = np.sort(rng.random(total)) * duration
    meta = {
        "kind": "stationary",
        "seed": int(seed),
        "state": None,
        "mode": None,
        "detector": _detector_dict(detector or DetectorModel()),
        "stationary": {"mean_rate": mean_rate, "spectral_bandwidth": None,
                       "duration": duration, "field_timestep": None,
                       "spectral_shape": "flat"},
    }
    return ClickStream(np.full(total, -1, dtype=np.int64), times, meta)


# ---------------------------------------------------------------------------
# closed-form expectations


def analytic_pc(state, detector, mode, t_plus_tau):
    """Conditional click rate within one pulse, s * (F2/nbar) * |v(t)|^2.

    Depends on the first-click time t and the delay tau only through the
    sum t + tau (measured from the pulse center).
    """
    nbar = _states.mean_photon_number(state)
    if nbar <= 0:
        raise ValueError("conditional probability undefined for vacuum")
    f2 = _states.second_factorial_moment(state)
    return detector.efficiency * (f2 / nbar) * _modes.intensity_profile(mode, t_plus_tau)


def analytic_D(state, detector, mode, num_pulses, tau):
    """Expected pair time-difference density over ``num_pulses`` pulses."""
    f2 = _states.second_factorial_moment(state)
    eta = _modes.eta_numeric(mode, tau)
    return num_pulses * detector.efficiency**2 * f2 * eta


def analytic_Ip(state, detector, num_pulses) -> float:
    """Expected total click count N * s * nbar (modes are unit normalized)."""
    return num_pulses * detector.efficiency * _states.mean_photon_number(state)
