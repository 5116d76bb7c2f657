"""Temporal mode functions and the pulse-shape overlap factor eta(tau).

A temporal mode v(t) carries the deterministic time dependence of a pulse;
the quantum state lives in the mode operator and knows nothing about time.
Modes are normalized at construction so that the intensity profile
|v(t)|^2 integrates to one.  The central derived quantity is the
normalized intensity autocorrelation

    eta(tau) = int |v(t+tau)|^2 |v(t)|^2 dt / (int |v(t)|^2 dt)^2

with units of inverse time.  eta integrates to one over tau, peaks at
tau = 0 and, for a Gaussian mode of amplitude width dt_p (meaning
v(t) ~ exp(-t^2 / 2 dt_p^2)), has the closed form

    eta(tau) = exp(-tau^2 / 2 dt_p^2) / (sqrt(2 pi) dt_p).

eta(0) is the effective inverse pulse width; shrinking the pulse raises
it, which is exactly the pulse-shape bunching the estimators in
`estimate` have to divide out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.special import eval_hermite

__all__ = [
    "TemporalMode",
    "EtaProfile",
    "gaussian_mode",
    "hermite_gauss_mode",
    "sampled_mode",
    "amplitude",
    "intensity_profile",
    "eta_numeric",
    "eta_gaussian",
    "eta_profile",
    "autocorrelation_width",
    "parse_mode_spec",
]

# Quadrature grid: this step keeps composite-Simpson errors on smooth
# Gaussian-type integrands a couple of orders below the 1e-8 relative
# target for eta.
_POINTS_PER_WIDTH = 400
_REACH_WIDTHS = 8.0
_MAX_HG_ORDER = 30


@dataclass(frozen=True, eq=False)
class TemporalMode:
    """Normalized temporal mode.

    ``width`` is the amplitude width dt_p for parametric kinds; for
    sampled modes it is sqrt(2) times the r.m.s. width of the intensity
    profile, which coincides with dt_p when the samples happen to be
    Gaussian.  ``grid_t``/``grid_v`` are set for sampled modes only.
    """

    kind: str
    width: float
    center: float = 0.0
    order: int = 0
    grid_t: np.ndarray | None = None
    grid_v: np.ndarray | None = None
    label: str = ""

    def __repr__(self):
        return f"TemporalMode({self.label!r})"


def _param_label(prefix: str, width: float, center: float) -> str:
    lab = f"{prefix}:{width:g}"
    return lab + (f"@{center:g}" if center else "")


def gaussian_mode(width: float, center: float = 0.0) -> TemporalMode:
    """Gaussian pulse v(t) ~ exp(-(t-center)^2 / 2 width^2)."""
    width = float(width)
    if not math.isfinite(width) or width <= 0:
        raise ValueError("pulse width must be positive")
    return TemporalMode("gaussian", width, float(center),
                        label=_param_label("gauss", width, center))


def hermite_gauss_mode(order: int, width: float, center: float = 0.0) -> TemporalMode:
    """Hermite-Gauss mode: H_order((t-center)/width) under the Gaussian envelope.

    Equal-width modes of different order are mutually orthonormal; order 0
    reproduces `gaussian_mode`.
    """
    if order != int(order) or not 0 <= int(order) <= _MAX_HG_ORDER:
        raise ValueError(f"order must be an integer in [0, {_MAX_HG_ORDER}]")
    width = float(width)
    if not math.isfinite(width) or width <= 0:
        raise ValueError("pulse width must be positive")
    order = int(order)
    lab = f"hg:{order}:{width:g}" + (f"@{center:g}" if center else "")
    return TemporalMode("hermite_gauss", width, float(center), order, label=lab)


def sampled_mode(t, v, label: str | None = None) -> TemporalMode:
    """Mode from complex samples on a uniform time grid.

    The grid must be uniform and fine enough (spacing below a fiftieth of
    the intensity r.m.s. width); v is treated as zero outside the grid and
    linearly interpolated inside it.
    """
    t = np.asarray(t, dtype=float).ravel()
    v = np.asarray(v, dtype=complex).ravel()
    if t.size != v.size or t.size < 9:
        raise ValueError("need matching t and v arrays with at least 9 samples")
    steps = np.diff(t)
    if np.any(steps <= 0):
        raise ValueError("sample times must be strictly increasing")
    h = float(steps.mean())
    if np.max(np.abs(steps - h)) > 1e-6 * h:
        raise ValueError("sample grid must be uniform")
    if not np.all(np.isfinite(t)) or not np.all(np.isfinite(v)):
        raise ValueError("samples must be finite")
    intensity = np.abs(v) ** 2
    norm = simpson(intensity, dx=h)
    if not norm > 0:
        raise ValueError("mode has zero energy")
    v = v / math.sqrt(norm)
    intensity = intensity / norm
    mean = simpson(t * intensity, dx=h)
    rms = math.sqrt(max(simpson((t - mean) ** 2 * intensity, dx=h), 0.0))
    if rms <= 0:
        raise ValueError("degenerate intensity profile")
    if h > rms / 50.0:
        raise ValueError(
            f"sample spacing {h:g} too coarse for r.m.s. width {rms:g}; need <= width/50")
    t = t.copy()
    t.setflags(write=False)
    v = v.copy()
    v.setflags(write=False)
    return TemporalMode("sampled", math.sqrt(2.0) * rms, float(mean),
                        grid_t=t, grid_v=v, label=label or "sampled:<array>")


def amplitude(mode: TemporalMode, t):
    """Mode amplitude v(t), vectorized over t (complex for sampled modes)."""
    arr = np.asarray(t, dtype=float)
    if mode.kind == "sampled":
        flat = arr.ravel()
        re = np.interp(flat, mode.grid_t, mode.grid_v.real, left=0.0, right=0.0)
        im = np.interp(flat, mode.grid_t, mode.grid_v.imag, left=0.0, right=0.0)
        out = (re + 1j * im).reshape(arr.shape)
        return out if arr.ndim else complex(out)
    x = (arr - mode.center) / mode.width
    if mode.kind == "gaussian":
        out = (math.pi * mode.width**2) ** (-0.25) * np.exp(-0.5 * x * x)
    else:
        norm = 1.0 / math.sqrt(2.0**mode.order * math.factorial(mode.order)
                               * math.sqrt(math.pi) * mode.width)
        out = norm * eval_hermite(mode.order, x) * np.exp(-0.5 * x * x)
    return out if arr.ndim else float(out)


def intensity_profile(mode: TemporalMode, t):
    """|v(t)|^2: nonnegative, unit integral, zero outside a sampled grid."""
    a = amplitude(mode, t)
    out = np.abs(np.asarray(a)) ** 2
    return out if np.ndim(t) else float(out)


def _grid(mode: TemporalMode):
    """Uniform quadrature grid covering all the mode's intensity."""
    if mode.kind == "sampled":
        h = float(mode.grid_t[1] - mode.grid_t[0])
        return mode.grid_t, h
    reach = mode.width * (_REACH_WIDTHS + 2.0 * math.sqrt(2.0 * mode.order + 1.0))
    half = int(round(reach / mode.width * _POINTS_PER_WIDTH))
    t = mode.center + np.arange(-half, half + 1) * (mode.width / _POINTS_PER_WIDTH)
    return t, mode.width / _POINTS_PER_WIDTH


def eta_numeric(mode: TemporalMode, tau):
    """Quadrature evaluation of eta(tau); accepts scalar or array tau."""
    t, h = _grid(mode)
    base = intensity_profile(mode, t)
    denom = float(simpson(base, dx=h)) ** 2
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    out = np.empty(taus.size)
    for i in range(0, taus.size, 256):
        block = taus[i:i + 256, None] + t[None, :]
        shifted = intensity_profile(mode, block)
        out[i:i + 256] = simpson(shifted * base[None, :], dx=h, axis=-1)
    out /= denom
    return out if np.ndim(tau) else float(out[0])


def eta_gaussian(delta_tp: float, tau):
    """Closed-form eta for a Gaussian mode of amplitude width ``delta_tp``."""
    delta_tp = float(delta_tp)
    if not math.isfinite(delta_tp) or delta_tp <= 0:
        raise ValueError("pulse width must be positive")
    arr = np.asarray(tau, dtype=float)
    out = np.exp(-arr**2 / (2.0 * delta_tp**2)) / (math.sqrt(2.0 * math.pi) * delta_tp)
    return out if arr.ndim else float(out)


@dataclass(frozen=True, eq=False)
class EtaProfile:
    """eta sampled on a symmetric tau grid (seconds vs 1/seconds)."""

    tau: np.ndarray
    eta: np.ndarray

    def integral(self) -> float:
        return float(simpson(self.eta, x=self.tau))

    def rms_width(self) -> float:
        # eta is symmetric about tau = 0, so no centering term
        return math.sqrt(float(simpson(self.tau**2 * self.eta, x=self.tau))
                         / self.integral())

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("tau_seconds,eta_per_second\n")
            np.savetxt(fh, np.column_stack([self.tau, self.eta]),
                       fmt="%.12g", delimiter=",")


def eta_profile(mode: TemporalMode, max_tau: float | None = None,
                num: int = 4001) -> EtaProfile:
    """Tabulate eta on a symmetric grid wide enough to hold all its mass."""
    if max_tau is None:
        t, _ = _grid(mode)
        max_tau = float(t[-1] - t[0])
    if num % 2 == 0:
        num += 1
    tau = np.linspace(-max_tau, max_tau, num)
    return EtaProfile(tau, np.asarray(eta_numeric(mode, tau)))


def autocorrelation_width(mode: TemporalMode) -> float:
    """R.m.s. width of eta; equals dt_p exactly for a Gaussian mode."""
    return eta_profile(mode).rms_width()


def _load_mode_csv(path: str):
    with open(path) as fh:
        first = fh.readline()
    skip = 0
    try:
        float(first.split(",")[0])
    except ValueError:
        skip = 1
    rows = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    if rows.shape[1] < 2:
        raise ValueError(f"{path}: expected columns t,Re(v)[,Im(v)]")
    t = rows[:, 0]
    v = rows[:, 1].astype(complex)
    if rows.shape[1] >= 3:
        v = v + 1j * rows[:, 2]
    return t, v


def parse_mode_spec(spec: str) -> TemporalMode:
    """Parse a mode spec string.

    Grammar: ``gauss:<dt_p>[@<t0>]``, ``hg:<j>:<dt_p>[@<t0>]``,
    ``sampled:<path to CSV of t,Re(v),Im(v)>``.
    """
    text = spec.strip()
    head, sep, rest = text.partition(":")
    if not sep or not rest:
        raise ValueError(f"bad mode spec {spec!r}")
    head = head.lower()
    try:
        if head == "sampled":
            t, v = _load_mode_csv(rest)
            return sampled_mode(t, v, label=text)
        body, _, t0 = rest.partition("@")
        center = float(t0) if t0 else 0.0
        if head == "gauss":
            return gaussian_mode(float(body), center)
        if head == "hg":
            jtxt, sep2, wtxt = body.partition(":")
            if not sep2:
                raise ValueError("hg spec needs hg:<order>:<width>")
            return hermite_gauss_mode(int(jtxt), float(wtxt), center)
    except ValueError as exc:
        raise ValueError(f"bad mode spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown mode kind {head!r} in {spec!r}")
