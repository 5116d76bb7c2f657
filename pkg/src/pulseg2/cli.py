"""Command-line front end.

Subcommands: ``simulate`` (config in, stream files out), ``analyze``
(stream in, report JSON + histogram CSV out), ``figure`` (CSV datasets
for the four standard plots), ``selftest`` (reduced-size end-to-end
checks).  Exit codes: 0 success, 1 config/usage error, 2 I/O or stream
format error, 3 estimation failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import estimate as _est
from . import modes as _modes
from . import simulate as _sim
from . import states as _states
from .config import ExperimentConfig
from .errors import ConfigError, EstimationError, StreamFormatError
from .streams import read_stream, sidecar_path, write_stream

__all__ = ["main", "entrypoint"]


class _Parser(argparse.ArgumentParser):
    # argparse would sys.exit(2); route usage problems to exit code 1 instead
    def error(self, message):
        raise ConfigError(message)


def _add_common(sub):
    sub.add_argument("--config", help="experiment config file")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--pulses", type=int, help="override pulse count")
    sub.add_argument("--state", help="state spec, e.g. thermal:0.5")
    sub.add_argument("--mode", help="mode spec, e.g. gauss:1e-9")
    sub.add_argument("--out", help="output path (simulate/analyze) or directory (figure)")
    sub.add_argument("--threads", type=int, help="worker count for simulation")
    sub.add_argument("--bin-width", type=float, dest="bin_width")
    sub.add_argument("--max-tau", type=float, dest="max_tau")


def _build_parser() -> _Parser:
    parser = _Parser(prog="pulseg2", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "analyze", "figure", "selftest"):
        p = sub.add_parser(name)
        _add_common(p)
        if name == "analyze":
            p.add_argument("stream", help="click-stream file to analyze")
            p.add_argument("--sidecar", help="metadata sidecar path")
        if name == "figure":
            p.add_argument("figure_id", help="figure number, 1-4")
        if name == "selftest":
            p.add_argument("--quick", action="store_true",
                           help="smallest run sizes (seconds, looser bands)")
    return parser


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    cfg.apply_overrides(
        seed=args.seed,
        num_pulses=args.pulses,
        state_spec=args.state,
        mode_spec=args.mode,
        workers=args.threads,
        bin_width=args.bin_width,
        max_tau=args.max_tau,
    )
    return cfg


def _cmd_simulate(args) -> int:
    cfg = _load_config(args)
    out = args.out or cfg.out_stream
    detector = cfg.detector()
    if cfg.kind == "pulsed":
        stream = _sim.simulate_pulse_train(cfg.state(), detector, cfg.train(),
                                           cfg.seed, workers=cfg.workers)
    else:
        stream = _sim.simulate_stationary_thermal(cfg.stationary(), detector, cfg.seed)
    write_stream(stream, out, fmt=cfg.stream_format,
                 sidecar=cfg.out_sidecar or sidecar_path(out))
    print(f"wrote {stream.n_clicks} clicks to {out}")
    return 0


def _cmd_analyze(args) -> int:
    stream = read_stream(args.stream, sidecar=getattr(args, "sidecar", None))
    cfg = ExperimentConfig.from_file(args.config) if args.config else None
    bin_width = args.bin_width or (cfg.bin_width if cfg else None)
    max_tau = args.max_tau or (cfg.max_tau if cfg else None)
    report_path = args.out or (cfg.out_report if cfg else "report.json")

    if not stream.is_pulsed:
        return _analyze_stationary(stream, bin_width, max_tau, report_path, cfg)

    mode = _modes.parse_mode_spec(args.mode) if args.mode else \
        (cfg.mode() if cfg else None)
    num_pulses = args.pulses or (cfg.num_pulses if cfg and args.config else None)
    report = _est.analyze_stream(stream, num_pulses=num_pulses, mode=mode,
                                 bin_width=bin_width, max_tau=max_tau)
    report.to_json(report_path)
    hist_path = cfg.out_histogram if cfg else "histogram.csv"
    if hist_path and report.Ip > 0:
        width = mode.width if mode is not None else report.fitted_width_seconds
        if width:
            hist = _est.tau_histogram(stream, bin_width or width / 20.0,
                                      max_tau or 6.0 * width)
            expected = _expected_counts(stream, hist, mode)
            hist.to_csv(hist_path, expected=expected)
    print(f"wrote report to {report_path}")
    for line in json.loads(report.to_json()).items():
        print(f"  {line[0]} = {line[1]}")
    return 0


def _expected_counts(stream, hist, mode):
    """Analytic overlay column when the generating config is in the sidecar."""
    meta = stream.metadata
    if mode is None or not meta.get("state") or not meta.get("train"):
        return None
    try:
        state = _states.parse_state_spec(meta["state"])
    except (ValueError, OSError):
        return None
    detector = _sim.DetectorModel(**meta.get("detector", {}))
    n = meta["train"]["num_pulses"]
    return _sim.analytic_D(state, detector, mode, n, hist.centers) * hist.bin_width


def _analyze_stationary(stream, bin_width, max_tau, report_path, cfg) -> int:
    meta = stream.metadata.get("stationary", {})
    bandwidth = meta.get("spectral_bandwidth") or (cfg.spectral_bandwidth if cfg else None)
    if bin_width is None:
        if bandwidth is None:
            raise EstimationError("stationary analysis needs --bin-width "
                                  "(bandwidth unknown)")
        bin_width = 1.0 / (50.0 * bandwidth)
    if max_tau is None:
        max_tau = (5.0 / bandwidth) if bandwidth else 500.0 * bin_width
    curve = _est.stationary_conditional_probability(stream, bin_width, max_tau)
    base_from = (3.0 / bandwidth) if bandwidth else max_tau / 2.0
    try:
        g2_zero, g2_sigma = _est.stationary_g2_zero(
            stream, bin_width, max_tau, base_from,
            block_length=None if bandwidth else 50 * bin_width)
    except EstimationError:
        g2_zero, g2_sigma = curve.peak_to_baseline(base_from), None
    summary = {
        "pc_peak_per_second": float(curve.pc[0]),
        "pc_baseline_per_second": curve.baseline(base_from),
        "g2_zero": g2_zero,
        "g2_zero_sigma": g2_sigma,
        "excess_fwhm_seconds": curve.excess_fwhm(base_from),
        "total_clicks": curve.total_clicks,
    }
    with open(report_path, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    curve_path = os.path.splitext(report_path)[0] + "_pc.csv"
    with open(curve_path, "w") as fh:
        fh.write("tau_seconds,pc_per_second\n")
        np.savetxt(fh, np.column_stack([curve.tau, curve.pc]),
                   fmt="%.12g", delimiter=",")
    print(f"wrote report to {report_path} and curve to {curve_path}")
    return 0


# ---------------------------------------------------------------------------
# figure datasets


def _fig1(outdir, cfg) -> list:
    """Counts per pulse slot for thermal vs coherent trains of equal mean."""
    n = min(cfg.num_pulses, 400)
    period = cfg.repetition_period
    mode = cfg.mode()
    det = _sim.DetectorModel()
    train = _sim.PulseTrainConfig(n, period, mode)
    rows = {}
    for name, state in (("thermal", _states.thermal(4.0)),
                        ("coherent", _states.coherent(4.0))):
        stream = _sim.simulate_pulse_train(state, det, train, cfg.seed)
        rows[name] = stream.counts_per_pulse(n)
    path = os.path.join(outdir, "figure1_count_records.csv")
    with open(path, "w") as fh:
        fh.write("time_seconds,counts_thermal,counts_coherent\n")
        t = (np.arange(n) + 0.5) * period
        np.savetxt(fh, np.column_stack([t, rows["thermal"], rows["coherent"]]),
                   fmt=("%.12g", "%d", "%d"), delimiter=",")
    return [path]


def _fig2(outdir, cfg) -> list:
    """Stationary thermal conditional probability (the bunching peak)."""
    scfg = _sim.StationaryThermalConfig(
        mean_rate=cfg.mean_rate, spectral_bandwidth=cfg.spectral_bandwidth,
        duration=min(cfg.duration, 2.0), spectral_shape=cfg.spectral_shape)
    stream = _sim.simulate_stationary_thermal(scfg, cfg.detector(), cfg.seed)
    bw = cfg.bin_width or 1.0 / (50.0 * scfg.spectral_bandwidth)
    max_tau = cfg.max_tau or 5.0 / scfg.spectral_bandwidth
    curve = _est.stationary_conditional_probability(stream, bw, max_tau)
    base = curve.baseline(3.0 / scfg.spectral_bandwidth)
    path = os.path.join(outdir, "figure2_stationary_pc.csv")
    with open(path, "w") as fh:
        fh.write("tau_seconds,pc_per_second,pc_normalized\n")
        np.savetxt(fh, np.column_stack([curve.tau, curve.pc, curve.pc / base]),
                   fmt="%.12g", delimiter=",")
    return [path]


def _fig3(outdir, cfg) -> list:
    """Time-difference histogram with the analytic density overlay."""
    state = cfg.state() if cfg.state_spec != ExperimentConfig.state_spec else \
        _states.thermal(1.0)
    mode = cfg.mode()
    det = cfg.detector()
    n = min(cfg.num_pulses, 200000)
    train = _sim.PulseTrainConfig(n, cfg.repetition_period, mode)
    stream = _sim.simulate_pulse_train(state, det, train, cfg.seed)
    bw = cfg.bin_width or mode.width / 20.0
    max_tau = cfg.max_tau or 5.0 * mode.width
    hist = _est.tau_histogram(stream, bw, max_tau)
    expected = _sim.analytic_D(state, det, mode, n, hist.centers) * bw
    path = os.path.join(outdir, "figure3_time_differences.csv")
    hist.to_csv(path, expected=expected)
    return [path]


def _fig4(outdir, cfg) -> list:
    """Pulse-shape bunching ratio g2p/g2q = eta(0)/N versus pulse width."""
    period = cfg.repetition_period
    widths = np.geomspace(1e-12, period / 10.0, 25)
    pulses = [100, 10000, 1000000]
    path = os.path.join(outdir, "figure4_g2p_over_g2q.csv")
    with open(path, "w") as fh:
        fh.write("delta_tp_seconds,num_pulses,g2p_over_g2q\n")
        for n in pulses:
            ratio = _modes.eta_gaussian(1.0, 0.0) / (widths * n)
            np.savetxt(fh, np.column_stack([widths, np.full(widths.size, n), ratio]),
                       fmt=("%.12g", "%d", "%.12g"), delimiter=",")
    return [path]


def _cmd_figure(args) -> int:
    try:
        fig_id = int(args.figure_id)
    except ValueError:
        raise ConfigError(f"figure id must be 1-4, got {args.figure_id!r}")
    if fig_id not in (1, 2, 3, 4):
        raise ConfigError(f"figure id must be 1-4, got {fig_id}")
    cfg = _load_config(args)
    outdir = args.out or "figures"
    os.makedirs(outdir, exist_ok=True)
    paths = {1: _fig1, 2: _fig2, 3: _fig3, 4: _fig4}[fig_id](outdir, cfg)
    for p in paths:
        print(f"wrote {p}")
    return 0


# ---------------------------------------------------------------------------
# selftest


def _selftest_checks(quick: bool):
    n_pulses = 20000 if quick else 100000
    period, width, s = 12.5e-9, 1e-9, 0.5
    mode = _modes.gaussian_mode(width)
    det = _sim.DetectorModel(efficiency=s)
    train = _sim.PulseTrainConfig(n_pulses, period, mode)

    def check_eta_closed_form():
        tau = np.linspace(-5 * width, 5 * width, 101)
        num = np.asarray(_modes.eta_numeric(mode, tau))
        ref = np.asarray(_modes.eta_gaussian(width, tau))
        err = float(np.max(np.abs(num - ref) / ref))
        return err < 1e-8, f"max relative error {err:.2e}"

    def check_pair_density_identity():
        state = _states.thermal(0.7)
        tau = np.linspace(-4 * width, 4 * width, 41)
        lhs = _sim.analytic_D(state, det, mode, n_pulses, tau)
        ip = _sim.analytic_Ip(state, det, n_pulses)
        rhs = ip**2 * _states.g2q_from_moments(state) \
            * np.asarray(_modes.eta_numeric(mode, tau)) / n_pulses
        err = float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))
        return err < 1e-10, f"max relative error {err:.2e}"

    def recovery(state, expect):
        stream = _sim.simulate_pulse_train(state, det, train, seed=7)
        hist = _est.tau_histogram(stream, width / 20.0, 6.0 * width)
        val, sig = _est.recover_g2q_gaussian(stream, hist, n_pulses, width)
        ok = abs(val - expect) < max(4.0 * sig, 0.02)
        return ok, f"recovered {val:.3f} +- {sig:.3f}, expected {expect:g}"

    def check_fock1_silence():
        stream = _sim.simulate_pulse_train(_states.fock(1), det, train, seed=11)
        hist = _est.tau_histogram(stream, width / 20.0, 6.0 * width)
        return hist.is_empty, f"{int(hist.counts.sum())} same-pulse pairs (want 0)"

    def check_determinism():
        a = _sim.simulate_pulse_train(_states.thermal(1.0), det, train, seed=3)
        b = _sim.simulate_pulse_train(_states.thermal(1.0), det, train, seed=3,
                                      workers=4)
        same = np.array_equal(a.times, b.times) and \
            np.array_equal(a.pulse_index, b.pulse_index)
        return same, "reruns and thread counts agree" if same else "streams differ"

    def check_stationary_peak():
        scfg = _sim.StationaryThermalConfig(1e5, 1e6, 0.4 if quick else 1.0)
        stream = _sim.simulate_stationary_thermal(scfg, _sim.DetectorModel(), seed=5)
        curve = _est.stationary_conditional_probability(
            stream, 1.0 / (50e6), 5e-6)
        ratio = curve.peak_to_baseline(3e-6)
        band = 0.25 if quick else 0.15
        return abs(ratio - 2.0) < band, f"peak/baseline {ratio:.3f} (want 2 +- {band})"

    return [
        ("eta quadrature vs closed form", check_eta_closed_form),
        ("pair density identity", check_pair_density_identity),
        ("thermal recovery", lambda: recovery(_states.thermal(0.5), 2.0)),
        ("coherent recovery", lambda: recovery(_states.coherent(1.0), 1.0)),
        ("single-photon silence", check_fock1_silence),
        ("determinism", check_determinism),
        ("stationary bunching peak", check_stationary_peak),
    ]


def _cmd_selftest(args) -> int:
    failures = 0
    for name, fn in _selftest_checks(bool(getattr(args, "quick", False))):
        ok, detail = fn()
        print(f"selftest {name}: {'PASS' if ok else 'FAIL'} ({detail})")
        if not ok:
            failures += 1
    if failures:
        raise EstimationError(f"{failures} selftest check(s) failed")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "analyze": _cmd_analyze,
    "figure": _cmd_figure,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (StreamFormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except EstimationError as exc:
        print(f"estimation error: {exc}", file=sys.stderr)
        return 3


def entrypoint():  # console_scripts hook
    sys.exit(main())
