"""Command-line front end.

Subcommands:
    synth     write a synthetic archive of damped tones (plus optional noise)
    analyze   per-window mode tables (CSV), optional IMF dumps
    detect    run the alarm pipeline, emit JSON-lines alarms
    spectrum  per-window spectra as CSV for plotting

Exit codes: 0 success / no critical alarm, 2 usage or input error,
3 at least one critical alarm (detect only).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path


from . import __version__, detector, emd, prony, signalgen, spectrum
from .core import AnalysisConfig, Channel, EmptyBand, Severity, ValidationError
from .ingest import (
    DtMismatch,
    FileUnreadable,
    ParseReport,
    SchemaMismatch,
    WindowingPolicy,
    make_windows,
    read_archive,
    write_archive,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CRITICAL = 3

_JOBS_ENV = "LFODETECT_JOBS"

_INPUT_ERRORS = (
    FileUnreadable,
    SchemaMismatch,
    DtMismatch,
    ValidationError,
    signalgen.InvalidSpec,
    prony.OrderTooHigh,
    prony.InsufficientExcitation,
    prony.RootSolverDiverged,
    argparse.ArgumentTypeError,
)


class AnalysisFailure(RuntimeError):
    """An analysis error with the window identity attached."""


def _fmt(x: float) -> str:
    """Full-precision numeric formatting (round-trips float64)."""
    return format(float(x), ".17g")


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _parse_band(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(p) for p in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"band must be 'low,high', got {text!r}") from exc
    return lo, hi


def _parse_tone(text: str) -> signalgen.ToneSpec:
    parts = text.split(",")
    if not 2 <= len(parts) <= 4:
        raise argparse.ArgumentTypeError(
            f"tone must be 'amplitude,frequency[,damping[,phase]]', got {text!r}"
        )
    try:
        numbers = [float(p) for p in parts]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad tone {text!r}") from exc
    amplitude, frequency = numbers[0], numbers[1]
    damping = numbers[2] if len(numbers) > 2 else 0.0
    phase = numbers[3] if len(numbers) > 3 else 0.0
    try:
        return signalgen.ToneSpec(amplitude, frequency, phase=phase, damping=damping)
    except signalgen.InvalidSpec as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _add_windowing_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--window-seconds", type=float, default=None, help="analysis window length (default 25)")
    parser.add_argument("--stride-seconds", type=float, default=None, help="window advance (default 5)")
    parser.add_argument("--expected-dt", type=float, default=None, help="sample interval in seconds (default 0.04)")
    parser.add_argument("--max-gap-fraction", type=float, default=None, help="max missing fraction per window (default 0.01)")


def _add_analysis_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--order", type=int, default=None, help="prediction model order (default: automatic)")
    parser.add_argument("--band", type=_parse_band, default=None, metavar="LO,HI", help="analysis band in Hz (default 0.1,2.0)")
    parser.add_argument("--match-tolerance", type=float, default=None, help="mode/peak match tolerance in Hz (default: automatic)")
    parser.add_argument("--min-amplitude-fraction", type=float, default=None, help="relative amplitude floor for modes (default 0.02)")


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out-dir", type=Path, default=Path("."), help="output directory (default: cwd)")
    parser.add_argument("--config", type=Path, default=None, help="JSON config file; explicit flags win")
    parser.add_argument("--jobs", type=int, default=None, help=f"parallel window workers (default ${_JOBS_ENV} or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lfodetect", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"lfodetect {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="write a synthetic archive CSV")
    p_synth.add_argument("--tone", action="append", type=_parse_tone, default=None,
                         metavar="A,F[,SIGMA[,THETA]]", help="add a damped cosine (repeatable)")
    p_synth.add_argument("--dt", type=float, default=0.04)
    p_synth.add_argument("--seconds", type=float, default=25.0)
    p_synth.add_argument("--snr-db", type=float, default=None, help="white noise level relative to tone power")
    p_synth.add_argument("--noise-sigma", type=float, default=None, help="absolute white noise sigma (for noise-only archives)")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--station", default="synthetic")
    p_synth.add_argument("--channel", choices=[c.value for c in Channel], default=Channel.Frequency_Hz.value)
    p_synth.add_argument("--t0-ms", type=int, default=0)
    p_synth.add_argument("--output", "-o", type=Path, required=True)
    p_synth.set_defaults(func=cmd_synth)

    p_analyze = sub.add_parser("analyze", help="per-window mode tables")
    p_analyze.add_argument("archive", type=Path)
    _add_windowing_flags(p_analyze)
    _add_analysis_flags(p_analyze)
    _add_common_flags(p_analyze)
    p_analyze.add_argument("--emd", action="store_true",
                           help="band-pass the window before fitting (detect always does)")
    p_analyze.add_argument("--dump-imfs", action="store_true", help="write each window's IMFs as CSV columns")
    p_analyze.set_defaults(func=cmd_analyze)

    p_detect = sub.add_parser("detect", help="emit classified oscillation alarms")
    p_detect.add_argument("archive", type=Path)
    _add_windowing_flags(p_detect)
    _add_analysis_flags(p_detect)
    _add_common_flags(p_detect)
    p_detect.set_defaults(func=cmd_detect)

    p_spectrum = sub.add_parser("spectrum", help="per-window spectrum CSVs")
    p_spectrum.add_argument("archive", type=Path)
    _add_windowing_flags(p_spectrum)
    _add_common_flags(p_spectrum)
    p_spectrum.add_argument("--band", type=_parse_band, default=None, metavar="LO,HI",
                            help="restrict emitted rows to this band")
    p_spectrum.add_argument("--window-fn", choices=[w.value for w in spectrum.WindowFunction],
                            default=spectrum.WindowFunction.Rectangular.value)
    p_spectrum.set_defaults(func=cmd_spectrum)
    return parser


def _load_config(path: Path | None) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise FileUnreadable(f"cannot open config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaMismatch(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaMismatch(f"config {path} must hold a JSON object")
    return data


def _setting(args, config: dict, name: str, builtin):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        return config[name]
    return builtin


def _resolve_policy(args, config: dict) -> WindowingPolicy:
    return WindowingPolicy(
        window_seconds=float(_setting(args, config, "window_seconds", 25.0)),
        stride_seconds=float(_setting(args, config, "stride_seconds", 5.0)),
        expected_dt=float(_setting(args, config, "expected_dt", 0.04)),
        max_gap_fraction=float(_setting(args, config, "max_gap_fraction", 0.01)),
    )


def _resolve_analysis(args, config: dict) -> AnalysisConfig:
    band = _setting(args, config, "band", (0.1, 2.0))
    if isinstance(band, str):
        band = _parse_band(band)
    order = _setting(args, config, "order", None)
    tolerance = _setting(args, config, "match_tolerance", None)
    return AnalysisConfig(
        prony_order=None if order in (None, "auto") else int(order),
        emd_band_hz=(float(band[0]), float(band[1])),
        match_tolerance_hz=None if tolerance in (None, "auto") else float(tolerance),
        min_mode_amplitude_fraction=float(_setting(args, config, "min_amplitude_fraction", 0.02)),
    )


def _resolve_jobs(args, config: dict) -> int:
    value = getattr(args, "jobs", None)
    if value is None:
        value = config.get("jobs", os.environ.get(_JOBS_ENV, 1))
    return max(1, int(value))


def _load_windows(args, policy: WindowingPolicy):
    report = ParseReport()
    diagnostics: list[str] = []
    records = list(read_archive(args.archive, report))
    windows = make_windows(records, policy, diagnostics)
    return windows, report, diagnostics


def _window_prefix(w) -> str:
    return f"{w.station_id}_{w.channel.value}_{w.t0_ms}"


def _run_windows(windows, worker, jobs: int):
    if jobs > 1 and len(windows) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(worker, windows))
    return [worker(w) for w in windows]


def _manifest(command: str, args, policy, cfg, inputs, window_entries, diagnostics, report, extra=None) -> dict:
    manifest = {
        "tool": {"name": "lfodetect", "version": __version__},
        "command": command,
        "inputs": [{"path": str(p), "sha256": _sha256(Path(p))} for p in inputs],
        "windowing": {
            "window_seconds": policy.window_seconds,
            "stride_seconds": policy.stride_seconds,
            "expected_dt": policy.expected_dt,
            "max_gap_fraction": policy.max_gap_fraction,
        },
        "config": {
            "prony_order": cfg.prony_order,
            "band_hz": list(cfg.emd_band_hz),
            "match_tolerance_hz": cfg.match_tolerance_hz,
            "min_mode_amplitude_fraction": cfg.min_mode_amplitude_fraction,
        } if cfg is not None else None,
        "windows": window_entries,
        "skipped_windows": diagnostics,
        "parse_issues": report.issues if report is not None else [],
        "artifacts": sorted({a for e in window_entries for a in e.get("artifacts", [])} | set(extra or [])),
    }
    if not window_entries:
        manifest["note"] = "no windows"
    return manifest


def _write_manifest(out_dir: Path, manifest: dict) -> None:
    _atomic_write(out_dir / "run_manifest.json", json.dumps(manifest, indent=2) + "\n")


def cmd_synth(args) -> int:
    tones = tuple(args.tone or ())
    if not tones and args.noise_sigma is None:
        print("error: give at least one --tone (or --noise-sigma for a noise-only archive)",
              file=sys.stderr)
        return EXIT_USAGE
    count = int(round(args.seconds / args.dt))
    spec = signalgen.SynthSpec(
        tones=tones,
        dt=args.dt,
        count=count,
        noise_snr_db=args.snr_db,
        noise_sigma=args.noise_sigma,
        rng_seed=args.seed,
    )
    window = signalgen.generate(
        spec, station_id=args.station, channel=Channel(args.channel), t0_ms=args.t0_ms
    )
    args.output.parent.mkdir(parents=True, exist_ok=True)
    write_archive(args.output, [window])
    print(f"wrote {count} samples to {args.output}")
    return EXIT_OK


def _write_mode_table(path: Path, fit) -> None:
    lines = ["amplitude,damping,frequency_hz,phase_rad,energy_fraction,fit_quality"]
    for m in sorted(fit.modes, key=lambda m: (-m.amplitude, m.frequency)):
        lines.append(
            ",".join(
                _fmt(v)
                for v in (m.amplitude, m.damping, m.frequency, m.phase, m.energy_fraction, fit.fit_quality)
            )
        )
    _atomic_write(path, "\n".join(lines) + "\n")


def _write_imf_dump(path: Path, window, imf_set) -> None:
    names = [f"imf{i + 1}" for i in range(len(imf_set.imfs))]
    header = ",".join(["time_s"] + names + ["residue"])
    t = window.times
    columns = [imf.samples for imf in imf_set.imfs] + [imf_set.residue]
    rows = [header]
    for i in range(window.count):
        rows.append(",".join([_fmt(t[i])] + [_fmt(col[i]) for col in columns]))
    _atomic_write(path, "\n".join(rows) + "\n")


def cmd_analyze(args) -> int:
    config = _load_config(args.config)
    policy = _resolve_policy(args, config)
    cfg = _resolve_analysis(args, config)
    windows, report, diagnostics = _load_windows(args, policy)
    args.out_dir.mkdir(parents=True, exist_ok=True)

    def worker(w):
        try:
            target = emd.bandpass(w, cfg) if args.emd else w
            fit = prony.prony_analyze(target, cfg)
            imf_set = emd.decompose(w, cfg) if args.dump_imfs else None
            return fit, imf_set, None
        except EmptyBand as exc:
            return None, None, exc
        except Exception as exc:
            raise AnalysisFailure(f"{_window_prefix(w)}: {exc}") from exc

    results = _run_windows(windows, worker, _resolve_jobs(args, config))
    entries = []
    for w, (fit, imf_set, band_err) in sorted(
        zip(windows, results), key=lambda p: (p[0].station_id, p[0].channel.value, p[0].t0_ms)
    ):
        prefix = _window_prefix(w)
        if band_err is not None:
            entries.append({"station_id": w.station_id, "channel": w.channel.value,
                            "t0_ms": w.t0_ms, "samples": w.count,
                            "outcome": "empty-band", "artifacts": []})
            continue
        artifacts = [f"{prefix}_modes.csv"]
        _write_mode_table(args.out_dir / artifacts[0], fit)
        if imf_set is not None:
            artifacts.append(f"{prefix}_imfs.csv")
            _write_imf_dump(args.out_dir / artifacts[-1], w, imf_set)
        entries.append({"station_id": w.station_id, "channel": w.channel.value,
                        "t0_ms": w.t0_ms, "samples": w.count,
                        "outcome": "analyzed", "artifacts": artifacts})
        print(f"{prefix}: fit_quality={fit.fit_quality:.3g}")
        for m in sorted(fit.modes, key=lambda m: (-m.amplitude, m.frequency)):
            print(f"  amplitude={m.amplitude:.3g} damping={m.damping:.3g} frequency={m.frequency:.3g} Hz")
    _write_manifest(args.out_dir, _manifest("analyze", args, policy, cfg, [args.archive],
                                            entries, diagnostics, report))
    if not windows:
        print("no windows")
    return EXIT_OK


def cmd_detect(args) -> int:
    config = _load_config(args.config)
    policy = _resolve_policy(args, config)
    cfg = _resolve_analysis(args, config)
    windows, report, diagnostics = _load_windows(args, policy)
    args.out_dir.mkdir(parents=True, exist_ok=True)

    def worker(w):
        try:
            return detector.detect(w, cfg)
        except Exception as exc:
            raise AnalysisFailure(f"{_window_prefix(w)}: {exc}") from exc

    results = _run_windows(windows, worker, _resolve_jobs(args, config))
    ordered = sorted(zip(windows, results),
                     key=lambda p: (p[0].station_id, p[0].channel.value, p[0].t0_ms))
    alarm_lines = []
    entries = []
    any_critical = False
    for w, rep in ordered:
        for alarm in rep.alarms:
            alarm_lines.append(json.dumps(alarm.to_json_dict(), sort_keys=True))
            any_critical = any_critical or alarm.severity is Severity.Critical
        entries.append({"station_id": w.station_id, "channel": w.channel.value,
                        "t0_ms": w.t0_ms, "samples": w.count,
                        "outcome": f"{len(rep.alarms)} alarm(s)", "artifacts": []})
    alarms_path = args.out_dir / "alarms.jsonl"
    _atomic_write(alarms_path, "".join(line + "\n" for line in alarm_lines))
    for line in alarm_lines:
        print(line)
    _write_manifest(args.out_dir, _manifest("detect", args, policy, cfg, [args.archive],
                                            entries, diagnostics, report,
                                            extra=[alarms_path.name]))
    if not windows:
        print("no windows")
    return EXIT_CRITICAL if any_critical else EXIT_OK


def cmd_spectrum(args) -> int:
    config = _load_config(args.config)
    policy = _resolve_policy(args, config)
    windows, report, diagnostics = _load_windows(args, policy)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    window_fn = spectrum.WindowFunction(args.window_fn)

    def worker(w):
        try:
            return spectrum.dft(w, window_fn)
        except Exception as exc:
            raise AnalysisFailure(f"{_window_prefix(w)}: {exc}") from exc

    results = _run_windows(windows, worker, _resolve_jobs(args, config))
    entries = []
    for w, spec in sorted(zip(windows, results),
                          key=lambda p: (p[0].station_id, p[0].channel.value, p[0].t0_ms)):
        freqs, mags, phases = spec.one_sided()
        if args.band is not None:
            lo, hi = args.band
            keep = (freqs >= lo) & (freqs <= hi)
            freqs, mags, phases = freqs[keep], mags[keep], phases[keep]
        prefix = _window_prefix(w)
        name = f"{prefix}_spectrum.csv"
        lines = ["frequency_hz,magnitude,phase_rad"]
        for f, m, p in zip(freqs, mags, phases):
            lines.append(f"{_fmt(f)},{_fmt(m)},{_fmt(p)}")
        _atomic_write(args.out_dir / name, "\n".join(lines) + "\n")
        entries.append({"station_id": w.station_id, "channel": w.channel.value,
                        "t0_ms": w.t0_ms, "samples": w.count,
                        "outcome": "analyzed", "artifacts": [name]})
    _write_manifest(args.out_dir, _manifest("spectrum", args, policy, None, [args.archive],
                                            entries, diagnostics, report))
    if not windows:
        print("no windows")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AnalysisFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
