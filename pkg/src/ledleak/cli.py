"""Batch front-end: sweeps, surveys, demixing, covert round trips, figures.

Every subcommand maps onto one library operation and writes its results
as delimited tables (CSV or aligned text) plus, for ``figure``, a
standalone SVG with the backing numbers alongside.  Runs are
deterministic: the same config and seed produce byte-identical files,
so diffing two output directories is a meaningful regression check.

    ledleak sweep --distances 5,10 --rates 9600 --out results/
    ledleak survey --ambient dark_room --distance 5
    ledleak figure --kind diffuse_sum --streams 10
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass

import numpy as np

from .channel import channel_from_config, propagate
from .classifier import (
    bundled_fixtures,
    classify,
    fixture_capture,
    read_fixture,
    survey,
)
from .configio import Config, load_config
from .covert import (
    CovertScheme,
    SCHEME_KINDS,
    decode_message,
    encode_message,
    load_schedule,
    save_schedule,
    schedule_to_lines,
)
from .demixer import (
    demix,
    estimate_ui,
    extract_events,
    plausibility,
    save_events,
    synthesize_scene,
)
from .emitter import drive, stretch, stretcher_for_format
from .errors import LedleakError
from .lineproto import FrameFormat, encode
from .pipeline import led_from_config, pick_sample_rate, simulate_link
from .signals import load_waveform, save_waveform
from .svgplot import Annotation, Series, write_plot

DEFAULT_DISTANCES = (5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 38.0)
DEFAULT_RATES = (300.0, 600.0, 1200.0, 2400.0, 4800.0, 9600.0, 19200.0)
FIGURE_KINDS = (
    "emanation_trace",
    "distance_degradation",
    "stretcher",
    "diffuse_sum",
    "ui_spectrum",
)


@dataclass(frozen=True)
class SweepSpec:
    """The experiment grid: one simulated link per cell."""

    distances: tuple[float, ...] = DEFAULT_DISTANCES
    rates: tuple[float, ...] = DEFAULT_RATES
    ambients: tuple[str, ...] = ("dark_room",)
    seeds: tuple[int, ...] = (0,)

    def __post_init__(self) -> None:
        for name in ("distances", "rates", "ambients", "seeds"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be non-empty")
        if any(d <= 0 for d in self.distances):
            raise ValueError("distances must be positive")
        if any(r <= 0 for r in self.rates):
            raise ValueError("rates must be positive")


def run_sweep(
    spec: SweepSpec, payload: bytes, *, cfg: Config | None = None
) -> tuple[tuple[str, ...], list[tuple]]:
    """One classification row per (distance, rate, ambient, seed) cell.

    Cells are independent; they run here in index order, which is also
    the output order.
    """
    if not payload:
        raise ValueError("payload must be non-empty")
    header = ("distance_m", "rate_bps", "ambient", "seed", "ber", "k", "emission_class")
    led = led_from_config(cfg)
    rows: list[tuple] = []
    emitted: dict[tuple[float, str], tuple] = {}
    for distance in spec.distances:
        for rate in spec.rates:
            for ambient in spec.ambients:
                ch = channel_from_config(cfg, distance_m=distance, ambient_name=ambient)
                key = (rate, ambient)
                if key not in emitted:
                    fmt = FrameFormat(bit_rate=rate)
                    line = encode(payload, fmt, lead_in=4 * fmt.character_interval)
                    optical = drive(line, led, pick_sample_rate(fmt, ch))
                    emitted[key] = (fmt, optical)
                fmt, optical = emitted[key]
                for seed in spec.seeds:
                    label = classify(
                        optical, payload, fmt, channel=ch, seed=seed, cfg=cfg
                    )
                    rows.append(
                        (
                            distance,
                            rate,
                            ambient,
                            seed,
                            label.ber,
                            label.k,
                            str(label.emission_class),
                        )
                    )
    return header, rows


# --- output plumbing --------------------------------------------------------


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def write_table(path: str, header: tuple[str, ...], rows: list[tuple], fmt: str) -> None:
    """Delimited table: RFC-style CSV or space-aligned text."""
    cells = [[_cell(v) for v in row] for row in rows]
    with open(path, "w", encoding="utf-8", newline="") as handle:
        if fmt == "csv":
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(cells)
        else:
            widths = [
                max(len(h), *(len(r[i]) for r in cells)) if cells else len(h)
                for i, h in enumerate(header)
            ]
            handle.write("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip() + "\n")
            for row in cells:
                handle.write("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() + "\n")


def _table_ext(fmt: str) -> str:
    return "csv" if fmt == "csv" else "txt"


def _outpath(out_dir: str, name: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)


def _random_payload(n: int, seed) -> bytes:
    rng = np.random.default_rng(seed)
    return bytes(rng.integers(0, 256, n, dtype=np.uint8))


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(",") if part.strip())


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(part) for part in text.split(",") if part.strip())


# --- figures -----------------------------------------------------------------


def emit_figure(
    kind: str,
    *,
    out_dir: str = ".",
    data_format: str = "csv",
    seed: int = 0,
    cfg: Config | None = None,
    distance_m: float = 5.0,
    rate: float = 9600.0,
    streams: int = 10,
    min_on_units: float = 1.5,
    ambient: str = "dark_room",
) -> list[str]:
    """Write one figure as SVG plus its backing data table; returns paths."""
    if kind not in FIGURE_KINDS:
        raise ValueError(f"kind must be one of {FIGURE_KINDS}, got {kind!r}")
    svg_path = _outpath(out_dir, f"{kind}.svg")
    data_path = _outpath(out_dir, f"{kind}.{_table_ext(data_format)}")
    fmt = FrameFormat(bit_rate=rate)

    if kind == "emanation_trace":
        payload = _random_payload(12, seed)
        ch = channel_from_config(cfg, distance_m=distance_m, ambient_name=ambient)
        result = simulate_link(
            payload, fmt, ch, seed=seed, lead_in=2 * fmt.character_interval
        )
        samples = result.detector.samples
        stride = max(1, len(samples) // 3500)
        t_ms = np.arange(len(samples))[::stride] / result.sample_rate * 1e3
        volts = samples[::stride]
        write_table(data_path, ("time_ms", "volts"), list(zip(t_ms, volts)), data_format)
        write_plot(
            svg_path,
            [Series(tuple(t_ms), tuple(volts), width=1.0)],
            title=f"Detector capture, {rate:g} b/s at {distance_m:g} m ({ambient})",
            xlabel="time (ms)",
            ylabel="amplifier output (V)",
        )

    elif kind == "distance_degradation":
        payload = _random_payload(300, seed)
        ks, bers = [], []
        for d in DEFAULT_DISTANCES:
            ch = channel_from_config(cfg, distance_m=d, ambient_name="fluorescent_office")
            cell_k, cell_b = [], []
            for s in (seed, seed + 1, seed + 2):
                res = simulate_link(payload, fmt, ch, seed=s, lead_in=4 * fmt.character_interval)
                cell_k.append(res.correlation_k())
                cell_b.append(res.ber)
            ks.append(float(np.median(cell_k)))
            bers.append(float(np.median(cell_b)))
        rows = list(zip(DEFAULT_DISTANCES, ks, bers))
        write_table(data_path, ("distance_m", "k_median", "ber_median"), rows, data_format)
        write_plot(
            svg_path,
            [
                Series(DEFAULT_DISTANCES, tuple(ks), label="correlation k"),
                Series(DEFAULT_DISTANCES, tuple(bers), label="bit error rate"),
            ],
            title=f"Recovery vs distance, {rate:g} b/s, fluorescent_office",
            xlabel="distance (m)",
            ylabel="k / BER",
            ylim=(-0.05, 1.05),
        )

    elif kind == "stretcher":
        payload = b"\x55\x4d"  # isolated one-unit flashes, worst case for a stretcher
        line = encode(payload, fmt)
        stretched = stretch(line, stretcher_for_format(fmt, multiple=min_on_units))
        ui = fmt.unit_interval

        def step_points(wave, y0: float):
            xs = [0.0] + [t for t, _ in wave.transitions] + [wave.duration]
            levels = []
            level = 1.0 if wave.initial_level.name == "SPACE" else 0.0
            for t, lvl in wave.transitions:
                levels.append(level)
                level = 1.0 if lvl.name == "SPACE" else 0.0
            levels.append(level)
            levels.append(level)
            return tuple(x * 1e3 for x in xs), tuple(y0 + lv for lv in levels)

        xs0, ys0 = step_points(line, 0.0)
        xs1, ys1 = step_points(stretched, 1.5)
        n_cells = len(payload) * int(fmt.units_per_character)
        decisions = (np.arange(n_cells) + 0.5) * ui
        truth = line.space_at(decisions)
        seen = stretched.space_at(decisions)
        bad = np.flatnonzero(truth != seen)
        annotations = ()
        if len(bad):
            t_bad = float(decisions[bad[0]])
            annotations = (
                Annotation(t_bad * 1e3, 1.5 + float(seen[bad[0]]), "first misread cell"),
            )
        rows = [
            (t * 1e3, int(a), int(b))
            for t, a, b in zip(decisions, truth, seen)
        ]
        write_table(
            data_path, ("decision_ms", "original_bit", "stretched_bit"), rows, data_format
        )
        write_plot(
            svg_path,
            [
                Series(xs0, ys0, label="as sent", step=True),
                Series(xs1, ys1, label=f"stretched to {min_on_units:g} units", step=True),
            ],
            title="Pulse stretcher vs the bit lattice",
            xlabel="time (ms)",
            ylabel="lit (traces offset)",
            ylim=(-0.3, 2.9),
            annotations=annotations,
        )

    elif kind == "diffuse_sum":
        wave, _ = synthesize_scene(streams, fmt, seed=seed)
        events = extract_events(wave)
        xs = [0.0]
        ys = [0.0]
        level = 0
        for e in events:
            level += e.direction * e.magnitude
            xs.append(e.time * 1e3)
            ys.append(float(level))
        write_table(data_path, ("time_ms", "level"), list(zip(xs, ys)), data_format)
        write_plot(
            svg_path,
            [Series(tuple(xs), tuple(ys), step=True, width=1.0)],
            title=f"Optical sum of {streams} formatted streams at {rate:g} b/s",
            xlabel="time (ms)",
            ylabel="sources lit",
            ylim=(-0.5, streams + 0.5),
        )

    else:  # ui_spectrum
        wave, _ = synthesize_scene(streams, fmt, seed=seed)
        events = extract_events(wave)
        ui_est = estimate_ui(events)
        times = np.array([e.time for e in events])
        intervals_us = np.diff(times) * 1e6
        hi = 2.5 * fmt.unit_interval * 1e6
        edges = np.arange(0.0, hi + 1.0, 1.0)
        counts, _ = np.histogram(intervals_us, bins=edges)
        centers = edges[:-1] + 0.5
        peak_bin = int(np.argmin(np.abs(centers - ui_est * 1e6)))
        write_table(
            data_path,
            ("interval_us", "count"),
            list(zip(centers, counts.astype(float))),
            data_format,
        )
        write_plot(
            svg_path,
            [Series(tuple(centers), tuple(float(c) for c in counts), step=True, width=1.0)],
            title="Transition interval pitch of the summed scene",
            xlabel="interval between transitions (µs)",
            ylabel="count",
            annotations=(
                Annotation(
                    float(centers[peak_bin]),
                    float(counts[peak_bin]),
                    f"{ui_est * 1e6:.2f} µs",
                ),
            ),
        )

    return [svg_path, data_path]


# --- subcommand handlers ------------------------------------------------------


def _cmd_simulate(args, cfg) -> int:
    payload = _random_payload(args.bytes, args.seed)
    fmt = FrameFormat(bit_rate=args.rate)
    ch = channel_from_config(cfg, distance_m=args.distance, ambient_name=args.ambient)
    result = simulate_link(
        payload,
        fmt,
        ch,
        seed=args.seed,
        noise=not args.no_noise,
        lead_in=4 * fmt.character_interval,
    )
    k = result.correlation_k()
    header = ("distance_m", "rate_bps", "ambient", "seed", "ber", "k", "failure")
    row = (args.distance, args.rate, args.ambient, args.seed, result.ber, k,
           result.failure or "")
    path = _outpath(args.out, f"simulate.{_table_ext(args.format)}")
    write_table(path, header, [row], args.format)
    if args.save_waveform:
        save_waveform(
            _outpath(args.out, "simulate_detector.raw"),
            result.detector,
            units="V",
            seed=args.seed,
        )
    print(f"ber {result.ber:.6g}  k {k:.4f}  -> {path}")
    return 0


def _cmd_sweep(args, cfg) -> int:
    spec = SweepSpec(
        distances=_parse_floats(args.distances) if args.distances else DEFAULT_DISTANCES,
        rates=_parse_floats(args.rates) if args.rates else DEFAULT_RATES,
        ambients=tuple(args.ambients.split(",")) if args.ambients else ("dark_room",),
        seeds=_parse_ints(args.seeds) if args.seeds else (args.seed,),
    )
    payload = _random_payload(args.bytes, args.seed)
    header, rows = run_sweep(spec, payload, cfg=cfg)
    path = _outpath(args.out, f"sweep.{_table_ext(args.format)}")
    write_table(path, header, rows, args.format)
    print(f"{len(rows)} cells -> {path}")
    return 0


def _cmd_classify(args, cfg) -> int:
    fixture = read_fixture(args.fixture)
    ch = channel_from_config(cfg, distance_m=args.distance, ambient_name=args.ambient)
    synth_seed, observe_seed = np.random.SeedSequence(args.seed).spawn(2)
    capture = fixture_capture(fixture, seed=synth_seed, channel=ch)
    label = classify(
        capture.optical, capture.truth, capture.fmt,
        channel=ch, seed=observe_seed, cfg=cfg,
    )
    header = ("name", "tap", "side", "emission_class", "modulation_depth",
              "min_pulse_s", "ber", "k")
    row = (fixture.name, fixture.tap, fixture.side, str(label.emission_class),
           label.modulation_depth, label.min_pulse_observed, label.ber, label.k)
    path = _outpath(args.out, f"classify.{_table_ext(args.format)}")
    write_table(path, header, [row], args.format)
    print(f"{fixture.name}: Class {label.emission_class}")
    return 0


def _cmd_survey(args, cfg) -> int:
    ch = channel_from_config(cfg, distance_m=args.distance, ambient_name=args.ambient)
    report = survey(bundled_fixtures(), ch, seed=args.seed, cfg=cfg)
    header = ("name", "group", "tap", "side", "rated_rate", "emission_class",
              "modulation_depth", "ber", "k", "plaintext_exposed")
    rows = [
        (
            o.fixture.name, o.fixture.group, o.fixture.tap, o.fixture.side,
            o.fixture.rated_rate, str(o.label.emission_class),
            o.label.modulation_depth, o.label.ber, o.label.k,
            o.plaintext_exposed,
        )
        for o in report.outcomes
    ]
    path = _outpath(args.out, f"survey.{_table_ext(args.format)}")
    write_table(path, header, rows, args.format)
    text_path = _outpath(args.out, "survey_report.txt")
    rendered = report.render()
    with open(text_path, "w", encoding="utf-8") as handle:
        handle.write(rendered)
    print(rendered.splitlines()[-1])
    return 0


def _cmd_demix(args, cfg) -> int:
    fmt = FrameFormat(bit_rate=args.rate)
    if args.input:
        wave = load_waveform(args.input)
    else:
        wave, _ = synthesize_scene(args.streams, fmt, seed=args.seed)
    events = extract_events(wave)
    ui = estimate_ui(events)
    result = demix(events, ui, fmt)
    header = ("stream", "start_time_s", "n_bytes", "payload_hex", "ascii_score")
    rows = [
        (i, hyp.start_time, len(payload), payload.hex(), plausibility(payload))
        for i, (hyp, payload) in enumerate(
            sorted(result.streams, key=lambda sp: sp[0].start_time)
        )
    ]
    path = _outpath(args.out, f"demix.{_table_ext(args.format)}")
    write_table(path, header, rows, args.format)
    save_events(_outpath(args.out, "demix_events.txt"), list(events))
    print(
        f"{len(rows)} streams, unit interval {ui * 1e6:.3f} us, "
        f"{result.unassigned_events} unassigned -> {path}"
    )
    return 0


def _cmd_covert_send(args, cfg) -> int:
    scheme = CovertScheme(args.scheme, args.rate)
    payload = args.text.encode("utf-8") if args.text else bytes.fromhex(args.hex)
    events = encode_message(payload, scheme, cfg=cfg)
    path = _outpath(args.out, "covert_schedule.txt")
    save_schedule(path, events)
    span = max(e.time for e in events)
    print(f"{len(events)} events over {span:.3f} s -> {path}")
    return 0


def _cmd_covert_recv(args, cfg) -> int:
    scheme = CovertScheme(args.scheme, args.rate)
    events = load_schedule(args.schedule)
    lines = schedule_to_lines(events, lead=20.0 / args.rate, tail=2.0 / args.rate)
    ch = channel_from_config(cfg, distance_m=args.distance, ambient_name=args.ambient)
    led = led_from_config(cfg)
    fs = max(1e5, 400.0 * args.rate, 2.5 * ch.bandwidth_hz)
    captured = [
        propagate(drive(lines[name], led, fs), ch, seed=args.seed)
        for name in ("caps", "num", "scroll")
    ]
    payload = decode_message(captured, scheme, cfg=cfg)
    path = _outpath(args.out, "covert_decoded.bin")
    with open(path, "wb") as handle:
        handle.write(payload)
    try:
        shown = payload.decode("utf-8")
    except UnicodeDecodeError:
        shown = payload.hex()
    print(f"decoded {len(payload)} bytes -> {path}")
    print(shown)
    return 0


def _cmd_figure(args, cfg) -> int:
    paths = emit_figure(
        args.kind,
        out_dir=args.out,
        data_format=args.format,
        seed=args.seed,
        cfg=cfg,
        distance_m=args.distance,
        rate=args.rate,
        streams=args.streams,
        min_on_units=args.min_on_units,
        ambient=args.ambient,
    )
    print(" ".join(paths))
    return 0


# --- argument wiring ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master random seed")
    common.add_argument("--config", metavar="FILE", help="key=value config overlay")
    common.add_argument("--out", default=".", metavar="DIR", help="output directory")
    common.add_argument(
        "--format", choices=("csv", "text"), default="csv", help="table format"
    )

    parser = argparse.ArgumentParser(
        prog="ledleak",
        description="Simulate serial-line LED emanations and their recovery.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="one link, one row")
    p.add_argument("--distance", type=float, default=5.0)
    p.add_argument("--rate", type=float, default=9600.0)
    p.add_argument("--ambient", default="dark_room")
    p.add_argument("--bytes", type=int, default=200)
    p.add_argument("--no-noise", action="store_true")
    p.add_argument("--save-waveform", action="store_true")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("sweep", parents=[common], help="full experiment grid")
    p.add_argument("--distances", help="comma list, default 5..35 step 5 plus 38")
    p.add_argument("--rates", help="comma list, default the 7 standard rates")
    p.add_argument("--ambients", help="comma list of ambient presets")
    p.add_argument("--seeds", help="comma list of per-cell seeds")
    p.add_argument("--bytes", type=int, default=64)
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("classify", parents=[common], help="classify one fixture file")
    p.add_argument("--fixture", required=True, metavar="FILE")
    p.add_argument("--distance", type=float, default=5.0)
    p.add_argument("--ambient", default="dark_room")
    p.set_defaults(handler=_cmd_classify)

    p = sub.add_parser("survey", parents=[common], help="classify the bundled roster")
    p.add_argument("--distance", type=float, default=5.0)
    p.add_argument("--ambient", default="dark_room")
    p.set_defaults(handler=_cmd_survey)

    p = sub.add_parser("demix", parents=[common], help="separate a summed capture")
    p.add_argument("--streams", type=int, default=10)
    p.add_argument("--rate", type=float, default=9600.0)
    p.add_argument("--input", metavar="FILE", help="waveform file; omit to synthesize")
    p.set_defaults(handler=_cmd_demix)

    p = sub.add_parser("covert-send", parents=[common], help="message to LED schedule")
    p.add_argument("--scheme", choices=SCHEME_KINDS, default="single_async")
    p.add_argument("--rate", type=float, default=150.0)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--text")
    group.add_argument("--hex")
    p.set_defaults(handler=_cmd_covert_send)

    p = sub.add_parser(
        "covert-recv", parents=[common], help="schedule through the channel and back"
    )
    p.add_argument("--schedule", required=True, metavar="FILE")
    p.add_argument("--scheme", choices=SCHEME_KINDS, default="single_async")
    p.add_argument("--rate", type=float, default=150.0)
    p.add_argument("--distance", type=float, default=10.0)
    p.add_argument("--ambient", default="dark_room")
    p.set_defaults(handler=_cmd_covert_recv)

    p = sub.add_parser("figure", parents=[common], help="SVG figure plus data table")
    p.add_argument("--kind", choices=FIGURE_KINDS, required=True)
    p.add_argument("--distance", type=float, default=5.0)
    p.add_argument("--rate", type=float, default=9600.0)
    p.add_argument("--streams", type=int, default=10)
    p.add_argument("--min-on-units", type=float, default=1.5)
    p.add_argument("--ambient", default="dark_room")
    p.set_defaults(handler=_cmd_figure)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return args.handler(args, cfg)
    except (LedleakError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
