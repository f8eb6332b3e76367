"""Command-line front end.

Subcommands: ``evolve``, ``sweep``, ``scaling``, ``photonics`` and
``render-classical``. Options may also come from a JSON file given with
``--config``; command-line flags take precedence over the file.

Exit codes: 0 on success, 1 on a computation error, 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .exceptions import CTQWSearchError
from .io import curves_csv, heatmap_csv, scaling_csv, site_table_csv, write_atomic
from .imaging import MODE_DIAMETER_UM, pgm_bytes
from .lattice import TargetSpec, resolve_target
from .photonics import BeamSpec, WaveguideArraySpec, classical_facet_series, get_preset, photonic_image
from .search import (
    SpatialSearch,
    beta_size_surface,
    beta_time_heatmap,
    ratio_series,
    optimal_time,
)
from .validation import make_grid, parse_graph_token

OUTPUT_DIR_ENV = "CTQW_SEARCH_OUTPUT_DIR"
COMMANDS = ("evolve", "sweep", "scaling", "photonics", "render-classical")

logger = logging.getLogger(__name__)


class UsageError(CTQWSearchError, ValueError):
    """Invalid command-line or configuration input (exit code 2)."""


@dataclass
class RunConfig:
    command: str
    graph: str = "paper31"
    target: str = "C"
    beta_over_gamma: float | None = None
    t_max: float = 5.0
    step: float = 0.01
    beta_grid: list[float] | None = None
    layers: list[int] = field(default_factory=lambda: [1, 2, 3, 4])
    targets: list[str] | None = None
    window_factor: float = 2.0 / 6.0
    preset: tuple[str, str] = ("A", "long")
    waist_um: float = 400.0
    tilt_x_mrad: float = 0.0
    tilt_y_mrad: float = 0.0
    times: list[float] = field(default_factory=lambda: [0.0, 0.5, 1.0, 1.5, 2.0])
    spacing_um: float = 25.0
    mode_diameter_um: float = MODE_DIAMETER_UM
    scale_um_per_px: float = 1.0
    output_dir: str = "."
    threads: int = 1

    @property
    def beta(self) -> float:
        if self.beta_over_gamma is not None:
            return self.beta_over_gamma
        return 4.0 if self.command == "scaling" else 4.16


def parse_int_range(text) -> list[int]:
    """``"1..4"`` -> ``[1, 2, 3, 4]``; also accepts ``"1,3,5"`` or a list."""
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def parse_float_list(text) -> list[float]:
    """``"2,3,4"`` or ``"2..8:0.5"`` (inclusive range with step) or a list."""
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    out: list[float] = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            span, _, step = part.partition(":")
            lo, hi = (float(x) for x in span.split("..", 1))
            out.extend(float(x) for x in make_grid(hi, float(step or 1.0), lo))
        elif part:
            out.append(float(part))
    return out


def parse_list(text) -> list[str]:
    if isinstance(text, (list, tuple)):
        return [str(x) for x in text]
    return [p.strip() for p in str(text).split(",") if p.strip()]


def parse_preset(text) -> tuple[str, str]:
    if isinstance(text, (list, tuple)):
        name, length = text
    else:
        name, _, length = str(text).replace(":", "-").partition("-")
        length = length or "long"
    if length not in ("short", "long"):
        raise ValueError(f"preset length must be short or long, got {length!r}")
    get_preset(name)
    return name.upper(), length


_CONVERTERS = {
    "beta_over_gamma": float,
    "t_max": float,
    "step": float,
    "beta_grid": parse_float_list,
    "layers": parse_int_range,
    "targets": parse_list,
    "window_factor": float,
    "preset": parse_preset,
    "waist_um": float,
    "tilt_x_mrad": float,
    "tilt_y_mrad": float,
    "times": parse_float_list,
    "spacing_um": float,
    "mode_diameter_um": float,
    "scale_um_per_px": float,
    "threads": int,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file with option values (flags override it)")
    common.add_argument("--graph", help="paper31, hex:<layers> or file:<path.json>")
    common.add_argument("--target", help="none, C, S, 1N, 2N or a vertex index")
    common.add_argument("--beta", dest="beta_over_gamma", help="detuning ratio beta/gamma")
    common.add_argument("--t-max", dest="t_max", help="end of the gamma*t grid")
    common.add_argument("--step", help="gamma*t grid step")
    common.add_argument("--output-dir", dest="output_dir", help=f"defaults to ${OUTPUT_DIR_ENV} or .")
    common.add_argument("--threads", help="worker threads for independent parameter points")

    parser = _Parser(prog="ctqw-search", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("evolve", parents=[common], argument_default=argparse.SUPPRESS,
                   help="quantum/classical target probability curves and their ratio")

    p = sub.add_parser("sweep", parents=[common], argument_default=argparse.SUPPRESS,
                       help="target probability over a (beta/gamma, gamma*t) grid")
    p.add_argument("--beta-grid", dest="beta_grid", help="e.g. 0..8:0.1 or 2,4,6")

    p = sub.add_parser("scaling", parents=[common], argument_default=argparse.SUPPRESS,
                       help="optimal ratio on growing hexagonal patches")
    p.add_argument("--layers", help="e.g. 1..4")
    p.add_argument("--targets", help="subset of C,1N,2N")
    p.add_argument("--beta-grid", dest="beta_grid", help="several beta/gamma values instead of --beta")
    p.add_argument("--window-factor", dest="window_factor", help="search window is [0, factor * n]")

    p = sub.add_parser("photonics", parents=[common], argument_default=argparse.SUPPRESS,
                       help="simulated output facets of a fabricated array preset")
    p.add_argument("--preset", help="A..D with -short or -long, e.g. A-long")
    p.add_argument("--targets", help="e.g. none,C,S")
    p.add_argument("--waist-um", dest="waist_um", help="1/e^2 beam diameter in um (inf for flat)")
    p.add_argument("--tilt-x-mrad", dest="tilt_x_mrad")
    p.add_argument("--tilt-y-mrad", dest="tilt_y_mrad")
    p.add_argument("--mode-diameter-um", dest="mode_diameter_um")
    p.add_argument("--scale-um-per-px", dest="scale_um_per_px")

    p = sub.add_parser("render-classical", parents=[common], argument_default=argparse.SUPPRESS,
                       help="classical walk distributions rendered as facet images")
    p.add_argument("--targets", help="e.g. none,C,S")
    p.add_argument("--times", help="gamma*t values, e.g. 0,0.5,1")
    p.add_argument("--spacing-um", dest="spacing_um")
    p.add_argument("--mode-diameter-um", dest="mode_diameter_um")
    p.add_argument("--scale-um-per-px", dest="scale_um_per_px")
    return parser


def parse_config(argv=None, environ=None) -> RunConfig:
    """Merge defaults, an optional JSON config file and flags into a validated :class:`RunConfig`."""
    environ = os.environ if environ is None else environ
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    values: dict = {}
    config_path = ns.pop("config", None)
    known = {f.name for f in fields(RunConfig)} - {"command"}
    if config_path is not None:
        path = Path(config_path)
        if not path.is_file():
            raise UsageError(f"config file {config_path!r} does not exist")
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {config_path!r} is not valid JSON: {exc}") from None
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        values.update(data)
    values.update(ns)
    if "output_dir" not in values:
        values["output_dir"] = environ.get(OUTPUT_DIR_ENV, ".")

    for key, convert in _CONVERTERS.items():
        if key in values and values[key] is not None:
            try:
                values[key] = convert(values[key])
            except (TypeError, ValueError) as exc:
                raise UsageError(f"invalid value for {key}: {values[key]!r} ({exc})") from None
    cfg = RunConfig(command=command, **values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    try:
        graph = parse_graph_token(cfg.graph)
    except (ValueError, OSError, KeyError) as exc:
        raise UsageError(f"invalid --graph {cfg.graph!r}: {exc}") from None
    try:
        TargetSpec.parse(cfg.target)
        for t in cfg.targets or []:
            TargetSpec.parse(t)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cfg.command in ("evolve", "sweep") and TargetSpec.parse(cfg.target).kind == "none":
        raise UsageError(f"{cfg.command} needs a target")
    if cfg.command in ("evolve", "sweep"):
        try:
            resolve_target(graph, cfg.target)
        except (LookupError, IndexError) as exc:
            raise UsageError(str(exc)) from None
    positive = {
        "t_max": cfg.t_max,
        "step": cfg.step,
        "threads": cfg.threads,
        "window_factor": cfg.window_factor,
        "waist_um": cfg.waist_um,
        "spacing_um": cfg.spacing_um,
        "mode_diameter_um": cfg.mode_diameter_um,
        "scale_um_per_px": cfg.scale_um_per_px,
    }
    for name, value in positive.items():
        if not value > 0:
            raise UsageError(f"{name} must be positive, got {value}")
    if cfg.command == "scaling" and cfg.beta_grid is None and not cfg.beta > 0:
        raise UsageError("--beta must be positive for scaling")
    if cfg.command != "scaling" and cfg.beta < 0:
        raise UsageError("--beta must be non-negative")
    if cfg.beta_grid is not None and not cfg.beta_grid:
        raise UsageError("--beta-grid is empty")
    if cfg.command == "scaling":
        if not cfg.layers or min(cfg.layers) < 1:
            raise UsageError("--layers must list layer counts >= 1")
        bad = [t for t in (cfg.targets or []) if TargetSpec.parse(t).label not in ("C", "1N", "2N")]
        if bad:
            raise UsageError(f"scaling targets must be among C,1N,2N; got {bad}")
    if any(t < 0 for t in cfg.times):
        raise UsageError("--times must be non-negative")


def _run_evolve(cfg: RunConfig):
    graph = parse_graph_token(cfg.graph)
    model = SpatialSearch(beta_over_gamma=cfg.beta, target=cfg.target).fit(graph)
    series = model.evolution_series(make_grid(cfg.t_max, cfg.step))
    t_opt, r_opt = optimal_time(ratio_series(series), refine=True)
    name = f"curves_{graph.name}_{model.target_kind_}.csv"
    summary = (
        f"evolve graph={graph.name} n={graph.n} target={model.target_kind_} "
        f"beta_over_gamma={cfg.beta:.12g} t_opt={t_opt:.12g} r_opt={r_opt:.12g}"
    )
    return {name: curves_csv(series)}, summary


def _run_sweep(cfg: RunConfig):
    graph = parse_graph_token(cfg.graph)
    betas = cfg.beta_grid if cfg.beta_grid is not None else parse_float_list("0..8:0.1")
    times = make_grid(cfg.t_max, cfg.step)
    table = beta_time_heatmap(graph, cfg.target, betas, times, threads=cfg.threads)
    b, k = np.unravel_index(int(np.argmax(table)), table.shape)
    label = TargetSpec.parse(cfg.target).label
    name = f"heatmap_{graph.name}_{label}.csv"
    summary = (
        f"sweep graph={graph.name} target={label} max_p={table[b, k]:.12g} "
        f"at beta_over_gamma={betas[b]:.12g} gamma_t={times[k]:.12g}"
    )
    return {name: heatmap_csv(betas, times, table)}, summary


def _run_scaling(cfg: RunConfig):
    betas = cfg.beta_grid if cfg.beta_grid is not None else [cfg.beta]
    targets = cfg.targets or ["C", "1N", "2N"]
    surface = beta_size_surface(
        cfg.layers, targets, betas, window_factor=cfg.window_factor, threads=cfg.threads
    )
    records = list(surface.records)
    best = max(records, key=lambda r: r.r_opt)
    worst = min(records, key=lambda r: r.r_opt)
    summary = (
        f"scaling records={len(records)} min_r_opt={worst.r_opt:.12g} "
        f"(n={worst.n} target={worst.target_kind} beta_over_gamma={worst.beta_over_gamma:.12g}) "
        f"max_r_opt={best.r_opt:.12g} t_opt={best.t_opt:.12g}"
    )
    return {"scaling.csv": scaling_csv(records)}, summary


def _run_photonics(cfg: RunConfig):
    name, length = cfg.preset
    preset = get_preset(name)
    graph = parse_graph_token(cfg.graph)
    beam = BeamSpec(cfg.waist_um, cfg.tilt_x_mrad, cfg.tilt_y_mrad)
    targets = cfg.targets or ["none", "C", "S"]
    outputs = {}
    columns = {}
    parts = []
    for token in targets:
        spec = WaveguideArraySpec.from_preset(preset, length, token, graph=graph)
        label = TargetSpec.parse(token).label
        p, image = photonic_image(
            spec, beam, label, mode_diameter_um=cfg.mode_diameter_um, scale_um_per_px=cfg.scale_um_per_px
        )
        outputs[f"photonics_{name}_{length}_{label}.pgm"] = pgm_bytes(image)
        columns[f"p_{label}"] = p
        site = int(np.argmax(p)) if spec.target is None else spec.target
        parts.append(f"{label}:p[{site}]={p[site]:.12g}")
    gamma_t = preset.gamma_t(preset.length(length))
    outputs[f"photonics_{name}_{length}.csv"] = site_table_csv(graph.with_spacing(preset.spacing_um), columns)
    summary = f"photonics preset={name}-{length} gamma_t={gamma_t:.12g} " + " ".join(parts)
    return outputs, summary


def _run_render_classical(cfg: RunConfig):
    graph = parse_graph_token(cfg.graph)
    if graph.spacing_um is None:
        graph = graph.with_spacing(cfg.spacing_um)
    outputs = {}
    targets = cfg.targets or ["none", "C", "S"]
    for token in targets:
        label = TargetSpec.parse(token).label
        images = classical_facet_series(graph, token, cfg.times, cfg.mode_diameter_um, cfg.scale_um_per_px)
        for gt, image in zip(cfg.times, images):
            outputs[f"classical_{graph.name}_{label}_gt{gt:.12g}.pgm"] = pgm_bytes(image)
    summary = f"render-classical graph={graph.name} images={len(outputs)}"
    return outputs, summary


_RUNNERS = {
    "evolve": _run_evolve,
    "sweep": _run_sweep,
    "scaling": _run_scaling,
    "photonics": _run_photonics,
    "render-classical": _run_render_classical,
}


def execute(cfg: RunConfig, stdout=None) -> int:
    """Run one command; every output is computed before any file is written."""
    stdout = sys.stdout if stdout is None else stdout
    try:
        outputs, summary = _RUNNERS[cfg.command](cfg)
    except (CTQWSearchError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out_dir = Path(cfg.output_dir)
    try:
        for name, payload in outputs.items():
            write_atomic(out_dir / name, payload)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 1
    print(summary, file=stdout)
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"ctqw-search: error: {exc}", file=sys.stderr)
        return 2
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())
