"""Command-line front end.

Subcommands (all driven by a TOML config file, overridable from the
command line):

    simulate        run a disorder ensemble and persist its artifacts
    heisenberg-time tabulate and fit the spectral long-time cutoff
    collapse        optimize a data collapse over persisted averages
    fit             size-exponent or log-growth fits of persisted data
    report          human-readable markdown summary of a results directory

Exit codes: 0 success, 2 bad configuration, 3 partial completion,
4 insufficient data.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__, storage
from .dynamics import KrylovConfig, fit_heisenberg_time
from .ensemble import (
    RunConfig,
    TimeSpec,
    peak_location,
    run_ensemble,
)
from .errors import ConfigError, FockscopeError, InvalidParameterError
from .scaling import (
    ANSATZ_BKT,
    ANSATZ_POWER_LAW,
    ScalingDataset,
    collapsed_coordinates,
    fit_log_growth,
    fit_power_beta,
    optimize_collapse,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARTIAL = 3
EXIT_INSUFFICIENT = 4

SEED_ENV_VAR = "FOCKSCOPE_SEED"

logger = logging.getLogger("fockscope.cli")


def _parse_override(text: str) -> tuple[list[str], object]:
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw
    return key.split("."), value


def _apply_override(section: dict, path: list[str], value) -> None:
    node = section
    for part in path[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override path {'.'.join(path)} crosses a scalar")
    node[path[-1]] = value


def load_section(config_path: str, section: str, overrides) -> dict:
    if not os.path.exists(config_path):
        raise ConfigError(f"config file {config_path!r} does not exist")
    with open(config_path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{config_path}: {exc}") from exc
    if section not in data:
        raise ConfigError(f"{config_path}: missing [{section}] section")
    cfg = data[section]
    for text in overrides or []:
        path, value = _parse_override(text)
        _apply_override(cfg, path, value)
    return cfg


def _require(cfg: dict, section: str, key: str, types):
    if key not in cfg:
        raise ConfigError(f"[{section}] is missing required key {key!r}")
    value = cfg[key]
    if not isinstance(value, types):
        raise ConfigError(
            f"[{section}].{key}: expected {types}, got {type(value).__name__}"
        )
    return value


def _master_seed(cfg: dict, section: str) -> int:
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV_VAR}={env!r} is not an integer") from exc
    return int(_require(cfg, section, "master_seed", (int,)))


def _time_spec(cfg: dict) -> TimeSpec:
    raw = dict(cfg.get("time", {}))
    if "times" in raw:
        raw["times"] = tuple(raw["times"])
    if "window" in raw:
        raw["window"] = tuple(raw["window"])
    try:
        return TimeSpec(**raw)
    except (TypeError, InvalidParameterError) as exc:
        raise ConfigError(f"[simulate].time: {exc}") from exc


def _run_config(cfg: dict, args) -> RunConfig:
    section = "simulate"
    kind = _require(cfg, section, "kind", (str,))
    L_list = tuple(int(v) for v in _require(cfg, section, "L_list", (list,)))
    W_grid = tuple(float(v) for v in _require(cfg, section, "W_grid", (list,)))
    n_real = int(_require(cfg, section, "n_realizations", (int,)))
    krylov_raw = cfg.get("krylov", {})
    try:
        krylov = KrylovConfig(**krylov_raw)
    except (TypeError, InvalidParameterError) as exc:
        raise ConfigError(f"[simulate].krylov: {exc}") from exc
    out = args.out or cfg.get("out")
    if not out:
        raise ConfigError("[simulate] needs an output directory ('out' or --out)")
    try:
        return RunConfig(
            kind=kind,
            L_list=L_list,
            W_grid=W_grid,
            n_realizations=n_real,
            time_spec=_time_spec(cfg),
            master_seed=_master_seed(cfg, section),
            J=float(cfg.get("J", 1.0)),
            sector=cfg.get("sector", "sz-zero"),
            evolver=cfg.get("evolver", "krylov"),
            krylov=krylov,
            floquet_site_mode=cfg.get("floquet_site_mode", "eigenphase"),
            workers=args.workers,
            min_completion=float(cfg.get("min_completion", 0.95)),
            output_dir=out,
        )
    except (InvalidParameterError, FockscopeError) as exc:
        raise ConfigError(f"[simulate]: {exc}") from exc


def cmd_simulate(args) -> int:
    cfg = load_section(args.config, "simulate", args.override)
    run_cfg = _run_config(cfg, args)
    result = run_ensemble(run_cfg, resume=args.resume)
    done = sum(d for d, _ in result.completion.values())
    want = sum(w for _, w in result.completion.values())
    print(f"simulate: {len(result.series)} points, {done}/{want} realizations -> "
          f"{run_cfg.output_dir}")
    if not result.fully_complete:
        for key, (d, w) in sorted(result.completion.items()):
            if d != w:
                print(f"  incomplete point L={key[0]} W={key[1]:g}: {d}/{w}")
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_heisenberg_time(args) -> int:
    from .ensemble import measure_heisenberg_times

    section = "heisenberg-time"
    cfg = load_section(args.config, section, args.override)
    kind = _require(cfg, section, "kind", (str,))
    L_list = [int(v) for v in _require(cfg, section, "L_list", (list,))]
    W_grid = [float(v) for v in _require(cfg, section, "W_grid", (list,))]
    out = args.out or cfg.get("out")
    if not out:
        raise ConfigError(f"[{section}] needs an output directory ('out' or --out)")
    ts = TimeSpec(
        rule="fixed", t_i=1.0, t_f=2.0,
        n_spectra=int(cfg.get("n_spectra", 8)),
        center_fraction=float(cfg.get("center_fraction", 0.1)),
    )
    run_cfg = RunConfig(
        kind=kind,
        L_list=tuple(L_list),
        W_grid=tuple(W_grid),
        n_realizations=1,
        time_spec=ts,
        master_seed=_master_seed(cfg, section),
        J=float(cfg.get("J", 1.0)),
        sector=cfg.get("sector", "sz-zero"),
        output_dir=None,
    )
    os.makedirs(out, exist_ok=True)
    manifest = {"config": run_cfg.to_manifest(), "format": "fockscope-heisenberg-v1"}
    manifest_hash = storage.write_manifest(out, manifest)

    table_lines = [f"# manifest_sha256: {manifest_hash}", "L,W,t_H"]
    fit_payload = {}
    for L in L_list:
        tH = measure_heisenberg_times(run_cfg, L)
        for W, value in zip(W_grid, tH):
            table_lines.append(f"{L},{storage.fmt(W)},{storage.fmt(value)}")
        if len(W_grid) < 4:
            print(f"heisenberg-time: L={L} tabulated only "
                  f"({len(W_grid)} points; the formula fit needs >= 4)")
            continue
        fit = fit_heisenberg_time(np.column_stack([W_grid, tH]), L)
        inv_b, inv_c = fit.invariants()
        fit_payload[str(L)] = {
            "a": float(f"{fit.a:.17g}"),
            "b": float(f"{fit.b:.17g}"),
            "c": float(f"{fit.c:.17g}"),
            "gauge": "b+c=1",
            "invariant_b_over_a2": float(f"{inv_b:.17g}"),
            "invariant_c_over_a2": float(f"{inv_c:.17g}"),
            "max_rel_residual": float(f"{fit.max_rel_residual:.17g}"),
        }
        print(f"heisenberg-time: L={L} fit (a,b,c)=({fit.a:.4g},{fit.b:.4g},"
              f"{fit.c:.4g}) max rel residual {fit.max_rel_residual:.2%}")
    with open(os.path.join(out, "heisenberg_times.csv"), "w", newline="\n") as fh:
        fh.write("\n".join(table_lines) + "\n")
    with open(os.path.join(out, "heisenberg_fit.json"), "wb") as fh:
        fh.write(storage.canonical_json(
            {"manifest_sha256": manifest_hash, "fits": fit_payload}
        ) + b"\n")
    storage.write_checksums(out, manifest_hash)
    return EXIT_OK


DEFAULT_BOXES = {
    ANSATZ_POWER_LAW: {"nu": (0.2, 8.0), "lam": (0.05, 2.5)},
    ANSATZ_BKT: {"b": (0.5, 40.0), "w1": (0.0, 2.0)},
}


def _default_box(data: ScalingDataset, ansatz: str) -> dict:
    w_lo = min(w.min() for w, _ in data.curves.values())
    w_hi = max(w.max() for w, _ in data.curves.values())
    span = w_hi - w_lo
    box = dict(DEFAULT_BOXES[ansatz])
    if ansatz == ANSATZ_POWER_LAW:
        box["W_c"] = (w_lo, w_hi)
    else:
        box["w0"] = (w_lo - span, w_hi)
    return box


def cmd_collapse(args) -> int:
    section = "collapse"
    cfg = load_section(args.config, section, args.override)
    input_csv = _require(cfg, section, "input", (str,))
    out = args.out or cfg.get("out")
    if not out:
        raise ConfigError(f"[{section}] needs an output directory ('out' or --out)")
    if not os.path.exists(input_csv):
        print(f"collapse: input {input_csv!r} does not exist", file=sys.stderr)
        return EXIT_INSUFFICIENT

    averages = storage.read_window_averages(input_csv)
    try:
        data = ScalingDataset.from_window_averages(
            [(wa.L, wa.W, wa.value) for wa in averages]
        )
    except InvalidParameterError as exc:
        print(f"collapse: dataset too small: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT

    requested = cfg.get("ansatz", [ANSATZ_POWER_LAW])
    if isinstance(requested, str):
        requested = [requested]
    manifest_hash = None
    if os.path.exists(os.path.join(os.path.dirname(input_csv), storage.MANIFEST_NAME)):
        _, manifest_hash = storage.read_manifest(os.path.dirname(input_csv))

    for ansatz in requested:
        if ansatz not in (ANSATZ_POWER_LAW, ANSATZ_BKT):
            raise ConfigError(f"[collapse].ansatz: unknown ansatz {ansatz!r}")
        box = _default_box(data, ansatz)
        box.update({
            k: tuple(v) for k, v in cfg.get("search_box", {}).get(ansatz, {}).items()
        })
        result = optimize_collapse(
            data,
            ansatz,
            box,
            restarts=int(cfg.get("restarts", 32)),
            seed=int(cfg.get("seed", 7)),
            eta=float(cfg.get("eta", 0.01)),
        )
        coords = collapsed_coordinates(data, result.ansatz_object())
        tag = ansatz.replace("-", "_")
        jpath, _ = storage.write_collapse_report(out, result, coords, manifest_hash, tag)
        params = ", ".join(f"{k}={v:.4g}" for k, v in result.params.items())
        print(f"collapse[{ansatz}]: {params}; R*={result.R_star:.4g} -> {jpath}")
    return EXIT_OK


def _read_plain_csv(path: str) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                continue  # header line
    return np.asarray(rows)


def cmd_fit(args) -> int:
    section = "fit"
    cfg = load_section(args.config, section, args.override)
    mode = _require(cfg, section, "mode", (str,))
    input_csv = _require(cfg, section, "input", (str,))
    out = args.out or cfg.get("out")
    if not os.path.exists(input_csv):
        print(f"fit: input {input_csv!r} does not exist", file=sys.stderr)
        return EXIT_INSUFFICIENT

    try:
        if mode == "beta":
            rows = _read_plain_csv(input_csv)
            if rows.ndim != 2 or len(rows) == 0:
                raise InvalidParameterError(f"{input_csv}: no numeric rows")
            if rows.shape[1] >= 3 and "W" in cfg:
                w_sel = float(cfg["W"])
                mask = np.abs(rows[:, 1] - w_sel) < 1e-9
                pts = rows[mask][:, [0, 2]]
                if len(pts) == 0:
                    raise InvalidParameterError(
                        f"{input_csv}: no rows with W={w_sel:g}"
                    )
            else:
                pts = rows[:, :2]
            fit = fit_power_beta(pts)
            payload = {
                "mode": "beta",
                "beta": fit.beta,
                "stderr": fit.stderr,
                "ci95": list(fit.ci95),
                "n_points": len(pts),
            }
            print(f"fit[beta]: beta={fit.beta:.4g} ci95=({fit.ci95[0]:.4g},"
                  f"{fit.ci95[1]:.4g})")
        elif mode == "log-growth":
            window = cfg.get("window")
            if not (isinstance(window, list) and len(window) == 2):
                raise ConfigError("[fit].window must be [t_i, t_f] for log-growth")
            rows = _read_plain_csv(input_csv)
            fit = fit_log_growth(rows[:, :2], (float(window[0]), float(window[1])))
            payload = {
                "mode": "log-growth",
                "slope": fit.slope,
                "intercept": fit.intercept,
                "goodness": fit.goodness,
                "window": [float(window[0]), float(window[1])],
            }
            print(f"fit[log-growth]: slope={fit.slope:.4g} goodness={fit.goodness:.4f}")
        else:
            raise ConfigError(f"[fit].mode: unknown mode {mode!r}")
    except ConfigError:
        raise
    except FockscopeError as exc:
        print(f"fit: {input_csv}: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT

    if out:
        os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
        with open(out, "wb") as fh:
            fh.write(storage.canonical_json(payload) + b"\n")
    return EXIT_OK


def cmd_report(args) -> int:
    section = "report"
    cfg = load_section(args.config, section, args.override)
    results_dir = _require(cfg, section, "dir", (str,))
    out = args.out or cfg.get("out") or os.path.join(results_dir, "report.md")

    lines = ["# Run report", ""]
    warnings_list = []
    if not os.path.isdir(results_dir):
        print(f"report: missing results directory {results_dir!r}", file=sys.stderr)
        return EXIT_CONFIG

    manifest_path = os.path.join(results_dir, storage.MANIFEST_NAME)
    if os.path.exists(manifest_path):
        manifest, manifest_hash = storage.read_manifest(results_dir)
        run = manifest.get("config", {})
        lines += [
            f"- manifest sha256: `{manifest_hash}`",
            f"- model kind: {run.get('kind')}",
            f"- sizes: {run.get('L_list')}",
            f"- disorder grid: {len(run.get('W_grid', []))} points",
            f"- realizations per point: {run.get('n_realizations')}",
            "",
        ]
    else:
        warnings_list.append(f"missing artifact: {storage.MANIFEST_NAME}")

    bad = storage.verify_checksums(results_dir)
    if bad:
        for name in bad:
            warnings_list.append(f"integrity warning: {name} missing or modified")

    series_files = sorted(
        f for f in os.listdir(results_dir)
        if f.startswith("series_") and f.endswith(".csv")
    )
    if series_files:
        lines += ["## Recorded points", "", "| L | W | realizations | times |",
                  "|---|---|---|---|"]
        for name in series_files:
            series, meta = storage.read_series(os.path.join(results_dir, name))
            lines.append(
                f"| {meta.get('L')} | {meta.get('W')} | {series.count} "
                f"| {len(series.times)} |"
            )
        lines.append("")
    else:
        warnings_list.append("missing artifact: no series_*.csv files")

    averages_path = os.path.join(results_dir, storage.AVERAGES_NAME)
    if os.path.exists(averages_path):
        averages = storage.read_window_averages(averages_path)
        sizes = sorted({wa.L for wa in averages})
        lines += ["## Window-averaged spread and peaks", ""]
        for L in sizes:
            curve = np.asarray(sorted(
                (wa.W, wa.value) for wa in averages if wa.L == L
            ))
            if len(curve) >= 3:
                peak = peak_location(curve)
                tag = " (boundary)" if peak.boundary else ""
                lines.append(f"- L={L}: peak near W*={peak.w_star:.4g}{tag}")
            else:
                lines.append(f"- L={L}: {len(curve)} points (too few for a peak)")
        lines.append("")
    else:
        warnings_list.append(f"missing artifact: {storage.AVERAGES_NAME}")

    collapse_files = sorted(
        f for f in os.listdir(results_dir)
        if f.startswith("collapse_") and f.endswith(".json")
    )
    if collapse_files:
        lines += ["## Collapse results", "", "| ansatz | parameters | widths | R* |",
                  "|---|---|---|---|"]
        for name in collapse_files:
            with open(os.path.join(results_dir, name)) as fh:
                rep = json.load(fh)
            params = ", ".join(f"{k}={v:.4g}" for k, v in rep["parameters"].items())
            widths = ", ".join(f"{k}±{v:.2g}" for k, v in rep["widths"].items())
            lines.append(f"| {rep['ansatz']} | {params} | {widths} | "
                         f"{rep['R_star']:.4g} |")
        lines.append("")

    if warnings_list:
        lines += ["## Warnings", ""] + [f"- {w}" for w in warnings_list] + [""]

    with open(out, "w", newline="\n") as fh:
        fh.write("\n".join(lines))
    print(f"report -> {out}")
    for w in warnings_list:
        print(f"  warning: {w}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fockscope",
        description="Spin-chain Fock-space spreading: simulation and scaling analysis",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("simulate", cmd_simulate),
        ("heisenberg-time", cmd_heisenberg_time),
        ("collapse", cmd_collapse),
        ("fit", cmd_fit),
        ("report", cmd_report),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="TOML configuration file")
        p.add_argument("--override", action="append", metavar="K=V",
                       help="override a config key (repeatable, dotted paths ok)")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        p.add_argument("--resume", action="store_true",
                       help="reuse completed points from a previous run")
        p.add_argument("--out", help="output directory or file")
        p.add_argument("--verbose", action="store_true")
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
