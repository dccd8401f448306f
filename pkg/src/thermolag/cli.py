"""``thermolag`` command line: simulate, detect, fit, sensitivity, report.

Exit status is 0 on success, 1 on usage errors and 2 on data or model
errors. Diagnostics go to stderr. Each run writes a ``*.manifest.json``
sidecar next to its primary output listing the command line, config hash,
input digest, package version, timestamp and every file written.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .crossbasis import LagSpec
from .data import StratumKey, read_series, to_csv
from .effects import VARIANTS, ModelConfig, run_panel
from .errors import ThermolagError
from .events import (
    EteDefinition,
    all_definitions,
    cold_spell_definitions,
    detect,
    event_day_stats,
    heat_wave_definitions,
)
from .report import flat_csv, load_results, report, results_document, write_csv
from .sensitivity import SensitivityGrid, run_grid
from .simulate import SimSpec, generate, metadata

PANEL_KEYS = ("df_rh", "df_pm10", "df_time_per_year", "df_dos", "df_temp", "percentile_scope")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _digest(path) -> str:
    return "sha256:" + hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return "sha256:" + hashlib.sha256(blob).hexdigest()


def _manifest_core(config: dict, input_path=None) -> dict:
    # deterministic part only; command line and timestamp live in the sidecar
    return {
        "tool": "thermolag",
        "version": __version__,
        "config_hash": _config_hash(config),
        "input_digest": _digest(input_path) if input_path else None,
    }


def _write(path: Path, text: str, written: list):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    written.append(str(path))


def _write_manifest(primary: Path, core: dict, written: list, argv: list):
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    stamp = time.gmtime(int(epoch)) if epoch else time.gmtime()
    manifest = dict(core)
    manifest["command"] = ["thermolag", *argv]
    manifest["created_utc"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", stamp)
    manifest["outputs"] = [Path(p).name for p in written]
    target = primary.with_name(primary.name + ".manifest.json")
    target.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ThermolagError(f"{path}: invalid JSON: {exc}") from None


def _definitions(text: str) -> list:
    if text == "all":
        return all_definitions()
    try:
        return [EteDefinition.from_name(n) for n in text.split(",") if n.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_simulate(args, argv):
    raw = _load_json(args.spec) if args.spec else {}
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.years is not None:
        raw["years"] = args.years
    spec = SimSpec.from_dict(raw)
    out = Path(args.out)
    written = []
    _write(out, to_csv(generate(spec)), written)
    core = _manifest_core(spec.to_dict(), args.spec)
    core["simulation"] = metadata(spec)
    _write_manifest(out, core, written, argv)


def cmd_detect(args, argv):
    series = read_series(args.input)
    out_dir = Path(args.out_dir)
    written = []
    rows = []
    for definition in _definitions(args.definitions):
        ind = detect(series, definition, args.percentile_scope)
        body = "date,flag\n" + "".join(f"{d},{int(f)}\n" for d, f in zip(ind.dates, ind.flags))
        _write(out_dir / f"{definition.name}.csv", body, written)
        stats = event_day_stats(ind)
        rows.append({
            "name": definition.name,
            "definition": definition.description,
            "threshold": ind.threshold,
            **stats._asdict(),
        })
    summary = out_dir / "summary.csv"
    _write(summary, write_csv(rows, ("name", "definition", "threshold", "mean", "sd", "min", "median", "max")),
           written)
    config = {"definitions": args.definitions, "percentile_scope": args.percentile_scope}
    _write_manifest(summary, _manifest_core(config, args.input), written, argv)


def _panel_settings(args) -> dict:
    raw = _load_json(args.config) if args.config else {}
    settings = {k: raw[k] for k in PANEL_KEYS if k in raw}
    if args.percentile_scope is not None:
        settings["percentile_scope"] = args.percentile_scope
    knots = args.lag_knots or raw.get("lag_knots", "linear")
    lag_specs = {}
    for kind, prefix in (("heat_wave", "hw"), ("cold_spell", "cs")):
        default = LagSpec.default_for(kind)
        lag_specs[kind] = LagSpec(
            int(raw.get(f"{prefix}_max_lag", default.max_lag)),
            int(raw.get(f"{prefix}_lag_df", default.lag_df)),
            knots,
        )
    return settings, lag_specs


def _strata(series, causes, sexes) -> list:
    keys = series.strata
    if causes:
        wanted = set(causes.split(","))
        keys = [k for k in keys if k.cause in wanted]
    if sexes:
        wanted = set(sexes.split(","))
        keys = [k for k in keys if k.sex in wanted]
    if not keys:
        raise ThermolagError("no death-count columns match the requested strata")
    return sorted(keys, key=StratumKey.sort_key)


def cmd_fit(args, argv):
    series = read_series(args.input)
    definitions = {
        "hw": heat_wave_definitions(),
        "cs": cold_spell_definitions(),
        "all": all_definitions(),
    }[args.panel]
    variants = VARIANTS if args.variant == "both" else (args.variant,)
    settings, lag_specs = _panel_settings(args)
    strata = _strata(series, args.causes, args.sexes)
    cells = run_panel(series, definitions, strata, variants, threads=args.threads,
                      lag_specs=lag_specs, **settings)
    config = {
        "panel": args.panel,
        "variants": list(variants),
        "strata": [k.label for k in strata],
        "settings": settings,
        "lag_specs": {k: v.to_dict() for k, v in lag_specs.items()},
    }
    out = Path(args.out)
    core = _manifest_core(config, args.input)
    core["manifest_file"] = out.name + ".manifest.json"
    doc = results_document(cells, core)
    written = []
    _write(out, json.dumps(doc, indent=1) + "\n", written)
    _write(out.with_suffix(".csv"), flat_csv(doc), written)
    _write_manifest(out, core, written, argv)
    n_err = sum(1 for c in cells if not c.ok)
    print(f"fitted {len(cells) - n_err}/{len(cells)} cells", file=sys.stderr)


def cmd_sensitivity(args, argv):
    series = read_series(args.input)
    raw = _load_json(args.config)
    grid = SensitivityGrid.from_dict(raw.pop("grid")) if "grid" in raw else SensitivityGrid()
    for flag in ("definition", "cause", "sex", "variant"):
        value = getattr(args, flag)
        if value is not None:
            raw[flag] = value
    if "definition" not in raw:
        raise UsageError("base config needs a 'definition' (or pass --definition)")
    try:
        base = ModelConfig.from_dict(raw)
    except (ValueError, TypeError) as exc:
        raise ThermolagError(f"bad base config: {exc}") from None
    result = run_grid(series, base, grid, threads=args.threads)
    rows = []
    for rank, point in enumerate(result.ranked, start=1):
        rows.append(_grid_row(point, rank, point.config == base))
    for point in result.failed:
        rows.append(_grid_row(point, None, point.config == base))
    if result.base not in result.ranked:
        rows.append(_grid_row(result.base, None, True))
    columns = ("rank", "is_base", "df_rh", "df_pm10", "lag_df", "max_lag", "df_time_per_year", "df_dos",
               "n_params", "qaic", "rr", "ci_low", "ci_high", "error")
    out = Path(args.out)
    written = []
    _write(out, write_csv(rows, columns), written)
    config = {"base": base.to_dict(), "grid": grid.to_dict()}
    core = _manifest_core(config, args.input)
    core["common_phi"] = result.phi
    core["window_start"] = result.window_start
    _write_manifest(out, core, written, argv)
    best = result.best
    print(f"best qaic {best.qaic:.3f}: {best.config.to_dict()}", file=sys.stderr)


def _grid_row(point, rank, is_base) -> dict:
    cfg = point.config
    est = point.estimate
    return {
        "rank": rank,
        "is_base": is_base,
        "df_rh": cfg.df_rh,
        "df_pm10": cfg.df_pm10,
        "lag_df": cfg.lag_spec.lag_df,
        "max_lag": cfg.lag_spec.max_lag,
        "df_time_per_year": cfg.df_time_per_year,
        "df_dos": cfg.df_dos,
        "n_params": point.n_params if est is not None else None,
        "qaic": point.qaic if est is not None else None,
        "rr": est.rr if est is not None else None,
        "ci_low": est.ci_low if est is not None else None,
        "ci_high": est.ci_high if est is not None else None,
        "error": point.error,
    }


def cmd_report(args, argv):
    path = Path(args.input)
    doc = load_results(path.read_text(encoding="utf-8"))
    out_dir = Path(args.out_dir)
    written = []
    for name, text in report(doc).items():
        _write(out_dir / name, text, written)
    _write_manifest(out_dir / "report", _manifest_core({}, path), written, argv)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="thermolag", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=1, help="worker threads for panel and grid fits")
    parser.add_argument("--version", action="version", version=f"thermolag {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("simulate", help="generate a synthetic series")
    p.add_argument("--spec", help="simulation spec JSON (defaults used when omitted)")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--years", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", help="flag event days for each definition")
    p.add_argument("--input", required=True)
    p.add_argument("--definitions", default="all", help="'all' or comma-separated names like HW_95P_3d")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--percentile-scope", choices=("full", "season"), default="full")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("fit", help="fit the event panel and write cumulative RRs")
    p.add_argument("--input", required=True)
    p.add_argument("--panel", choices=("hw", "cs", "all"), default="all")
    p.add_argument("--variant", choices=("overall", "added", "both"), default="overall")
    p.add_argument("--out", required=True, help="results JSON; a flat CSV is written beside it")
    p.add_argument("--config", help="JSON with df_* settings and hw_/cs_ max_lag and lag_df")
    p.add_argument("--causes", help="comma-separated cause filter")
    p.add_argument("--sexes", help="comma-separated sex filter")
    p.add_argument("--percentile-scope", choices=("full", "season"))
    p.add_argument("--lag-knots", choices=("linear", "log"))
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sensitivity", help="rank a calibration grid by quasi-AIC")
    p.add_argument("--input", required=True)
    p.add_argument("--config", required=True, help="base model config JSON, optional 'grid' key")
    p.add_argument("--out", required=True)
    p.add_argument("--definition")
    p.add_argument("--cause")
    p.add_argument("--sex")
    p.add_argument("--variant", choices=VARIANTS)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("report", help="split results into per-figure long CSVs")
    p.add_argument("--input", required=True)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return 1
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        args.func(args, argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (ThermolagError, OSError, ValueError) as exc:
        print(f"thermolag: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
