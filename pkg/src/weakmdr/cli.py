"""Command-line front end: sweeps, verification and raw counts export.

    weakmdr sweep-ma     precision, disturbance and both LHS vs MA strength
    weakmdr sweep-weak   bound |<Y>| vs weak-probe strength
    weakmdr verify       self-check suites; exit status 1 on any failure
    weakmdr counts       one simulated coincidence table per setting

With no flags every command reproduces the paper-shaped run: calibrated
noise, 30000 pairs per setting, seed 0.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .config import ConfigError, SweepConfig, load_config
from .emulator import (QUANTITIES, SETTINGS, MdrEstimate, exact_bins,
                       post_weak_bound, run_point, sample_experiment)
from .verify import SuiteResult, VerifyHooks, run_all

log = logging.getLogger("weakmdr")


@dataclass
class SweepRow:
    strength: float
    epsilon: float
    eta: float
    delta_x: float
    delta_z: float
    bound: float
    heisenberg_lhs: float
    ozawa_lhs: float
    epsilon_se: float | None = None
    eta_se: float | None = None
    delta_x_se: float | None = None
    delta_z_se: float | None = None
    bound_se: float | None = None
    heisenberg_lhs_se: float | None = None
    ozawa_lhs_se: float | None = None
    violated_heisenberg: bool | None = None
    satisfied_ozawa: bool | None = None
    bound_ideal: float | None = None
    notes: str = ""


COLUMNS = [f.name for f in dataclasses.fields(SweepRow)]


class OutputError(OSError):
    pass


def _row(value: float, result: MdrEstimate, bound_ideal: float) -> SweepRow:
    r = result.report
    values = {q: getattr(r, q) for q in QUANTITIES}
    ses = {f"{q}_se": (result.stderr(q) if result.errors else None) for q in QUANTITIES}
    defined = math.isfinite(r.heisenberg_lhs) and math.isfinite(r.bound)
    return SweepRow(
        strength=value, **values, **ses,
        violated_heisenberg=r.violated_heisenberg if defined else None,
        satisfied_ozawa=r.satisfied_ozawa if defined else None,
        bound_ideal=bound_ideal,
        notes="; ".join(f"{k}: {v}" for k, v in sorted(result.issues.items())),
    )


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def cmd_sweep_ma(cfg: SweepConfig) -> list[SweepRow]:
    """One row per MA strength at a fixed weak strength."""
    noise, shots = cfg.noise_model(), cfg.shot_config()
    w = cfg.resolved_weak_strength()
    ideal_bound = post_weak_bound(w)

    def point(item):
        i, s = item
        return _row(s, run_point(w, s, noise, shots, point=i, feed_forward=cfg.feed_forward),
                    ideal_bound)

    return _map(point, list(enumerate(cfg.ma_strengths)), cfg.workers)


def cmd_sweep_weak(cfg: SweepConfig) -> list[SweepRow]:
    """One row per weak strength at a fixed MA strength; ``bound`` is the noisy curve."""
    noise, shots = cfg.noise_model(), cfg.shot_config()

    def point(item):
        i, w = item
        res = run_point(w, cfg.ma_strength, noise, shots, point=i, feed_forward=cfg.feed_forward)
        return _row(w, res, post_weak_bound(w))

    return _map(point, list(enumerate(cfg.weak_strengths)), cfg.workers)


def cmd_counts(cfg: SweepConfig) -> list[dict]:
    shots = cfg.shot_config()
    if shots is None:
        raise ConfigError("field 'shots': the counts command needs a finite number of pairs")
    w = cfg.resolved_weak_strength()
    bins = exact_bins(w, cfg.ma_strength, cfg.noise_model(), cfg.feed_forward)
    tables = sample_experiment(bins, shots)
    return [rec for name in SETTINGS for rec in tables[name].records()]


def cmd_verify(hooks: VerifyHooks = VerifyHooks()) -> tuple[bool, list[SuiteResult]]:
    results = run_all(hooks)
    return all(r.passed for r in results), results


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else ""
    return str(x)


def manifest_path(path: Path) -> Path:
    return path.with_name(path.stem + ".manifest.json")


def _write_table(records: list[dict], columns: list[str], path: Path, manifest: dict) -> Path:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for rec in records:
                writer.writerow([_fmt(rec[c]) for c in columns])
        mpath = manifest_path(path)
        with open(mpath, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OutputError(f"{exc.filename or path}: {exc.strerror}") from None
    return mpath


def write_outputs(rows: list[SweepRow], path: str | Path, manifest: dict | None = None) -> Path:
    """Write the CSV table and its ``.manifest.json``; returns the manifest path."""
    manifest = dict(manifest or {}, columns=COLUMNS, rows=len(rows), version=__version__)
    return _write_table([dataclasses.asdict(r) for r in rows], COLUMNS, path, manifest)


COUNT_COLUMNS = ["setting", "bin", "photon1", "photon2", "x1", "zp", "final", "zm", "count"]


def write_counts(records: list[dict], path: str | Path, manifest: dict | None = None) -> Path:
    manifest = dict(manifest or {}, columns=COUNT_COLUMNS, rows=len(records), version=__version__)
    return _write_table(records, COUNT_COLUMNS, path, manifest)


def _manifest(command: str, cfg: SweepConfig) -> dict:
    noise = cfg.noise_model()
    resolved = {"source_coherence": noise.source_coherence,
                "interferometer_visibility": noise.interferometer_visibility}
    if command != "sweep-weak":
        resolved["weak_strength"] = cfg.resolved_weak_strength()
    return {"command": command, "config": cfg.echo(), "seed": cfg.seed, "resolved": resolved,
            "settings": list(SETTINGS)}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weakmdr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("sweep-ma", "sweep the measurement-apparatus strength"),
                        ("sweep-weak", "sweep the weak-probe strength"),
                        ("counts", "dump simulated coincidence counts")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", type=Path, help="YAML config file; flags override it")
        p.add_argument("--seed", type=int)
        p.add_argument("--shots", help="pairs per setting, or 'exact'")
        p.add_argument("--noise", help="ideal | calibrate | calibrate:(f_ent,f_tel) | c=..,v=..")
        p.add_argument("--weak-strength", type=float)
        p.add_argument("--ma-strength", type=float)
        p.add_argument("--resamples", type=int, dest="bootstrap_resamples")
        p.add_argument("--feed-forward", action="store_const", const=True, default=None)
        p.add_argument("--workers", type=int)
        p.add_argument("--out", type=Path)
    sub.add_parser("verify", help="run the self-check suites")
    return parser


DEFAULT_OUT = {"sweep-ma": "sweep_ma.csv", "sweep-weak": "sweep_weak.csv", "counts": "counts.csv"}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)

    if args.command == "verify":
        ok, results = cmd_verify()
        for r in results:
            print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
        return 0 if ok else 1

    overrides = {k: getattr(args, k) for k in
                 ("seed", "shots", "noise", "weak_strength", "ma_strength",
                  "bootstrap_resamples", "feed_forward", "workers")}
    overrides["out"] = str(args.out) if args.out else None
    try:
        cfg = load_config(args.config, overrides)
        out = Path(cfg.out or DEFAULT_OUT[args.command])
        manifest = _manifest(args.command, cfg)
        if args.command == "counts":
            mpath = write_counts(cmd_counts(cfg), out, manifest)
        else:
            rows = (cmd_sweep_ma if args.command == "sweep-ma" else cmd_sweep_weak)(cfg)
            mpath = write_outputs(rows, out, manifest)
    except ConfigError as exc:
        print(f"weakmdr: config error: {exc}", file=sys.stderr)
        return 2
    except OutputError as exc:
        print(f"weakmdr: cannot write output: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {out} and {mpath}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
