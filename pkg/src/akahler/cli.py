"""Command-line front end: ``akahler {list,verify,diagnose,frame}``.

Exit codes: 0 success, 1 identity or validation failure, 2 bad input,
3 construction failure (structure or normal-frame errors).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import diagnostics, zoo
from .charts import AlmostKahlerChart, StructureError, load_chart, validate_structure
from .frames import FrameConstructionError, construct_gnh_frame
from .jets import DomainError, JetOrderError

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CONSTRUCTION = 0, 1, 2, 3
SEED_ENV = "AKAHLER_SEED"
TOL_FLOOR, TOL_CEIL = 1e-12, 1e-3
TOL_NAMES = ("structure",) + tuple(diagnostics.IDENTITIES)


class InputError(ValueError):
    pass


def fmt(x) -> str:
    """Twelve significant digits."""
    if isinstance(x, complex):
        return f"{x.real:.12g}{x.imag:+.12g}j"
    return f"{float(x):.12g}"


@dataclass
class RunConfig:
    command: str
    chart: str | None = None
    params: dict[str, str] = field(default_factory=dict)
    nsamples: int = 100
    seed: int = 42
    order: int = 3
    json_path: str | None = None
    tols: dict[str, float] = field(default_factory=dict)
    point: list[float] | None = None

    def __post_init__(self):
        if self.nsamples < 1:
            raise InputError("--samples must be >= 1")
        if self.order < 3:
            raise InputError("--order must be >= 3 (L needs one derivative of B)")
        for name, val in self.tols.items():
            if name not in TOL_NAMES:
                raise InputError(f"unknown tolerance {name!r}; known: {', '.join(TOL_NAMES)}")
            if not TOL_FLOOR <= val <= TOL_CEIL:
                raise InputError(f"tolerance {name}={val:g} outside [{TOL_FLOOR:g}, {TOL_CEIL:g}]")

    def build_chart(self) -> AlmostKahlerChart:
        if self.chart is None:
            raise InputError("--chart is required")
        if self.chart in zoo.ZOO:
            entry = zoo.ZOO[self.chart]
            try:
                return entry.build(**self.params)
            except KeyError as exc:
                raise InputError(str(exc.args[0])) from exc
            except (TypeError, ValueError) as exc:
                if isinstance(exc, StructureError):
                    raise
                raise InputError(f"bad parameter for {self.chart}: {exc}") from exc
        path = Path(self.chart)
        if path.suffix == ".json" and path.exists():
            if self.params:
                raise InputError("--param applies to zoo charts only")
            try:
                return load_chart(path)
            except (KeyError, ValueError, TypeError) as exc:
                raise InputError(f"cannot load {path}: {exc}") from exc
        raise InputError(f"unknown chart {self.chart!r}; known: {', '.join(zoo.ZOO)} or a .json file")


def _pairs(items, what: str, cast=str) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise InputError(f"{what} expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = cast(v.strip())
        except ValueError as exc:
            raise InputError(f"{what} {item!r}: {exc}") from exc
    return out


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 42
    try:
        return int(raw)
    except ValueError as exc:
        raise InputError(f"{SEED_ENV}={raw!r} is not an integer") from exc


def config_from_args(args: argparse.Namespace) -> RunConfig:
    point = None
    if getattr(args, "point", None):
        try:
            point = [float(t) for t in args.point.split(",")]
        except ValueError as exc:
            raise InputError(f"--point must be comma-separated numbers: {exc}") from exc
    return RunConfig(
        command=args.command,
        chart=getattr(args, "chart", None),
        params=_pairs(getattr(args, "param", None), "--param"),
        nsamples=100 if getattr(args, "samples", None) is None else args.samples,
        seed=args.seed if getattr(args, "seed", None) is not None else _default_seed(),
        order=3 if getattr(args, "order", None) is None else args.order,
        json_path=getattr(args, "json", None),
        tols=_pairs(getattr(args, "tol", None), "--tol", float),
        point=point,
    )


def _emit_json(payload, path: str | None, out):
    if path is None:
        return
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path == "-":
        out.write(text)
    else:
        Path(path).write_text(text)


# commands ----------------------------------------------------------------------


def cmd_list(cfg: RunConfig, out=sys.stdout) -> int:
    entries = [e.describe() for e in zoo.ZOO.values()]
    if cfg.json_path is not None:
        _emit_json(entries, cfg.json_path, out)
        if cfg.json_path == "-":
            return EXIT_OK
    for e in entries:
        params = ", ".join(f"{k}:{v['type']}={v['default']}" for k, v in e["params"].items()) or "-"
        out.write(f"{e['id']:<22} params [{params}]  expected: {e['expected_verdict']}\n")
    return EXIT_OK


def _human(cfg: RunConfig, out) -> bool:
    return cfg.json_path != "-"


def cmd_verify(cfg: RunConfig, out=sys.stdout) -> int:
    chart = cfg.build_chart()
    vtol = cfg.tols.get("structure", 1e-10)
    report = validate_structure(chart, cfg.nsamples, cfg.seed, vtol)
    table = None
    if report.passed:
        id_tols = {k: v for k, v in cfg.tols.items() if k != "structure"}
        table = diagnostics.identity_suite(chart, cfg.nsamples, cfg.seed, cfg.order, tols=id_tols)
    ok = report.passed and table is not None and table.passed
    if _human(cfg, out):
        out.write(f"chart {chart.label}  samples {cfg.nsamples}  seed {cfg.seed}\n")
        out.write("structure validation\n")
        for k, v in report.residuals.items():
            out.write(f"  {k:<24} {fmt(v):>20}\n")
        out.write(f"  {'min |det kappa|':<24} {fmt(report.min_abs_det_kappa):>20}\n")
        out.write(f"  {'min eigenvalue g':<24} {fmt(report.min_eigenvalue_g):>20}\n")
        for f in report.failures:
            out.write(f"  FAIL {f}\n")
        if table is not None:
            out.write("identity suite\n")
            for row in table.rows:
                flag = "pass" if row.passed else "FAIL"
                out.write(f"  {row.name:<24} {fmt(row.residual):>20}  {flag}\n")
            out.write(f"wR1 index variant: {table.wr1_variant.get('verdict')}\n")
        out.write("OK\n" if ok else "FAILED\n")
    payload = {
        "schema": diagnostics.SCHEMA,
        "command": "verify",
        "chart": chart.label,
        "seed": cfg.seed,
        "nsamples": cfg.nsamples,
        "validation": report.to_dict(),
        "identities": [r.to_dict() for r in table.rows] if table else [],
        "wr1_variant": table.wr1_variant if table else {},
        "passed": ok,
    }
    _emit_json(payload, cfg.json_path, out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_diagnose(cfg: RunConfig, out=sys.stdout) -> int:
    chart = cfg.build_chart()
    id_tols = {k: v for k, v in cfg.tols.items() if k != "structure"}
    report = diagnostics.integrability_defects(chart, cfg.nsamples, cfg.seed, cfg.order, tols=id_tols)
    if _human(cfg, out):
        out.write(f"chart {chart.label}  samples {cfg.nsamples}  seed {cfg.seed}\n")
        for name in diagnostics.DEFECTS:
            where = report.argmax[name]
            pt = ", ".join(fmt(x) for x in where["point"])
            out.write(f"  {name:<20} {fmt(report.defects[name]):>20}  at ({pt}) {where['where']}\n")
        out.write(f"verdict: {report.verdict}\n")
        out.write(f"wR1 index variant: {report.wr1_variant.get('verdict')}\n")
    payload = dict(report.to_dict(), command="diagnose")
    _emit_json(payload, cfg.json_path, out)
    return EXIT_OK


def cmd_frame(cfg: RunConfig, out=sys.stdout) -> int:
    chart = cfg.build_chart()
    point = chart.center if cfg.point is None else np.asarray(cfg.point, dtype=float)
    if len(point) != chart.dim:
        raise InputError(f"--point needs {chart.dim} coordinates, got {len(point)}")
    chart.check_point(point)
    frame = construct_gnh_frame(chart, point, cfg.order)
    if _human(cfg, out):
        out.write(f"chart {chart.label}  point ({', '.join(fmt(x) for x in point)})\n")
        for k, v in frame.residuals.items():
            out.write(f"  {k:<20} {fmt(v):>20}\n")
        for i, z in enumerate(frame.z0):
            out.write(f"  Z{i + 1}(o) = [{', '.join(fmt(complex(c)) for c in z)}]\n")
    payload = {
        "schema": diagnostics.SCHEMA,
        "command": "frame",
        "chart": chart.label,
        "point": [diagnostics._sig(x) for x in point],
        "residuals": {k: diagnostics._sig(v) for k, v in frame.residuals.items()},
        "z0_real": [[diagnostics._sig(c) for c in z.real] for z in frame.z0],
        "z0_imag": [[diagnostics._sig(c) for c in z.imag] for z in frame.z0],
    }
    _emit_json(payload, cfg.json_path, out)
    return EXIT_OK


COMMANDS = {"list": cmd_list, "verify": cmd_verify, "diagnose": cmd_diagnose, "frame": cmd_frame}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="akahler", description="Integrability diagnostics for almost-Kähler charts."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="list built-in charts")
    p_list.add_argument("--json", nargs="?", const="-", metavar="PATH", help="write JSON (stdout if no path)")

    def common(p, samples=True):
        p.add_argument("--chart", required=True, help="zoo id or path to a .json chart")
        p.add_argument("--param", action="append", metavar="K=V", help="zoo constructor parameter (repeatable)")
        if samples:
            p.add_argument("--samples", type=int, help="number of sample points (default 100)")
        p.add_argument("--seed", type=int, help=f"sampling seed (default ${SEED_ENV} or 42)")
        p.add_argument("--order", type=int, help="jet order (default 3)")
        p.add_argument("--json", nargs="?", const="-", metavar="PATH", help="write JSON (stdout if no path)")
        p.add_argument("--tol", action="append", metavar="NAME=VALUE", help="tolerance override (repeatable)")

    common(sub.add_parser("verify", help="validate the structure and run the identity suite"))
    common(sub.add_parser("diagnose", help="integrability defects and verdict"))
    p_frame = sub.add_parser("frame", help="construct a normal holomorphic frame")
    common(p_frame, samples=False)
    p_frame.add_argument("--point", help="comma-separated base point (default: domain center)")
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg, out)
    except (InputError, DomainError, JetOrderError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FrameConstructionError as exc:
        print(f"construction failure ({exc.condition}): {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION
    except StructureError as exc:
        print(f"structure error: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION


if __name__ == "__main__":
    sys.exit(main())
