"""Command-line front end.

    mtsurf check   --config run.json [--out DIR]
    mtsurf compare --config run.json
    mtsurf mesh    --config run.json
    mtsurf scan    --config run.json [--param NAME --values JSON]
    mtsurf families

Exit status: 0 when every requested verdict holds, 2 when one fails, 1 on
any error (bad config, unreadable file, ...).
"""
import argparse
import json
import math
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import curvature as C
from . import surfaces as S
from .expr import ExprSyntaxError

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
COMPARE_TOL = 1e-7
DEFAULT_EXPECT = {"lagrangian": True, "marginally_trapped": True}


class ConfigError(ValueError):
    def __init__(self, msg, path="/"):
        super().__init__(msg)
        self.path = path


def load_schema(name):
    return json.loads(resources.files("mtsurf").joinpath("schemas", name).read_text())


def shipped_config(name):
    """Path of a config shipped with the package (e.g. ``torus.json``)."""
    return resources.files("mtsurf").joinpath("configs", name)


def _pointer(parts):
    return "/" + "/".join(str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def load_config(path):
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    validator = jsonschema.Draft202012Validator(load_schema("config.schema.json"))
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(err.message, _pointer(err.absolute_path))
    for name, ax in data["grid"].items():
        if not ax["min"] < ax["max"]:
            raise ConfigError("min must be smaller than max", _pointer(["grid", name]))
    return data


def build_family(cfg):
    try:
        imm = S.FamilySpec.from_dict(cfg["family"]).build()
    except (S.FamilySpecError, ExprSyntaxError) as exc:
        raise ConfigError(str(exc), "/family") from exc
    names = list(cfg["grid"])
    if tuple(names) != tuple(imm.param_names):
        raise ConfigError(
            f"grid variables {names} do not match the family parameters {list(imm.param_names)}", "/grid"
        )
    return imm


def grid_axes(cfg):
    axes = []
    for ax in cfg["grid"].values():
        axes.append(np.linspace(ax["min"], ax["max"], ax["count"], endpoint=ax.get("endpoint", True)))
    return axes


def _tolerances(cfg, args):
    tol = dict(cfg.get("tolerances", {}))
    if getattr(args, "tol_mt", None) is not None:
        tol["mt"] = args.tol_mt
    return tol


def _clean(x):
    """JSON-safe copy with plain floats."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_report(path, report):
    """Validate a check/compare report against the shipped schema, then write it."""
    report = _clean(report)
    jsonschema.validate(report, load_schema("report.schema.json"))
    write_json(path, report)


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def _out_path(args, cfg, kind, default):
    for o in cfg.get("outputs", []):
        if o["kind"] == kind:
            return Path(args.out) / o["path"]
    return Path(args.out) / default


def run_check(cfg, args):
    imm = build_family(cfg)
    us, vs = grid_axes(cfg)
    order = args.order or cfg.get("order", 4)
    rep = C.classify(imm, us, vs, _tolerances(cfg, args), threads=args.threads, with_curvature=order >= 3)
    expect = cfg.get("expect", DEFAULT_EXPECT)
    passed = all(rep.verdicts.get(k) == v for k, v in expect.items())
    out = rep.to_dict()
    out.update(command="check", spec=cfg["family"], expect=expect, passed=passed)
    return out, passed


def cmd_check(args):
    cfg = load_config(args.config)
    report, passed = run_check(cfg, args)
    write_report(_out_path(args, cfg, "report", "report.json"), report)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_compare(args):
    cfg = load_config(args.config)
    imm = build_family(cfg)
    us, vs = grid_axes(cfg)
    worst, exceptions = {}, []
    for p in C.grid_points(us, vs):
        try:
            d = C.compare_point(imm, p)
        except (ValueError, ArithmeticError) as exc:
            exceptions.append({"point": list(p), "error": type(exc).__name__, "message": str(exc)})
            continue
        for k, v in d.items():
            worst[k] = max(worst.get(k, 0.0), float(v))
    passed = all(v <= COMPARE_TOL for v in worst.values())
    report = {
        "command": "compare",
        "family": imm.kind,
        "space": imm.space.value,
        "param_names": list(imm.param_names),
        "grid": cfg["grid"],
        "stats": {},
        "verdicts": {},
        "discrepancies": worst,
        "passed": passed,
        "exceptions": exceptions,
    }
    write_report(_out_path(args, cfg, "report", "compare.json"), report)
    return EXIT_OK if passed else EXIT_FAIL


def _fmt(x):
    return "%.17g" % x


def cmd_mesh(args):
    cfg = load_config(args.config)
    imm = build_family(cfg)
    us, vs = grid_axes(cfg)
    names = imm.param_names
    rows, verts = [], []
    for p in C.grid_points(us, vs):
        try:
            z1, z2 = imm.point(p)
        except (ValueError, ArithmeticError):
            z1 = z2 = complex(math.nan, math.nan)
        try:
            fd = C.fundamental_data(imm, p)
            mt = fd.mt_defect
            K = C.gauss_curvature(imm, p) if (args.order or 4) >= 3 else math.nan
        except (ValueError, ArithmeticError):
            mt = K = math.nan
        rows.append((p[0], p[1], z1.real, z1.imag, z2.real, z2.imag, mt, K))
        verts.append((z2.real, z2.imag, p[1]))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = _out_path(args, cfg, "csv", "mesh.csv")
    header = f"{names[0]},{names[1]},re_z1,im_z1,re_z2,im_z2,mt_defect,K"
    csv_path.write_text(header + "\n" + "".join(",".join(_fmt(x) for x in r) + "\n" for r in rows))
    obj_path = _out_path(args, cfg, "mesh", "mesh.obj")
    nu, nv = len(us), len(vs)
    lines = [
        f"# mtsurf mesh of {imm.kind}",
        f"# vertex = (Re z2, Im z2, {names[1]}); for tori (Re eta, Im eta, theta), the cylinder unrolling",
        f"# grid {nu} x {nv}, row-major in ({names[0]}, {names[1]})",
    ]
    lines += ["v " + " ".join(_fmt(c) for c in v) for v in verts]
    for i in range(nu - 1):
        for j in range(nv - 1):
            idx = [i * nv + j, (i + 1) * nv + j, (i + 1) * nv + j + 1, i * nv + j + 1]
            if all(all(math.isfinite(c) for c in verts[k]) for k in idx):
                lines.append("f " + " ".join(str(k + 1) for k in idx))
    obj_path.write_text("\n".join(lines) + "\n")
    return EXIT_OK


def _scan_value(param, value):
    if param == "tau":
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return [float(value[0]), float(value[1])]
        return [float(value), 0.0]
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"scan value {value!r} is not a real number", "/scan/values")
    return value


def cmd_scan(args):
    cfg = load_config(args.config)
    scan = dict(cfg.get("scan", {}))
    if args.param is not None:
        scan["param"] = args.param
    if args.values is not None:
        try:
            scan["values"] = json.loads(args.values)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--values is not JSON: {exc}", "/scan/values") from exc
    if not scan.get("param"):
        raise ConfigError("no scan parameter given", "/scan/param")
    values = scan.get("values") or []
    if not isinstance(values, list) or not values:
        raise ConfigError("scan needs a non-empty list of values", "/scan/values")
    rows, any_fail = [], False
    for value in values:
        run = json.loads(json.dumps(cfg))
        run.pop("scan", None)
        try:
            v = _scan_value(scan["param"], value)
            if scan["param"] == "tau":
                run["family"]["tau"] = v
            else:
                run["family"].setdefault("params", {})[scan["param"]] = v
            report, passed = run_check(run, args)
            rows.append({"value": value, "verdicts": report["verdicts"], "passed": passed,
                         "exceptions": len(report["exceptions"])})
            any_fail |= not passed
        except (ConfigError, ValueError, ArithmeticError) as exc:
            rows.append({"value": value, "error": f"{type(exc).__name__}: {exc}", "passed": False})
            any_fail = True
    write_json(_out_path(args, cfg, "report", "scan.json"), {"command": "scan", "param": scan["param"], "rows": rows})
    return EXIT_FAIL if any_fail else EXIT_OK


def cmd_families(args):
    for kind, slots in S.KINDS.items():
        exprs = ", ".join(slots["exprs"]) or "-"
        params = ", ".join(slots["params"]) or "-"
        print(f"{kind:22s} exprs: {exprs:36s} params: {params}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors share exit status 1 with config errors; 2 means a verdict failed
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def make_parser():
    ap = _Parser(prog="mtsurf", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, fn in (("check", cmd_check), ("compare", cmd_compare), ("mesh", cmd_mesh), ("scan", cmd_scan)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=".")
        p.add_argument("--order", type=int, choices=range(2, 7), default=None)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--tol-mt", type=float, default=None)
        if name == "scan":
            p.add_argument("--param")
            p.add_argument("--values", help="JSON list of values")
        p.set_defaults(func=fn)
    p = sub.add_parser("families")
    p.set_defaults(func=cmd_families)
    return ap


def main(argv=None):
    args = make_parser().parse_args(argv)
    try:
        if getattr(args, "threads", 1) < 1:
            raise ConfigError("--threads must be positive", "/threads")
        if getattr(args, "tol_mt", None) is not None and args.tol_mt <= 0:
            raise ConfigError("--tol-mt must be positive", "/tolerances/mt")
        return args.func(args)
    except ConfigError as exc:
        print(json.dumps({"error": str(exc), "path": exc.path}), file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError, ArithmeticError) as exc:
        print(json.dumps({"error": f"{type(exc).__name__}: {exc}", "path": "/"}), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
