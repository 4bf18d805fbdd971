"""Command line interface: classify, oracle-check, render, enumerate.

Exit status: 0 first kind, 1 not first kind, 2 undetermined (classify) or a
residual above tolerance (oracle-check), 3 invalid configuration, 4 resource
cap exceeded, 5 precision exhausted, 6 I/O error.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import mpmath
import tomli

from . import cover_oracle as co
from .criterion import (
    FIRST_KIND,
    NOT_FIRST_KIND,
    ClassifyOptions,
    CriterionError,
    Thresholds,
    classify,
    classify_patchwork,
    shear_sequence,
)
from .flute_model import FluteSurface, SurfaceValidationError, eta_length
from .patchwork import (
    Patchwork,
    PatchworkError,
    ResourceLimitError,
    RestrictedPatchwork,
    enumerate_patchworks,
    u_prime_sequence,
    u_sequence,
    validate_restricted,
)
from .validation import ConfigError, check_depth, check_int, check_positive, check_precision, check_surface

SCHEMA_VERSION = 1
EXIT_FIRST_KIND, EXIT_NOT_FIRST_KIND, EXIT_UNDETERMINED = 0, 1, 2
EXIT_CONFIG, EXIT_RESOURCE, EXIT_PRECISION, EXIT_IO = 3, 4, 5, 6
ORACLE_TOLERANCE = 1e-8

_SCHEMA: Dict[str, Any] = {
    "depth": None,
    "precision": None,
    "surface": {"lengths": None, "twists": None},
    "patchwork": {"mode": None, "v": None, "v_prime": None, "w": None},
    "thresholds": {"divergent_slope": None, "convergent_term_slope": None,
                   "registry_delta": None, "registry_far": None},
    "search": {"strategy": None, "beam_width": None, "depth": None, "max_candidate_period": None},
    "oracle": {"depth": None, "method": None, "sweep": None},
    "render": {"depth": None, "fan": None, "overlay": None, "size": None},
    "enumerate": {"depth": None, "kind": None, "limit": None},
    "output": {"report": None, "svg": None},
}


@dataclass
class RunConfig:
    surface: Optional[FluteSurface]
    depth: int = 200
    precision: Union[int, str] = 53
    precision_given: bool = False
    patchwork_mode: str = "auto"
    patchwork: Optional[Union[RestrictedPatchwork, Patchwork]] = None
    options: ClassifyOptions = field(default_factory=ClassifyOptions)
    oracle_depth: int = 50
    oracle_method: str = "pentagons"
    oracle_sweep: bool = False
    render_depth: int = 10
    render_fan: bool = False
    render_style: Dict[str, Any] = field(default_factory=dict)
    enumerate_depth: int = 4
    enumerate_kind: str = "restricted"
    enumerate_limit: Optional[int] = None
    report_path: Optional[str] = None
    svg_path: Optional[str] = None
    warnings: List[str] = field(default_factory=list)
    raw: Dict[str, Any] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _load(path: Path) -> dict:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror or exc}") from exc
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: parse error: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}:1:1: parse error: top level must be an object")
        return data
    try:
        return tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        line, col = getattr(exc, "lineno", "?"), getattr(exc, "colno", "?")
        msg = getattr(exc, "msg", str(exc))
        raise ConfigError(f"{path}:{line}:{col}: parse error: {msg}") from exc


def _unknown_keys(data: dict, schema: dict, prefix: str = "") -> List[str]:
    out = []
    for key, value in data.items():
        name = f"{prefix}{key}"
        if key not in schema:
            out.append(name)
        elif isinstance(schema[key], dict):
            if not isinstance(value, dict):
                raise ConfigError("expected a table", name)
            out.extend(_unknown_keys(value, schema[key], name + "."))
    return out


def _signs(value, name) -> tuple:
    if not isinstance(value, list) or not value:
        raise ConfigError("expected a non-empty list of +1/-1", name)
    for i, x in enumerate(value, 1):
        if isinstance(x, bool) or x not in (1, -1):
            raise ConfigError(f"entry {i} is {x!r}, expected +1 or -1", name)
    return tuple(int(x) for x in value)


def _bits(value, name) -> tuple:
    if not isinstance(value, list):
        raise ConfigError("expected a list of 0/1", name)
    for i, x in enumerate(value, 1):
        if isinstance(x, bool) or x not in (0, 1):
            raise ConfigError(f"entry {i} is {x!r}, expected 0 or 1", name)
    return tuple(int(x) for x in value)


def _bool(value, name) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"expected true or false, got {value!r}", name)
    return value


def build_config(data: dict, strict: bool = False) -> RunConfig:
    unknown = _unknown_keys(data, _SCHEMA)
    if unknown and strict:
        raise ConfigError(f"unknown keys {unknown}", unknown[0])
    warnings = [f"ignoring unknown key {k!r}" for k in unknown]

    surface = None
    if "surface" in data:
        try:
            surface = check_surface({k: v for k, v in data["surface"].items() if k in ("lengths", "twists")})
        except SurfaceValidationError as exc:
            raise ConfigError(str(exc), "surface") from exc

    cfg = RunConfig(surface=surface, warnings=warnings, raw=data)
    if "depth" in data:
        cfg.depth = check_depth(data["depth"])
    if "precision" in data:
        cfg.precision = check_precision(data["precision"])
        cfg.precision_given = True

    th = data.get("thresholds", {})
    try:
        thresholds = Thresholds(
            divergent_slope=check_positive(th.get("divergent_slope", 0.1), "thresholds.divergent_slope"),
            convergent_term_slope=float(th.get("convergent_term_slope", -1.1)),
            registry_delta=check_positive(th.get("registry_delta", 1e-3), "thresholds.registry_delta"),
            registry_far=check_int(th.get("registry_far", 1 << 16), "thresholds.registry_far", 64),
        )
    except CriterionError as exc:
        raise ConfigError(str(exc), "thresholds") from exc
    se = data.get("search", {})
    strategy = se.get("strategy", "beam")
    if strategy not in ("beam", "exhaustive"):
        raise ConfigError(f"unknown strategy {strategy!r}", "search.strategy")
    cfg.options = ClassifyOptions(
        thresholds=thresholds,
        search_strategy=strategy,
        beam_width=check_int(se.get("beam_width", 64), "search.beam_width", 1),
        search_depth=check_int(se["depth"], "search.depth", 1) if "depth" in se else None,
        max_candidate_period=check_int(se.get("max_candidate_period", 8), "search.max_candidate_period", 1),
    )

    pw = data.get("patchwork", {})
    mode = pw.get("mode", "explicit" if ("v" in pw or "v_prime" in pw) else "auto")
    if mode not in ("auto", "restricted", "explicit"):
        raise ConfigError(f"unknown mode {mode!r}", "patchwork.mode")
    cfg.patchwork_mode = mode
    if mode == "explicit":
        if "v" in pw and "v_prime" in pw:
            raise ConfigError("give either v or v_prime/w, not both", "patchwork")
        if "v" in pw:
            cfg.patchwork = RestrictedPatchwork(_signs(pw["v"], "patchwork.v"))
        elif "v_prime" in pw:
            vp = _signs(pw["v_prime"], "patchwork.v_prime")
            w = _bits(pw.get("w", [0] * len(vp)), "patchwork.w")
            try:
                cfg.patchwork = Patchwork(vp, w)
            except PatchworkError as exc:
                raise ConfigError(str(exc), "patchwork.w") from exc
        else:
            raise ConfigError("explicit mode needs v or v_prime", "patchwork")

    orc = data.get("oracle", {})
    cfg.oracle_depth = check_int(orc.get("depth", 50), "oracle.depth", 1)
    cfg.oracle_method = orc.get("method", "pentagons")
    if cfg.oracle_method not in ("pentagons", "shears"):
        raise ConfigError(f"unknown method {cfg.oracle_method!r}", "oracle.method")
    cfg.oracle_sweep = _bool(orc.get("sweep", False), "oracle.sweep")

    ren = data.get("render", {})
    cfg.render_depth = check_int(ren.get("depth", 10), "render.depth", 1)
    cfg.render_fan = _bool(ren.get("fan", False), "render.fan")
    cfg.render_style = {"overlay": _bool(ren.get("overlay", False), "render.overlay")}
    if "size" in ren:
        cfg.render_style["size"] = check_int(ren["size"], "render.size", 16)

    en = data.get("enumerate", {})
    cfg.enumerate_depth = check_int(en.get("depth", 4), "enumerate.depth", 1)
    cfg.enumerate_kind = en.get("kind", "restricted")
    if cfg.enumerate_kind not in ("restricted", "generalized"):
        raise ConfigError(f"unknown kind {cfg.enumerate_kind!r}", "enumerate.kind")
    if "limit" in en:
        cfg.enumerate_limit = check_int(en["limit"], "enumerate.limit", 1)

    out = data.get("output", {})
    cfg.report_path = out.get("report")
    cfg.svg_path = out.get("svg")
    return cfg


def parse_config(path, strict: bool = False) -> RunConfig:
    return build_config(_load(Path(path)), strict)


def _check_patchwork(cfg: RunConfig, depth: int) -> None:
    p = cfg.patchwork
    if isinstance(p, RestrictedPatchwork) and len(p) >= 3:
        rep = validate_restricted(p, cfg.surface, min(depth, len(p) - 1))
        if not rep.ok:
            raise ConfigError(f"{rep.message} (rule: {rep.rule})", "patchwork.v")


def _pad_restricted(p: RestrictedPatchwork, surface: FluteSurface, length: int) -> RestrictedPatchwork:
    # continue a short explicit prefix by the twist rule, keeping the last sign otherwise
    if len(p) >= length:
        return p
    _, t = surface.arrays(length)
    v = list(p.v)
    while len(v) < length:
        tn = t[len(v) - 1]
        v.append(-v[-1] if tn == 0.5 else v[-1])
    return RestrictedPatchwork(tuple(v))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _header(command: str, cfg: RunConfig, timestamp: bool) -> dict:
    head = {"schema_version": SCHEMA_VERSION, "command": command}
    if cfg.surface is not None:
        head["surface"] = cfg.surface.to_dict()
    if timestamp:
        head["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return head


def _need_surface(cfg: RunConfig) -> FluteSurface:
    if cfg.surface is None:
        raise ConfigError("missing [surface] table", "surface")
    return cfg.surface


def cmd_classify(cfg: RunConfig, timestamp: bool = True):
    surface = _need_surface(cfg)
    depth = cfg.depth
    if cfg.patchwork_mode == "explicit":
        _check_patchwork(cfg, depth)
        p = cfg.patchwork
        if isinstance(p, RestrictedPatchwork):
            p = _pad_restricted(p, surface, depth + 1)
        elif len(p) < 2 * depth + 1:
            raise ConfigError(f"v_prime has {len(p)} entries, need {2 * depth + 1}", "patchwork.v_prime")
        rep = classify_patchwork(surface, p, depth, cfg.options)
    elif cfg.patchwork_mode == "restricted":
        rep = classify_patchwork(surface, RestrictedPatchwork.default(surface, depth + 1), depth, cfg.options)
    else:
        rep = classify(surface, depth, cfg.options)
    status = {FIRST_KIND: EXIT_FIRST_KIND, NOT_FIRST_KIND: EXIT_NOT_FIRST_KIND}.get(rep.first_kind, EXIT_UNDETERMINED)
    body = _header("classify", cfg, timestamp)
    body.update({"depth": depth, "patchwork_mode": cfg.patchwork_mode, "exit_status": status, "report": rep.to_dict()})
    return body, status


def _oracle_patchwork(cfg: RunConfig, surface: FluteSurface, n: int):
    if cfg.oracle_sweep:
        return co.configuration_walk(co.admissible_configurations(), max(n + 1, 40))
    if cfg.patchwork_mode == "explicit":
        _check_patchwork(cfg, n + 1)
        p = cfg.patchwork
        if isinstance(p, RestrictedPatchwork):
            return _pad_restricted(p, surface, n + 2)
        if len(p) < 2 * n + 3:
            raise ConfigError(f"v_prime has {len(p)} entries, need {2 * n + 3}", "patchwork.v_prime")
        return p
    return RestrictedPatchwork.default(surface, n + 2)


def cmd_oracle_check(cfg: RunConfig, timestamp: bool = True):
    surface = _need_surface(cfg)
    n = cfg.oracle_depth
    if cfg.oracle_sweep:
        n = max(n, 39)
    p = _oracle_patchwork(cfg, surface, n)
    precision = cfg.precision if cfg.precision_given else "auto"
    body = _header("oracle-check", cfg, timestamp)
    body.update({"depth": n, "method": cfg.oracle_method, "requested_precision": precision})
    try:
        chain = co.develop_lift(surface, p, n, precision, cfg.oracle_method)
    except co.PrecisionExhausted as exc:
        body.update({"exit_status": EXIT_PRECISION,
                     "precision_exhausted": {"index": exc.index, "precision": exc.precision, "message": str(exc)}})
        return body, EXIT_PRECISION
    if isinstance(p, RestrictedPatchwork):
        u = u_sequence(p, surface, n + 1)
        pp = co.reduce_to_patchwork(p)
    else:
        u = u_prime_sequence(p, surface, n + 1)
        pp = p
    closed = shear_sequence(surface, u, n)
    shear_res = max(abs(float(co.measure_shear(chain, k)) - float(closed[k])) for k in range(2, 2 * n + 1))
    ell, _ = surface.arrays(n + 1)
    with mpmath.workprec(chain.precision + 20):
        eta_res = max(abs(float(co.measure_eta(chain, m) - eta_length(mpmath.mpf(float(ell[m - 1])),
                                                                      mpmath.mpf(float(ell[m])))))
                      for m in range(1, n + 1))
    u_res = max(abs(a - b) for a, b in zip(co.geometric_u(pp, surface, n), u.u))
    residuals = {"shear": shear_res, "eta": eta_res, "u": u_res}
    ok = all(r < ORACLE_TOLERANCE for r in residuals.values())
    status = 0 if ok else EXIT_UNDETERMINED
    body.update({"precision": chain.precision, "tolerance": ORACLE_TOLERANCE, "residuals": residuals,
                 "exit_status": status})
    if cfg.oracle_sweep:
        seen = sorted({c.label() for _, c in co.configurations_of(pp, n)})
        body["configurations_covered"] = {"count": len(seen), "of": len(co.admissible_configurations()),
                                          "labels": seen}
    return body, status


def cmd_render(cfg: RunConfig, svg_path: Optional[str], timestamp: bool = True):
    n = cfg.render_depth
    precision = cfg.precision if cfg.precision_given else "auto"
    if cfg.render_fan:
        chain = co.develop_from_shears([0] * (2 * n), 53 if precision == "auto" else precision)
    else:
        surface = _need_surface(cfg)
        p = _oracle_patchwork(cfg, surface, n)
        chain = co.develop_lift(surface, p, n, precision, cfg.oracle_method, on_exhaustion="truncate")
    path = svg_path or cfg.svg_path or "lift.svg"
    co.render_disk_svg(chain, path, cfg.render_style)
    body = _header("render", cfg, timestamp)
    body.update({"depth": n, "svg": str(path), "geodesics": len(chain.geodesics),
                 "exhausted_at": chain.exhausted_at, "exit_status": 0})
    return body, 0


def cmd_enumerate(cfg: RunConfig, timestamp: bool = True):
    depth = cfg.enumerate_depth
    kind = cfg.enumerate_kind
    surface = cfg.surface if kind == "restricted" else (cfg.surface or FluteSurface.from_dict({"lengths": 1.0}))
    if surface is None:
        raise ConfigError("restricted enumeration needs a [surface] table", "surface")
    items = []
    for i, p in enumerate(enumerate_patchworks(surface, depth, kind)):
        if cfg.enumerate_limit is not None and i >= cfg.enumerate_limit:
            break
        items.append({"v": list(p.v)} if kind == "restricted" else {"v_prime": list(p.v_prime), "w": list(p.w)})
    body = _header("enumerate", cfg, timestamp)
    body.update({"kind": kind, "depth": depth, "count": len(items), "patchworks": items, "exit_status": 0})
    return body, 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flutekind", description="Classify flute surfaces from Fenchel-Nielsen data.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("classify", "oracle-check", "render", "enumerate"):
        sp = sub.add_parser(name)
        sp.add_argument("config", help="TOML or JSON configuration file")
        sp.add_argument("--depth", type=int, help="series depth / chain length / enumeration depth")
        sp.add_argument("--precision", help="working precision in bits, or 'auto'")
        sp.add_argument("--patchwork", help="'auto', 'restricted' or a comma separated sign list")
        sp.add_argument("--output", help="report path (stdout when omitted); SVG path for render")
        sp.add_argument("--strict", action="store_true", help="reject unknown configuration keys")
        sp.add_argument("--no-timestamp", action="store_true", help="omit generated_at for reproducible reports")
        if name == "oracle-check":
            sp.add_argument("--sweep", action="store_true", help="walk through all admissible configurations")
        if name == "render":
            sp.add_argument("--overlay", action="store_true", help="draw the horocyclic path")
    return ap


def _apply_flags(cfg: RunConfig, args) -> None:
    if args.depth is not None:
        if args.command == "classify":
            cfg.depth = check_depth(args.depth, "--depth")
        elif args.command == "oracle-check":
            cfg.oracle_depth = check_int(args.depth, "--depth", 1)
        elif args.command == "render":
            cfg.render_depth = check_int(args.depth, "--depth", 1)
        else:
            cfg.enumerate_depth = check_int(args.depth, "--depth", 1)
    if args.precision is not None:
        value: Union[int, str] = args.precision
        if value != "auto":
            try:
                value = int(value)
            except ValueError:
                raise ConfigError(f"expected bits or 'auto', got {args.precision!r}", "--precision") from None
        cfg.precision = check_precision(value, "--precision")
        cfg.precision_given = True
    if args.patchwork is not None:
        if args.patchwork in ("auto", "restricted"):
            cfg.patchwork_mode, cfg.patchwork = args.patchwork, None
        else:
            try:
                signs = [int(x) for x in args.patchwork.split(",")]
            except ValueError:
                raise ConfigError("expected auto, restricted or a list like 1,-1,1", "--patchwork") from None
            cfg.patchwork_mode = "explicit"
            cfg.patchwork = RestrictedPatchwork(_signs(signs, "--patchwork"))
    if getattr(args, "sweep", False):
        cfg.oracle_sweep = True
    if getattr(args, "overlay", False):
        cfg.render_style["overlay"] = True


def _emit(body: dict, path: Optional[str]) -> None:
    text = json.dumps(body, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    stamp = not args.no_timestamp
    try:
        cfg = parse_config(args.config, args.strict)
        for w in cfg.warnings:
            print(f"warning: {w}", file=sys.stderr)
        _apply_flags(cfg, args)
        if args.command == "classify":
            body, status = cmd_classify(cfg, stamp)
        elif args.command == "oracle-check":
            body, status = cmd_oracle_check(cfg, stamp)
            if status == EXIT_PRECISION:
                print(f"error: {body['precision_exhausted']['message']}", file=sys.stderr)
        elif args.command == "render":
            body, status = cmd_render(cfg, args.output, stamp)
            _emit(body, cfg.report_path)
            return status
        else:
            body, status = cmd_enumerate(cfg, stamp)
        _emit(body, args.output or cfg.report_path)
        return status
    except (ConfigError, SurfaceValidationError, PatchworkError, CriterionError, co.OracleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimitError as exc:
        print(f"error: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except co.PrecisionExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
