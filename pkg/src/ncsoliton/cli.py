"""Command line driver: ``ncsoliton {frame,soliton,gauge,report-all}``.

Exit codes: 0 for success with a positive verdict, 2 for a negative verdict
(not a frame, not self-dual, not gaugeable), 1 for errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import __version__
from .algebra import AlgebraElement, LatticeSpec, Side, trace
from .module import QuadratureSpec
from .reporting import SCHEMA_VERSION, write_heatmap, write_json
from .solitons import (
    B_RESIDUAL_TOL,
    GAUGE_TOL,
    RADIUS_B,
    classify_gauge_to_gaussian,
    compute_b,
    frame_bounds,
    gauge_transform,
    projection_residuals,
    rieffel_projection,
    soliton_report,
    tau,
)
from .windows import Window, gaussian, hyperbolic_secant, totally_positive

OUTPUT_ENV = "NCSOLITON_OUTPUT_DIR"
DEFAULT_THETA = math.sqrt(2) - 1
SELF_DUAL_TOL = 1e-5


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    theta: float = DEFAULT_THETA
    window: str = "gaussian"
    radius: int = RADIUS_B
    radius_a: int | str = "auto"
    nodes: int = 8192
    half_width: float | None = None
    lam: complex | None = None
    monomial: tuple[int, int] | None = None
    output_dir: str = "ncsoliton-out"
    tolerances: dict = field(default_factory=lambda: {
        "gauge": GAUGE_TOL, "b_residual": B_RESIDUAL_TOL, "self_dual": SELF_DUAL_TOL})

    def validate(self) -> "RunConfig":
        if not 0.0 < self.theta < 1.0:
            raise ConfigError(f"theta must lie in (0, 1), got {self.theta}")
        if self.radius < 2:
            raise ConfigError("radius must be at least 2")
        if self.radius_a != "auto" and int(self.radius_a) < 1:
            raise ConfigError("radius-a must be 'auto' or a positive integer")
        parse_window(self.window, self.theta)
        return self

    @property
    def quad(self) -> QuadratureSpec:
        return QuadratureSpec(self.half_width, self.nodes)

    def provenance(self, window: Window) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "version": __version__,
            "theta": self.theta,
            "window": self.window,
            "window_description": window.describe(),
            "radius_b": self.radius,
            "radius_a": self.radius_a,
            "quadrature": self.quad.resolve(window).as_dict(),
            "tolerances": dict(self.tolerances),
        }


_WINDOW_RE = re.compile(r"^(?P<family>[a-z]+)(?::(?P<args>.*))?$")


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"cannot read {text!r} as a complex number") from exc


def parse_window(spec: str, theta: float) -> Window:
    """``gaussian[:lambda]``, ``sech`` or ``tp:d1,d2,...[:gauss]``."""
    m = _WINDOW_RE.match(spec.strip())
    if not m:
        raise ConfigError(f"malformed window {spec!r}")
    family, args = m["family"], m["args"]
    if family == "gaussian":
        return gaussian(_complex(args) if args else 0.0, theta)
    if family == "sech":
        if args:
            raise ConfigError("sech takes no parameters")
        return hyperbolic_secant()
    if family == "tp":
        if not args:
            raise ConfigError("tp needs rational factor parameters, e.g. tp:0.5,-0.25:0.1")
        parts = args.split(":")
        try:
            deltas = [float(x) for x in parts[0].split(",")]
            gauss = float(parts[1]) if len(parts) > 1 else 0.0
        except ValueError as exc:
            raise ConfigError(f"malformed tp parameters {args!r}") from exc
        return totally_positive(deltas, gauss)
    raise ConfigError(f"unknown window family {family!r}")


def _window_lambda(spec: str) -> complex:
    m = _WINDOW_RE.match(spec.strip())
    if m and m["family"] == "gaussian" and m["args"]:
        return _complex(m["args"])
    return 0.0


def _slug(spec: str) -> str:
    return re.sub(r"[^A-Za-z0-9.+-]+", "_", spec).strip("_")


# -- commands ----------------------------------------------------------

def cmd_frame(cfg: RunConfig):
    w = parse_window(cfg.window, cfg.theta)
    report = frame_bounds(w, cfg.theta, cfg.radius, quad=cfg.quad)
    doc = {"command": "frame", "config": cfg.provenance(w), "report": report.to_dict()}
    path = write_json(doc, Path(cfg.output_dir) / f"frame-{_slug(cfg.window)}.json")
    return (0 if report.is_frame else 2), doc, path


def cmd_soliton(cfg: RunConfig):
    w = parse_window(cfg.window, cfg.theta)
    p = rieffel_projection(w, cfg.theta, cfg.radius_a, cfg.radius, cfg.quad)
    report = soliton_report(p)
    doc = {
        "command": "soliton",
        "config": cfg.provenance(w),
        "resolved_radius_a": p.radius,
        "tail_norm": p.tail_norm,
        "report": report.to_dict(),
        "projection": projection_residuals(p, cfg.theta),
        "self_dual": report.sd_residual <= cfg.tolerances["self_dual"],
    }
    out = Path(cfg.output_dir)
    path = write_json(doc, out / f"soliton-{_slug(cfg.window)}.json")
    write_heatmap(p, out / f"soliton-{_slug(cfg.window)}-heatmap.csv")
    return (0 if doc["self_dual"] else 2), doc, path


def cmd_gauge(cfg: RunConfig):
    w = parse_window(cfg.window, cfg.theta)
    lam = _window_lambda(cfg.window) if cfg.lam is None else cfg.lam
    report = classify_gauge_to_gaussian(w, lam, cfg.theta, cfg.radius,
                                        tol=cfg.tolerances["gauge"], quad=cfg.quad)
    tv = tau(w, cfg.theta, cfg.radius, cfg.quad)
    doc = {
        "command": "gauge",
        "config": cfg.provenance(w),
        "report": report.to_dict(),
        "tau_routes": tv._asdict(),
    }
    if cfg.monomial is not None:
        m, n = cfg.monomial
        u = AlgebraElement.monomial(LatticeSpec(cfg.theta, Side.DUAL), m, n)
        res = gauge_transform(w, u, cfg.theta, cfg.radius, check_projection=False, quad=cfg.quad)
        t_u = complex(trace(res.b_u))
        doc["gauge"] = {
            "monomial": [m, n],
            "tau_before": report.tau_b,
            "tau_after": t_u,
            "tau_shift": t_u - report.tau_b,
            "b_law_residual": res.b_law_residual,
        }
    stem = f"gauge-{_slug(cfg.window)}"
    if cfg.lam is not None:
        stem += f"-lambda_{_slug(str(cfg.lam))}"
    if cfg.monomial is not None:
        stem += f"-u{cfg.monomial[0]}_{cfg.monomial[1]}"
    path = write_json(doc, Path(cfg.output_dir) / f"{stem}.json")
    return (0 if report.gaugeable else 2), doc, path


COMMANDS = {"frame": cmd_frame, "soliton": cmd_soliton, "gauge": cmd_gauge}


def _run_all(cfg: RunConfig) -> int:
    codes = [COMMANDS[name](cfg)[0] for name in ("frame", "soliton", "gauge")]
    return max(codes)


def cmd_report_all(cfg: RunConfig, windows: list[str], jobs: int = 1) -> int:
    cfgs = [replace(cfg, window=w) for w in windows]
    if jobs > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            codes = list(pool.map(_run_all, cfgs))
    else:
        codes = [_run_all(c) for c in cfgs]
    return max(codes)


# -- argument handling -------------------------------------------------

def _radius_a(text: str):
    return "auto" if text == "auto" else int(text)


def _monomial(text: str):
    try:
        m, n = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError("monomial must be 'm,n'") from exc
    return m, n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override its keys")
    common.add_argument("--theta", type=float)
    common.add_argument("--radius", type=int, help="truncation radius on the B side")
    common.add_argument("--radius-a", type=_radius_a, help="A-side radius or 'auto'")
    common.add_argument("--nodes", type=int, help="quadrature nodes")
    common.add_argument("--half-width", type=float, help="quadrature half-width (default: from envelope)")
    common.add_argument("--output-dir")

    parser = argparse.ArgumentParser(prog="ncsoliton", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("frame", "soliton"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--window")
    g = sub.add_parser("gauge", parents=[common])
    g.add_argument("--window")
    g.add_argument("--lambda", dest="lam", type=_complex)
    g.add_argument("--monomial", type=_monomial)
    r = sub.add_parser("report-all", parents=[common])
    r.add_argument("--window", action="append", dest="windows")
    r.add_argument("--jobs", type=int, default=1)
    return parser


_CONFIG_KEYS = {"theta", "window", "radius", "radius_a", "nodes", "half_width", "lam",
                "monomial", "output_dir", "tolerances"}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults < config file < environment (output dir only) < flags."""
    cfg = RunConfig()
    if args.config:
        data = json.loads(Path(args.config).read_text())
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "lam" in data and data["lam"] is not None:
            data["lam"] = _complex(str(data["lam"]))
        if "monomial" in data and data["monomial"] is not None:
            data["monomial"] = tuple(int(x) for x in data["monomial"])
        if "tolerances" in data:
            data["tolerances"] = {**cfg.tolerances, **data["tolerances"]}
        cfg = replace(cfg, **data)
    if os.environ.get(OUTPUT_ENV):
        cfg = replace(cfg, output_dir=os.environ[OUTPUT_ENV])
    for key in ("theta", "radius", "radius_a", "nodes", "half_width", "output_dir"):
        value = getattr(args, key, None)
        if value is not None:
            cfg = replace(cfg, **{key: value})
    if getattr(args, "window", None) is not None:
        cfg = replace(cfg, window=args.window)
    for key in ("lam", "monomial"):
        if getattr(args, key, None) is not None:
            cfg = replace(cfg, **{key: getattr(args, key)})
    return cfg.validate()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "report-all":
            return cmd_report_all(cfg, args.windows or [cfg.window], args.jobs)
        code, doc, path = COMMANDS[args.command](cfg)
        print(path)
        return code
    except Exception as exc:  # noqa: BLE001 - every failure maps to exit code 1
        print(f"ncsoliton: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
