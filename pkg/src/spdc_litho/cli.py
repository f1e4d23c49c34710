"""Command-line front end writing figure data as CSV.

Usage::

    spdc-litho fringe --config run.json --mode full --out data/
    spdc-litho surface --set crystal.g=2.0 --set scan.samples=41

Configuration is JSON with the sections ``crystal``, ``slits``,
``detection``, ``quadrature``, ``scan`` and one section per subcommand.
Unspecified keys take the defaults in :data:`DEFAULTS`; ``null`` for
``crystal.q0`` or ``detection.z`` means "derive from the geometry"
(``q0 = 100/d`` and ``z = 1e4*k*d**2``).
"""
from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .aperture import DetectionGeometry, SlitGeometry
from .correlator import SpdcScene, correlation_matrices, f_integrals, g2_broadband
from .errors import ConfigError, DegenerateGain, NonConvergent
from .observables import (
    MODES,
    antidiagonal_scan,
    classical_g1,
    classical_g2,
    diagonal_scan,
    gain_sweep,
    visibility_formula,
)
from .opa_gain import CrystalParams
from .quadrature import QuadSpec

__all__ = ["DEFAULTS", "RunConfig", "load_config", "build_parser", "main"]

EXIT_CONFIG = 2
EXIT_NONCONVERGENT = 3
EXIT_IO = 1

DEFAULTS = {
    "mode": "broadband",
    "crystal": {"g": 1.84, "delta0": 0.0, "q0": None, "omega0": 1.0, "group_delay": 0.0},
    "slits": {"b": 1.0, "d": 5.0},
    "detection": {"k": 1.0, "z": None},
    "quadrature": {"rel_tol": 1e-6, "abs_tol": 1e-12, "max_subdivisions": 4000, "tail_cut": 10.0},
    # positions in the normalised coordinate X = k*b*x/(2*pi*z) unless units == "physical"
    "scan": {"x_min": -0.5, "x_max": 0.5, "samples": 201, "units": "normalized"},
    # g = 1 as for the published fringes; the delta0 set is illustrative
    "fringe": {"g": 1.0, "delta0_values": [0.0, 2.0, -2.0]},
    "surface": {"samples": 61},
    "visibility": {"xi_min": 0.01, "xi_max": 100.0, "samples": 201},
    "gain_sweep": {"g_min": 0.1, "g_max": 6.0, "samples": 60, "delta0_values": [0.0, 2.0, -2.0]},
    "classical": {"alpha_sq": 1.0},
}


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved settings of one CLI run."""

    settings: dict
    out: Path

    @property
    def mode(self) -> str:
        return self.settings["mode"]

    def scene(self, g: float | None = None, delta0: float | None = None) -> SpdcScene:
        s = self.settings
        c = dict(s["crystal"])
        if g is not None:
            c["g"] = g
        if delta0 is not None:
            c["delta0"] = delta0
        try:
            return SpdcScene(
                CrystalParams(**c),
                SlitGeometry(**s["slits"]),
                DetectionGeometry(**s["detection"]),
                QuadSpec(**s["quadrature"]),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def positions(self) -> np.ndarray:
        """Physical scan positions."""
        return self.to_physical(self.scan_axis())

    def scan_axis(self, samples: int | None = None) -> np.ndarray:
        sc = self.settings["scan"]
        n = sc["samples"] if samples is None else samples
        return np.linspace(sc["x_min"], sc["x_max"], n)

    def to_physical(self, values) -> np.ndarray:
        s = self.settings
        if s["scan"]["units"] == "physical":
            return np.asarray(values, dtype=float)
        return np.asarray(values, dtype=float) * 2 * math.pi * s["detection"]["z"] / (
            s["detection"]["k"] * s["slits"]["b"])


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown configuration key {where!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{where!r} must be a section")
            out[key] = _merge(base[key], value, where + ".")
        else:
            out[key] = value
    return out


def _parse_set(item: str) -> tuple[list[str], object]:
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip().split("."), value


def _number(value, where, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{where} must be finite")
    if integer:
        if int(value) != value:
            raise ConfigError(f"{where} must be an integer")
        return int(value)
    return float(value)


def _validate(s: dict) -> dict:
    if s["mode"] not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {s['mode']!r}")
    for section in ("crystal", "slits", "detection", "quadrature"):
        for key, value in s[section].items():
            if value is None and (section, key) in (("crystal", "q0"), ("detection", "z")):
                continue
            s[section][key] = _number(value, f"{section}.{key}", integer=(key == "max_subdivisions"))
    if s["crystal"]["q0"] is None:
        s["crystal"]["q0"] = 100.0 / s["slits"]["d"]
    if s["detection"]["z"] is None:
        s["detection"]["z"] = 1e4 * s["detection"]["k"] * s["slits"]["d"] ** 2

    scan = s["scan"]
    if scan["units"] not in ("normalized", "physical"):
        raise ConfigError(f"scan.units must be 'normalized' or 'physical', got {scan['units']!r}")
    scan["x_min"] = _number(scan["x_min"], "scan.x_min")
    scan["x_max"] = _number(scan["x_max"], "scan.x_max")
    if not scan["x_min"] < scan["x_max"]:
        raise ConfigError(f"empty scan range [{scan['x_min']}, {scan['x_max']}]")
    for section, key in (("scan", "samples"), ("surface", "samples"),
                         ("visibility", "samples"), ("gain_sweep", "samples")):
        n = _number(s[section][key], f"{section}.{key}", integer=True)
        if n < 2:
            raise ConfigError(f"{section}.{key} must be >= 2, got {n}")
        s[section][key] = n

    s["fringe"]["g"] = _number(s["fringe"]["g"], "fringe.g")
    for section in ("fringe", "gain_sweep"):
        values = s[section]["delta0_values"]
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{section}.delta0_values must be a non-empty list")
        s[section]["delta0_values"] = [_number(v, f"{section}.delta0_values") for v in values]

    vis = s["visibility"]
    vis["xi_min"] = _number(vis["xi_min"], "visibility.xi_min")
    vis["xi_max"] = _number(vis["xi_max"], "visibility.xi_max")
    if not 0 < vis["xi_min"] < vis["xi_max"]:
        raise ConfigError("need 0 < visibility.xi_min < visibility.xi_max")

    sweep = s["gain_sweep"]
    sweep["g_min"] = _number(sweep["g_min"], "gain_sweep.g_min")
    sweep["g_max"] = _number(sweep["g_max"], "gain_sweep.g_max")
    if not 0 <= sweep["g_min"] < sweep["g_max"]:
        raise ConfigError("need 0 <= gain_sweep.g_min < gain_sweep.g_max")

    alpha_sq = _number(s["classical"]["alpha_sq"], "classical.alpha_sq")
    if alpha_sq < 0:
        raise ConfigError("classical.alpha_sq must be >= 0")
    s["classical"]["alpha_sq"] = alpha_sq
    return s


def load_config(path: str | os.PathLike | None = None, overrides=(), mode: str | None = None,
                out: str | os.PathLike = ".") -> RunConfig:
    """Defaults, then the JSON file, then ``--set`` overrides, then ``--mode``."""
    settings = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        settings = _merge(settings, data)
    for item in overrides:
        keys, value = _parse_set(item)
        patch: dict = value  # type: ignore[assignment]
        for key in reversed(keys):
            patch = {key: patch}
        settings = _merge(settings, patch)
    if mode is not None:
        settings["mode"] = mode
    return RunConfig(_validate(settings), Path(out))


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _write_csv(path: Path, meta: list[str], header: str, rows) -> Path:
    """Write ``rows`` atomically: temporary file in the target directory, then rename."""
    lines = [f"# {m}" for m in meta]
    lines.append(header)
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _meta(cfg: RunConfig, command: str, **extra) -> list[str]:
    lines = [f"command: {command}", "config: " + json.dumps(cfg.settings, sort_keys=True)]
    lines += [f"{key}: {value}" for key, value in extra.items()]
    return lines


def _tag(value: float) -> str:
    return format(value, "+g")


def cmd_fringe(cfg: RunConfig) -> list[Path]:
    """Diagonal and antidiagonal scans for each configured ``delta0``."""
    g = cfg.settings["fringe"]["g"]
    axis = cfg.scan_axis()
    xs = cfg.to_physical(axis)
    units = cfg.settings["scan"]["units"]
    written = []
    for delta0 in cfg.settings["fringe"]["delta0_values"]:
        scene = cfg.scene(g=g, delta0=delta0)
        for kind, scan_fn in (("diagonal", diagonal_scan), ("antidiagonal", antidiagonal_scan)):
            scan = scan_fn(xs, scene, cfg.mode)
            meta = _meta(cfg, "fringe", kind=kind, g=_fmt(g), delta0=_fmt(delta0),
                         x_units=units, q0_d=_fmt(scene.broadband_ratio))
            if "xi" in scan.normalization:
                meta.append(f"xi: {_fmt(scan.normalization['xi'])}")
            path = cfg.out / f"fringe_{kind}_delta0_{_tag(delta0)}.csv"
            written.append(_write_csv(path, meta, "x,g2", zip(axis, scan.values)))
    return written


def cmd_surface(cfg: RunConfig) -> list[Path]:
    """``G2`` on a square grid of normalised positions ``(X1, X2)``."""
    n = cfg.settings["surface"]["samples"]
    axis = cfg.scan_axis(n)
    xs = cfg.to_physical(axis)
    scene = cfg.scene()
    x1, x2 = np.meshgrid(xs, xs, indexing="ij")
    if cfg.mode == "broadband":
        values = g2_broadband(x1, x2, f_integrals(scene), scene.slits, scene.det)
    else:
        values = correlation_matrices(xs, scene).g2(x1, x2)
    a1, a2 = np.meshgrid(axis, axis, indexing="ij")
    rows = zip(a1.ravel(), a2.ravel(), np.asarray(values).ravel())
    meta = _meta(cfg, "surface", x_units=cfg.settings["scan"]["units"],
                 q0_d=_fmt(scene.broadband_ratio))
    return [_write_csv(cfg.out / "surface.csv", meta, "x1,x2,g2", rows)]


def cmd_visibility(cfg: RunConfig) -> list[Path]:
    """Both visibility formulas on a log-spaced ``xi`` grid."""
    v = cfg.settings["visibility"]
    xis = np.logspace(math.log10(v["xi_min"]), math.log10(v["xi_max"]), v["samples"])
    rows = [(xi, visibility_formula(xi, "diagonal"), visibility_formula(xi, "antidiagonal")) for xi in xis]
    return [_write_csv(cfg.out / "visibility.csv", _meta(cfg, "visibility"), "xi,v1,v2", rows)]


def cmd_gain_sweep(cfg: RunConfig) -> list[Path]:
    """``xi``, ``|f1|**2`` and ``|f2|**2`` against ``g`` for each ``delta0``.

    A sweep point at ``g = 0`` has no pairs; it is listed as a comment
    line rather than as numbers.
    """
    sw = cfg.settings["gain_sweep"]
    gs = np.linspace(sw["g_min"], sw["g_max"], sw["samples"])
    template = cfg.scene()
    rows, notes = [], []
    for delta0 in sw["delta0_values"]:
        if gs[0] == 0:
            notes.append(f"degenerate: g=0 delta0={_fmt(delta0)} (no pairs; xi undefined)")
        for row in gain_sweep(gs[gs > 0], delta0, template):
            rows.append((row.g, row.delta0, row.xi, row.f1sq, row.f2sq))
    meta = _meta(cfg, "gain-sweep") + notes
    return [_write_csv(cfg.out / "gain_sweep.csv", meta, "g,delta0,xi,f1sq,f2sq", rows)]


def cmd_classical(cfg: RunConfig) -> list[Path]:
    """Coherent-light intensity and diagonal intensity correlation scans."""
    alpha_sq = cfg.settings["classical"]["alpha_sq"]
    axis = cfg.scan_axis()
    xs = cfg.to_physical(axis)
    scene = cfg.scene()
    g1 = np.atleast_1d(classical_g1(xs, alpha_sq, scene.slits, scene.det))
    g2 = np.atleast_1d(classical_g2(xs, xs, alpha_sq, scene.slits, scene.det))
    units = cfg.settings["scan"]["units"]
    return [
        _write_csv(cfg.out / "classical_g1.csv", _meta(cfg, "classical", kind="classical_g1", x_units=units),
                   "x,g1", zip(axis, g1)),
        _write_csv(cfg.out / "classical_g2.csv",
                   _meta(cfg, "classical", kind="classical_g2_diagonal", x_units=units),
                   "x,g2", zip(axis, g2)),
    ]


COMMANDS = {
    "fringe": cmd_fringe,
    "surface": cmd_surface,
    "visibility": cmd_visibility,
    "gain-sweep": cmd_gain_sweep,
    "classical": cmd_classical,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--mode", choices=MODES, help="correlation evaluation path")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key, e.g. crystal.g=2 (repeatable)")
    parser = argparse.ArgumentParser(prog="spdc-litho",
                                     description="Two-photon double-slit interference data generator.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=fn.__doc__.splitlines()[0])
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.overrides, args.mode, args.out)
        written = COMMANDS[args.command](cfg)
    except (ConfigError, DegenerateGain) as exc:
        print(f"spdc-litho: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergent as exc:
        print(f"spdc-litho: numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENT
    except OSError as exc:
        print(f"spdc-litho: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
