"""Command-line interface.

Exit codes: 0 success, 2 invalid configuration, 3 quadrature did not
converge, 4 requested order violates the convolution validity condition,
5 filesystem error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, gridio
from .cavity import (
    CavityParams,
    QuadratureError,
    efficiency_curve,
    eta_closed,
    rate_ratio_for,
)
from .oracle import build_state, cat_cutoff, loss_channel, oracle_distribution
from .phase_space import (
    ConvolutionValidityError,
    GridSpec,
    QuasiDistribution,
    convert_s_order,
    evaluate_on_grid,
    extract_state,
    extraction_order,
)
from .states import (
    DEFAULT_CAT_MARGIN,
    Cat,
    Fock,
    StateSpec,
    cat_condition,
    cavity_wigner,
    fock_origin_value,
    fock_threshold,
    interference_amplitude,
    output_wigner,
    parse_state,
)

log = logging.getLogger("cavext")

EXIT_OK, EXIT_CONFIG, EXIT_QUADRATURE, EXIT_VALIDITY, EXIT_FS = 0, 2, 3, 4, 5
PATHS = ("analytic", "convolution", "oracle")

FIGURES = (
    ("fig1a", "fock:1", 0.99),
    ("fig1b", "fock:1", 0.71),
    ("fig1c", "fock:1", 0.5),
    ("fig2a", "cat:3", 0.998),
    ("fig2b", "cat:3", 0.952),
    ("fig2c", "cat:3", 0.84),
)
# Rate ratios quoted alongside the figures; fig1b's 0.429 belongs to eta = 0.6997.
QUOTED_RATE_RATIOS = {"fig1a": 0.01, "fig1b": 0.429, "fig1c": 1.0, "fig2a": 0.002, "fig2c": 0.19}


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    state: Optional[StateSpec] = None
    eta: Optional[float] = None
    gamma_rad: Optional[float] = None
    gamma_abs: Optional[float] = None
    elapsed: Optional[float] = None
    cavity: Optional[CavityParams] = None
    s: float = 0.0
    grid: GridSpec = field(default_factory=GridSpec)
    fmt: str = "csv"
    out: Optional[Path] = None

    def efficiency_mode(self) -> str:
        modes = []
        if self.eta is not None:
            modes.append("eta")
        if self.gamma_rad is not None or self.gamma_abs is not None:
            modes.append("rates")
        if self.cavity is not None:
            modes.append("cavity")
        if len(modes) != 1:
            raise ConfigError(
                "give exactly one of --eta, --gamma-rad/--gamma-abs, or cavity parameters"
                f" (got {', '.join(modes) or 'none'})"
            )
        return modes[0]

    def rates(self) -> tuple[float, float]:
        mode = self.efficiency_mode()
        if mode == "rates":
            if self.gamma_rad is None or self.gamma_abs is None:
                raise ConfigError("--gamma-rad and --gamma-abs go together")
            return self.gamma_rad, self.gamma_abs
        if mode == "cavity":
            return self.cavity.gamma_rad, self.cavity.gamma_abs
        raise ConfigError("decay rates or cavity parameters are required")

    def resolve_eta(self) -> float:
        if self.efficiency_mode() == "eta":
            eta = self.eta
        else:
            g_rad, g_abs = self.rates()
            if self.elapsed is None:
                raise ConfigError("--elapsed is required with rates or cavity parameters")
            try:
                eta = eta_closed(g_rad, g_abs, self.elapsed)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if not 0 <= eta <= 1:
            raise ConfigError(f"efficiency {eta} outside [0, 1]")
        return eta


# ---------------------------------------------------------------------------
# computation
# ---------------------------------------------------------------------------

def _state_cutoff(state: StateSpec) -> int:
    if isinstance(state, Fock):
        return state.n + 1
    return cat_cutoff(state.alpha0)


def output_distribution(state: StateSpec, eta: float, s: float = 0.0,
                        path: str = "analytic", cutoff: Optional[int] = None) -> QuasiDistribution:
    """Output-pulse function of order ``s`` computed along ``path``."""
    if path == "oracle":
        if s > 0:
            raise ConfigError("the oracle path represents orders s <= 0 only")
        rho = loss_channel(build_state(state, cutoff or _state_cutoff(state)), eta)
        return oracle_distribution(rho, s, label=f"output:{state}@eta={eta:g}")
    if not 0 <= eta <= 1:
        raise ConfigError(f"efficiency {eta} outside [0, 1]")
    if path == "analytic":
        if s <= 0:
            return convert_s_order(output_wigner(state, eta), s)
        if eta == 0 or s > 1.0 - eta:
            raise ConvolutionValidityError(
                f"order s={s:g} needs 1 - s - eta >= 0 (eta={eta:g})")
        s_prime = extraction_order(eta, s)
        return extract_state(convert_s_order(cavity_wigner(state), s_prime), eta, s)
    if path == "convolution":
        if eta == 0:
            raise ConfigError("the convolution path needs eta > 0")
        return extract_state(cavity_wigner(state), eta, s, mode="convolution",
                             label=f"output:{state}@eta={eta:g}")
    raise ConfigError(f"unknown path {path!r}")


def compute_grid(state: StateSpec, eta: float, s: float, spec: GridSpec, path: str = "analytic",
                 cutoff: Optional[int] = None):
    dist = output_distribution(state, eta, s, path, cutoff)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        grid = evaluate_on_grid(dist, spec)
    for w in {str(w.message) for w in caught}:
        log.warning("%s", w)
    grid.metadata = {
        "state": str(state), "s": s, "eta": eta, "path": path,
        "grid": str(spec), "tool_version": __version__,
    }
    return grid


def threshold_report(state: StateSpec, eta: Optional[float] = None,
                     cat_margin: float = DEFAULT_CAT_MARGIN) -> dict:
    if isinstance(state, Fock):
        if state.n == 0:
            raise ConfigError("the vacuum has no extraction threshold")
        eta_min = fock_threshold(state.n)
        report = {"state": str(state), "threshold": eta_min,
                  "required_rate_ratio": rate_ratio_for(eta_min)}
        if eta is not None:
            report.update(eta=eta, satisfied=eta > eta_min,
                          origin_value=fock_origin_value(state.n, eta))
        return report
    if isinstance(state, Cat):
        a2 = state.alpha0 ** 2
        eta_min = 1.0 - cat_margin / (2.0 * a2)
        report = {"state": str(state), "margin_threshold": cat_margin, "eta_min": eta_min,
                  "required_rate_ratio": rate_ratio_for(eta_min) if eta_min > 0 else math.inf}
        if eta is not None:
            cond = cat_condition(state.alpha0, eta, cat_margin)
            report.update(eta=eta, margin=cond["margin"], satisfied=cond["satisfied"])
        return report
    raise ConfigError(f"unsupported state {state}")


def reproduce_figures(outdir: Path, spec: Optional[GridSpec] = None) -> dict:
    """Write the six figure grids as CSV plus ``manifest.json``."""
    spec = spec or GridSpec()
    outdir.mkdir(parents=True, exist_ok=True)
    entries = []
    for name, desc, eta in FIGURES:
        state = parse_state(desc)
        grid = compute_grid(state, eta, 0.0, spec)
        text = gridio.grid_to_csv(grid)
        (outdir / f"{name}.csv").write_text(text)
        entry = {
            "name": name, "file": f"{name}.csv", "state": desc, "eta": eta, "s": 0.0,
            "path": "analytic", "grid": str(spec), "sha256": gridio.sha256(text),
            "rate_ratio": rate_ratio_for(eta), "min": float(grid.values.min()),
            "max": float(grid.values.max()), "center": float(output_wigner(state, eta)(0.0)),
        }
        if name in QUOTED_RATE_RATIOS:
            entry["quoted_rate_ratio"] = QUOTED_RATE_RATIOS[name]
        if isinstance(state, Cat):
            y = np.linspace(-1.0, 1.0, 81)
            shift = math.sqrt(eta) * state.alpha0
            out_amp = interference_amplitude(y, output_wigner(state, eta)(1j * y), shift)
            in_amp = interference_amplitude(y, cavity_wigner(state)(1j * y), state.alpha0)
            entry["fringe_ratio"] = out_amp / in_amp
        entries.append(entry)
    manifest = {
        "tool_version": __version__,
        "figures": entries,
        "etas": [e["eta"] for e in entries],
        "notes": ("fig1b: eta = 0.71 corresponds to gamma_abs/gamma_rad = 0.408; the quoted 0.429 "
                  "corresponds to eta = 0.6997. Rate ratios here are derived from eta."),
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    return manifest


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def _times(text: str) -> np.ndarray:
    try:
        lo, hi, n = text.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    except ValueError:
        raise ConfigError(f"bad --times {text!r}; expected start:stop:n") from None


def _add_efficiency(p):
    g = p.add_argument_group("efficiency")
    g.add_argument("--eta", type=float)
    g.add_argument("--gamma-rad", type=float)
    g.add_argument("--gamma-abs", type=float)
    g.add_argument("--elapsed", type=float)
    g.add_argument("--cavity-length", type=float, help="meters; with --transmission")
    g.add_argument("--transmission", type=float, help="|T| of the coupling mirror")
    g.add_argument("--absorption", type=float, default=0.0, help="|A| of the coupling mirror")
    g.add_argument("--mode-frequency", type=float, default=0.0)


def _add_output(p):
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", type=Path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cavext", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eta", help="extraction efficiency curve")
    _add_efficiency(p)
    p.add_argument("--times", help="start:stop:n in seconds (default 0 to 5/(gamma_rad+gamma_abs))")
    p.add_argument("--numeric", action="store_true", help="add the frequency-quadrature column")
    p.add_argument("--quadrature-points", type=int, default=64)
    _add_output(p)

    p = sub.add_parser("wigner", help="output-pulse phase-space grid")
    p.add_argument("--state", required=True)
    _add_efficiency(p)
    p.add_argument("--s", type=float, default=0.0)
    p.add_argument("--grid", default=str(GridSpec()))
    p.add_argument("--cutoff", type=int, help="Fock cutoff for --via-oracle")
    via = p.add_mutually_exclusive_group()
    via.add_argument("--via-convolution", action="store_true")
    via.add_argument("--via-oracle", action="store_true")
    _add_output(p)

    p = sub.add_parser("thresholds", help="nonclassicality-survival thresholds")
    p.add_argument("--state", required=True)
    _add_efficiency(p)
    p.add_argument("--cat-margin", type=float, default=DEFAULT_CAT_MARGIN)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("reproduce-figures", help="write the Fock and cat figure grids")
    p.add_argument("outdir", type=Path, nargs="?", default=Path("figures"))
    p.add_argument("--grid", default=str(GridSpec()))
    return parser


def _config(args) -> ScenarioConfig:
    cavity = None
    if getattr(args, "cavity_length", None) is not None or getattr(args, "transmission", None) is not None:
        if args.cavity_length is None or args.transmission is None:
            raise ConfigError("--cavity-length and --transmission go together")
        try:
            cavity = CavityParams(args.cavity_length, args.transmission, args.absorption,
                                  args.mode_frequency)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    cfg = ScenarioConfig(
        eta=getattr(args, "eta", None),
        gamma_rad=getattr(args, "gamma_rad", None),
        gamma_abs=getattr(args, "gamma_abs", None),
        elapsed=getattr(args, "elapsed", None),
        cavity=cavity,
        s=getattr(args, "s", 0.0),
        fmt=getattr(args, "format", "csv"),
        out=getattr(args, "out", None),
    )
    if getattr(args, "state", None) is not None:
        try:
            cfg.state = parse_state(args.state)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if getattr(args, "grid", None) is not None:
        try:
            cfg.grid = GridSpec.parse(args.grid)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if cfg.s > 1:
        raise ConfigError("order s must be <= 1")
    return cfg


def _emit(text: str, out: Optional[Path]):
    if out is None:
        sys.stdout.write(text)
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)


def cmd_eta(args) -> int:
    cfg = _config(args)
    g_rad, g_abs = cfg.rates()
    if args.times:
        times = _times(args.times)
    elif cfg.elapsed is not None:
        times = np.array([cfg.elapsed])
    else:
        times = np.linspace(0.0, 5.0 / (g_rad + g_abs), 51)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ConfigError("times must be nonnegative and ascending")
    params = None
    if args.numeric:
        params = cfg.cavity or CavityParams.from_rates(g_rad, g_abs)
    curve = efficiency_curve(g_rad, g_abs, times, params, args.quadrature_points)
    meta = {"gamma_rad": g_rad, "gamma_abs": g_abs, "asymptote": curve.asymptote,
            "numeric": bool(args.numeric), "tool_version": __version__}
    if params is not None:
        meta["spacing_ratio"] = (g_rad + g_abs) / params.mode_spacing
    if cfg.fmt == "json":
        _emit(gridio.curve_to_json(curve, meta), cfg.out)
    else:
        _emit(gridio.curve_to_csv(curve), cfg.out)
    return EXIT_OK


def cmd_wigner(args) -> int:
    cfg = _config(args)
    eta = cfg.resolve_eta()
    path = "convolution" if args.via_convolution else "oracle" if args.via_oracle else "analytic"
    grid = compute_grid(cfg.state, eta, cfg.s, cfg.grid, path, args.cutoff)
    text = gridio.grid_to_json(grid) if cfg.fmt == "json" else gridio.grid_to_csv(grid)
    _emit(text, cfg.out)
    return EXIT_OK


def cmd_thresholds(args) -> int:
    cfg = _config(args)
    eta = None
    if cfg.eta is not None or cfg.gamma_rad is not None or cfg.cavity is not None:
        eta = cfg.resolve_eta()
    report = threshold_report(cfg.state, eta, args.cat_margin)
    _emit(json.dumps(gridio._jsonable(report), indent=1) + "\n", cfg.out)
    return EXIT_OK


def cmd_reproduce_figures(args) -> int:
    try:
        spec = GridSpec.parse(args.grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    manifest = reproduce_figures(args.outdir, spec)
    log.info("wrote %d grids to %s", len(manifest["figures"]), args.outdir)
    return EXIT_OK


COMMANDS = {
    "eta": cmd_eta,
    "wigner": cmd_wigner,
    "thresholds": cmd_thresholds,
    "reproduce-figures": cmd_reproduce_figures,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConvolutionValidityError as exc:
        log.error("%s", exc)
        return EXIT_VALIDITY
    except QuadratureError as exc:
        log.error("%s", exc)
        return EXIT_QUADRATURE
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_FS
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
