"""Run orchestration and command line interface.

`run_case` advances one benchmark configuration to its end time with
per-step dynamic viscosity, limiting, and diagnostics. The CLI exposes

    swsolver run <config-file> [--key=value ...]
    swsolver suite convergence
    swsolver suite benchmarks

Config files are plain ``key=value`` lines ('#' starts a comment);
unknown keys are rejected. Command-line overrides use the same keys.
Outputs are CSV files under $SWSOLVER_OUTPUT (default ./swsolver_out),
each carrying the manifest hash of the exact configuration that
produced it.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .cases import CASE_NAMES, CaseConfig, default_config, setup_case
from .galerkin import SemiDiscreteOp
from .sgs import dynamic_viscosity
from .swe import State, _wave_speed_clamped
from .timeint import SolverConfig, compute_dt, esdirk_step, rk4_step
from .wetdry import WetDryConfig, limit_all

log = logging.getLogger(__name__)

_LIST_KEYS = ("extents", "n_elements")


@dataclass(frozen=True)
class RunManifest:
    """The exact configuration of a run plus its content hash."""

    items: tuple  # sorted (key, value-string) pairs

    @classmethod
    def from_config(cls, config: CaseConfig) -> "RunManifest":
        items = tuple(sorted(
            (f.name, repr(getattr(config, f.name)))
            for f in dataclasses.fields(config)))
        return cls(items)

    @property
    def hash(self) -> str:
        text = "\n".join(f"{k}={v}" for k, v in self.items)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def header(self) -> str:
        return f"manifest={self.hash} " + " ".join(
            f"{k}={v}" for k, v in self.items)


@dataclass
class RunResult:
    config: CaseConfig
    manifest: RunManifest
    mesh: object
    bathymetry: object
    state: State
    t: float
    steps: int
    times: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    mu_max: list = field(default_factory=list)
    min_height: list = field(default_factory=list)
    newton_total: int = 0
    gmres_total: int = 0
    limiter_clamps: int = 0
    limiter_fallbacks: int = 0


def run_case(config: CaseConfig, solver: SolverConfig | None = None,
             max_steps: int | None = None, observer=None) -> RunResult:
    """Advance a benchmark to t_end (or max_steps) and gather diagnostics.

    observer, if given, is called as observer(step, t, state, mu_elem)
    after every accepted step.
    """
    setup = setup_case(config)
    mesh, bathy = setup.mesh, setup.bathymetry
    solver = solver or SolverConfig(cfl=config.cfl)
    # Riemann-invariant speed bound: |u| stays below u0 + 2 sqrt(g H0),
    # itself below twice the initial maximum wave speed
    lam0 = float(np.max(_wave_speed_clamped(setup.state0,
                                            config.wet_threshold)))
    wd = WetDryConfig(config.wet_threshold, u_cap=2.0 * lam0)
    op = SemiDiscreteOp(mesh, bathy, config.method,
                        wet_threshold=config.wet_threshold,
                        mass_diffusion=config.mass_diffusion)

    state, _ = limit_all(setup.state0, mesh, wd, config.method)
    state = op.enforce_bc(state)
    template = state

    def post_stage(vec: np.ndarray) -> np.ndarray:
        s = State.from_vector(vec, template)
        s, stats = limit_all(s, mesh, wd, config.method)
        result.limiter_clamps += stats.nodes_clamped
        result.limiter_fallbacks += stats.mean_fallbacks
        return op.enforce_bc(s).to_vector()

    manifest = RunManifest.from_config(config)
    result = RunResult(config, manifest, mesh, bathy, state, 0.0, 0)
    mu_holder = [None]

    def rhs_vec(vec: np.ndarray) -> np.ndarray:
        s = State.from_vector(vec, template)
        return op.rhs(s, mu_holder[0]).to_vector()

    t = 0.0
    step = 0
    prev: State | None = None
    k1 = None
    while t < config.t_end - 1e-12:
        if max_steps is not None and step >= max_steps:
            break
        dt = compute_dt(state, mesh, config.cfl, config.wet_threshold)
        dt = min(dt, config.t_end - t)
        mu = dynamic_viscosity(op, state, prev, dt) if config.viscous else None
        mu_holder[0] = mu
        if (mu is not None and config.integrator != "esdirk"
                and config.diffusion_dt_guard):
            diff = op.effective_diffusivity(state, mu)
            dt = min(dt, compute_dt(state, mesh, config.cfl,
                                    config.wet_threshold, mu_elem=diff))
        q = state.to_vector()
        newton_iters: list = []
        if config.integrator == "esdirk":
            q_new, k1, stats = esdirk_step(q, dt, rhs_vec, solver,
                                           post_stage=post_stage, k1=k1)
            dt_used = stats.dt_used
            newton_iters = stats.newton_iters
            result.newton_total += sum(stats.newton_iters)
            result.gmres_total += stats.gmres_iters
        else:
            q_new = rk4_step(q, dt, rhs_vec, post_stage=post_stage)
            dt_used = dt
        prev = state
        state = State.from_vector(q_new, template)
        t += dt_used
        step += 1

        min_h = float(np.min(state.H))
        mu_peak = float(np.max(mu)) if mu is not None else 0.0
        result.times.append(t)
        result.mass.append(analysis.total_mass(state, mesh))
        result.mu_max.append(mu_peak)
        result.min_height.append(min_h)
        log.info("step=%d t=%.6g dt=%.3e newton=%s gmres=%d minH=%.3e muMax=%.3e",
                 step, t, dt_used, newton_iters, result.gmres_total, min_h, mu_peak)
        if observer is not None:
            observer(step, t, state, mu)

    result.state = state
    result.t = t
    result.steps = step
    return result


# ---------------------------------------------------------------- config I/O

class ConfigError(ValueError):
    pass


def _parse_value(key: str, raw: str):
    if key == "case":
        return raw
    fields = {f.name: f for f in dataclasses.fields(CaseConfig)}
    if key not in fields:
        raise ConfigError(f"unknown configuration key {key!r}")
    if key == "n_elements":
        return tuple(int(p) for p in raw.split(","))
    if key == "extents":
        out = []
        for part in raw.split(","):
            lo, hi = part.split(":")
            out.append((float(lo), float(hi)))
        return tuple(out)
    typ = fields[key].type
    if typ in ("float", float):
        return float(raw)
    if typ in ("int", int):
        return int(raw)
    if typ in ("bool", bool):
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"boolean key {key!r} got {raw!r}")
    return raw


def parse_config_text(text: str) -> dict:
    """Parse key=value lines into typed values; rejects unknown keys."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (p.strip() for p in line.split("=", 1))
        out[key] = _parse_value(key, raw)
    return out


def load_config(path, overrides: dict | None = None) -> CaseConfig:
    items = parse_config_text(Path(path).read_text())
    if overrides:
        items.update(overrides)
    if "case" not in items:
        raise ConfigError("configuration must name a case")
    case = items.pop("case")
    if case not in CASE_NAMES:
        raise ConfigError(f"unknown case {case!r}; choose from {CASE_NAMES}")
    cfg = default_config(case, **items)
    _validate(cfg)
    return cfg


def _validate(cfg: CaseConfig):
    if cfg.order < 1:
        raise ConfigError("polynomial order must be >= 1")
    if cfg.cfl <= 0:
        raise ConfigError("cfl must be positive")
    if cfg.t_end <= 0:
        raise ConfigError("t_end must be positive")
    if cfg.method.upper() not in ("CG", "DG"):
        raise ConfigError("method must be CG or DG")
    if cfg.integrator not in ("rk4", "esdirk"):
        raise ConfigError("integrator must be rk4 or esdirk")
    if cfg.wet_threshold <= 0:
        raise ConfigError("wet_threshold must be positive")


def output_dir() -> Path:
    root = Path(os.environ.get("SWSOLVER_OUTPUT", "swsolver_out"))
    root.mkdir(parents=True, exist_ok=True)
    return root


def _write_outputs(result: RunResult, tag: str):
    out = output_dir()
    header = result.manifest.header()
    analysis.write_csv(out / f"{tag}_diagnostics.csv", header, {
        "t": result.times, "mass": result.mass,
        "mu_max": result.mu_max, "min_height": result.min_height})
    mesh, state = result.mesh, result.state
    if mesh.dim == 1:
        cols = {"x": mesh.x.reshape(-1),
                "H": state.H.reshape(-1),
                "HU": state.HU[0].reshape(-1),
                "surface": (state.H - result.bathymetry.b).reshape(-1)}
    else:
        cols = {"x": mesh.x.reshape(-1), "y": mesh.y.reshape(-1),
                "H": state.H.reshape(-1),
                "HU": state.HU[0].reshape(-1), "HV": state.HU[1].reshape(-1),
                "surface": (state.H - result.bathymetry.b).reshape(-1)}
    analysis.write_csv(out / f"{tag}_snapshot.csv", header, cols)
    log.info("wrote %s outputs under %s (manifest %s)",
             tag, out, result.manifest.hash)


# ---------------------------------------------------------------- suites

CONVERGENCE_ELEMENTS = (8, 16, 32, 64, 128)


def suite_convergence(elements=CONVERGENCE_ELEMENTS, order: int = 4,
                      t_end: float = 1.0) -> tuple[np.ndarray, np.ndarray, float]:
    """Planar-bowl refinement sweep; returns (h, errors, fitted rate)."""
    errors = []
    hs = []
    for ne in elements:
        cfg = default_config("bowl_1d", n_elements=(ne,), order=order,
                             t_end=t_end)
        res = run_case(cfg)
        setup = setup_case(cfg)
        eta_ref, _ = _bowl_reference(res)
        eta_num = res.state.H - res.bathymetry.b
        qw = res.mesh.quad_weights()
        wet_ref = eta_ref + res.bathymetry.b > 2.0 * cfg.wet_threshold
        errors.append(analysis.l2_error(eta_num, eta_ref, qw, mask=wet_ref))
        hs.append(res.mesh.dx)
        del setup
    hs = np.asarray(hs)
    errors = np.asarray(errors)
    rate = analysis.convergence_rate(hs, errors)
    out = output_dir()
    analysis.write_csv(out / "convergence.csv",
                       f"bowl refinement, order={order}, rate={rate:.3f}",
                       {"h": hs, "error": errors})
    return hs, errors, rate


def _bowl_reference(res: RunResult):
    from .cases import bowl_analytic
    return bowl_analytic(res.mesh.x, res.t), None


def suite_benchmarks(cases=CASE_NAMES) -> None:
    for name in cases:
        cfg = default_config(name)
        log.info("running benchmark %s", name)
        result = run_case(cfg)
        _write_outputs(result, name)


# ---------------------------------------------------------------- CLI

def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="swsolver",
        description="High-order shallow water solver with wetting/drying")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one configuration file")
    p_run.add_argument("config", help="path to a key=value config file")
    p_suite = sub.add_parser("suite", help="run a predefined suite")
    p_suite.add_argument("name", choices=["convergence", "benchmarks"])
    args, extra = parser.parse_known_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")

    try:
        if args.command == "run":
            overrides = {}
            for item in extra:
                if not item.startswith("--") or "=" not in item:
                    raise ConfigError(f"override {item!r} is not --key=value")
                key, raw = item[2:].split("=", 1)
                overrides[key] = _parse_value(key, raw)
            cfg = load_config(args.config, overrides)
            result = run_case(cfg)
            _write_outputs(result, cfg.case)
            print(f"completed {cfg.case}: {result.steps} steps to t={result.t:.6g}, "
                  f"mass={result.mass[-1] if result.mass else float('nan'):.9g}")
        else:
            if extra:
                raise ConfigError(f"unexpected arguments: {extra}")
            if args.name == "convergence":
                hs, errors, rate = suite_convergence()
                for h, e in zip(hs, errors):
                    print(f"h={h:.5f} error={e:.3e}")
                print(f"fitted rate: {rate:.3f}")
            else:
                suite_benchmarks()
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
