"""Command-line front end: ``lamhom homogenize|sweep|compare|validate``."""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .cell import CellSolveError, effective_cell_solver, profiles_from_solutions, solve_cell_problems
from .hetero import (
    GridError,
    HeteroSolveError,
    MicroGrid,
    homogenize,
    run_comparison,
    solve_heterogeneous,
    upscale,
)
from .homogenizer import (
    EffectiveProperties,
    effective_constants_biphase,
    normalize_constants,
    perturbation_profiles_biphase,
    relative_difference,
)
from .io import (
    ConfigError,
    StudyConfig,
    load_config,
    write_csv,
    write_effective_csv,
    write_json,
    write_macro_csv,
    write_micro_csv,
    write_profiles_csv,
    write_upscaled_csv,
)
from .macro import HarmonicLoad, LoadError, load_for_amplitudes, normalized_amplitude, solve_homogenized
from .materials import CONSTANT_NAMES, Laminate, MaterialError, biphase_from_ratios, dimensionless_ratios

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VALIDATION = 0, 1, 2, 3
METHODS = ("analytic", "cell-solver", "both")
AMPLITUDE_COLUMNS = ("xi_alpha_tilde_11", "xi_alpha_tilde_22", "xi_beta_tilde_11", "xi_beta_tilde_22")


def thread_count() -> int:
    raw = os.environ.get("LAMHOM_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"LAMHOM_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"LAMHOM_THREADS must be a positive integer, got {raw!r}")
    return n


def effective_by_method(laminate: Laminate, method: str) -> dict[str, EffectiveProperties]:
    out = {}
    if method in ("analytic", "both"):
        if laminate.n_layers != 2:
            raise ConfigError("--method analytic needs a bi-phase laminate; use cell-solver")
        out["analytic"] = effective_constants_biphase(laminate)
    if method in ("cell-solver", "both"):
        out["cell-solver"] = effective_cell_solver(laminate)
    return out


def max_discrepancy(a: EffectiveProperties, b: EffectiveProperties) -> float:
    return a.max_relative_difference(b)


# --------------------------------------------------------------------- commands

def cmd_homogenize(cfg: StudyConfig, method: str, out: Path) -> int:
    laminate = cfg.laminate()
    results = effective_by_method(laminate, method)
    report: dict = {
        "method": method,
        "n_layers": laminate.n_layers,
        "fractions": laminate.fractions,
        "effective": {m: e.as_dict() | {"K12": e.K12, "D12": e.D12, "C2211": e.C2211} for m, e in results.items()},
        "admissible": {m: e.is_admissible() for m, e in results.items()},
    }
    if method == "both":
        report["max_relative_discrepancy"] = max_discrepancy(results["analytic"], results["cell-solver"])
    if laminate.n_layers == 2:
        eff = next(iter(results.values()))
        norm = normalize_constants(eff, laminate)
        report["normalized"] = norm.as_dict()
        report["undefined_normalizations"] = list(norm.undefined)
        if laminate.is_isotropic():
            report["ratios"] = dimensionless_ratios(laminate).as_dict()
        profiles = perturbation_profiles_biphase(laminate)
    else:
        profiles = profiles_from_solutions(solve_cell_problems(laminate))
    write_json(out / "effective.json", report)
    write_effective_csv(out / "effective.csv", results)
    write_profiles_csv(out / "profiles.csv", profiles)
    _summary(f"homogenize: wrote effective.json, effective.csv, profiles.csv to {out}")
    if method == "both":
        _summary(f"max relative discrepancy analytic vs cell-solver: {report['max_relative_discrepancy']:.3e}")
    return EXIT_OK


def sweep_header(parameter: str) -> list[str]:
    return [parameter] + [f"{n}_tilde" for n in CONSTANT_NAMES] + list(AMPLITUDE_COLUMNS)


def sweep_row(parameter: str, value: float, fixed: dict, assumption, method: str = "analytic") -> list:
    """One sweep point: normalized constants and normalized amplitudes (NaN when undefined)."""
    lam = biphase_from_ratios(**(fixed | {parameter: value}), assumption=assumption)
    eff = effective_cell_solver(lam) if method == "cell-solver" else effective_constants_biphase(lam)
    norm = normalize_constants(eff, lam)
    amps = []
    for coupling, transport in (("alpha", "K"), ("beta", "D")):
        for d in (1, 2):
            v = normalized_amplitude(eff, lam, d, coupling, transport)
            amps.append(math.nan if v is None else v)
    return [value] + [norm[n] for n in CONSTANT_NAMES] + amps


def cmd_sweep(cfg: StudyConfig, method: str, out: Path) -> int:
    spec = cfg.sweep
    if spec is None:
        raise ConfigError("sweep: missing required block")
    if method == "both":
        raise ConfigError("sweep supports --method analytic or cell-solver")

    def point(v: float) -> list:
        return sweep_row(spec.parameter, v, spec.fixed, spec.assumption, method)

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        rows = list(pool.map(point, spec.values))
    path = write_csv(out / "sweep.csv", sweep_header(spec.parameter), rows)
    _summary(f"sweep: {len(rows)} rows over {spec.parameter} written to {path}")
    return EXIT_OK


def build_load(cfg: StudyConfig, eff: EffectiveProperties) -> HarmonicLoad:
    spec = dict(cfg.compare.load)
    xi_a, xi_b = spec.pop("xi_alpha", None), spec.pop("xi_beta", None)
    ints = {k: int(spec[k]) for k in ("m", "n", "p", "direction") if k in spec}
    for k, v in ints.items():
        if v != spec[k]:
            raise ConfigError(f"compare.load.{k}: expected an integer, got {spec[k]!r}")
    spec |= ints
    if xi_a is not None or xi_b is not None:
        if "R" in spec or "S" in spec:
            raise ConfigError("compare.load: give either R/S or xi_alpha/xi_beta, not both")
        return load_for_amplitudes(eff, xi_alpha=xi_a or 0.0, xi_beta=xi_b or 0.0, **spec)
    return HarmonicLoad(**spec)


def cmd_compare(cfg: StudyConfig, method: str, out: Path) -> int:
    spec = cfg.compare
    if spec is None:
        raise ConfigError("compare: missing required block")
    laminate = cfg.laminate()
    eff = homogenize(laminate)
    load = build_load(cfg, eff)
    run = run_comparison(laminate, load, spec.L_over_epsilon, spec.nodes_per_layer)
    payload = {
        "report": _report_dict(run.report),
        "load": {k: getattr(load, k) for k in ("direction", "B", "R", "S", "m", "n", "p", "L")},
        "amplitudes": {"xi_alpha": run.macro.xi_alpha, "xi_beta": run.macro.xi_beta},
        "flux_jumps": run.micro.flux_jumps,
    }
    write_json(out / "report.json", payload)
    write_micro_csv(out / "micro_fields.csv", run.micro)
    write_upscaled_csv(out / "upscaled.csv", run.micro, upscale(run.micro, run.laminate))
    write_macro_csv(out / "macro_fields.csv", run.macro, spec.samples)
    for name, err in run.report.errors.items():
        _summary(f"{name}: " + ("zero field" if err is None else f"L2 {err['l2']:.3e}  Linf {err['linf']:.3e}"))
    return EXIT_OK


def _report_dict(report) -> dict:
    return {"errors": report.errors, "grid": report.grid, "runtimes": report.runtimes, "averaging": report.averaging}


# --------------------------------------------------------------------- validation

def validation_checks(laminate: Laminate) -> list[tuple[str, bool, str]]:
    """Run the module invariants on ``laminate``; returns ``(name, passed, detail)``."""
    checks: list[tuple[str, bool, str]] = []

    def check(name: str, fn: Callable[[], tuple[bool, str]]):
        try:
            ok, detail = fn()
        except (MaterialError, CellSolveError, HeteroSolveError, LoadError, GridError) as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        checks.append((name, bool(ok), detail))

    sols = solve_cell_problems(laminate)
    eff = effective_cell_solver(laminate)

    check("effective constants admissible", lambda: (eff.is_admissible(), f"C2222={eff.C2222:.6g}"))

    def symmetry():
        d = relative_difference(eff.C1122, eff.C2211)
        return d <= 1e-12, f"|C1122-C2211| rel {d:.2e}"
    check("stiffness symmetric", symmetry)

    def transport_diag():
        return eff.K12 == 0.0 and eff.D12 == 0.0, f"K12={eff.K12}, D12={eff.D12}"
    check("transport tensors diagonal", transport_diag)

    def closures():
        worst = max(abs(s.closure()) for s in sols)
        return worst <= 1e-12, f"max |sum f_i s_i| {worst:.2e}"
    check("cell closure", closures)

    def profile_invariants():
        profs = profiles_from_solutions(sols)
        scale = max(1.0, max(p.max_abs() for p in profs.values()))
        worst = max(max(abs(p.mean()), float(np.max(np.abs(p.jumps())))) for p in profs.values()) / scale
        return worst <= 1e-12, f"max mean/jump {worst:.2e}"
    check("profiles zero-mean and continuous", profile_invariants)

    if laminate.n_layers == 2:
        def oracle():
            d = effective_constants_biphase(laminate).max_relative_difference(eff)
            return d <= 1e-12, f"max rel diff {d:.2e}"
        check("analytic vs cell-solver", oracle)

    def layer_order():
        rev = Laminate(tuple(reversed(laminate.layers)), laminate.epsilon, laminate.assumption)
        d = effective_cell_solver(rev).max_relative_difference(eff)
        return d <= 1e-12, f"max rel diff {d:.2e}"
    check("invariance under layer reordering", layer_order)

    def refinement():
        d = effective_cell_solver(laminate.subdivided(3)).max_relative_difference(eff)
        return d <= 1e-12, f"max rel diff {d:.2e}"
    check("invariance under layer subdivision", refinement)

    def macro_residual():
        worst = 0.0
        x = np.linspace(0.0, 1.0, 64, endpoint=False)
        for d in (1, 2):
            S = 1.0 if eff.get(f"D{d}{d}") > 0 else 0.0
            sol = solve_homogenized(eff, HarmonicLoad(direction=d, B=1.0, R=1.0, S=S, m=1, n=2, p=3))
            worst = max(worst, *(float(np.max(np.abs(r))) for r in sol.residuals(x)))
        return worst <= 1e-12, f"max relative residual {worst:.2e}"
    check("macro residual", macro_residual)

    def hetero():
        lam = laminate.with_epsilon(0.25)
        micro = solve_heterogeneous(lam, HarmonicLoad(B=1.0, R=1.0, S=1.0), MicroGrid(lam, 4, 16))
        jump = max(micro.flux_jumps.values())
        mean = max(abs(micro.mean(n)) / max(np.max(np.abs(getattr(micro, n))), 1e-300) for n in ("u", "theta", "eta"))
        return jump <= 1e-10 and mean <= 1e-12, f"flux jump {jump:.2e}, mean {mean:.2e}"
    check("heterogeneous flux continuity and zero mean", hetero)
    return checks


def cmd_validate(cfg: StudyConfig, method: str, out: Path) -> int:
    try:
        laminate = cfg.laminate()
    except MaterialError as exc:
        write_json(out / "validation.json", {"passed": False, "checks": [], "rejected": str(exc)})
        _summary(f"FAIL laminate rejected: {exc}")
        return EXIT_VALIDATION
    checks = validation_checks(laminate)
    passed = all(ok for _, ok, _ in checks)
    write_json(out / "validation.json", {
        "passed": passed,
        "checks": [{"name": n, "passed": ok, "detail": d} for n, ok, d in checks],
    })
    for name, ok, detail in checks:
        _summary(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return EXIT_OK if passed else EXIT_VALIDATION


COMMANDS = {
    "homogenize": cmd_homogenize,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "validate": cmd_validate,
}


def _summary(line: str) -> None:
    print(line, flush=True)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lamhom", description="Homogenization of layered thermodiffusive composites.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, type=Path, help="JSON study configuration")
    p.add_argument("--method", choices=METHODS, default="analytic",
                   help="effective-constant route (default: analytic)")
    p.add_argument("--out", type=Path, default=None, help="output directory (default: config 'out' or ./lamhom-out)")
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        out = args.out or Path(cfg.out or "lamhom-out")
        return COMMANDS[args.command](cfg, args.method, out)
    except (ConfigError, MaterialError, GridError, LoadError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CellSolveError, HeteroSolveError, np.linalg.LinAlgError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
