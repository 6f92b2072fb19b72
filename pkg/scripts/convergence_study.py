"""Grid and scale convergence of the heterogeneous solver.

Part one refines a single-phase problem against the closed-form macro
solution and reports observed orders.  Part two fixes the grid per layer
and refines epsilon for a contrasted bi-phase laminate.

    python3 scripts/convergence_study.py
"""
from __future__ import annotations

import argparse
import math
from dataclasses import dataclass

import numpy as np

from lamhom.hetero import MicroGrid, homogenize, run_comparison, solve_heterogeneous
from lamhom.homogenizer import EffectiveProperties
from lamhom.macro import HarmonicLoad, load_for_amplitudes, solve_homogenized
from lamhom.materials import Laminate, biphase_from_ratios, make_isotropic_phase


@dataclass
class GridStudy:
    cells: int = 4
    nodes: tuple[int, ...] = (8, 16, 32, 64, 128)
    load: HarmonicLoad = HarmonicLoad(B=1.0, R=0.8, S=-1.2, m=1, n=2, p=1)


@dataclass
class ScaleStudy:
    rho: float = 10.0
    zeta: float = 1.0
    cells: tuple[int, ...] = (5, 10, 20, 40, 80)
    nodes_per_layer: int = 32


def grid_study(cfg: GridStudy):
    phase = make_isotropic_phase(2.0, 0.3, alpha=1.5, beta=-0.7, K=3.0, D=0.5)
    lam = Laminate.from_phases([phase], [1.0], epsilon=cfg.load.L / cfg.cells)
    macro = solve_homogenized(EffectiveProperties.from_phase(phase), cfg.load)
    prev = None
    print(f"{'nodes/cell':>10s} {'u':>10s} {'theta':>10s} {'eta':>10s}   orders")
    for n in cfg.nodes:
        micro = solve_heterogeneous(lam, cfg.load, MicroGrid(lam, cfg.cells, n))
        w = micro.grid.weights
        errs = []
        for name, exact in (("u", macro.U), ("theta", macro.Theta), ("eta", macro.Upsilon)):
            d = getattr(micro, name) - exact(micro.x)
            errs.append(math.sqrt(float(np.dot(w, d * d))))
        orders = "" if prev is None else " ".join(f"{math.log2(a / b):.3f}" for a, b in zip(prev, errs))
        print(f"{n:10d} " + " ".join(f"{e:10.3e}" for e in errs) + f"   {orders}")
        prev = errs


def scale_study(cfg: ScaleStudy):
    lam = biphase_from_ratios(cfg.rho, cfg.rho, cfg.rho, cfg.rho, cfg.rho, zeta=cfg.zeta)
    load = load_for_amplitudes(homogenize(lam), 2, xi_alpha=1.0, xi_beta=1.0)
    prev = None
    print(f"{'L/eps':>6s} {'U':>10s} {'Theta':>10s} {'Upsilon':>10s}   rate")
    for cells in cfg.cells:
        rep = run_comparison(lam, load, cells, cfg.nodes_per_layer).report
        errs = [rep.l2(f) for f in ("U", "Theta", "Upsilon")]
        rate = "" if prev is None else f"{math.log2(prev / errs[0]):.3f}"
        print(f"{cells:6d} " + " ".join(f"{e:10.3e}" for e in errs) + f"   {rate}")
        prev = errs[0]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--part", choices=["grid", "scale", "both"], default="both")
    args = ap.parse_args(argv)
    if args.part in ("grid", "both"):
        grid_study(GridStudy())
    if args.part in ("scale", "both"):
        scale_study(ScaleStudy())


if __name__ == "__main__":
    main()
