"""Normalized effective constants and amplitude functions against zeta.

One CSV per family: a phase ratio is varied over a set of curve values
while zeta spans a log grid and every other ratio stays at one.

    python3 scripts/sweep_curves.py --out results/sweeps
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from lamhom.homogenizer import effective_constants_biphase, normalize_constants
from lamhom.io import write_csv
from lamhom.macro import normalized_amplitude
from lamhom.materials import CONSTANT_NAMES, biphase_from_ratios


@dataclass
class SweepCurves:
    families: tuple[str, ...] = ("rho_C", "rho_alpha", "rho_beta", "rho_K", "rho_D")
    curves: tuple[float, ...] = (2.0, 5.0, 10.0, 30.0, 50.0)
    zeta_min: float = 1e-3
    zeta_max: float = 1e3
    points: int = 121
    fixed: dict = field(default_factory=dict)

    def zetas(self) -> np.ndarray:
        return np.geomspace(self.zeta_min, self.zeta_max, self.points)


def rows(cfg: SweepCurves, family: str):
    for rho in cfg.curves:
        for zeta in cfg.zetas():
            lam = biphase_from_ratios(**{**cfg.fixed, family: rho}, zeta=zeta)
            eff = effective_constants_biphase(lam)
            norm = normalize_constants(eff, lam)
            amps = [normalized_amplitude(eff, lam, d, c, t) for d in (1, 2) for c, t in (("alpha", "K"), ("beta", "D"))]
            yield [rho, zeta, *(norm[n] for n in CONSTANT_NAMES), *amps]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/sweeps"))
    ap.add_argument("--points", type=int, default=121)
    args = ap.parse_args(argv)
    cfg = SweepCurves(points=args.points)
    args.out.mkdir(parents=True, exist_ok=True)
    header = ["rho", "zeta", *(f"{n}_tilde" for n in CONSTANT_NAMES),
              "xi_alpha_tilde_11", "xi_beta_tilde_11", "xi_alpha_tilde_22", "xi_beta_tilde_22"]
    for family in cfg.families:
        path = write_csv(args.out / f"{family}.csv", header, rows(cfg, family))
        print(path)


if __name__ == "__main__":
    main()
