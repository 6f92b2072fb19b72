"""Homogenized versus heterogeneous solutions for harmonic loads.

Runs the thermoelastic case (no diffusive coupling) and the fully coupled
case over several wave-number combinations and cell counts, and prints the
relative L2 error of every smoothed field.

    python3 scripts/compare_fields.py --out results/compare
"""
from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass
from pathlib import Path

from lamhom.hetero import homogenize, run_comparison
from lamhom.io import write_macro_csv, write_micro_csv
from lamhom.macro import load_for_amplitudes
from lamhom.materials import biphase_from_ratios


@dataclass(frozen=True)
class Case:
    name: str
    rho: float = 10.0
    coupled_diffusion: bool = False
    rho_beta: float = 10.0
    zeta: float = 1.0
    xi: float = 1.0

    def laminate(self):
        if self.coupled_diffusion:
            return biphase_from_ratios(self.rho, self.rho, self.rho_beta, self.rho, self.rho, zeta=self.zeta)
        return biphase_from_ratios(rho_C=self.rho, rho_alpha=self.rho, rho_K=self.rho, zeta=self.zeta, beta_b=0.0)


CASES = (Case("thermoelastic"), Case("thermodiffusive", coupled_diffusion=True))
WAVES = ((1, 1, 1), (2, 1, 1), (1, 2, 1), (1, 1, 2))


def run(case: Case, waves, cells: int, nodes_per_layer: int):
    lam = case.laminate()
    m, n, p = waves
    load = load_for_amplitudes(homogenize(lam), 2, xi_alpha=case.xi,
                               xi_beta=case.xi if case.coupled_diffusion else 0.0, m=m, n=n, p=p)
    return run_comparison(lam, load, cells, nodes_per_layer)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=None, help="directory for field CSVs and a summary JSON")
    ap.add_argument("--cells", type=int, nargs="+", default=[5, 10, 20, 40])
    ap.add_argument("--nodes-per-layer", type=int, default=64)
    args = ap.parse_args(argv)

    summary = []
    print(f"{'case':16s} {'m n p':7s} {'L/eps':>5s} {'U':>10s} {'Theta':>10s} {'Upsilon':>10s}")
    for case in CASES:
        for waves in WAVES:
            if not case.coupled_diffusion and waves[2] != 1:
                continue
            for cells in args.cells:
                result = run(case, waves, cells, args.nodes_per_layer)
                errs = {f: result.report.l2(f) for f in ("U", "Theta", "Upsilon")}
                cols = " ".join(f"{e:10.3e}" if e is not None else f"{'-':>10s}" for e in errs.values())
                print(f"{case.name:16s} {' '.join(map(str, waves)):7s} {cells:5d} {cols}")
                summary.append({"case": asdict(case), "waves": waves, "L_over_epsilon": cells, "l2": errs,
                                "runtimes": result.report.runtimes})
                if args.out is not None:
                    tag = f"{case.name}_m{waves[0]}n{waves[1]}p{waves[2]}_c{cells}"
                    args.out.mkdir(parents=True, exist_ok=True)
                    write_micro_csv(args.out / f"{tag}_micro.csv", result.micro)
                    write_macro_csv(args.out / f"{tag}_macro.csv", result.macro)
    if args.out is not None:
        (args.out / "summary.json").write_text(json.dumps(summary, indent=2))


if __name__ == "__main__":
    main()
