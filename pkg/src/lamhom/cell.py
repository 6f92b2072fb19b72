"""Semi-analytic first-order cell problems for N-layer laminates.

Each cell problem reduces, across the layering, to a conserved generalized
flux ``a_i * s_i + b_i = c`` in every layer plus the periodic closure
``sum_i f_i * s_i = 0``.  The N slopes and the flux constant are found
from one (N+1) x (N+1) linear system.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .homogenizer import EffectiveProperties, PerturbationProfile, ProfileKind
from .materials import Laminate

RESIDUAL_TOL = 1e-10


class CellSolveError(RuntimeError):
    pass


class CellProblemKind(str, enum.Enum):
    MECH_11 = "mech-11"
    MECH_22 = "mech-22"
    MECH_12 = "mech-12"
    THERMAL_COUPLING = "thermal-coupling"
    DIFFUSIVE_COUPLING = "diffusive-coupling"
    CONDUCTION = "conduction"
    DIFFUSION = "diffusion"

    @property
    def profile_kind(self) -> ProfileKind:
        return _PROFILE_OF[self]


_PROFILE_OF = {
    CellProblemKind.MECH_11: ProfileKind.N211,
    CellProblemKind.MECH_22: ProfileKind.N222,
    CellProblemKind.MECH_12: ProfileKind.N112,
    CellProblemKind.THERMAL_COUPLING: ProfileKind.NTILDE2,
    CellProblemKind.DIFFUSIVE_COUPLING: ProfileKind.NHAT2,
    CellProblemKind.CONDUCTION: ProfileKind.M2,
    CellProblemKind.DIFFUSION: ProfileKind.W2,
}


def _flux_coefficients(laminate: Laminate, kind: CellProblemKind) -> tuple[np.ndarray, np.ndarray]:
    """Per-layer ``(a, b)`` of the generalized flux ``a * slope + b``."""
    col = laminate.column
    if kind is CellProblemKind.MECH_11:
        return col("C2222"), col("C1122")
    if kind is CellProblemKind.MECH_22:
        return col("C2222"), col("C2222")
    if kind is CellProblemKind.MECH_12:
        return col("C1212"), col("C1212")
    if kind is CellProblemKind.THERMAL_COUPLING:
        return col("C2222"), -col("alpha22")
    if kind is CellProblemKind.DIFFUSIVE_COUPLING:
        return col("C2222"), -col("beta22")
    if kind is CellProblemKind.CONDUCTION:
        return col("K22"), col("K22")
    return col("D22"), col("D22")


@dataclass(frozen=True)
class LayerSlopeSolution:
    kind: CellProblemKind
    slopes: np.ndarray
    interface_constant: float
    fractions: np.ndarray
    edges: np.ndarray

    def profile(self) -> PerturbationProfile:
        return PerturbationProfile.from_slopes(self.kind.profile_kind, self.slopes, self.edges)

    def closure(self) -> float:
        return float(np.dot(self.fractions, self.slopes))


def solve_cell_problem(laminate: Laminate, kind: CellProblemKind) -> LayerSlopeSolution:
    a, b = _flux_coefficients(laminate, kind)
    f = laminate.fractions
    n = laminate.n_layers
    # unknowns: slopes s_0..s_{n-1}, flux constant c
    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = np.diag(a)
    A[:n, n] = -1.0
    A[n, :n] = f
    rhs = np.concatenate([-b, [0.0]])
    x = np.linalg.solve(A, rhs)
    scale = max(np.max(np.abs(A @ np.abs(x))), np.max(np.abs(rhs)), 1e-300)
    residual = np.max(np.abs(A @ x - rhs)) / scale
    if not np.isfinite(residual) or residual > RESIDUAL_TOL:
        raise CellSolveError(f"{kind.value}: relative residual {residual:.3e} exceeds {RESIDUAL_TOL}")
    return LayerSlopeSolution(kind, x[:n], float(x[n]), f, laminate.interfaces)


def solve_cell_problems(laminate: Laminate) -> list[LayerSlopeSolution]:
    """Solve all seven first-order cell problems of ``laminate``."""
    return [solve_cell_problem(laminate, kind) for kind in CellProblemKind]


def profiles_from_solutions(solutions) -> dict[ProfileKind, PerturbationProfile]:
    return {s.kind.profile_kind: s.profile() for s in solutions}


def effective_from_profiles(laminate: Laminate, solutions) -> EffectiveProperties:
    """Overall constants as cell averages built from the fluctuation slopes.

    Stiffness, conductivity and diffusivity use the energy (quadratic)
    averages; the coupling moduli use ``<alpha - C grad(N~)>`` and its
    diffusive analogue.
    """
    by_kind = {s.kind: s.slopes for s in solutions}
    missing = set(CellProblemKind) - set(by_kind)
    if missing:
        raise ValueError(f"missing cell solutions: {sorted(k.value for k in missing)}")
    f = laminate.fractions
    n = laminate.n_layers
    zeros = np.zeros(n)
    ones = np.ones(n)

    # local Voigt strains (11, 22, 2*12) produced by unit macroscopic strains
    strains = np.stack([
        np.stack([ones, by_kind[CellProblemKind.MECH_11], zeros], axis=1),
        np.stack([zeros, 1.0 + by_kind[CellProblemKind.MECH_22], zeros], axis=1),
        np.stack([zeros, zeros, 1.0 + by_kind[CellProblemKind.MECH_12]], axis=1),
    ])  # (mode, layer, component)
    stiff = np.stack([p.voigt() for p in laminate.phases])  # (layer, 3, 3)
    C = np.einsum("l,ali,lij,blj->ab", f, strains, stiff, strains)

    def coupling(prefix: str, kind: CellProblemKind) -> tuple[float, float]:
        t = by_kind[kind]
        local = np.stack([zeros, t, zeros], axis=1)
        moduli = np.stack([laminate.column(prefix + "11"), laminate.column(prefix + "22"), zeros], axis=1)
        avg = np.einsum("l,li->i", f, moduli - np.einsum("lij,lj->li", stiff, local))
        return float(avg[0]), float(avg[1])

    alpha11, alpha22 = coupling("alpha", CellProblemKind.THERMAL_COUPLING)
    beta11, beta22 = coupling("beta", CellProblemKind.DIFFUSIVE_COUPLING)

    def transport(prefix: str, kind: CellProblemKind) -> np.ndarray:
        # gradients e_q + grad M_q; the in-plane corrector M_1 vanishes for laminates
        g = np.stack([
            np.stack([ones, zeros], axis=1),
            np.stack([zeros, 1.0 + by_kind[kind]], axis=1),
        ])
        cond = np.zeros((n, 2, 2))
        cond[:, 0, 0] = laminate.column(prefix + "11")
        cond[:, 1, 1] = laminate.column(prefix + "22")
        return np.einsum("l,ali,lij,blj->ab", f, g, cond, g)

    K = transport("K", CellProblemKind.CONDUCTION)
    D = transport("D", CellProblemKind.DIFFUSION)
    return EffectiveProperties(
        C1111=float(C[0, 0]), C2222=float(C[1, 1]), C1122=float(C[0, 1]), C1212=float(C[2, 2]),
        alpha11=alpha11, alpha22=alpha22, beta11=beta11, beta22=beta22,
        K11=float(K[0, 0]), K22=float(K[1, 1]), D11=float(D[0, 0]), D22=float(D[1, 1]),
        K12=float(K[0, 1]), D12=float(D[0, 1]), C2211=float(C[1, 0]),
    )


def effective_cell_solver(laminate: Laminate) -> EffectiveProperties:
    return effective_from_profiles(laminate, solve_cell_problems(laminate))
