"""Direct micro-scale solve across the layering and comparison with the
homogenized fields.

The periodic domain ``[0, L)`` holds ``cells`` copies of the unit cell.
Each layer is split into ``nodes_per_layer`` equal segments so every
material interface is a grid node and each segment lies in one phase.
A vertex-centred conservative scheme is used: segment fluxes are exact
for piecewise-constant coefficients and sources are integrated exactly
over each control volume.  The three periodic problems are solved in
order (temperature, chemical potential, displacement) as bordered
systems that carry a zero-mean constraint.
"""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cell import effective_cell_solver, profiles_from_solutions, solve_cell_problems
from .homogenizer import (
    EffectiveProperties,
    PerturbationProfile,
    ProfileKind,
    effective_constants_biphase,
    perturbation_profiles_biphase,
)
from .macro import HarmonicLoad, MacroSolution, solve_homogenized
from .materials import Laminate

SOLVE_TOL = 1e-9
MIN_NODES_PER_WAVELENGTH = 8


class HeteroSolveError(RuntimeError):
    pass


class GridError(ValueError):
    pass


@dataclass
class MicroGrid:
    """Interface-aligned periodic grid over ``cells`` unit cells."""

    laminate: Laminate
    cells: int
    nodes_per_layer: int = 64
    x: np.ndarray = field(init=False, repr=False)
    h: np.ndarray = field(init=False, repr=False)
    segment_layer: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.cells < 1:
            raise GridError(f"cells must be >= 1, got {self.cells}")
        if self.nodes_per_layer < 4:
            raise GridError(f"nodes_per_layer must be >= 4, got {self.nodes_per_layer}")
        eps = self.laminate.epsilon
        edges = self.laminate.interfaces
        k = np.arange(self.nodes_per_layer) / self.nodes_per_layer
        local = np.concatenate([edges[i] + k * (edges[i + 1] - edges[i]) for i in range(len(edges) - 1)])
        layer = np.repeat(np.arange(self.laminate.n_layers), self.nodes_per_layer)
        self.x = ((np.arange(self.cells)[:, None] + local[None, :]) * eps).ravel()
        self.segment_layer = np.tile(layer, self.cells)
        self.h = np.diff(np.append(self.x, self.L))

    @property
    def L(self) -> float:
        return self.cells * self.laminate.epsilon

    @property
    def size(self) -> int:
        return self.x.size

    @property
    def weights(self) -> np.ndarray:
        """Control-volume lengths (trapezoidal quadrature weights)."""
        return 0.5 * (self.h + np.roll(self.h, 1))

    def segment_values(self, name: str) -> np.ndarray:
        return self.laminate.column(name)[self.segment_layer]

    def check_alignment(self, laminate: Laminate) -> None:
        """Reject a grid whose nodes miss the interfaces of ``laminate``."""
        if laminate.epsilon != self.laminate.epsilon or laminate.n_layers != self.laminate.n_layers:
            raise GridError("grid was built for a different laminate geometry")
        xi = np.outer(np.arange(self.cells), np.ones(laminate.n_layers)) + laminate.interfaces[:-1]
        targets = (xi * laminate.epsilon).ravel()
        gap = np.min(np.abs(self.x[:, None] - targets[None, :]), axis=0)
        if np.max(gap) > 1e-12 * self.L:
            raise GridError("material interfaces do not coincide with grid nodes")


@dataclass
class MicroSolution:
    """Nodal micro fields and fluxes along the layering normal.

    ``sigma``, ``q`` and ``j`` are nodal fluxes reconstructed from the
    segment to the left of each node; ``flux_jumps`` holds the largest
    relative left/right mismatch of each flux over all nodes.
    """

    grid: MicroGrid
    u: np.ndarray
    theta: np.ndarray
    eta: np.ndarray
    sigma: np.ndarray
    q: np.ndarray
    j: np.ndarray
    flux_jumps: dict = field(default_factory=dict)
    source_imbalance: dict = field(default_factory=dict)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def mean(self, name: str) -> float:
        w = self.grid.weights
        return float(np.dot(w, getattr(self, name)) / self.grid.L)


def _periodic_operator(grid: MicroGrid, coeff: np.ndarray) -> sp.csr_matrix:
    """Discrete ``(k f')'`` with ``k`` constant on each segment."""
    n = grid.size
    g = coeff / grid.h
    idx = np.arange(n)
    right = (idx + 1) % n
    # segment s couples nodes s and s+1
    rows = np.concatenate([idx, idx, right, right])
    cols = np.concatenate([idx, right, right, idx])
    vals = np.concatenate([-g, g, -g, g])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _solve_periodic(grid: MicroGrid, A: sp.csr_matrix, rhs: np.ndarray, label: str) -> np.ndarray:
    """Solve ``A f = rhs`` with zero weighted mean via a bordered system."""
    n = grid.size
    w = grid.weights / grid.L
    ones = sp.csr_matrix(np.ones((n, 1)))
    M = sp.bmat([[A, ones], [sp.csr_matrix(w[None, :]), None]], format="csc")
    sol = spla.spsolve(M, np.append(rhs, 0.0))
    f = sol[:n]
    if not np.all(np.isfinite(f)):
        raise HeteroSolveError(f"{label}: linear solve returned non-finite values")
    scale = max(float(np.max(np.abs(rhs))), float(np.max(abs(A) @ np.abs(f))), 1e-300)
    residual = float(np.max(np.abs(A @ f + sol[n] - rhs))) / scale
    if residual > SOLVE_TOL:
        raise HeteroSolveError(f"{label}: relative residual {residual:.3e} exceeds {SOLVE_TOL}")
    return f


def _relative_jump(left: np.ndarray, right: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(left))), float(np.max(np.abs(right))))
    return 0.0 if scale == 0.0 else float(np.max(np.abs(left - right))) / scale


def solve_heterogeneous(laminate: Laminate, load: HarmonicLoad, grid: MicroGrid) -> MicroSolution:
    """Solve the coupled micro problem for a load along the layering normal."""
    if load.direction != 2:
        raise ValueError("heterogeneous solves are only supported along the layering normal (direction 2)")
    grid.check_alignment(laminate)
    if abs(load.L - grid.L) > 1e-12 * grid.L:
        raise GridError(f"load period {load.L} differs from grid length {grid.L}")
    if load.max_wave() and grid.size < MIN_NODES_PER_WAVELENGTH * load.max_wave():
        raise GridError("source wavelengths are under-resolved by the grid")

    x, h = grid.x, grid.h
    lo = x - 0.5 * np.roll(h, 1)
    hi = x + 0.5 * h
    b_left, r_left, s_left = load.integrals(lo, x)
    b_right, r_right, s_right = load.integrals(x, hi)
    b_cv, r_cv, s_cv = b_left + b_right, r_left + r_right, s_left + s_right

    K, D, C = grid.segment_values("K22"), grid.segment_values("D22"), grid.segment_values("C2222")
    alpha, beta = grid.segment_values("alpha22"), grid.segment_values("beta22")

    def nxt(f):
        return np.roll(f, -1)

    def prev(f):
        return np.roll(f, 1)

    theta = _solve_periodic(grid, _periodic_operator(grid, K), -r_cv, "conduction")
    eta = _solve_periodic(grid, _periodic_operator(grid, D), -s_cv, "diffusion")

    # thermodiffusive stress on each segment, face values by linear interpolation
    T = alpha * 0.5 * (theta + nxt(theta)) + beta * 0.5 * (eta + nxt(eta))
    u = _solve_periodic(grid, _periodic_operator(grid, C), T - prev(T) - b_cv, "displacement")

    q_face = -K * (nxt(theta) - theta) / h
    j_face = -D * (nxt(eta) - eta) / h
    s_face = C * (nxt(u) - u) / h - T

    # fluxes at nodes from either side, using q' = r, j' = s, sigma' = -b
    q_l, q_r = prev(q_face) + r_left, q_face - r_right
    j_l, j_r = prev(j_face) + s_left, j_face - s_right
    s_l, s_r = prev(s_face) - b_left, s_face + b_right

    def imbalance(src: np.ndarray) -> float:
        scale = float(np.sum(np.abs(src)))
        return 0.0 if scale == 0.0 else abs(float(np.sum(src))) / scale

    return MicroSolution(
        grid=grid, u=u, theta=theta, eta=eta, sigma=s_l, q=q_l, j=j_l,
        flux_jumps={"sigma": _relative_jump(s_l, s_r), "q": _relative_jump(q_l, q_r), "j": _relative_jump(j_l, j_r)},
        source_imbalance={"b": imbalance(b_cv), "r": imbalance(r_cv), "s": imbalance(s_cv)},
    )


def moving_average(x: np.ndarray, f: np.ndarray, L: float, width: float, at: Optional[np.ndarray] = None) -> np.ndarray:
    """Centered window average of the periodic piecewise-linear interpolant of ``f``.

    The integral of the interpolant is evaluated exactly, so the result is
    the trapezoidal cell average with wraparound.
    """
    x = np.asarray(x, dtype=float)
    f = np.asarray(f, dtype=float)
    at = x if at is None else np.asarray(at, dtype=float)
    xe = np.append(x, L)
    fe = np.append(f, f[0])
    h = np.diff(xe)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * h * (fe[:-1] + fe[1:]))])
    total = cum[-1]

    def primitive(y):
        wraps, rem = np.divmod(y, L)
        seg = np.clip(np.searchsorted(xe, rem, side="right") - 1, 0, x.size - 1)
        t = rem - xe[seg]
        slope = (fe[seg + 1] - fe[seg]) / h[seg]
        return wraps * total + cum[seg] + fe[seg] * t + 0.5 * slope * t * t

    return (primitive(at + 0.5 * width) - primitive(at - 0.5 * width)) / width


def upscale(micro: MicroSolution, laminate: Laminate, at: Optional[np.ndarray] = None):
    """Macroscopic estimates ``(U, Theta, Upsilon)`` as centered cell averages."""
    grid = micro.grid
    if grid.cells < 2:
        raise GridError("up-scaling needs a grid spanning at least two cells")
    eps = laminate.epsilon
    return tuple(moving_average(grid.x, f, grid.L, eps, at) for f in (micro.u, micro.theta, micro.eta))


def downscale_first_order(
    macro: MacroSolution,
    profiles: dict[ProfileKind, PerturbationProfile],
    laminate: Laminate,
    grid: Optional[MicroGrid] = None,
    nodes_per_layer: int = 64,
) -> MicroSolution:
    """First-order reconstruction of the micro fields from the macro solution.

    Without ``grid`` the fields are sampled on an interface-aligned grid
    covering the load period.
    """
    if macro.load.direction != 2:
        raise ValueError("down-scaling is implemented along the layering normal only")
    eps = laminate.epsilon
    if grid is None:
        cells = int(round(macro.load.L / eps))
        if cells < 1 or abs(cells * eps - macro.load.L) > 1e-9 * macro.load.L:
            raise GridError("load period is not a whole number of cells")
        grid = MicroGrid(laminate, cells, nodes_per_layer)
    x = grid.x
    xi = x / eps
    N = profiles[ProfileKind.N222]
    Nt = profiles[ProfileKind.NTILDE2]
    Nh = profiles[ProfileKind.NHAT2]
    M = profiles[ProfileKind.M2]
    W = profiles[ProfileKind.W2]
    U, dU = macro.U(x), macro.U(x, 1)
    Th, dTh = macro.Theta(x), macro.Theta(x, 1)
    Up, dUp = macro.Upsilon(x), macro.Upsilon(x, 1)

    u = U + eps * (N(xi) * dU + Nt(xi) * Th + Nh(xi) * Up)
    theta = Th + eps * M(xi) * dTh
    eta = Up + eps * W(xi) * dUp

    # leading-order fluxes; interface nodes take the phase on their right
    layer = np.clip(np.searchsorted(laminate.interfaces, np.mod(xi, 1.0), side="right") - 1, 0, laminate.n_layers - 1)
    col = laminate.column
    C, a, b = col("C2222")[layer], col("alpha22")[layer], col("beta22")[layer]
    K, D = col("K22")[layer], col("D22")[layer]
    sigma = C * (dU * (1.0 + N.derivative(xi)) + Nt.derivative(xi) * Th + Nh.derivative(xi) * Up) - a * Th - b * Up
    q = -K * (1.0 + M.derivative(xi)) * dTh
    j = -D * (1.0 + W.derivative(xi)) * dUp
    return MicroSolution(grid=grid, u=u, theta=theta, eta=eta, sigma=sigma, q=q, j=j)


FIELDS = ("U", "Theta", "Upsilon")


@dataclass
class ComparisonReport:
    """Relative errors between smoothed micro and macro fields.

    Entries of ``errors`` are ``None`` for fields that vanish identically.
    """

    errors: dict
    grid: dict
    runtimes: dict = field(default_factory=dict)
    averaging: str = "centered moving average of width epsilon applied to both fields"

    def l2(self, name: str) -> Optional[float]:
        e = self.errors.get(name)
        return None if e is None else e["l2"]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def relative_errors(a: np.ndarray, b: np.ndarray, weights: np.ndarray) -> Optional[dict]:
    """Weighted relative L2 and L-infinity errors of ``a`` against reference ``b``."""
    ref2 = float(np.dot(weights, b * b))
    if ref2 == 0.0:
        return None
    d = a - b
    return {
        "l2": float(np.sqrt(np.dot(weights, d * d) / ref2)),
        "linf": float(np.max(np.abs(d)) / np.max(np.abs(b))),
    }


def compare(macro: MacroSolution, micro: MicroSolution, laminate: Laminate, runtimes: Optional[dict] = None) -> ComparisonReport:
    """Compare up-scaled micro fields with the macro fields after identical smoothing."""
    grid = micro.grid
    x, L, eps = grid.x, grid.L, laminate.epsilon
    up = upscale(micro, laminate)
    macro_fields = (macro.U(x), macro.Theta(x), macro.Upsilon(x))
    smoothed = [moving_average(x, f, L, eps) for f in macro_fields]
    w = grid.weights
    errors = {name: relative_errors(a, b, w) for name, a, b in zip(FIELDS, up, smoothed)}
    meta = {
        "cells": grid.cells,
        "nodes_per_layer": grid.nodes_per_layer,
        "nodes": grid.size,
        "L": L,
        "epsilon": eps,
        "L_over_epsilon": L / eps,
    }
    return ComparisonReport(errors=errors, grid=meta, runtimes=dict(runtimes or {}))


def micro_errors(predicted: MicroSolution, micro: MicroSolution) -> dict:
    """Relative errors of a reconstructed micro solution against a direct solve."""
    w = micro.grid.weights
    return {
        name: relative_errors(getattr(predicted, attr), getattr(micro, attr), w)
        for name, attr in (("u", "u"), ("theta", "theta"), ("eta", "eta"))
    }


def homogenize(laminate: Laminate) -> EffectiveProperties:
    if laminate.n_layers == 2:
        return effective_constants_biphase(laminate)
    return effective_cell_solver(laminate)


def profiles_for(laminate: Laminate) -> dict[ProfileKind, PerturbationProfile]:
    if laminate.n_layers == 2:
        return perturbation_profiles_biphase(laminate)
    return profiles_from_solutions(solve_cell_problems(laminate))


@dataclass
class ComparisonRun:
    report: ComparisonReport
    macro: MacroSolution
    micro: MicroSolution
    effective: EffectiveProperties
    laminate: Laminate


def run_comparison(
    laminate: Laminate,
    load: HarmonicLoad,
    L_over_epsilon: int,
    nodes_per_layer: int = 64,
) -> ComparisonRun:
    """Homogenized vs heterogeneous comparison on a domain of ``L_over_epsilon`` cells."""
    if L_over_epsilon < 2 or int(L_over_epsilon) != L_over_epsilon:
        raise GridError(f"L/epsilon must be an integer >= 2, got {L_over_epsilon}")
    cells = int(L_over_epsilon)
    lam = laminate.with_epsilon(load.L / cells)
    t0 = time.perf_counter()
    eff = homogenize(lam)
    macro = solve_homogenized(eff, load)
    t1 = time.perf_counter()
    grid = MicroGrid(lam, cells, nodes_per_layer)
    micro = solve_heterogeneous(lam, load, grid)
    t2 = time.perf_counter()
    report = compare(macro, micro, lam, {"homogenized_s": t1 - t0, "heterogeneous_s": t2 - t1})
    report.runtimes["compare_s"] = time.perf_counter() - t2
    return ComparisonRun(report, macro, micro, eff, lam)
