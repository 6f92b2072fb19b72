"""Homogenized thermodiffusive fields under periodic harmonic loads.

Loads act along one orthotropy axis ``j``::

    b(x) = B cos(2 pi m x / L),  r(x) = R cos(2 pi n x / L),  s(x) = S cos(2 pi p x / L)

and the homogenized equations

    C_jjjj U'' - alpha_jj Theta' - beta_jj Upsilon' + b = 0
    K_jj Theta'' + r = 0,      D_jj Upsilon'' + s = 0

are solved in closed form (real parts, real amplitudes).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .homogenizer import EffectiveProperties, phase_average
from .materials import Laminate, MaterialError

TWO_PI = 2.0 * math.pi


class LoadError(ValueError):
    pass


@dataclass(frozen=True)
class HarmonicLoad:
    direction: int = 2
    B: float = 1.0
    R: float = 0.0
    S: float = 0.0
    m: int = 1
    n: int = 1
    p: int = 1
    L: float = 1.0

    def __post_init__(self):
        if self.direction not in (1, 2):
            raise LoadError(f"direction must be 1 or 2, got {self.direction}")
        if not self.L > 0.0:
            raise LoadError(f"L must be positive, got {self.L}")
        for amp, wave, label in ((self.B, self.m, "m"), (self.R, self.n, "n"), (self.S, self.p, "p")):
            if int(wave) != wave:
                raise LoadError(f"wave number {label} must be an integer, got {wave}")
            if amp != 0.0 and wave == 0:
                raise LoadError(f"wave number {label} must be nonzero for a nonzero amplitude")

    def k(self, wave: int) -> float:
        return TWO_PI * wave / self.L

    def body_force(self, x) -> np.ndarray:
        return self.B * np.cos(self.k(self.m) * np.asarray(x, dtype=float))

    def heat_source(self, x) -> np.ndarray:
        return self.R * np.cos(self.k(self.n) * np.asarray(x, dtype=float))

    def mass_source(self, x) -> np.ndarray:
        return self.S * np.cos(self.k(self.p) * np.asarray(x, dtype=float))

    def integrals(self, a, b) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Exact integrals of the three sources over ``[a, b]``."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)

        def cos_int(amp, wave):
            if amp == 0.0:
                return np.zeros(np.broadcast(a, b).shape)
            k = self.k(wave)
            return amp * (np.sin(k * b) - np.sin(k * a)) / k

        return cos_int(self.B, self.m), cos_int(self.R, self.n), cos_int(self.S, self.p)

    def max_wave(self) -> int:
        waves = [abs(w) for amp, w in ((self.B, self.m), (self.R, self.n), (self.S, self.p)) if amp != 0.0]
        return max(waves, default=0)


@dataclass(frozen=True)
class MacroSolution:
    """Closed-form homogenized fields for one load case.

    ``U(x) = u_cos cos(k_m x) + u_sin_theta sin(k_n x) + u_sin_eta sin(k_p x)``,
    ``Theta(x) = theta_amp cos(k_n x)``, ``Upsilon(x) = upsilon_amp cos(k_p x)``.
    """

    load: HarmonicLoad
    C: float
    alpha: float
    beta: float
    K: float
    D: float
    u_cos: float
    u_sin_theta: float
    u_sin_eta: float
    theta_amp: float
    upsilon_amp: float

    def _k(self):
        ld = self.load
        return ld.k(ld.m), ld.k(ld.n), ld.k(ld.p)

    def U(self, x, order: int = 0) -> np.ndarray:
        """Displacement or its ``order``-th derivative (0, 1 or 2)."""
        x = np.asarray(x, dtype=float)
        km, kn, kp = self._k()
        return (
            self.u_cos * _dcos(km, x, order)
            + self.u_sin_theta * _dsin(kn, x, order)
            + self.u_sin_eta * _dsin(kp, x, order)
        )

    def Theta(self, x, order: int = 0) -> np.ndarray:
        return self.theta_amp * _dcos(self._k()[1], np.asarray(x, dtype=float), order)

    def Upsilon(self, x, order: int = 0) -> np.ndarray:
        return self.upsilon_amp * _dcos(self._k()[2], np.asarray(x, dtype=float), order)

    @property
    def xi_alpha(self) -> float:
        """Thermal amplitude function; NaN without a body force."""
        ld = self.load
        if ld.B == 0.0:
            return math.nan
        return self.alpha * ld.R * ld.L / (self.K * ld.B)

    @property
    def xi_beta(self) -> float:
        ld = self.load
        if ld.B == 0.0:
            return math.nan
        if ld.S == 0.0:
            return 0.0
        return self.beta * ld.S * ld.L / (self.D * ld.B)

    def U_star(self, x) -> np.ndarray:
        ld = self.load
        if ld.B == 0.0:
            raise LoadError("U* is undefined without a body force")
        return self.U(x) * self.C * (TWO_PI * ld.m) ** 2 / (ld.B * ld.L ** 2)

    def Theta_star(self, x) -> np.ndarray:
        ld = self.load
        if ld.R == 0.0:
            raise LoadError("Theta* is undefined without a heat source")
        return self.Theta(x) * self.K * (TWO_PI * ld.n) ** 2 / (ld.R * ld.L ** 2)

    def Upsilon_star(self, x) -> np.ndarray:
        ld = self.load
        if ld.S == 0.0:
            raise LoadError("Upsilon* is undefined without a mass source")
        return self.Upsilon(x) * self.D * (TWO_PI * ld.p) ** 2 / (ld.S * ld.L ** 2)

    def residuals(self, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Relative residuals of the three field equations at ``x``.

        Each residual is divided by the largest magnitude among the terms
        of its equation over all points.
        """
        ld = self.load
        x = np.asarray(x, dtype=float)
        terms_u = [self.C * self.U(x, 2), -self.alpha * self.Theta(x, 1), -self.beta * self.Upsilon(x, 1), ld.body_force(x)]
        terms_t = [self.K * self.Theta(x, 2), ld.heat_source(x)]
        terms_e = [self.D * self.Upsilon(x, 2), ld.mass_source(x)]
        out = []
        for terms in (terms_u, terms_t, terms_e):
            scale = max(float(np.max(np.abs(t))) for t in terms)
            total = np.sum(terms, axis=0)
            out.append(total / scale if scale > 0.0 else total)
        return tuple(out)


def _dcos(k: float, x: np.ndarray, order: int) -> np.ndarray:
    # derivatives of cos(kx): -k sin, -k^2 cos
    return [np.cos(k * x), -k * np.sin(k * x), -k * k * np.cos(k * x)][order]


def _dsin(k: float, x: np.ndarray, order: int) -> np.ndarray:
    return [np.sin(k * x), k * np.cos(k * x), -k * k * np.sin(k * x)][order]


def axis_constants(eff: EffectiveProperties, direction: int) -> tuple[float, float, float, float, float]:
    j = f"{direction}{direction}"
    return (
        eff.get(f"C{j}{j}"),
        eff.get(f"alpha{j}"),
        eff.get(f"beta{j}"),
        eff.get(f"K{j}"),
        eff.get(f"D{j}"),
    )


def solve_homogenized(eff: EffectiveProperties, load: HarmonicLoad) -> MacroSolution:
    """Closed-form homogenized response to a single-axis harmonic load."""
    C, alpha, beta, K, D = axis_constants(eff, load.direction)
    if not C > 0.0 or not K > 0.0:
        raise MaterialError(f"C and K along axis {load.direction} must be positive")
    if load.S != 0.0 and not D > 0.0:
        raise LoadError("a mass source needs a positive diffusivity along the load axis")
    L = load.L
    u_cos = load.B * L ** 2 / (C * (TWO_PI * load.m) ** 2) if load.B != 0.0 else 0.0
    theta_amp = u_sin_theta = 0.0
    if load.R != 0.0:
        theta_amp = load.R * L ** 2 / (K * (TWO_PI * load.n) ** 2)
        u_sin_theta = load.R * alpha * L ** 3 / (C * K * (TWO_PI * load.n) ** 3)
    upsilon_amp = u_sin_eta = 0.0
    if load.S != 0.0:
        upsilon_amp = load.S * L ** 2 / (D * (TWO_PI * load.p) ** 2)
        u_sin_eta = load.S * beta * L ** 3 / (C * D * (TWO_PI * load.p) ** 3)
    return MacroSolution(load, C, alpha, beta, K, D, u_cos, u_sin_theta, u_sin_eta, theta_amp, upsilon_amp)


@dataclass(frozen=True)
class AmplitudeFunctions:
    xi_alpha: float
    xi_beta: float
    xi_alpha_tilde: Optional[float]
    xi_beta_tilde: Optional[float]


def amplitude_functions(eff: EffectiveProperties, laminate: Laminate, load: HarmonicLoad) -> AmplitudeFunctions:
    """Thermal and diffusive amplitude functions and their normalized forms.

    The normalized forms compare the effective ratios alpha/K and beta/D
    with the ratios of the two-phase averages, so they do not depend on
    the load amplitudes.  They are ``None`` when a phase average vanishes.
    """
    _, alpha, beta, K, D = axis_constants(eff, load.direction)
    if load.B == 0.0:
        raise LoadError("amplitude functions need a nonzero body force")
    scale = load.L / load.B
    xi_a = alpha * load.R * scale / K
    xi_b = beta * load.S * scale / D
    tilde_a = normalized_amplitude(eff, laminate, load.direction, "alpha", "K")
    tilde_b = normalized_amplitude(eff, laminate, load.direction, "beta", "D")
    return AmplitudeFunctions(xi_a, xi_b, tilde_a, tilde_b)


def normalized_amplitude(
    eff: EffectiveProperties, laminate: Laminate, direction: int, coupling: str, transport: str
) -> Optional[float]:
    j = f"{direction}{direction}"
    hat_c = phase_average(laminate, f"{coupling}{j}")
    hat_t = phase_average(laminate, f"{transport}{j}")
    if hat_c == 0.0:
        return None
    return (eff.get(f"{coupling}{j}") / eff.get(f"{transport}{j}")) / (hat_c / hat_t)


def load_for_amplitudes(
    eff: EffectiveProperties,
    direction: int = 2,
    xi_alpha: float = 0.0,
    xi_beta: float = 0.0,
    B: float = 1.0,
    m: int = 1,
    n: int = 1,
    p: int = 1,
    L: float = 1.0,
) -> HarmonicLoad:
    """Load whose heat/mass source amplitudes give prescribed amplitude functions."""
    _, alpha, beta, K, D = axis_constants(eff, direction)
    R = S = 0.0
    if xi_alpha != 0.0:
        if alpha == 0.0:
            raise LoadError("cannot reach a nonzero thermal amplitude with zero alpha")
        R = xi_alpha * K * B / (alpha * L)
    if xi_beta != 0.0:
        if beta == 0.0:
            raise LoadError("cannot reach a nonzero diffusive amplitude with zero beta")
        S = xi_beta * D * B / (beta * L)
    return HarmonicLoad(direction, B, R, S, m, n, p, L)
