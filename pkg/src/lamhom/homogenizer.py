"""Closed-form first-order homogenization of bi-phase laminates.

The fluctuation functions of a laminate are piecewise linear in the fast
coordinate across the layering.  Phase ``a`` is the first layer of the
cell and phase ``b`` the second; ``zeta = f_a / f_b``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .materials import (
    CONSTANT_NAMES,
    Laminate,
    MaterialError,
    PhaseProperties,
    _ConstantsMixin,
    is_positive_definite,
)


class ProfileKind(str, enum.Enum):
    N211 = "N211"
    N222 = "N222"
    N112 = "N112"
    NTILDE2 = "Ntilde2"
    NHAT2 = "Nhat2"
    M2 = "M2"
    W2 = "W2"


@dataclass(frozen=True)
class PerturbationProfile:
    """Zero-mean, cell-periodic, piecewise-linear fluctuation function.

    On layer ``i`` (``edges[i] <= xi < edges[i+1]``) the profile equals
    ``slopes[i] * xi + offsets[i]``.
    """

    kind: ProfileKind
    slopes: np.ndarray
    offsets: np.ndarray
    edges: np.ndarray

    @classmethod
    def from_slopes(cls, kind, slopes: Sequence[float], edges: Sequence[float]) -> "PerturbationProfile":
        """Integrate per-layer slopes and fix the constant by a zero cell mean."""
        slopes = np.asarray(slopes, dtype=float)
        edges = np.asarray(edges, dtype=float)
        widths = np.diff(edges)
        starts = np.concatenate([[0.0], np.cumsum(slopes * widths)[:-1]])
        # integral of each linear piece, start value + half the rise
        mean = float(np.sum(widths * (starts + 0.5 * slopes * widths)))
        offsets = starts - slopes * edges[:-1] - mean
        return cls(ProfileKind(kind), slopes, offsets, edges)

    @classmethod
    def centered(cls, kind, slopes: Sequence[float], edges: Sequence[float]) -> "PerturbationProfile":
        """Profile vanishing at every layer midpoint (valid for two layers)."""
        slopes = np.asarray(slopes, dtype=float)
        edges = np.asarray(edges, dtype=float)
        mids = 0.5 * (edges[:-1] + edges[1:])
        return cls(ProfileKind(kind), slopes, -slopes * mids, edges)

    def _layer(self, xi: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.edges, xi, side="right") - 1
        return np.clip(idx, 0, len(self.slopes) - 1)

    def __call__(self, xi) -> np.ndarray:
        xi = np.mod(np.asarray(xi, dtype=float), 1.0)
        idx = self._layer(xi)
        return self.slopes[idx] * xi + self.offsets[idx]

    def derivative(self, xi) -> np.ndarray:
        xi = np.mod(np.asarray(xi, dtype=float), 1.0)
        return self.slopes[self._layer(xi)]

    def mean(self) -> float:
        w = np.diff(self.edges)
        mids = 0.5 * (self.edges[:-1] + self.edges[1:])
        return float(np.sum(w * (self.slopes * mids + self.offsets)))

    def jumps(self) -> np.ndarray:
        """Value jumps at each interface, the last entry being the periodic wrap."""
        e = self.edges
        left = self.slopes * e[1:] + self.offsets
        right = np.roll(self.slopes * e[:-1] + self.offsets, -1)
        return right - left

    def max_abs(self) -> float:
        e = self.edges
        vals = np.concatenate([self.slopes * e[:-1] + self.offsets, self.slopes * e[1:] + self.offsets])
        return float(np.max(np.abs(vals)))


@dataclass(frozen=True)
class EffectiveProperties(_ConstantsMixin):
    """Overall constants of the equivalent first-order continuum."""

    C1111: float
    C2222: float
    C1122: float
    C1212: float
    alpha11: float
    alpha22: float
    beta11: float
    beta22: float
    K11: float
    K22: float
    D11: float
    D22: float
    K12: float = 0.0
    D12: float = 0.0
    C2211: Optional[float] = None

    def is_admissible(self) -> bool:
        return (
            is_positive_definite(self.C1111, self.C2222, self.C1122, self.C1212)
            and min(self.K11, self.K22, self.D11, self.D22) > 0.0
        )

    @classmethod
    def from_phase(cls, phase: PhaseProperties) -> "EffectiveProperties":
        return cls(**phase.as_dict())

    def max_relative_difference(self, other: "EffectiveProperties") -> float:
        return max(relative_difference(self.get(n), other.get(n)) for n in CONSTANT_NAMES)


def relative_difference(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(a - b) / scale


def _require_biphase(laminate: Laminate) -> tuple[PhaseProperties, PhaseProperties, float]:
    if laminate.n_layers != 2:
        raise MaterialError(f"expected a bi-phase laminate, got {laminate.n_layers} layers")
    return laminate.layers[0].phase, laminate.layers[1].phase, laminate.zeta


def perturbation_profiles_biphase(laminate: Laminate) -> dict[ProfileKind, PerturbationProfile]:
    """The seven non-vanishing first-order fluctuation functions of a bi-phase cell."""
    a, b, z = _require_biphase(laminate)
    edges = laminate.interfaces

    def pair(num_a: float, den: float) -> tuple[float, float]:
        # slope in a is num/den, slope in b is -zeta*num/den (periodic closure)
        return num_a / den, -z * num_a / den

    den_c = a.C2222 + z * b.C2222
    den_s = a.C1212 + z * b.C1212
    den_k = a.K22 + z * b.K22
    den_d = a.D22 + z * b.D22
    slopes = {
        ProfileKind.N211: pair(b.C1122 - a.C1122, den_c),
        ProfileKind.N222: pair(b.C2222 - a.C2222, den_c),
        ProfileKind.N112: pair(b.C1212 - a.C1212, den_s),
        ProfileKind.NTILDE2: pair(a.alpha22 - b.alpha22, den_c),
        ProfileKind.NHAT2: pair(a.beta22 - b.beta22, den_c),
        ProfileKind.M2: pair(b.K22 - a.K22, den_k),
        ProfileKind.W2: pair(b.D22 - a.D22, den_d),
    }
    return {k: PerturbationProfile.centered(k, s, edges) for k, s in slopes.items()}


def effective_constants_biphase(laminate: Laminate) -> EffectiveProperties:
    """Exact overall constants of an orthotropic bi-phase laminate."""
    a, b, z = _require_biphase(laminate)
    den = a.C2222 + z * b.C2222

    C1111 = (
        z * z * a.C1111 * b.C2222
        + z * (b.C1111 * b.C2222 - a.C1122 ** 2 + 2.0 * a.C1122 * b.C1122 - b.C1122 ** 2 + a.C1111 * a.C2222)
        + b.C1111 * a.C2222
    ) / ((z + 1.0) * den)
    C2222 = (z + 1.0) * a.C2222 * b.C2222 / den
    C1212 = (z + 1.0) * a.C1212 * b.C1212 / (a.C1212 + z * b.C1212)
    C1122 = (b.C1122 * a.C2222 + z * a.C1122 * b.C2222) / den

    def coupling(x11a, x22a, x11b, x22b) -> tuple[float, float]:
        x11 = -(
            z * (b.C1122 * x22b - b.C1122 * x22a - b.C2222 * x11b - a.C1122 * x22b + a.C1122 * x22a - a.C2222 * x11a)
            - z * z * b.C2222 * x11a
            - a.C2222 * x11b
        ) / ((z + 1.0) * den)
        x22 = (z * b.C2222 * x22a + x22b * a.C2222) / den
        return x11, x22

    alpha11, alpha22 = coupling(a.alpha11, a.alpha22, b.alpha11, b.alpha22)
    beta11, beta22 = coupling(a.beta11, a.beta22, b.beta11, b.beta22)

    return EffectiveProperties(
        C1111=C1111, C2222=C2222, C1122=C1122, C1212=C1212,
        alpha11=alpha11, alpha22=alpha22, beta11=beta11, beta22=beta22,
        K11=(b.K11 + z * a.K11) / (z + 1.0),
        K22=(z + 1.0) * a.K22 * b.K22 / (a.K22 + z * b.K22),
        D11=(b.D11 + z * a.D11) / (z + 1.0),
        D22=(z + 1.0) * a.D22 * b.D22 / (a.D22 + z * b.D22),
        C2211=C1122,
    )


def effective_constants_isotropic(laminate: Laminate) -> EffectiveProperties:
    """Overall constants written directly in the phases' plane moduli and Poisson ratios."""
    _require_biphase(laminate)
    if not laminate.is_isotropic():
        raise MaterialError("effective_constants_isotropic needs two isotropic phases")
    pa, pb = (layer.phase.isotropic for layer in laminate.layers)
    z = laminate.zeta
    Ea, Eb = pa.E_tilde, pb.E_tilde
    na, nb = pa.nu_tilde, pb.nu_tilde

    # common denominator, negative for admissible phases
    q = z * (Eb * na ** 2 - Eb) + Ea * nb ** 2 - Ea
    C1111 = (
        -z * z * Ea * Eb
        + z * ((Ea * nb) ** 2 - 2.0 * Ea * na * Eb * nb + (Eb * na) ** 2 - Ea ** 2 - Eb ** 2)
        - Ea * Eb
    ) / ((z + 1.0) * q)
    C2222 = -(z + 1.0) * Ea * Eb / q
    C1212 = (z + 1.0) * Ea * Eb / (2.0 * (Ea + Ea * nb + z * (Eb * na + Eb)))
    C1122 = -Ea * Eb * (nb + z * na) / q

    A11 = z * z * (Eb * na ** 2 - Eb) + z * (
        Ea * nb ** 2 - Eb * nb + Eb * nb * na ** 2 + Ea * na - Ea * na * nb ** 2 - Ea
    )
    B11 = z * (Ea * na * nb ** 2 - Eb + Eb * na ** 2 + Eb * nb - Eb * nb * na ** 2 - Ea * na) + Ea * nb ** 2 - Ea
    Delta11 = (z + 1.0) * q

    def coupling(xa: float, xb: float) -> tuple[float, float]:
        x11 = (A11 * xa + B11 * xb) / Delta11
        x22 = (z * (Eb * na ** 2 - Eb) * xa + Ea * (nb ** 2 - 1.0) * xb) / q
        return x11, x22

    alpha11, alpha22 = coupling(pa.alpha, pb.alpha)
    beta11, beta22 = coupling(pa.beta, pb.beta)
    return EffectiveProperties(
        C1111=C1111, C2222=C2222, C1122=C1122, C1212=C1212,
        alpha11=alpha11, alpha22=alpha22, beta11=beta11, beta22=beta22,
        K11=(pb.K + z * pa.K) / (z + 1.0),
        K22=(z + 1.0) * pa.K * pb.K / (pa.K + z * pb.K),
        D11=(pb.D + z * pa.D) / (z + 1.0),
        D22=(z + 1.0) * pa.D * pb.D / (pa.D + z * pb.D),
        C2211=C1122,
    )


@dataclass(frozen=True)
class NormalizedConstants:
    """Effective constants divided by the two-phase averages.

    Components whose phase average vanishes are NaN and listed in
    ``undefined``.
    """

    values: dict
    undefined: tuple[str, ...] = field(default_factory=tuple)

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def as_dict(self) -> dict:
        return dict(self.values)


def phase_average(laminate: Laminate, name: str) -> float:
    a, b, _ = _require_biphase(laminate)
    return 0.5 * (a.get(name) + b.get(name))


def normalize_constants(eff: EffectiveProperties, laminate: Laminate) -> NormalizedConstants:
    """Divide each effective constant by the plain average of the two phases."""
    _require_biphase(laminate)
    values, undefined = {}, []
    for name in CONSTANT_NAMES:
        hat = phase_average(laminate, name)
        if hat == 0.0:
            values[name] = math.nan
            undefined.append(name)
        else:
            values[name] = eff.get(name) / hat
    return NormalizedConstants(values, tuple(undefined))
