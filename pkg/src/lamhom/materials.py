"""Phase and laminate definitions for plane thermodiffusive elasticity.

Layers are stacked along the e2 axis.  Every phase is orthotropic with
axes aligned to the layering; isotropic phases are built through
:func:`make_isotropic_phase`, which also records the inputs so that
dimensionless ratios can be formed later.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields
from typing import Optional, Sequence

import numpy as np

FRACTION_TOL = 1e-12

CONSTANT_NAMES = (
    "C1111", "C2222", "C1122", "C1212",
    "alpha11", "alpha22", "beta11", "beta22",
    "K11", "K22", "D11", "D22",
)


class MaterialError(ValueError):
    """Raised when a phase or laminate is physically inadmissible."""


class PlaneAssumption(str, enum.Enum):
    PLANE_STRESS = "plane-stress"
    PLANE_STRAIN = "plane-strain"


@dataclass(frozen=True)
class IsotropicInputs:
    """Engineering inputs an isotropic phase was built from."""

    E: float
    nu: float
    alpha: float
    beta: float
    K: float
    D: float
    assumption: PlaneAssumption

    @property
    def E_tilde(self) -> float:
        return plane_modulus(self.E, self.nu, self.assumption)[0]

    @property
    def nu_tilde(self) -> float:
        return plane_modulus(self.E, self.nu, self.assumption)[1]


class _ConstantsMixin:
    """Shared accessors for objects carrying the twelve plane constants."""

    def voigt(self) -> np.ndarray:
        """3x3 stiffness in Voigt order (11, 22, 12) with engineering shear."""
        return np.array([
            [self.C1111, self.C1122, 0.0],
            [self.C1122, self.C2222, 0.0],
            [0.0, 0.0, self.C1212],
        ])

    def as_dict(self) -> dict:
        return {name: float(getattr(self, name)) for name in CONSTANT_NAMES}

    def get(self, name: str) -> float:
        return float(getattr(self, name))


@dataclass(frozen=True)
class PhaseProperties(_ConstantsMixin):
    """Constitutive constants of one homogeneous orthotropic phase.

    ``alpha`` and ``beta`` are stress-coupling moduli (stress per unit
    temperature / chemical potential), not expansion coefficients.
    """

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
    isotropic: Optional[IsotropicInputs] = None

    def __post_init__(self):
        for name in CONSTANT_NAMES:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise MaterialError(f"{name} must be finite, got {value!r}")
        if not is_positive_definite(self.C1111, self.C2222, self.C1122, self.C1212):
            raise MaterialError(
                "elastic Voigt matrix is not positive definite "
                f"(C1111={self.C1111}, C2222={self.C2222}, "
                f"C1122={self.C1122}, C1212={self.C1212})"
            )
        for name in ("K11", "K22", "D11", "D22"):
            if getattr(self, name) <= 0.0:
                raise MaterialError(f"{name} must be positive, got {getattr(self, name)}")

    @classmethod
    def from_dict(cls, data: dict) -> "PhaseProperties":
        missing = [n for n in CONSTANT_NAMES if n not in data]
        if missing:
            raise MaterialError(f"missing orthotropic constants: {', '.join(missing)}")
        return cls(**{n: float(data[n]) for n in CONSTANT_NAMES})


def is_positive_definite(C1111: float, C2222: float, C1122: float, C1212: float) -> bool:
    # leading minors of the block-diagonal Voigt matrix
    return C1111 > 0.0 and C1212 > 0.0 and C1111 * C2222 - C1122 * C1122 > 0.0


def plane_modulus(E: float, nu: float, assumption: PlaneAssumption) -> tuple[float, float]:
    """Return the in-plane modulus and Poisson ratio for the chosen reduction."""
    assumption = PlaneAssumption(assumption)
    if assumption is PlaneAssumption.PLANE_STRAIN:
        return E / (1.0 - nu * nu), nu / (1.0 - nu)
    return E, nu


def make_isotropic_phase(
    E: float,
    nu: float,
    alpha: float = 0.0,
    beta: float = 0.0,
    K: float = 1.0,
    D: float = 1.0,
    assumption: PlaneAssumption | str = PlaneAssumption.PLANE_STRESS,
) -> PhaseProperties:
    """Build an isotropic phase under plane stress or plane strain.

    Parameters
    ----------
    E, nu : float
        Young's modulus (> 0) and Poisson ratio in (-1, 0.5).
    alpha, beta : float
        Thermal and diffusive stress-coupling moduli.
    K, D : float
        Heat conductivity and mass diffusivity (> 0).
    assumption : PlaneAssumption or str
        ``"plane-stress"`` (default) or ``"plane-strain"``.
    """
    assumption = PlaneAssumption(assumption)
    if not (-1.0 < nu < 0.5):
        raise MaterialError(f"Poisson ratio must lie in (-1, 0.5), got {nu}")
    for name, value in (("E", E), ("K", K), ("D", D)):
        if not value > 0.0:
            raise MaterialError(f"{name} must be positive, got {value}")

    Et, nut = plane_modulus(E, nu, assumption)
    c = Et / (1.0 - nut * nut)
    return PhaseProperties(
        C1111=c,
        C2222=c,
        C1122=nut * c,
        C1212=Et / (2.0 * (1.0 + nut)),
        alpha11=alpha, alpha22=alpha,
        beta11=beta, beta22=beta,
        K11=K, K22=K,
        D11=D, D22=D,
        isotropic=IsotropicInputs(E, nu, alpha, beta, K, D, assumption),
    )


@dataclass(frozen=True)
class Layer:
    phase: PhaseProperties
    fraction: float


@dataclass(frozen=True)
class Laminate:
    """Periodic stack of layers along e2 with cell period ``epsilon``.

    Layers are laid out in order from the bottom of each cell, so layer
    ``i`` occupies ``[sum(f[:i]), sum(f[:i+1]))`` of the unit cell.
    """

    layers: tuple[Layer, ...]
    epsilon: float = 1.0
    assumption: Optional[PlaneAssumption] = None

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if len(self.layers) < 1:
            raise MaterialError("a laminate needs at least one layer")
        if not self.epsilon > 0.0:
            raise MaterialError(f"epsilon must be positive, got {self.epsilon}")
        for i, layer in enumerate(self.layers):
            if not (0.0 < layer.fraction <= 1.0):
                raise MaterialError(
                    f"layer {i}: thickness fraction must lie in (0, 1], got {layer.fraction}"
                )
        total = math.fsum(layer.fraction for layer in self.layers)
        if abs(total - 1.0) > FRACTION_TOL:
            raise MaterialError(f"thickness fractions sum to {total!r}, expected 1")

    @classmethod
    def from_phases(
        cls,
        phases: Sequence[PhaseProperties],
        fractions: Sequence[float],
        epsilon: float = 1.0,
        assumption: Optional[PlaneAssumption] = None,
    ) -> "Laminate":
        if len(phases) != len(fractions):
            raise MaterialError("phases and fractions differ in length")
        return cls(tuple(Layer(p, float(f)) for p, f in zip(phases, fractions)), epsilon, assumption)

    @classmethod
    def biphase(
        cls,
        phase_a: PhaseProperties,
        phase_b: PhaseProperties,
        zeta: float = 1.0,
        epsilon: float = 1.0,
        assumption: Optional[PlaneAssumption] = None,
    ) -> "Laminate":
        """Two-layer laminate with thickness ratio ``zeta = f_a / f_b``."""
        if not zeta > 0.0:
            raise MaterialError(f"zeta must be positive, got {zeta}")
        f_a = zeta / (1.0 + zeta)
        return cls.from_phases([phase_a, phase_b], [f_a, 1.0 - f_a], epsilon, assumption)

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def phases(self) -> list[PhaseProperties]:
        return [layer.phase for layer in self.layers]

    @property
    def fractions(self) -> np.ndarray:
        return np.array([layer.fraction for layer in self.layers])

    @property
    def interfaces(self) -> np.ndarray:
        """Layer boundaries in the unit cell, ``[0, ..., 1]``."""
        edges = np.concatenate([[0.0], np.cumsum(self.fractions)])
        edges[-1] = 1.0
        return edges

    @property
    def zeta(self) -> float:
        if self.n_layers != 2:
            raise MaterialError("zeta is only defined for bi-phase laminates")
        return self.layers[0].fraction / self.layers[1].fraction

    def column(self, name: str) -> np.ndarray:
        """Per-layer values of constant ``name``."""
        return np.array([getattr(layer.phase, name) for layer in self.layers], dtype=float)

    def with_epsilon(self, epsilon: float) -> "Laminate":
        return Laminate(self.layers, epsilon, self.assumption)

    def subdivided(self, k: int) -> "Laminate":
        """Split every layer into ``k`` equal sublayers of the same phase."""
        layers = [Layer(layer.phase, layer.fraction / k) for layer in self.layers for _ in range(k)]
        return Laminate(tuple(layers), self.epsilon, self.assumption)

    def is_isotropic(self) -> bool:
        return all(layer.phase.isotropic is not None for layer in self.layers)


RATIO_NAMES = ("rho_C", "rho_alpha", "rho_beta", "rho_K", "rho_D")


@dataclass(frozen=True)
class DimensionlessRatios:
    """Phase-a over phase-b ratios; ``None`` marks an undefined ratio."""

    rho_C: Optional[float]
    rho_alpha: Optional[float]
    rho_beta: Optional[float]
    rho_K: Optional[float]
    rho_D: Optional[float]
    zeta: float
    nu_a: float
    nu_b: float

    @property
    def undefined(self) -> tuple[str, ...]:
        return tuple(n for n in RATIO_NAMES if getattr(self, n) is None)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _ratio(a: float, b: float) -> Optional[float]:
    return None if b == 0.0 else a / b


def dimensionless_ratios(laminate: Laminate) -> DimensionlessRatios:
    """Ratios of phase a (first layer) to phase b (second layer)."""
    if laminate.n_layers != 2:
        raise MaterialError("dimensionless ratios need exactly two layers")
    if not laminate.is_isotropic():
        raise MaterialError("dimensionless ratios need isotropic phases")
    a, b = (layer.phase.isotropic for layer in laminate.layers)
    return DimensionlessRatios(
        rho_C=_ratio(a.E_tilde, b.E_tilde),
        rho_alpha=_ratio(a.alpha, b.alpha),
        rho_beta=_ratio(a.beta, b.beta),
        rho_K=_ratio(a.K, b.K),
        rho_D=_ratio(a.D, b.D),
        zeta=laminate.zeta,
        nu_a=a.nu_tilde,
        nu_b=b.nu_tilde,
    )


def biphase_from_ratios(
    rho_C: float = 1.0,
    rho_alpha: float = 1.0,
    rho_beta: float = 1.0,
    rho_K: float = 1.0,
    rho_D: float = 1.0,
    zeta: float = 1.0,
    nu_a: float = 0.3,
    nu_b: float = 0.3,
    assumption: PlaneAssumption | str = PlaneAssumption.PLANE_STRESS,
    epsilon: float = 1.0,
    alpha_b: float = 1.0,
    beta_b: float = 1.0,
) -> Laminate:
    """Isotropic bi-phase laminate with phase b at unit reference values.

    Phase a takes ``rho * (phase b value)`` for each property.  The modulus
    ratio acts on the in-plane modulus, so under plane strain the Young
    moduli are back-computed from the requested ratio.
    """
    assumption = PlaneAssumption(assumption)
    Et_b = 1.0
    Et_a = rho_C * Et_b

    def young(Et: float, nu: float) -> float:
        # inverse of the plane-strain mapping: Et = E / (1 - nu^2) with nu the 3D ratio
        if assumption is PlaneAssumption.PLANE_STRAIN:
            return Et * (1.0 - nu * nu)
        return Et

    def nu3d(nut: float) -> float:
        if assumption is PlaneAssumption.PLANE_STRAIN:
            return nut / (1.0 + nut)
        return nut

    n_a, n_b = nu3d(nu_a), nu3d(nu_b)
    phase_b = make_isotropic_phase(young(Et_b, n_b), n_b, alpha_b, beta_b, 1.0, 1.0, assumption)
    phase_a = make_isotropic_phase(
        young(Et_a, n_a), n_a, rho_alpha * alpha_b, rho_beta * beta_b, rho_K, rho_D, assumption
    )
    return Laminate.biphase(phase_a, phase_b, zeta, epsilon, assumption)
