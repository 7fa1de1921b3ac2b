"""Tissue parameters, heat-source variants and their Fourier-sine transforms.

Notation follows the integral-transform solution of the perfused heat
equation in spherical symmetry::

    K     = rho * cp / kappa                (s/m^2)
    alpha = sqrt(rho_b * cp_b * omega_b / kappa)   (1/m)
    a     = kappa / (rho * cp) = 1 / K      (m^2/s)
    b     = rho_b * cp_b * omega_b / (rho * cp) = alpha^2 / K   (1/s)

The source transform is ``F(beta) = sqrt(2/pi) * int_0^inf r P(r) sin(beta r) dr``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConfigError

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

#: below this value of beta*r0 the step-source transform uses its Taylor series
STEP_SERIES_THRESHOLD = 1e-3


def _require(condition, message, key=None):
    if not condition:
        raise ConfigError(message, key)


@dataclass(frozen=True)
class TissueProperties:
    """Thermo-physical constants of tissue and perfusing blood (SI units)."""

    kappa: float
    rho: float
    cp: float
    rho_b: float
    cp_b: float
    omega_b: float
    ta: float
    qmet: float = 0.0

    def __post_init__(self):
        for name in ("kappa", "rho", "cp", "rho_b", "cp_b", "omega_b", "ta"):
            value = getattr(self, name)
            _require(math.isfinite(value) and value > 0, f"must be finite and > 0, got {value!r}", name)
        _require(math.isfinite(self.qmet) and self.qmet >= 0, f"must be >= 0, got {self.qmet!r}", "qmet")

    @property
    def perfusion(self) -> float:
        """Volumetric perfusion heat capacity rate rho_b * cp_b * omega_b (W/m^3/K)."""
        return self.rho_b * self.cp_b * self.omega_b

    @property
    def K(self) -> float:
        return self.rho * self.cp / self.kappa

    @property
    def alpha(self) -> float:
        return math.sqrt(self.perfusion / self.kappa)

    @property
    def a(self) -> float:
        return self.kappa / (self.rho * self.cp)

    @property
    def b(self) -> float:
        return self.perfusion / (self.rho * self.cp)

    @property
    def tc(self) -> float:
        return core_temperature(self)


class DerivedConstants(NamedTuple):
    K: float
    alpha: float
    a: float
    b: float


def core_temperature(tissue: TissueProperties) -> float:
    """Baseline temperature T_a + Q_met / (rho_b cp_b omega_b)."""
    if tissue.qmet == 0.0:
        return tissue.ta
    return tissue.ta + tissue.qmet / tissue.perfusion


def derived_constants(tissue: TissueProperties) -> DerivedConstants:
    return DerivedConstants(tissue.K, tissue.alpha, tissue.a, tissue.b)


#: Tissue and blood values of the reference scenario (T_c = 310 K, no metabolic term).
REFERENCE_TISSUE = TissueProperties(
    kappa=0.502, rho=1060.0, cp=3600.0, rho_b=1000.0, cp_b=4180.0, omega_b=6.4e-3, ta=310.0
)


class SourceKind(str, enum.Enum):
    POINT = "point"
    SHELL = "shell"
    GAUSSIAN = "gaussian"
    STEP = "step"


@dataclass(frozen=True)
class HeatSource:
    """One of the four radially symmetric heat-source models.

    ``p0`` is a total power (W) for point and shell sources and a peak
    power density (W/m^3) for Gaussian and step sources.  ``r0`` is the
    shell radius, Gaussian spread radius or step cutoff radius.
    ``shell_width`` only enters the shell amplitude normalization; the
    solvers treat the shell as infinitely thin.
    """

    kind: SourceKind
    p0: float
    r0: float | None = None
    shell_width: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", SourceKind(self.kind))
        _require(math.isfinite(self.p0) and self.p0 >= 0, f"must be finite and >= 0, got {self.p0!r}", "p0")
        if self.kind is SourceKind.POINT:
            _require(self.r0 is None, "point source takes no radius", "r0")
        else:
            _require(self.r0 is not None and self.r0 > 0, f"must be > 0, got {self.r0!r}", "r0")
        if self.shell_width is not None:
            _require(self.kind is SourceKind.SHELL, "only shell sources take a width", "shell_width")
            _require(self.shell_width > 0, f"must be > 0, got {self.shell_width!r}", "shell_width")

    @classmethod
    def point(cls, p0):
        return cls(SourceKind.POINT, p0)

    @classmethod
    def shell(cls, p0, r0, shell_width=None):
        return cls(SourceKind.SHELL, p0, r0, shell_width)

    @classmethod
    def gaussian(cls, p0, r0):
        return cls(SourceKind.GAUSSIAN, p0, r0)

    @classmethod
    def step(cls, p0, r0):
        return cls(SourceKind.STEP, p0, r0)

    def density(self, r):
        """Volumetric power density (W/m^3) for the distributed sources."""
        r = np.asarray(r, dtype=float)
        if self.kind is SourceKind.GAUSSIAN:
            return self.p0 * np.exp(-(r / self.r0) ** 2)
        if self.kind is SourceKind.STEP:
            return np.where(r <= self.r0, self.p0, 0.0)
        raise ValueError(f"{self.kind.value} source has no pointwise density")


def point_amplitude_from_density(p, sphere_radius):
    """Total power of a uniformly loaded sphere: P * (4/3) pi R^3."""
    _require(p >= 0, "power density must be >= 0", "p")
    _require(sphere_radius > 0, "radius must be > 0", "sphere_radius")
    return p * 4.0 / 3.0 * math.pi * sphere_radius**3


def shell_volume(r0, width):
    _require(width > 0 and r0 > width / 2, "need r0 > width/2 > 0", "shell_width")
    return 4.0 / 3.0 * math.pi * ((r0 + width / 2) ** 3 - (r0 - width / 2) ** 3)


def shell_amplitude_from_density(p, r0, width):
    """Total power carried by a shell of finite width at density ``p``."""
    _require(p >= 0, "power density must be >= 0", "p")
    return p * shell_volume(r0, width)


#: Source amplitudes of the reference scenario (r0 = 5 mm for the extended sources).
REFERENCE_POWER_DENSITY = 2.28e6
REFERENCE_SOURCES = {
    SourceKind.POINT: HeatSource.point(0.0096),
    SourceKind.SHELL: HeatSource.shell(0.72, 5e-3, 1e-3),
    SourceKind.GAUSSIAN: HeatSource.gaussian(REFERENCE_POWER_DENSITY, 5e-3),
    SourceKind.STEP: HeatSource.step(REFERENCE_POWER_DENSITY, 5e-3),
}


def _step_kernel(x):
    """sin(x) - x cos(x), with a Taylor branch where the difference cancels."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < STEP_SERIES_THRESHOLD
    xs = np.where(small, x, 0.0)
    series = xs**3 / 3.0 - xs**5 / 30.0 + xs**7 / 840.0
    return np.where(small, series, np.sin(x) - x * np.cos(x))


def source_transform(source: HeatSource, beta):
    """Fourier-sine transform F(beta) of r*P(r); vectorized over ``beta``."""
    beta = np.asarray(beta, dtype=float)
    p0 = source.p0
    kind = source.kind
    if kind is SourceKind.POINT:
        out = SQRT_2_OVER_PI * p0 / (4 * math.pi) * beta
    elif kind is SourceKind.SHELL:
        out = SQRT_2_OVER_PI * p0 / (4 * math.pi * source.r0) * np.sin(beta * source.r0)
    elif kind is SourceKind.GAUSSIAN:
        r0 = source.r0
        out = math.sqrt(2.0) / 4.0 * p0 * r0**3 * beta * np.exp(-((beta * r0) ** 2) / 4.0)
    else:
        r0 = source.r0
        x = beta * r0
        small = np.abs(x) < STEP_SERIES_THRESHOLD
        safe = np.where(small, 1.0, beta)
        exact = _step_kernel(x) / safe**2
        series = r0**3 * beta * (1.0 / 3.0 - x**2 / 30.0)
        out = SQRT_2_OVER_PI * p0 * np.where(small, series, exact)
    return out if out.ndim else float(out)


class TransformParts(NamedTuple):
    """Decomposition F(beta) = sin_part(beta) sin(beta w) + cos_part(beta) cos(beta w).

    Both parts are smooth and non-oscillatory for beta > 0; ``w`` is the
    source's own oscillation frequency (0 for point and Gaussian).
    """

    sin_part: Callable | None
    cos_part: Callable | None
    frequency: float


def transform_parts(source: HeatSource) -> TransformParts:
    p0 = source.p0
    kind = source.kind
    if kind is SourceKind.POINT:
        c = SQRT_2_OVER_PI * p0 / (4 * math.pi)
        return TransformParts(None, lambda beta: c * beta, 0.0)
    if kind is SourceKind.SHELL:
        c = SQRT_2_OVER_PI * p0 / (4 * math.pi * source.r0)
        return TransformParts(lambda beta: np.full_like(beta, c), None, source.r0)
    if kind is SourceKind.GAUSSIAN:
        return TransformParts(None, lambda beta: source_transform(source, beta), 0.0)
    c = SQRT_2_OVER_PI * p0
    r0 = source.r0
    return TransformParts(lambda beta: c / beta**2, lambda beta: -c * r0 / beta, r0)


@dataclass(frozen=True)
class RadialProfile:
    """Temperatures (K) on a radial grid (m) at one instant (s)."""

    time: float
    radii: np.ndarray
    temperatures: np.ndarray
    label: str = field(default="", compare=False)

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        temps = np.asarray(self.temperatures, dtype=float)
        if radii.shape != temps.shape or radii.ndim != 1:
            raise ValueError("radii and temperatures must be 1-D arrays of equal length")
        if radii.size > 1 and not np.all(np.diff(radii) > 0):
            raise ValueError("radii must be strictly increasing")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "temperatures", temps)
