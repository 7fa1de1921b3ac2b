"""Volumetric heating of magnetic nanoparticles in an alternating field.

Linear-response (Rosensweig) model: Neel and Brownian relaxation combine
into an effective relaxation time, the Langevin chord susceptibility gives
the field-dependent equilibrium susceptibility, and a Debye factor sets the
out-of-phase loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, OutOfRangeError

MU0 = 4e-7 * math.pi  # T m / A
KB = 1.380649e-23  # J / K

#: conversion used for field amplitudes quoted in mT
A_PER_M_PER_MT = 796.0

#: below this Langevin argument the chord susceptibility uses its series
LANGEVIN_SERIES_THRESHOLD = 1e-4
#: below this argument coth(xi) - 1/xi still cancels, so a continued fraction is used
_LANGEVIN_FRACTION_LIMIT = 1.0
_LANGEVIN_FRACTION_DEPTH = 24


@dataclass(frozen=True)
class ParticleSpec:
    diameter_D: float
    anisotropy_K: float = 9e3
    domain_magnetization_Md: float = 446e3
    tau0: float = 1e-9
    surfactant_thickness_delta: float = 1e-9
    volume_fraction_phi: float = 0.003

    def __post_init__(self):
        if not self.diameter_D > 0:
            raise ConfigError(f"must be > 0, got {self.diameter_D!r}", "diameter_D")
        if not self.tau0 > 0:
            raise ConfigError(f"must be > 0, got {self.tau0!r}", "tau0")
        if not self.surfactant_thickness_delta >= 0:
            raise ConfigError("must be >= 0", "surfactant_thickness_delta")
        if not 0 < self.volume_fraction_phi < 1:
            raise ConfigError("must lie in (0, 1)", "volume_fraction_phi")
        if not self.anisotropy_K > 0:
            raise ConfigError("must be > 0", "anisotropy_K")
        if not self.domain_magnetization_Md > 0:
            raise ConfigError("must be > 0", "domain_magnetization_Md")

    @property
    def magnetic_volume(self) -> float:
        return math.pi * self.diameter_D**3 / 6.0

    @property
    def hydrodynamic_volume(self) -> float:
        return (1.0 + 2.0 * self.surfactant_thickness_delta / self.diameter_D) ** 3 * self.magnetic_volume

    def with_diameter(self, diameter):
        return ParticleSpec(
            diameter,
            self.anisotropy_K,
            self.domain_magnetization_Md,
            self.tau0,
            self.surfactant_thickness_delta,
            self.volume_fraction_phi,
        )


@dataclass(frozen=True)
class FieldSpec:
    amplitude_H0: float
    frequency_f: float

    def __post_init__(self):
        if not self.amplitude_H0 >= 0:
            raise ConfigError("must be >= 0", "amplitude_H0")
        if not self.frequency_f > 0:
            raise ConfigError("must be > 0", "frequency_f")

    @classmethod
    def from_mT(cls, amplitude_mT, frequency_f):
        return cls(amplitude_mT * A_PER_M_PER_MT, frequency_f)


@dataclass(frozen=True)
class MediumSpec:
    viscosity_eta: float = 7.0e-4
    temperature_T: float = 310.0

    def __post_init__(self):
        if not self.viscosity_eta > 0:
            raise ConfigError("must be > 0", "viscosity_eta")
        if not self.temperature_T > 0:
            raise ConfigError("must be > 0", "temperature_T")


def anisotropy_ratio(particle: ParticleSpec, medium: MediumSpec) -> float:
    """Gamma = K V_M / (k_B T)."""
    return particle.anisotropy_K * particle.magnetic_volume / (KB * medium.temperature_T)


def neel_relaxation(particle: ParticleSpec, medium: MediumSpec) -> float:
    gamma = anisotropy_ratio(particle, medium)
    try:
        growth = math.exp(gamma)
    except OverflowError:
        raise OutOfRangeError(
            f"Neel relaxation time overflows: anisotropy energy ratio {gamma:.4g} "
            f"(D = {particle.diameter_D:.4g} m)"
        ) from None
    return particle.tau0 * math.sqrt(math.pi) * growth / (2.0 * math.sqrt(gamma))


def brownian_relaxation(particle: ParticleSpec, medium: MediumSpec) -> float:
    return 3.0 * medium.viscosity_eta * particle.hydrodynamic_volume / (KB * medium.temperature_T)


def effective_relaxation(tau_N: float, tau_B: float) -> float:
    """Parallel combination 1/tau = 1/tau_N + 1/tau_B."""
    if not (tau_N > 0 and tau_B > 0):
        raise ValueError("relaxation times must be positive")
    return tau_N * tau_B / (tau_N + tau_B) if math.isfinite(tau_N) else tau_B


def langevin_chord_factor(xi: float) -> float:
    """(3/xi) * (coth(xi) - 1/xi), which tends to 1 as xi -> 0."""
    xi = abs(xi)
    if xi < LANGEVIN_SERIES_THRESHOLD:
        x2 = xi * xi
        return 1.0 - x2 / 15.0 + 2.0 * x2 * x2 / 315.0
    if xi < _LANGEVIN_FRACTION_LIMIT:
        # L(x) = x / (3 + x^2 / (5 + x^2 / (7 + ...))), evaluated bottom-up
        x2 = xi * xi
        tail = 2.0 * _LANGEVIN_FRACTION_DEPTH + 3.0
        for k in range(_LANGEVIN_FRACTION_DEPTH, -1, -1):
            tail = 2.0 * k + 3.0 + x2 / tail
        return 3.0 / tail
    if xi > 20.0:
        # coth(xi) == 1 to double precision
        return 3.0 / xi * (1.0 - 1.0 / xi)
    # coth(x) = 1 + 2 / expm1(2x) avoids forming the difference of exponentials
    coth = 1.0 + 2.0 / math.expm1(2.0 * xi)
    return 3.0 / xi * (coth - 1.0 / xi)


def initial_susceptibility(particle: ParticleSpec, medium: MediumSpec) -> float:
    md = particle.domain_magnetization_Md
    return MU0 * particle.volume_fraction_phi * md**2 * particle.magnetic_volume / (3.0 * KB * medium.temperature_T)


def langevin_argument(particle: ParticleSpec, field: FieldSpec, medium: MediumSpec) -> float:
    """xi evaluated at the field amplitude H0."""
    return (
        MU0 * particle.domain_magnetization_Md * field.amplitude_H0 * particle.magnetic_volume
        / (KB * medium.temperature_T)
    )


def equilibrium_susceptibility(particle: ParticleSpec, field: FieldSpec, medium: MediumSpec) -> float:
    xi = langevin_argument(particle, field, medium)
    return initial_susceptibility(particle, medium) * langevin_chord_factor(xi)


def debye_factor(x: float) -> float:
    """x / (1 + x^2) with x = 2 pi f tau; maximal (1/2) at x = 1."""
    return x / (1.0 + x * x)


def power_dissipation(particle: ParticleSpec, field: FieldSpec, medium: MediumSpec) -> float:
    """Volumetric power P (W/m^3)."""
    tau = effective_relaxation(neel_relaxation(particle, medium), brownian_relaxation(particle, medium))
    chi0 = equilibrium_susceptibility(particle, field, medium)
    f = field.frequency_f
    h0 = field.amplitude_H0
    return math.pi * MU0 * chi0 * h0 * h0 * f * debye_factor(2.0 * math.pi * f * tau)


def sweep_diameter(particle_template: ParticleSpec, field: FieldSpec, medium: MediumSpec,
                   d_range=(10e-9, 30e-9), n_points=201):
    """Sample P over particle diameters; returns ``(diameters_m, powers)`` arrays.

    ``d_range`` is in metres and must lie within [1, 100] nm.
    """
    d_lo, d_hi = d_range
    if n_points < 2:
        raise ConfigError("need at least two sample points", "n_points")
    if not (1e-9 * (1 - 1e-12) <= d_lo < d_hi <= 100e-9 * (1 + 1e-12)):
        raise ConfigError(f"diameter range must be increasing within [1, 100] nm, got {d_range!r}", "d_range")
    diameters = np.linspace(d_lo, d_hi, n_points)
    powers = np.array([power_dissipation(particle_template.with_diameter(d), field, medium) for d in diameters])
    return diameters, powers


def format_sweep_csv(diameters, powers) -> str:
    lines = ["D_nm,P_W_per_m3"]
    lines += [f"{d * 1e9:.6g},{p:.6g}" for d, p in zip(diameters, powers)]
    return "\n".join(lines) + "\n"
