"""Explicit finite differences for the perfused heat equation on a radial grid.

Nodes sit at ``r_n = n dr`` for ``n = 0 .. M-1``.  The solver advances the
excess temperature ``theta = T - T_c`` so that the zero-source state is an
exact (bitwise) fixed point.

Interior schemes (``lam = kappa dt / (rho cp dr^2)``):

``central``
    ``theta_n + lam [(1 + 1/n)(theta_{n+1} - theta_n) - (1 - 1/n)(theta_n - theta_{n-1})]``,
    the flux-conservative form of the spherical Laplacian.  Stable up to
    ``lam = 1/2``.
``forward``
    ``theta_n + lam [(1 + 2/n)(theta_{n+1} - theta_n) - (theta_n - theta_{n-1})]``,
    a one-sided difference for the ``(2/r) dT/dr`` term.  Needs ``lam <= 1/4``.

Center treatments:

``mirror``
    ``theta_0 := theta_1`` after each update (zero slope at the center).
``lhopital``
    ``theta_0 + 6 lam (theta_1 - theta_0)``, from replacing ``(1/r) dT/dr`` by
    ``d^2T/dr^2`` at ``r = 0``.  Needs ``lam <= 1/6``.

The outer node copies its neighbour (``T_{M-1} := T_{M-2}``).  Perfusion is
applied semi-implicitly by default, dividing the explicit update by
``1 + b dt``.  ``perfusion="explicit"`` subtracts ``b dt theta`` instead,
which pushes the checkerboard mode's amplification past 1 at ``lam = 1/2``
and so requires a slightly smaller step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DivergenceError, StabilityError, UnsupportedCombinationError
from .model import HeatSource, RadialProfile, SourceKind, TissueProperties

SCHEMES = ("central", "forward")
CENTERS = ("mirror", "lhopital")
PERFUSION_MODES = ("semi-implicit", "explicit")

#: absolute stability ceiling on lam for any scheme
STABILITY_LIMIT = 0.5


def stability_bound(scheme: str, center: str, decay: float = 0.0, perfusion: str = "semi-implicit") -> float:
    """Largest ``lam`` keeping every diagonal weight non-negative.

    ``decay`` is ``b dt``; it only tightens the bound for explicit perfusion,
    where the diagonal is ``1 - c lam - b dt`` instead of ``(1 - c lam) / (1 + b dt)``.
    """
    c = 2.0 if scheme == "central" else 4.0
    if center == "lhopital":
        c = max(c, 6.0)
    slack = 1.0 - decay if perfusion == "explicit" else 1.0
    return slack / c


@dataclass(frozen=True)
class FdmGrid:
    dr: float
    outer_radius: float
    dt: float
    n_nodes: int
    stability_ratio: float
    scheme: str = "central"
    center: str = "mirror"
    perfusion: str = "semi-implicit"

    @classmethod
    def build(cls, tissue: TissueProperties, dr=0.3e-3, outer_radius=0.15, dt=None,
              scheme="central", center="mirror", perfusion="semi-implicit"):
        if scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}", "scheme")
        if center not in CENTERS:
            raise ConfigError(f"unknown center treatment {center!r}; expected one of {CENTERS}", "center")
        if perfusion not in PERFUSION_MODES:
            raise ConfigError(f"unknown perfusion mode {perfusion!r}", "perfusion")
        if not (dr > 0 and outer_radius > 0):
            raise ConfigError("dr and outer_radius must be > 0", "dr")
        cells = outer_radius / dr
        n_cells = round(cells)
        if abs(cells - n_cells) > 1e-6 * max(1.0, cells):
            raise ConfigError("outer_radius must be an integer multiple of dr", "outer_radius")
        n_nodes = n_cells + 1
        if n_nodes < 4:
            raise ConfigError(f"grid needs at least 4 nodes, got {n_nodes}", "dr")
        if dt is None:
            dt = tissue.rho * tissue.cp * dr * dr / (2.0 * tissue.kappa)
        if not dt > 0:
            raise ConfigError("dt must be > 0", "dt")
        ratio = tissue.kappa * dt / (tissue.rho * tissue.cp * dr * dr)
        # the tiny slack lets the default dt (ratio exactly 1/2 up to rounding) through
        if ratio > STABILITY_LIMIT * (1 + 1e-12):
            raise StabilityError(f"stability ratio {ratio:.6g} exceeds {STABILITY_LIMIT}")
        bound = stability_bound(scheme, center, tissue.b * dt, perfusion)
        if ratio > bound * (1 + 1e-12):
            raise StabilityError(
                f"stability ratio {ratio:.6g} exceeds {bound:.6g} for scheme={scheme!r}, "
                f"center={center!r}, perfusion={perfusion!r}"
            )
        return cls(dr, outer_radius, dt, n_nodes, ratio, scheme, center, perfusion)

    @property
    def radii(self) -> np.ndarray:
        return np.arange(self.n_nodes) * self.dr


@dataclass(frozen=True)
class FdmState:
    temperatures: np.ndarray
    elapsed: float
    step_index: int


def init_state(grid: FdmGrid, tissue: TissueProperties) -> FdmState:
    return FdmState(np.full(grid.n_nodes, tissue.tc, dtype=float), 0.0, 0)


def _coefficients(n_nodes, scheme):
    n = np.arange(1, n_nodes - 1, dtype=float)
    if scheme == "central":
        return 1.0 + 1.0 / n, 1.0 - 1.0 / n
    return 1.0 + 2.0 / n, np.ones_like(n)


def explicit_update(theta, lam, decay, forcing, scheme="central", center="mirror",
                    perfusion="semi-implicit", out=None, coeffs=None):
    """One step of the excess-temperature recursion.

    ``decay`` is ``b dt`` and ``forcing`` is ``P dt / (rho cp)`` per node.
    Reads ``theta`` and writes a fresh array (or ``out``, which must not
    alias ``theta``).
    """
    theta = np.asarray(theta, dtype=float)
    if out is None:
        out = np.empty_like(theta)
    elif out is theta:
        raise ValueError("out must not alias the input array")
    up, down = coeffs if coeffs is not None else _coefficients(theta.size, scheme)
    mid = theta[1:-1]
    lap = up * (theta[2:] - mid) - down * (mid - theta[:-2])
    if center == "lhopital":
        center_lap = 6.0 * (theta[1] - theta[0])
    if perfusion == "explicit":
        out[1:-1] = mid + lam * lap - decay * mid + forcing[1:-1]
        if center == "lhopital":
            out[0] = theta[0] + lam * center_lap - decay * theta[0] + forcing[0]
    else:
        scale = 1.0 / (1.0 + decay)
        out[1:-1] = (mid + lam * lap + forcing[1:-1]) * scale
        if center == "lhopital":
            out[0] = (theta[0] + lam * center_lap + forcing[0]) * scale
    if center == "mirror":
        out[0] = out[1]
    out[-1] = out[-2]
    return out


def _stepper(grid: FdmGrid, tissue: TissueProperties, source_field):
    source_field = np.asarray(source_field, dtype=float)
    if source_field.shape != (grid.n_nodes,):
        raise ValueError(f"source field must have {grid.n_nodes} entries, got shape {source_field.shape}")
    forcing = source_field * (grid.dt / (tissue.rho * tissue.cp))
    decay = tissue.b * grid.dt
    coeffs = _coefficients(grid.n_nodes, grid.scheme)

    def advance(theta, out):
        return explicit_update(theta, grid.stability_ratio, decay, forcing,
                               grid.scheme, grid.center, grid.perfusion, out, coeffs)

    return advance


def step(state: FdmState, grid: FdmGrid, tissue: TissueProperties, source_field) -> FdmState:
    advance = _stepper(grid, tissue, source_field)
    tc = tissue.tc
    theta = advance(state.temperatures - tc, None)
    index = state.step_index + 1
    if not np.all(np.isfinite(theta)):
        raise DivergenceError(f"non-finite temperature at step {index}", evaluations=index)
    return FdmState(theta + tc, index * grid.dt, index)


def discretize_source(source: HeatSource, grid: FdmGrid) -> np.ndarray:
    """Nodal power density (W/m^3) for the distributed sources."""
    if source.kind is SourceKind.GAUSSIAN:
        return source.density(grid.radii)
    if source.kind is SourceKind.STEP:
        # nodes within rounding of r0 count as inside the heated region
        return np.where(grid.radii <= source.r0 * (1 + 1e-12), source.p0, 0.0)
    raise UnsupportedCombinationError(
        f"the finite-difference solver has no nodal representation of a {source.kind.value} source"
    )


def steps_for_time(t, dt) -> int:
    """Index of the first step whose elapsed time is at or after ``t``."""
    k = math.ceil(t / dt * (1 - 1e-12))
    return max(k, 0)


def run(source: HeatSource, tissue: TissueProperties, grid: FdmGrid, sample_times,
        check_every=64) -> list[RadialProfile]:
    """March from the uniform ``T_c`` state and record the requested times."""
    times = [float(t) for t in sample_times]
    if any(t < 0 or not math.isfinite(t) for t in times):
        raise ValueError("sample times must be finite and >= 0")
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("sample times must be sorted")
    field = discretize_source(source, grid)
    advance = _stepper(grid, tissue, field)
    tc = tissue.tc
    radii = grid.radii
    theta = np.zeros(grid.n_nodes)
    spare = np.empty_like(theta)
    index = 0
    profiles = []
    for t in times:
        target = steps_for_time(t, grid.dt)
        while index < target:
            advance(theta, spare)
            theta, spare = spare, theta
            index += 1
            if index % check_every == 0 or index == target:
                if not np.all(np.isfinite(theta)):
                    raise DivergenceError(f"non-finite temperature by step {index}", evaluations=index)
        profiles.append(RadialProfile(index * grid.dt, radii.copy(), theta + tc, label=f"fdm t={t:g}"))
    return profiles
