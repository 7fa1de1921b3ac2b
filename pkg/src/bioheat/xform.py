"""Integral-transform (Fourier-sine) temperature solutions.

With ``theta = (T - T_c) r`` the perfused heat equation becomes a 1-D
reaction-diffusion problem whose sine transform is solved in closed form
in time.  Inverting gives

    T(r, t) = T_c + sqrt(2/pi) / (kappa r)
              * int_0^inf F(beta) / (alpha^2 + beta^2)
                          * [1 - exp(-(alpha^2 + beta^2) t / K)] sin(beta r) dbeta

Every solution is evaluated as a steady part minus a transient
correction.  The correction carries the factor ``exp(-beta^2 t / K)`` and
is cut off analytically; the steady part is either a closed form (point,
shell) or a semi-infinite quadrature (Gaussian, step).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BioheatError, ConvergenceError, SingularityError
from .model import (
    SQRT_2_OVER_PI,
    HeatSource,
    RadialProfile,
    SourceKind,
    TissueProperties,
    _step_kernel,
    source_transform,
    transform_parts,
)
from .quadrature import (
    DEFAULT_QUADRATURE,
    Component,
    QuadratureConfig,
    integrate_components,
    integrate_decaying,
    integrate_semi_infinite,
)

#: radii below this are evaluated with the r = 0 limit formulas
R_CENTER_EPS = 1e-9

#: steady-state marker for the time argument
STEADY = math.inf

# ln(1 / epsilon) for analytic cutoffs of Gaussian-damped integrands
_TAIL_LOG = 40.0


@dataclass(frozen=True)
class EvalRequest:
    source: HeatSource
    tissue: TissueProperties
    r: float
    t: float

    def __post_init__(self):
        if not (self.r >= 0 and math.isfinite(self.r)):
            raise ValueError(f"radius must be finite and >= 0, got {self.r!r}")
        if not self.t >= 0:
            raise ValueError(f"time must be >= 0, got {self.t!r}")

    def evaluate(self, q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
        return temperature(self.source, self.tissue, self.r, self.t, q)


def _with_context(exc, r, t):
    where = f" at r={r:.6g} m, t={t:.6g} s"
    if isinstance(exc, ConvergenceError):
        return type(exc)(exc.detail + where, exc.residual, exc.evaluations)
    return type(exc)(str(exc) + where)


class TransformSolution:
    """Steady and transient parts of the solution for one source in one tissue."""

    def __init__(self, source: HeatSource, tissue: TissueProperties, q: QuadratureConfig = DEFAULT_QUADRATURE):
        self.source = source
        self.tissue = tissue
        self.q = q
        self.kappa = tissue.kappa
        self.alpha = tissue.alpha
        self.K = tissue.K
        self.tc = tissue.tc

    # -- public -----------------------------------------------------------

    def steady(self, r: float) -> float:
        """Steady temperature rise T(r, inf) - T_c."""
        if self.source.p0 == 0.0:
            return 0.0
        kind = self.source.kind
        if kind is SourceKind.POINT:
            return self._point_steady(r)
        if kind is SourceKind.SHELL:
            return self._shell_steady(r)
        if kind is SourceKind.GAUSSIAN:
            return self._gaussian(r, None)
        return self._step_steady(r)

    def correction(self, r: float, t: float) -> float:
        """Transient deficit: steady rise minus the rise at time ``t``."""
        if self.source.p0 == 0.0 or t == STEADY:
            return 0.0
        if t == 0.0:
            return self.steady(r)
        kind = self.source.kind
        if kind is SourceKind.POINT:
            return self._point_correction(r, t)
        if kind is SourceKind.SHELL:
            return self._shell_correction(r, t)
        if kind is SourceKind.GAUSSIAN:
            return self._gaussian(r, None) - self._gaussian(r, t)
        return self._step_correction(r, t)

    def temperature(self, r: float, t: float, steady: float | None = None) -> float:
        if t == 0.0 or self.source.p0 == 0.0:
            if self.source.kind is SourceKind.POINT and r < R_CENTER_EPS:
                raise SingularityError("point-source solution is singular at r = 0")
            return self.tc
        if steady is None:
            steady = self.steady(r)
        if self.source.kind is SourceKind.GAUSSIAN and t != STEADY:
            return self.tc + self._gaussian(r, t)
        return self.tc + steady - self.correction(r, t)

    # -- helpers ----------------------------------------------------------

    def _damping_cutoff(self, t):
        return math.sqrt(self.K * _TAIL_LOG / t)

    def _abs_tol(self, prefactor):
        return self.q.abs_tol / abs(prefactor)

    def _point_steady(self, r):
        if r < R_CENTER_EPS:
            raise SingularityError("point-source solution is singular at r = 0")
        return self.source.p0 * math.exp(-self.alpha * r) / (4 * math.pi * self.kappa * r)

    def _point_correction(self, r, t):
        if r < R_CENTER_EPS:
            raise SingularityError("point-source solution is singular at r = 0")
        a2, K = self.alpha**2, self.K
        pref = self.source.p0 / (2 * math.pi**2 * self.kappa * r)

        def f(beta):
            return beta / (a2 + beta**2) * np.exp(-(a2 + beta**2) * t / K) * np.sin(beta * r)

        value = integrate_semi_infinite(f, 2 * math.pi / r, self.q, cutoff=self._damping_cutoff(t),
                                        abs_tol=self._abs_tol(pref))
        return pref * value

    def _shell_steady(self, r):
        p0, r0, al, kap = self.source.p0, self.source.r0, self.alpha, self.kappa
        if r < R_CENTER_EPS:
            return p0 * math.exp(-al * r0) / (4 * math.pi * kap * r0)
        # e^{-al|r-r0|} - e^{-al(r+r0)} = 2 e^{-al max} sinh(al min), free of cancellation
        lo, hi = min(r, r0), max(r, r0)
        bracket = 2.0 * math.exp(-al * hi) * math.sinh(al * lo)
        return p0 / (8 * math.pi * kap * r0 * al * r) * bracket

    def _shell_correction(self, r, t):
        p0, r0, kap = self.source.p0, self.source.r0, self.kappa
        a2, K = self.alpha**2, self.K
        pref = p0 / (2 * math.pi**2 * kap * r0)
        cutoff = self._damping_cutoff(t)
        if r < R_CENTER_EPS:
            def f(beta):
                return beta * np.sin(beta * r0) / (a2 + beta**2) * np.exp(-(a2 + beta**2) * t / K)

            return pref * integrate_semi_infinite(f, 2 * math.pi / r0, self.q, cutoff=cutoff,
                                                  abs_tol=self._abs_tol(pref))

        def g(beta):
            return np.sin(beta * r0) * np.sin(beta * r) / (a2 + beta**2) * np.exp(-(a2 + beta**2) * t / K)

        pref_r = pref / r
        value = integrate_semi_infinite(g, 2 * math.pi / (r + r0), self.q, cutoff=cutoff,
                                        abs_tol=self._abs_tol(pref_r), accelerate=False)
        return pref_r * value

    def _gaussian(self, r, t):
        """Temperature rise of the Gaussian source at time ``t`` (None = steady)."""
        p0, r0, kap = self.source.p0, self.source.r0, self.kappa
        a2, K = self.alpha**2, self.K
        cutoff = 2.0 / r0 * math.sqrt(_TAIL_LOG)
        pref = p0 * r0**3 / (2 * math.sqrt(math.pi) * kap)

        def bracket(beta):
            if t is None:
                return 1.0
            return -np.expm1(-(a2 + beta**2) * t / K)

        if r < R_CENTER_EPS:
            def f(beta):
                return beta**2 * np.exp(-(beta * r0) ** 2 / 4) / (a2 + beta**2) * bracket(beta)

            return pref * integrate_decaying(f, 1.0 / r0, self.q, abs_tol=self._abs_tol(pref), cutoff=cutoff)

        def g(beta):
            return beta * np.exp(-(beta * r0) ** 2 / 4) / (a2 + beta**2) * bracket(beta) * np.sin(beta * r)

        pref_r = pref / r
        return pref_r * integrate_semi_infinite(g, 2 * math.pi / r, self.q, cutoff=cutoff,
                                                abs_tol=self._abs_tol(pref_r))

    def _step_steady(self, r):
        p0, r0, kap = self.source.p0, self.source.r0, self.kappa
        if r < R_CENTER_EPS:
            a2 = self.alpha**2
            pref = 2 * p0 / (math.pi * kap)

            def f(beta):
                return _step_kernel(beta * r0) / (beta * (a2 + beta**2))

            return pref * integrate_semi_infinite(f, 2 * math.pi / r0, self.q, abs_tol=self._abs_tol(pref))
        pref = SQRT_2_OVER_PI / (kap * r)
        return pref * steady_transform_integral(self.source, self.tissue, r, self.q, abs_tol=self._abs_tol(pref))

    def _step_correction(self, r, t):
        p0, r0, kap = self.source.p0, self.source.r0, self.kappa
        a2, K = self.alpha**2, self.K
        cutoff = self._damping_cutoff(t)
        if r < R_CENTER_EPS:
            pref = 2 * p0 / (math.pi * kap)

            def f(beta):
                return _step_kernel(beta * r0) / (beta * (a2 + beta**2)) * np.exp(-(a2 + beta**2) * t / K)

            return pref * integrate_semi_infinite(f, 2 * math.pi / r0, self.q, cutoff=cutoff,
                                                  abs_tol=self._abs_tol(pref))
        pref = 2 * p0 / (math.pi * kap * r)

        def g(beta):
            x = beta * r0
            small = np.abs(x) < 1e-3
            safe = np.where(small, 1.0, beta)
            # s(x) / beta^2 with s(x) ~ x^3 / 3 near the origin
            ratio = np.where(small, r0**3 * beta * (1.0 / 3.0 - x**2 / 30.0), _step_kernel(x) / safe**2)
            return ratio / (a2 + beta**2) * np.exp(-(a2 + beta**2) * t / K) * np.sin(beta * r)

        return pref * integrate_semi_infinite(g, 2 * math.pi / (r + r0), self.q, cutoff=cutoff,
                                              abs_tol=self._abs_tol(pref), accelerate=False)


def _split_point(r, w, alpha):
    """Where the component tails take over from the direct head integral."""
    return max(4 * math.pi / max(r, w), 10.0 * max(alpha, 1.0 / w if w else 0.0))


def steady_transform_integral(source: HeatSource, tissue: TissueProperties, r: float,
                              q: QuadratureConfig = DEFAULT_QUADRATURE, abs_tol: float | None = None) -> float:
    """``int_0^inf F(beta) sin(beta r) / (alpha^2 + beta^2) dbeta`` for r > 0.

    The product of the source's own oscillation with ``sin(beta r)`` is
    split into single-frequency components beyond a head interval.
    """
    a2 = tissue.alpha**2
    parts = transform_parts(source)
    w = parts.frequency

    def g(beta):
        return 1.0 / (a2 + beta**2)

    def head(beta):
        return source_transform(source, beta) * g(beta) * np.sin(beta * r)

    components = []
    if w == 0.0:
        env = parts.cos_part
        components.append(Component(lambda beta: env(beta) * g(beta), r, "sin"))
    else:
        d = r - w
        if parts.sin_part is not None:
            A = parts.sin_part
            components.append(Component(lambda beta: 0.5 * A(beta) * g(beta), abs(d), "cos"))
            components.append(Component(lambda beta: -0.5 * A(beta) * g(beta), r + w, "cos"))
        if parts.cos_part is not None:
            B = parts.cos_part
            sign = math.copysign(1.0, d) if d != 0 else 0.0
            components.append(Component(lambda beta: 0.5 * B(beta) * g(beta), r + w, "sin"))
            if sign:
                components.append(Component(lambda beta: 0.5 * sign * B(beta) * g(beta), abs(d), "sin"))
    split = _split_point(r, w, tissue.alpha)
    return integrate_components(head, split, components, q, scale=tissue.alpha, abs_tol=abs_tol,
                                head_wavelength=2 * math.pi / max(r, w))


def generic_temperature(source: HeatSource, tissue: TissueProperties, r: float, t: float,
                        q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Evaluate the general transform solution directly from ``source_transform``.

    Independent of the per-source specializations; used to cross-check them.
    """
    if t == 0.0 or source.p0 == 0.0:
        return tissue.tc
    kap, a2, K = tissue.kappa, tissue.alpha**2, tissue.K
    parts = transform_parts(source)
    w = parts.frequency
    center = r < R_CENTER_EPS
    if center and source.kind is SourceKind.POINT:
        raise SingularityError("point-source solution is singular at r = 0")
    pref = SQRT_2_OVER_PI / kap if center else SQRT_2_OVER_PI / (kap * r)
    abs_tol = q.abs_tol / pref

    if center:
        def f(beta):
            return beta * source_transform(source, beta) / (a2 + beta**2)

        if w > 0:
            steady = integrate_semi_infinite(f, 2 * math.pi / w, q, abs_tol=abs_tol)
        else:
            steady = integrate_decaying(f, tissue.alpha, q, abs_tol=abs_tol)
    else:
        steady = steady_transform_integral(source, tissue, r, q, abs_tol=abs_tol)
    if t == STEADY:
        return tissue.tc + pref * steady

    def damped(beta):
        base = source_transform(source, beta) / (a2 + beta**2) * np.exp(-(a2 + beta**2) * t / K)
        return base * beta if center else base * np.sin(beta * r)

    cutoff = math.sqrt(K * _TAIL_LOG / t)
    wavelength = 2 * math.pi / max(w, 0.0 if center else r, 1e-300)
    if center and w == 0.0:
        transient = integrate_decaying(damped, tissue.alpha, q, abs_tol=abs_tol, cutoff=cutoff)
    else:
        transient = integrate_semi_infinite(damped, wavelength, q, cutoff=cutoff, abs_tol=abs_tol, accelerate=False)
    return tissue.tc + pref * (steady - transient)


def step_steady_closed_form(source: HeatSource, tissue: TissueProperties, r: float) -> float:
    """Steady state of the step source from the radial ODE (no quadrature).

    Inside:  T_c + P0/(kappa alpha^2) [1 - (1 + alpha r0) e^{-alpha r0} sinh(alpha r)/(alpha r)]
    Outside: T_c + P0/(kappa alpha^2) [alpha r0 cosh(alpha r0) - sinh(alpha r0)] e^{-alpha r}/(alpha r)
    """
    if source.kind is not SourceKind.STEP:
        raise ValueError("closed form exists for the step source only")
    alpha, r0 = tissue.alpha, source.r0
    scale = source.p0 / (tissue.kappa * alpha * alpha)
    x, x0 = alpha * r, alpha * r0
    if r <= r0:
        shape = 1.0 if x < 1e-8 else math.sinh(x) / x
        return tissue.tc + scale * (1.0 - (1.0 + x0) * math.exp(-x0) * shape)
    # (x0 cosh x0 - sinh x0) e^{-x} = [x0 (e^{x0-x} + e^{-x0-x}) - (e^{x0-x} - e^{-x0-x})] / 2
    grow, shrink = math.exp(x0 - x), math.exp(-x0 - x)
    return tissue.tc + scale * (x0 * (grow + shrink) - (grow - shrink)) / (2.0 * x)


def temperature(source: HeatSource, tissue: TissueProperties, r: float, t: float,
                q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """T(r, t) in K; ``t = STEADY`` gives the steady state."""
    EvalRequest(source, tissue, r, t)
    try:
        return TransformSolution(source, tissue, q).temperature(r, t)
    except BioheatError as exc:
        raise _with_context(exc, r, t) from exc


def steady_temperature(source: HeatSource, tissue: TissueProperties, r: float,
                       q: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    return temperature(source, tissue, r, STEADY, q)


def radial_profile(source: HeatSource, tissue: TissueProperties, times: Sequence[float],
                   r_grid: Sequence[float], q: QuadratureConfig = DEFAULT_QUADRATURE,
                   workers: int | None = None) -> list[RadialProfile]:
    """Profiles at each time; ``times`` may be per-profile exact instants.

    The steady part at each radius is computed once and reused for all
    times.  Grid points are independent, so ``workers > 1`` evaluates them
    concurrently without changing results.
    """
    times = [float(t) for t in times]
    radii = np.asarray(r_grid, dtype=float)
    if not times or radii.size == 0:
        raise ValueError("time list and radial grid must be non-empty")
    if radii.size > 1 and not np.all(np.diff(radii) > 0):
        raise ValueError("radial grid must be strictly increasing")
    solution = TransformSolution(source, tissue, q)
    needs_steady = not (source.kind is SourceKind.GAUSSIAN or all(t == 0.0 for t in times))

    def column(r):
        try:
            steady = solution.steady(r) if needs_steady and source.p0 != 0.0 else None
            return [solution.temperature(r, t, steady) for t in times]
        except BioheatError as exc:
            raise _with_context(exc, r, times[0] if len(times) == 1 else float("nan")) from exc

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            columns = list(pool.map(column, radii))
    else:
        columns = [column(r) for r in radii]
    table = np.array(columns).reshape(radii.size, len(times))
    return [RadialProfile(t, radii, table[:, j]) for j, t in enumerate(times)]
