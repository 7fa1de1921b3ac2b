"""Green's-function solutions for point and shell sources.

The perfused radial heat kernel

    G(r, t; r', tau) = exp(-b s) / (2 r r' sqrt(a pi s))
                       * [exp(-(r - r')^2 / (4 a s)) - exp(-(r + r')^2 / (4 a s))],
    s = t - tau,

convolved in time against a delta source gives one-dimensional integrals
over the elapsed time ``s``.  They are evaluated on a graded mesh
``s = t u^p`` (the integrand is exponentially flat near ``s = 0`` for
r > 0 but sharply peaked when r is small) with globally adaptive
Gauss-Legendre panels.  This module is deliberately independent of the
transform solver so the two can check each other.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ConvergenceError, SingularityError
from .model import TissueProperties

R_CENTER_EPS = 1e-9

_LOW, _HIGH = (np.polynomial.legendre.leggauss(n) for n in (10, 20))


@dataclass(frozen=True)
class TimeIntegralConfig:
    rel_tol: float = 1e-8
    grading: float = 2.0
    max_subdivisions: int = 10**5
    initial_panels: int = 8
    abs_tol: float = 1e-12  # K

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigError("tolerances must be > 0", "rel_tol")
        if not self.grading >= 1:
            raise ConfigError("grading exponent must be >= 1", "grading")
        if self.initial_panels < 1 or self.max_subdivisions < self.initial_panels:
            raise ConfigError("need 1 <= initial_panels <= max_subdivisions", "initial_panels")


DEFAULT_TIME_CONFIG = TimeIntegralConfig()


def _panel(f, lo, hi):
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    coarse = half * float(f(mid + half * _LOW[0]) @ _LOW[1])
    fine = half * float(f(mid + half * _HIGH[0]) @ _HIGH[1])
    return fine, abs(fine - coarse)


def elapsed_time_integral(kernel, t, cfg: TimeIntegralConfig = DEFAULT_TIME_CONFIG, abs_tol=0.0):
    """``int_0^t kernel(s) ds`` via the substitution ``s = t u^p``."""
    if t == 0.0:
        return 0.0
    p = cfg.grading

    def f(u):
        return kernel(t * u**p) * (t * p * u ** (p - 1))

    edges = np.linspace(0.0, 1.0, cfg.initial_panels + 1)
    heap = []
    total = 0.0
    error = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, err = _panel(f, lo, hi)
        total += value
        error += err
        heapq.heappush(heap, (-err, lo, hi, value))
    count = len(heap)
    while error > max(abs_tol, cfg.rel_tol * abs(total)):
        if count >= cfg.max_subdivisions:
            raise ConvergenceError("elapsed-time quadrature did not converge", error, count)
        neg_err, lo, hi, value = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        v1, e1 = _panel(f, lo, mid)
        v2, e2 = _panel(f, mid, hi)
        total += v1 + v2 - value
        error += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        count += 1
    # re-sum to shed accumulated rounding from the incremental updates
    return math.fsum(item[3] for item in heap)


def _check(r, t):
    if not (r >= 0 and math.isfinite(r)):
        raise ValueError(f"radius must be finite and >= 0, got {r!r}")
    if not (t >= 0 and math.isfinite(t)):
        raise ValueError(f"time must be finite and >= 0, got {t!r}")


def _center_kernel(a, b, radius):
    """exp(-b s - radius^2 / (4 a s)) / (a s)^{3/2}."""
    c = radius * radius / (4.0 * a)

    def kernel(s):
        s = np.asarray(s, dtype=float)
        safe = np.where(s > 0, s, 1.0)
        val = np.exp(-b * safe - c / safe) / (a * safe) ** 1.5
        return np.where(s > 0, val, 0.0)

    return kernel


def point_temperature(tissue: TissueProperties, P0: float, r: float, t: float,
                      cfg: TimeIntegralConfig = DEFAULT_TIME_CONFIG) -> float:
    _check(r, t)
    if r < R_CENTER_EPS:
        raise SingularityError("point-source time integral diverges at r = 0")
    if t == 0.0 or P0 == 0.0:
        return tissue.tc
    a, b = tissue.a, tissue.b
    pref = a * P0 / (8.0 * math.pi**1.5 * tissue.kappa)
    integral = elapsed_time_integral(_center_kernel(a, b, r), t, cfg, cfg.abs_tol / pref)
    return tissue.tc + pref * integral


def shell_kernel(a, b, r, r0):
    """Shell-source kernel exp(-b s) / sqrt(a pi s) * [two-Gaussian difference]."""
    def kernel(s):
        s = np.asarray(s, dtype=float)
        safe = np.where(s > 0, s, 1.0)
        four_as = 4.0 * a * safe
        # e^{-(r-r0)^2/4as} - e^{-(r+r0)^2/4as} = e^{-(r-r0)^2/4as} (1 - e^{-r r0 / (a s)})
        diff = np.exp(-((r - r0) ** 2) / four_as) * -np.expm1(-r * r0 / (a * safe))
        val = np.exp(-b * safe) / np.sqrt(a * math.pi * safe) * diff
        return np.where(s > 0, val, 0.0)

    return kernel


def shell_temperature(tissue: TissueProperties, P0: float, r0: float, r: float, t: float,
                      cfg: TimeIntegralConfig = DEFAULT_TIME_CONFIG) -> float:
    _check(r, t)
    if not r0 > 0:
        raise ValueError("shell radius must be > 0")
    if t == 0.0 or P0 == 0.0:
        return tissue.tc
    a, b, kappa = tissue.a, tissue.b, tissue.kappa
    if r < R_CENTER_EPS:
        pref = a * P0 / (8.0 * math.pi**1.5 * kappa)
        kernel = _center_kernel(a, b, r0)
    else:
        pref = a * P0 / (8.0 * math.pi * kappa * r * r0)
        kernel = shell_kernel(a, b, r, r0)
    integral = elapsed_time_integral(kernel, t, cfg, cfg.abs_tol / pref)
    return tissue.tc + pref * integral


def green_kernel(tissue: TissueProperties, r, t, r_src, tau):
    """Radial Green's function G(r, t; r', tau) of the perfused heat equation."""
    a, b = tissue.a, tissue.b
    s = t - tau
    return (
        math.exp(-b * s) / (2.0 * r * r_src * math.sqrt(a * math.pi * s))
        * (math.exp(-((r - r_src) ** 2) / (4 * a * s)) - math.exp(-((r + r_src) ** 2) / (4 * a * s)))
    )


def steady_point(tissue: TissueProperties, P0: float, r: float) -> float:
    if r < R_CENTER_EPS:
        raise SingularityError("point-source steady state is singular at r = 0")
    decay = math.sqrt(tissue.b / tissue.a)
    return tissue.tc + P0 / (4.0 * math.pi * tissue.kappa * r) * math.exp(-decay * r)


def steady_shell(tissue: TissueProperties, P0: float, r0: float, r: float) -> float:
    if r < R_CENTER_EPS:
        return steady_shell_center(tissue, P0, r0)
    a, b = tissue.a, tissue.b
    decay = math.sqrt(b / a)
    # e^{-d|r-r0|} - e^{-d(r+r0)} = e^{-d|r-r0|} (1 - e^{-2 d min(r, r0)})
    bracket = math.exp(-decay * abs(r - r0)) * -math.expm1(-2.0 * decay * min(r, r0))
    return tissue.tc + P0 / (8.0 * math.pi * tissue.kappa * r * r0) * math.sqrt(a / b) * bracket


def steady_shell_center(tissue: TissueProperties, P0: float, r0: float) -> float:
    decay = math.sqrt(tissue.b / tissue.a)
    return tissue.tc + P0 / (4.0 * math.pi * tissue.kappa * r0) * math.exp(-decay * r0)


def point_temperature_erfc(tissue: TissueProperties, P0: float, r: float, t: float) -> float:
    """Closed form of the point-source time integral (verification path).

    With ``u = r / (2 sqrt(a s))`` the kernel integrates to a pair of
    complementary error functions.
    """
    if r < R_CENTER_EPS:
        raise SingularityError("point-source time integral diverges at r = 0")
    if t == 0.0:
        return tissue.tc
    a, b = tissue.a, tissue.b
    c = r * r / (4.0 * a)
    root_bc = math.sqrt(b * c)
    x, y = math.sqrt(c / t), math.sqrt(b * t)
    # int_0^t s^{-3/2} e^{-bs-c/s} ds
    integral = math.sqrt(math.pi) / (2.0 * math.sqrt(c)) * (
        math.exp(-2 * root_bc) * math.erfc(x - y) + math.exp(2 * root_bc) * math.erfc(x + y)
    )
    pref = a * P0 / (8.0 * math.pi**1.5 * tissue.kappa)
    return tissue.tc + pref * integral / a**1.5
