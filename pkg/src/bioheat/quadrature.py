"""Panel quadrature for semi-infinite, possibly oscillatory integrals.

Oscillatory integrands ``g(beta) * sin(w beta)`` (or ``cos``) are cut into
half-period panels, each integrated with a fixed-order Gauss-Legendre rule
and refined by bisection where the rule is not yet exact.  The sequence of
partial sums at panel boundaries is accelerated with Levin's u-transform,
which handles both the alternating (oscillatory) and the slowly varying
regime.  Non-oscillatory tails use geometrically growing panels with a
ratio-based tail estimate.

Products of two oscillations converge poorly under any single-frequency
acceleration, so :func:`integrate_components` splits such integrands into
a directly integrated head and a sum of single-frequency tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, ConvergenceError

_MAX_DEPTH = 60
_LEVIN_ORDER = 10
_BATCH = 16
_GEOMETRIC_SPLITS = 24


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    max_panels: int = 10**6
    panel_order: int = 15

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigError("tolerances must be > 0", "rel_tol")
        if self.max_panels < 1:
            raise ConfigError("must be >= 1", "max_panels")
        if self.panel_order < 2:
            raise ConfigError("must be >= 2", "panel_order")


DEFAULT_QUADRATURE = QuadratureConfig()


@lru_cache(maxsize=None)
def _gauss_rule(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _gauss(f, a, b, rule):
    x, w = rule
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    pts = mid[:, None] + half[:, None] * x[None, :]
    return half * (np.asarray(f(pts), dtype=float) @ w)


def _refine(f, a, b, coarse, tol, rule, depth):
    m = 0.5 * (a + b)
    left = _gauss(f, a, m, rule)
    right = _gauss(f, m, b, rule)
    fine = left + right
    # rounding floor: never ask for more than ~1e-14 relative per panel
    bad = np.abs(fine - coarse) > np.maximum(tol, 1e-14 * np.abs(fine))
    if bad.any():
        if depth >= _MAX_DEPTH:
            raise ConvergenceError(
                "panel refinement exceeded maximum depth",
                float(np.max(np.abs(fine - coarse))),
                depth,
            )
        idx = np.flatnonzero(bad)
        sub_a = np.concatenate([a[idx], m[idx]])
        sub_b = np.concatenate([m[idx], b[idx]])
        sub_coarse = np.concatenate([left[idx], right[idx]])
        sub = _refine(f, sub_a, sub_b, sub_coarse, 0.5 * tol, rule, depth + 1)
        fine[idx] = sub[: idx.size] + sub[idx.size:]
    return fine


def panel_integrals(f, edges, tol, order=15, rel=0.0):
    """Integrals of ``f`` over consecutive panels ``edges[i]..edges[i+1]``.

    Each panel is bisected until two successive Gauss estimates agree to
    ``tol``.  Panels starting at zero or spanning more than a factor two in
    ``beta`` are first split geometrically so that structure near the left
    end is never stepped over.  With ``rel`` > 0 the tolerance is relaxed to
    ``rel`` times the largest panel magnitude.
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    rule = _gauss_rule(order)
    owners = []
    sa, sb = [], []
    for i, (lo, hi) in enumerate(zip(a, b)):
        if lo == 0.0 or hi > 2.0 * lo:
            if lo == 0.0:
                cuts = hi * 2.0 ** -np.arange(_GEOMETRIC_SPLITS, -1, -1)
                pieces = np.concatenate([[0.0], cuts])
            else:
                n = int(math.ceil(math.log2(hi / lo)))
                pieces = lo * (hi / lo) ** (np.arange(n + 1) / n)
            sa.extend(pieces[:-1])
            sb.extend(pieces[1:])
            owners.extend([i] * (pieces.size - 1))
        else:
            sa.append(lo)
            sb.append(hi)
            owners.append(i)
    sa = np.array(sa)
    sb = np.array(sb)
    coarse = _gauss(f, sa, sb, rule)
    if rel > 0 and coarse.size:
        tol = max(tol, rel * float(np.max(np.abs(coarse))))
    sub_tol = tol / max(1, len(owners) // max(1, a.size))
    vals = _refine(f, sa, sb, coarse, sub_tol, rule, 0)
    return np.bincount(np.asarray(owners, dtype=int), weights=vals, minlength=a.size)


def levin_u(partial_sums, terms, first_index):
    """Levin u-transform of the last ``len(terms)`` partial sums.

    ``terms[j]`` is the series term whose inclusion produced
    ``partial_sums[j]``; ``first_index`` is the 0-based position of
    ``terms[0]`` in the full series.
    """
    k = len(terms) - 1
    j = np.arange(k + 1)
    beta = 1.0 + first_index
    weights = (-1.0) ** j * np.array([math.comb(k, i) for i in j], dtype=float) * ((beta + j) / (beta + k)) ** (k - 1)
    omega = (beta + j) * terms
    return float(np.sum(weights * partial_sums / omega) / np.sum(weights / omega))


def _tolerance(q, abs_tol, value):
    return max(q.abs_tol if abs_tol is None else abs_tol, q.rel_tol * abs(value))


def integrate_semi_infinite(integrand: Callable, oscillation_wavelength: float,
                            q: QuadratureConfig = DEFAULT_QUADRATURE, *, start: float = 0.0,
                            cutoff: float | None = None, abs_tol: float | None = None,
                            scale: float | None = None, accelerate: bool = True) -> float:
    """Integrate ``integrand`` over ``[start, inf)``.

    ``oscillation_wavelength`` is the period (in beta) of the integrand's
    single oscillation; panels are half a period wide.  Pass ``math.inf``
    for a non-oscillatory integrand together with a characteristic
    ``scale``.  ``cutoff`` is an analytic bound beyond which the integrand
    is negligible (damped integrands); integration then stops there at the
    latest.  ``abs_tol`` is in the integral's own units and defaults to
    ``q.abs_tol``.  ``accelerate=False`` disables the Levin stopping rule,
    which is only valid for a single oscillation frequency; a ``cutoff`` is
    then mandatory.
    """
    if not math.isfinite(oscillation_wavelength):
        if scale is None:
            raise ValueError("non-oscillatory integration needs a beta scale")
        return integrate_decaying(integrand, scale, q, start=start, abs_tol=abs_tol, cutoff=cutoff)
    if not oscillation_wavelength > 0:
        raise ValueError("oscillation wavelength must be positive")
    if not accelerate and cutoff is None:
        raise ValueError("an unaccelerated integral needs an analytic cutoff")

    h = 0.5 * oscillation_wavelength
    if cutoff is not None:
        cutoff = max(cutoff, start)
        if cutoff - start < 16 * h:
            h = max((cutoff - start) / 16.0, 1e-300)
        n_cut = int(math.ceil((cutoff - start) / h))
    else:
        n_cut = None

    terms = np.empty(0)
    sums = np.empty(0)
    total = 0.0
    previous = None
    floor = q.abs_tol if abs_tol is None else abs_tol
    n = 0
    batch = 2 * (_LEVIN_ORDER + 2)
    while True:
        n_next = n + batch
        if n_cut is not None:
            n_next = min(n_next, n_cut)
        if n_next > q.max_panels:
            raise ConvergenceError(
                "semi-infinite quadrature did not converge",
                abs(terms[-1]) if terms.size else float("nan"),
                n,
            )
        edges = start + h * np.arange(n, n_next + 1)
        ref = max(abs(total), floor)
        new = panel_integrals(integrand, edges, 1e-3 * max(floor, q.rel_tol * ref) / batch, q.panel_order,
                              rel=1e-3 * q.rel_tol)
        if not np.all(np.isfinite(new)):
            raise ConvergenceError("non-finite panel integral", float("nan"), n_next)
        new_sums = total + np.cumsum(new)
        terms = np.concatenate([terms, new])[-(_LEVIN_ORDER + 1) * 4:]
        sums = np.concatenate([sums, new_sums])[-(_LEVIN_ORDER + 1) * 4:]
        total = float(new_sums[-1])
        n = n_next
        batch = _BATCH

        if n_cut is not None and n >= n_cut:
            return total
        if not accelerate:
            continue
        recent = terms[-(_LEVIN_ORDER + 1):]
        if recent.size < _LEVIN_ORDER + 1:
            continue
        if np.max(np.abs(recent)) <= 1e-3 * floor:
            return total
        if np.any(recent == 0.0):
            previous = None
            continue
        estimate = levin_u(sums[-(_LEVIN_ORDER + 1):], recent, n - _LEVIN_ORDER - 1)
        if previous is not None and abs(estimate - previous) <= _tolerance(q, abs_tol, estimate):
            return estimate
        previous = estimate


def integrate_decaying(integrand: Callable, scale: float, q: QuadratureConfig = DEFAULT_QUADRATURE,
                       *, start: float = 0.0, abs_tol: float | None = None,
                       cutoff: float | None = None) -> float:
    """Integrate a non-oscillatory, algebraically decaying integrand over ``[start, inf)``.

    Panels double in width; once successive panel contributions shrink at a
    steady ratio the remaining geometric tail is added in closed form.
    """
    floor = q.abs_tol if abs_tol is None else abs_tol
    lo = start
    width = max(scale, start)
    total = 0.0
    contributions = []
    for count in range(1, 2000):
        hi = lo + width
        if cutoff is not None and hi >= cutoff:
            hi = max(cutoff, lo)
        tol = 1e-3 * max(floor, q.rel_tol * abs(total))
        value = float(panel_integrals(integrand, [lo, hi], tol, q.panel_order, rel=1e-3 * q.rel_tol)[0])
        total += value
        contributions.append(value)
        if cutoff is not None and hi >= cutoff:
            return total
        lo = hi
        width *= 2.0
        if count < 4:
            continue
        c1, c2 = contributions[-2], contributions[-1]
        if c2 == 0.0 and c1 == 0.0:
            return total
        if c1 != 0.0:
            ratio = c2 / c1
            if 0.0 <= ratio < 0.9:
                tail = c2 * ratio / (1.0 - ratio)
                if abs(tail) <= _tolerance(q, abs_tol, total):
                    return total + tail
    raise ConvergenceError("decaying-tail quadrature did not converge", abs(contributions[-1]), len(contributions))


@dataclass(frozen=True)
class Component:
    """One single-frequency term ``envelope(beta) * trig(frequency * beta)``."""

    envelope: Callable
    frequency: float
    trig: str  # "sin" or "cos"

    def __call__(self, beta):
        phase = self.frequency * beta
        return self.envelope(beta) * (np.sin(phase) if self.trig == "sin" else np.cos(phase))


def integrate_components(head: Callable, split: float, components: Sequence[Component],
                         q: QuadratureConfig = DEFAULT_QUADRATURE, *, scale: float,
                         abs_tol: float | None = None, head_wavelength: float | None = None) -> float:
    """``int_0^split head + sum_k int_split^inf component_k``.

    ``head`` must equal the sum of ``components`` for ``beta >= split``;
    components only need to be regular beyond ``split``.
    """
    floor = q.abs_tol if abs_tol is None else abs_tol
    if split > 0:
        hw = head_wavelength if head_wavelength else split
        n = max(1, int(math.ceil(split / (0.5 * hw))))
        edges = np.linspace(0.0, split, n + 1)
        head_value = float(np.sum(panel_integrals(head, edges, 1e-3 * floor / n, q.panel_order,
                                                  rel=1e-3 * q.rel_tol)))
    else:
        head_value = 0.0
    ref = abs(head_value)
    tail = 0.0
    share = floor / max(1, len(components))
    for comp in components:
        if comp.frequency == 0.0:
            if comp.trig == "sin":
                continue
            tail += integrate_decaying(comp.envelope, scale, q, start=split,
                                       abs_tol=max(share, 0.5 * q.rel_tol * ref))
        else:
            tail += integrate_semi_infinite(comp, 2.0 * math.pi / comp.frequency, q, start=split,
                                            abs_tol=max(share, 0.5 * q.rel_tol * ref))
    return head_value + tail
