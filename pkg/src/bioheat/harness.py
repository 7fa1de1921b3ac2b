"""Method dispatch, cross-method comparison and output formatting.

Three solvers are wired behind one call signature.  Their coverage is
declared in :data:`CAPABILITIES`; any other (method, source) pair raises
:class:`~bioheat.errors.UnsupportedCombinationError` up front.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass

import numpy as np

from . import fdm, green, xform
from .config import SolverSettings
from .errors import ConfigError, UnsupportedCombinationError
from .mnp_power import FieldSpec, sweep_diameter
from .model import HeatSource, RadialProfile, SourceKind, TissueProperties

METHODS = ("xform", "green", "fdm")

CAPABILITIES = {
    "xform": frozenset(SourceKind),
    # the double time-space convolutions for distributed sources are not attempted
    "green": frozenset({SourceKind.POINT, SourceKind.SHELL}),
    # delta-function sources have no nodal representation
    "fdm": frozenset({SourceKind.GAUSSIAN, SourceKind.STEP}),
}

CSV_DIGITS = 9


def supports(method: str, kind) -> bool:
    if method not in CAPABILITIES:
        raise ConfigError(f"unknown method {method!r}; expected one of {METHODS}", "method")
    return SourceKind(kind) in CAPABILITIES[method]


def require_supported(method: str, kind) -> None:
    if not supports(method, kind):
        raise UnsupportedCombinationError(
            f"method {method!r} does not support the {SourceKind(kind).value} source "
            f"(supported: {', '.join(sorted(k.value for k in CAPABILITIES[method]))})"
        )


def thread_count(settings: SolverSettings | None = None) -> int:
    """Worker threads: ``BIOHEAT_THREADS`` caps the configured/automatic count."""
    auto = os.cpu_count() or 1
    wanted = settings.threads if settings is not None and settings.threads else auto
    env = os.environ.get("BIOHEAT_THREADS", "").strip()
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ConfigError(f"must be an integer, got {env!r}", "BIOHEAT_THREADS") from None
        if cap < 0:
            raise ConfigError("must be >= 0", "BIOHEAT_THREADS")
        if cap > 0:
            wanted = min(wanted, cap)
    return max(1, wanted)


def default_grid(kind, r_max=30e-3, n_r=121) -> np.ndarray:
    """Uniform ``n_r``-point grid on [0, r_max].

    The point source is singular at the center, so its grid drops r = 0 and
    starts one spacing out.
    """
    if not (r_max > 0 and n_r >= 2):
        raise ConfigError("need r_max > 0 and at least two grid points", "grid")
    grid = np.linspace(0.0, r_max, n_r)
    return grid[1:] if SourceKind(kind) is SourceKind.POINT else grid


def build_fdm_grid(tissue: TissueProperties, settings: SolverSettings) -> fdm.FdmGrid:
    f = settings.fdm
    return fdm.FdmGrid.build(tissue, f.dr, f.outer_radius, f.dt, f.scheme, f.center, f.perfusion)


def _green_profiles(source, tissue, times, radii, cfg):
    table = np.empty((len(times), radii.size))
    for j, t in enumerate(times):
        for i, r in enumerate(radii):
            if source.kind is SourceKind.POINT:
                table[j, i] = green.point_temperature(tissue, source.p0, r, t, cfg)
            else:
                table[j, i] = green.shell_temperature(tissue, source.p0, source.r0, r, t, cfg)
    return [RadialProfile(t, radii, table[j], label="green") for j, t in enumerate(times)]


def simulate(method: str, source: HeatSource, tissue: TissueProperties, times, radii=None,
             settings: SolverSettings | None = None) -> list[RadialProfile]:
    """Profiles at ``times``.

    ``xform`` and ``green`` evaluate on ``radii`` exactly.  ``fdm`` reports
    its own nodes up to ``max(radii)`` (every node when ``radii`` is None),
    at the first step on or after each requested time.
    """
    settings = settings or SolverSettings()
    require_supported(method, source.kind)
    times = [float(t) for t in times]
    if not times:
        raise ValueError("at least one time is required")
    if method == "fdm":
        grid = build_fdm_grid(tissue, settings)
        profiles = fdm.run(source, tissue, grid, times)
        if radii is None:
            return profiles
        keep = grid.radii <= float(np.max(radii)) * (1 + 1e-12)
        return [RadialProfile(p.time, p.radii[keep], p.temperatures[keep], p.label) for p in profiles]
    if radii is None:
        radii = default_grid(source.kind, settings.r_max, settings.n_r)
    radii = np.asarray(radii, dtype=float)
    if method == "xform":
        workers = thread_count(settings)
        return [
            RadialProfile(p.time, p.radii, p.temperatures, "xform")
            for p in xform.radial_profile(source, tissue, times, radii, settings.quadrature, workers)
        ]
    return _green_profiles(source, tissue, times, radii, settings.time_integral)


@dataclass(frozen=True)
class TimeComparison:
    requested_time: float
    time: float
    max_abs_diff: float
    max_rel_diff: float
    argmax_r: float
    max_rel_excess_diff: float
    center_rel_diff: float | None


@dataclass(frozen=True)
class ComparisonReport:
    """Per-time differences of ``method_b`` against the reference ``method_a``.

    ``max_rel_diff`` divides by the reference absolute temperature (K);
    ``max_rel_excess_diff`` divides by the peak reference rise above T_c.
    ``center_rel_diff`` is the signed (b - a) / a at r = 0 when the grid
    contains the center.
    """

    source: str
    method_a: str
    method_b: str
    rows: tuple

    @property
    def worst_abs(self) -> float:
        return max(row.max_abs_diff for row in self.rows)

    @property
    def worst_rel(self) -> float:
        return max(row.max_rel_diff for row in self.rows)

    @property
    def worst_rel_excess(self) -> float:
        return max(row.max_rel_excess_diff for row in self.rows)

    @property
    def worst_row(self) -> TimeComparison:
        return max(self.rows, key=lambda row: row.max_rel_diff)

    def to_text(self) -> str:
        lines = [f"{self.source}: {self.method_b} vs {self.method_a} (reference)"]
        lines.append(f"{'t_req_s':>10} {'t_s':>12} {'max_abs_K':>12} {'max_rel':>12} {'argmax_r_m':>12} "
                     f"{'max_rel_dT':>12} {'center_rel':>12}")
        for row in self.rows:
            center = "n/a" if row.center_rel_diff is None else f"{row.center_rel_diff:.4e}"
            lines.append(f"{row.requested_time:>10.6g} {row.time:>12.6g} {row.max_abs_diff:>12.4e} "
                         f"{row.max_rel_diff:>12.4e} {row.argmax_r:>12.6g} {row.max_rel_excess_diff:>12.4e} "
                         f"{center:>12}")
        worst = self.worst_row
        lines.append(f"worst: max_rel={worst.max_rel_diff:.4e} ({100 * worst.max_rel_diff:.4f}%) at "
                     f"t={worst.time:.6g} s, r={worst.argmax_r:.6g} m; max_abs={self.worst_abs:.4e} K; "
                     f"max_rel_dT={self.worst_rel_excess:.4e}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        header = ["t_requested_s", "t_s", "max_abs_diff_K", "max_rel_diff", "argmax_r_m",
                  "max_rel_excess_diff", "center_rel_diff"]
        rows = [[row.requested_time, row.time, row.max_abs_diff, row.max_rel_diff, row.argmax_r,
                 row.max_rel_excess_diff, row.center_rel_diff] for row in self.rows]
        return format_csv(header, rows)


def compare_profiles(reference: RadialProfile, other: RadialProfile, tc: float,
                     requested_time=None) -> TimeComparison:
    if not np.array_equal(reference.radii, other.radii):
        raise ValueError("profiles must share the same radial grid")
    ref = reference.temperatures
    diff = other.temperatures - ref
    absd = np.abs(diff)
    rel = absd / np.abs(ref)
    i = int(np.argmax(rel))
    rise = float(np.max(np.abs(ref - tc)))
    rel_excess = float(np.max(absd)) / rise if rise > 0 else (0.0 if np.max(absd) == 0 else math.inf)
    center = None
    if reference.radii[0] == 0.0:
        center = float(diff[0] / ref[0])
    return TimeComparison(
        reference.time if requested_time is None else float(requested_time), reference.time,
        float(np.max(absd)), float(rel[i]), float(reference.radii[i]), rel_excess, center,
    )


def compare(source: HeatSource, tissue: TissueProperties, method_a: str, method_b: str, times,
            radii=None, settings: SolverSettings | None = None) -> ComparisonReport:
    """Run both methods on a common grid and tabulate their differences.

    When either side is ``fdm`` the other is evaluated exactly on the FDM
    nodes (up to ``max(radii)``, default 30 mm) at the FDM's snapped times.
    """
    settings = settings or SolverSettings()
    require_supported(method_a, source.kind)
    require_supported(method_b, source.kind)
    times = [float(t) for t in times]
    if "fdm" in (method_a, method_b):
        r_max = float(np.max(radii)) if radii is not None else settings.r_max
        base = simulate("fdm", source, tissue, times, [r_max], settings)
        grid = base[0].radii
        actual = [p.time for p in base]

        def run(method):
            if method == "fdm":
                return base
            return simulate(method, source, tissue, actual, grid, settings)
    else:
        if radii is None:
            radii = default_grid(source.kind, settings.r_max, settings.n_r)

        def run(method):
            return simulate(method, source, tissue, times, radii, settings)

    a = run(method_a)
    b = a if method_b == method_a else run(method_b)
    rows = tuple(compare_profiles(pa, pb, tissue.tc, t) for pa, pb, t in zip(a, b, times))
    return ComparisonReport(source.kind.value, method_a, method_b, rows)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return f"{value:.{CSV_DIGITS}g}"


def format_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def time_label(t) -> str:
    return f"T_{float(t):g}"


def profiles_csv(profiles, labels=None) -> str:
    """``r_m`` column followed by one temperature column per profile."""
    if not profiles:
        raise ValueError("no profiles")
    radii = profiles[0].radii
    for p in profiles[1:]:
        if not np.array_equal(p.radii, radii):
            raise ValueError("profiles must share the same radial grid")
    labels = labels or [time_label(p.time) for p in profiles]
    header = ["r_m", *labels]
    rows = [[r, *(p.temperatures[i] for p in profiles)] for i, r in enumerate(radii)]
    return format_csv(header, rows)


def parse_csv(text):
    """Header and float table of a CSV produced by this module (blank cells become NaN)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = [[float(cell) if cell else math.nan for cell in row] for row in reader]
    return header, np.array(rows, dtype=float).reshape(len(rows), len(header))


def steady_table(source: HeatSource, tissue: TissueProperties, radii, settings: SolverSettings | None = None):
    """Steady profile plus, where one exists, an independent closed-form column."""
    settings = settings or SolverSettings()
    radii = np.asarray(radii, dtype=float)
    q = settings.quadrature
    main = np.array([xform.steady_temperature(source, tissue, r, q) for r in radii])
    kind = source.kind
    if kind is SourceKind.POINT:
        other = np.array([green.steady_point(tissue, source.p0, r) for r in radii])
        names = ["T_steady", "T_green", "diff"]
    elif kind is SourceKind.SHELL:
        other = np.array([green.steady_shell(tissue, source.p0, source.r0, r) for r in radii])
        names = ["T_steady", "T_green", "diff"]
    elif kind is SourceKind.STEP:
        other = np.array([xform.step_steady_closed_form(source, tissue, r) for r in radii])
        names = ["T_steady", "T_closed_form", "diff"]
    else:
        return ["r_m", "T_steady"], [[r, v] for r, v in zip(radii, main)]
    return ["r_m", *names], [[r, v, o, v - o] for r, v, o in zip(radii, main, other)]


PANEL_FREQUENCIES_KHZ = tuple(range(100, 1001, 100))
PANEL_AMPLITUDES_MT = tuple(range(1, 11))


def power_panel(panel: str, particle, medium, d_range=(10e-9, 30e-9), n_points=201,
                amplitude_mT=5.0, frequency_hz=500e3):
    """P(D) curves: panel ``a`` varies f at fixed H0, panel ``b`` varies H0 at fixed f.

    Returns ``(diameters_m, labels, curves)``.
    """
    if panel == "a":
        settings = [(f"f{f}kHz", FieldSpec.from_mT(amplitude_mT, f * 1e3)) for f in PANEL_FREQUENCIES_KHZ]
    elif panel == "b":
        settings = [(f"H0_{h}mT", FieldSpec.from_mT(h, frequency_hz)) for h in PANEL_AMPLITUDES_MT]
    else:
        raise ConfigError(f"unknown panel {panel!r}; expected 'a' or 'b'", "panel")
    diameters = None
    labels, curves = [], []
    for label, field in settings:
        diameters, powers = sweep_diameter(particle, field, medium, d_range, n_points)
        labels.append(label)
        curves.append(powers)
    return diameters, labels, curves


def power_panel_csv(diameters, labels, curves) -> str:
    """Six significant digits, matching the single-sweep CSV."""
    lines = [",".join(["D_nm", *(f"P_{label}_W_per_m3" for label in labels)])]
    for i, d in enumerate(diameters):
        lines.append(",".join([f"{d * 1e9:.6g}", *(f"{c[i]:.6g}" for c in curves)]))
    return "\n".join(lines) + "\n"


def plot_script(csv_name: str, title: str, xlabel="r (m)", ylabel="T (K)", n_series=1) -> str:
    """A gnuplot script drawing every data column of ``csv_name`` against the first."""
    safe = csv_name.replace("'", "")
    series = ", \\\n     ".join(
        f"'{safe}' using 1:{j + 2} with lines title columnheader({j + 2})" for j in range(n_series)
    )
    return (
        "# gnuplot script\n"
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        f"set title '{title}'\n"
        f"set xlabel '{xlabel}'\n"
        f"set ylabel '{ylabel}'\n"
        "set grid\n"
        f"plot {series}\n"
    )

