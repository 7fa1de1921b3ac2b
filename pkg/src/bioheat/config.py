"""Scenario files: a JSON tree of SI-named parameters.

Sections are ``tissue``, ``particle``, ``field``, ``medium``, ``source`` and
``solver``; every section is optional and falls back to the reference
scenario.  Unknown sections or keys are rejected with a
:class:`~bioheat.errors.ConfigError` naming the dotted key.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field, replace
from pathlib import Path

from .errors import ConfigError
from .fdm import CENTERS, PERFUSION_MODES, SCHEMES
from .green import TimeIntegralConfig
from .mnp_power import A_PER_M_PER_MT, FieldSpec, MediumSpec, ParticleSpec
from .model import REFERENCE_SOURCES, REFERENCE_TISSUE, HeatSource, SourceKind, TissueProperties
from .quadrature import QuadratureConfig

TISSUE_KEYS = {
    "kappa_w_per_m_k": "kappa",
    "rho_kg_per_m3": "rho",
    "cp_j_per_kg_k": "cp",
    "rho_b_kg_per_m3": "rho_b",
    "cp_b_j_per_kg_k": "cp_b",
    "omega_b_per_s": "omega_b",
    "ta_k": "ta",
    "qmet_w_per_m3": "qmet",
}

PARTICLE_KEYS = {
    "diameter_m": "diameter_D",
    "anisotropy_j_per_m3": "anisotropy_K",
    "domain_magnetization_a_per_m": "domain_magnetization_Md",
    "tau0_s": "tau0",
    "surfactant_thickness_m": "surfactant_thickness_delta",
    "volume_fraction": "volume_fraction_phi",
}

MEDIUM_KEYS = {"viscosity_pa_s": "viscosity_eta", "temperature_k": "temperature_T"}

FIELD_KEYS = ("amplitude_a_per_m", "amplitude_mt", "frequency_hz")
SOURCE_KEYS = ("kind", "p0_w", "p0_w_per_m3", "r0_m", "shell_width_m")

QUADRATURE_KEYS = {"rel_tol": "rel_tol", "abs_tol_k": "abs_tol", "max_panels": "max_panels",
                   "panel_order": "panel_order"}
TIME_KEYS = {"time_rel_tol": "rel_tol", "time_abs_tol_k": "abs_tol", "grading_exponent": "grading",
             "max_subdivisions": "max_subdivisions", "initial_panels": "initial_panels"}
FDM_KEYS = {"fdm_dr_m": "dr", "fdm_outer_radius_m": "outer_radius", "fdm_dt_s": "dt",
            "fdm_scheme": "scheme", "fdm_center": "center", "fdm_perfusion": "perfusion"}
GRID_KEYS = ("r_max_m", "n_r", "threads")

SECTIONS = ("tissue", "particle", "field", "medium", "source", "solver")

DEFAULT_PARTICLE = ParticleSpec(19e-9)
DEFAULT_FIELD = FieldSpec.from_mT(5.0, 500e3)
DEFAULT_MEDIUM = MediumSpec()


@dataclass(frozen=True)
class FdmSettings:
    dr: float = 0.3e-3
    outer_radius: float = 0.15
    dt: float | None = None
    scheme: str = "central"
    center: str = "mirror"
    perfusion: str = "semi-implicit"


@dataclass(frozen=True)
class SolverSettings:
    quadrature: QuadratureConfig = dc_field(default_factory=QuadratureConfig)
    time_integral: TimeIntegralConfig = dc_field(default_factory=TimeIntegralConfig)
    fdm: FdmSettings = dc_field(default_factory=FdmSettings)
    r_max: float = 30e-3
    n_r: int = 121
    threads: int | None = None


@dataclass(frozen=True)
class Scenario:
    tissue: TissueProperties = REFERENCE_TISSUE
    particle: ParticleSpec = DEFAULT_PARTICLE
    field: FieldSpec = DEFAULT_FIELD
    medium: MediumSpec = DEFAULT_MEDIUM
    source_overrides: dict = dc_field(default_factory=dict)
    solver: SolverSettings = dc_field(default_factory=SolverSettings)

    def source(self, kind=None) -> HeatSource:
        """The heat source of ``kind``: the reference source with config overrides."""
        wanted = self.source_overrides.get("kind")
        if kind is None:
            kind = wanted
        if kind is None:
            raise ConfigError("no source kind given", "source.kind")
        kind = _kind(kind, "source.kind")
        if wanted is not None and _kind(wanted, "source.kind") is not kind:
            raise ConfigError(f"config describes a {wanted} source but {kind.value} was requested", "source.kind")
        base = REFERENCE_SOURCES[kind]
        ov = self.source_overrides
        total = kind in (SourceKind.POINT, SourceKind.SHELL)
        wrong = "p0_w_per_m3" if total else "p0_w"
        if wrong in ov:
            raise ConfigError(f"a {kind.value} source takes {'p0_w' if total else 'p0_w_per_m3'}", f"source.{wrong}")
        p0 = ov.get("p0_w" if total else "p0_w_per_m3", base.p0)
        r0 = ov.get("r0_m", base.r0)
        if kind is SourceKind.POINT and "r0_m" in ov:
            raise ConfigError("a point source has no radius", "source.r0_m")
        width = ov.get("shell_width_m", base.shell_width)
        if kind is not SourceKind.SHELL and "shell_width_m" in ov:
            raise ConfigError("only shell sources take a width", "source.shell_width_m")
        try:
            return HeatSource(kind, p0, r0, width if kind is SourceKind.SHELL else None)
        except ConfigError as exc:
            names = {"p0": "p0_w" if total else "p0_w_per_m3", "r0": "r0_m", "shell_width": "shell_width_m"}
            raise ConfigError(str(exc).split(": ", 1)[-1], f"source.{names.get(exc.key, exc.key)}") from None


REFERENCE_SCENARIO = Scenario()


def _kind(value, key):
    try:
        return SourceKind(value)
    except ValueError:
        raise ConfigError(f"unknown source kind {value!r}", key) from None


def _section(tree, name):
    sec = tree.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError("section must be an object", name)
    return sec


def _check_keys(sec, allowed, name):
    for key in sec:
        if key not in allowed:
            raise ConfigError(f"unknown key (allowed: {', '.join(sorted(allowed))})", f"{name}.{key}")


def _number(sec, key, name, integer=False):
    value = sec[key]
    ok = isinstance(value, int) if integer else isinstance(value, (int, float))
    if isinstance(value, bool) or not ok or not math.isfinite(value):
        kind = "an integer" if integer else "a finite number"
        raise ConfigError(f"must be {kind}, got {value!r}", f"{name}.{key}")
    return value


def _mapped(sec, mapping, name, integer_keys=()):
    _check_keys(sec, mapping, name)
    return {mapping[k]: _number(sec, k, name, k in integer_keys) for k in sec}


def _build(factory, base, kwargs, name, reverse):
    try:
        return replace(base, **kwargs) if base is not None else factory(**kwargs)
    except ConfigError as exc:
        key = reverse.get(exc.key, exc.key)
        raise ConfigError(str(exc).split(": ", 1)[-1], f"{name}.{key}") from None


def parse_scenario(tree) -> Scenario:
    if not isinstance(tree, dict):
        raise ConfigError("scenario must be a JSON object", "<root>")
    for name in tree:
        if name not in SECTIONS:
            raise ConfigError(f"unknown section (allowed: {', '.join(SECTIONS)})", name)

    def rev(mapping):
        return {v: k for k, v in mapping.items()}

    sec = _section(tree, "tissue")
    tissue = _build(TissueProperties, REFERENCE_TISSUE, _mapped(sec, TISSUE_KEYS, "tissue"), "tissue", rev(TISSUE_KEYS))

    sec = _section(tree, "particle")
    particle = _build(ParticleSpec, DEFAULT_PARTICLE, _mapped(sec, PARTICLE_KEYS, "particle"), "particle",
                      rev(PARTICLE_KEYS))

    sec = _section(tree, "medium")
    medium = _build(MediumSpec, DEFAULT_MEDIUM, _mapped(sec, MEDIUM_KEYS, "medium"), "medium", rev(MEDIUM_KEYS))

    sec = _section(tree, "field")
    _check_keys(sec, FIELD_KEYS, "field")
    if "amplitude_a_per_m" in sec and "amplitude_mt" in sec:
        raise ConfigError("give the amplitude in A/m or in mT, not both", "field.amplitude_mt")
    values = {k: _number(sec, k, "field") for k in sec}
    kwargs = {}
    if "amplitude_a_per_m" in values:
        kwargs["amplitude_H0"] = values["amplitude_a_per_m"]
    if "amplitude_mt" in values:
        kwargs["amplitude_H0"] = values["amplitude_mt"] * A_PER_M_PER_MT
    if "frequency_hz" in values:
        kwargs["frequency_f"] = values["frequency_hz"]
    field_spec = _build(FieldSpec, DEFAULT_FIELD, kwargs, "field",
                        {"amplitude_H0": "amplitude_a_per_m", "frequency_f": "frequency_hz"})

    sec = _section(tree, "source")
    _check_keys(sec, SOURCE_KEYS, "source")
    overrides = {}
    for key, value in sec.items():
        if key == "kind":
            overrides[key] = _kind(value, "source.kind").value
        else:
            overrides[key] = _number(sec, key, "source")

    solver = _parse_solver(_section(tree, "solver"))
    scenario = Scenario(tissue, particle, field_spec, medium, overrides, solver)
    if "kind" in overrides:
        scenario.source()  # validate eagerly
    return scenario


def _parse_solver(sec) -> SolverSettings:
    allowed = set(QUADRATURE_KEYS) | set(TIME_KEYS) | set(FDM_KEYS) | set(GRID_KEYS)
    _check_keys(sec, allowed, "solver")
    q_kwargs, t_kwargs, f_kwargs, grid = {}, {}, {}, {}
    for key, value in sec.items():
        if key in ("fdm_scheme", "fdm_center", "fdm_perfusion"):
            choices = {"fdm_scheme": SCHEMES, "fdm_center": CENTERS, "fdm_perfusion": PERFUSION_MODES}[key]
            if value not in choices:
                raise ConfigError(f"must be one of {choices}, got {value!r}", f"solver.{key}")
            f_kwargs[FDM_KEYS[key]] = value
            continue
        integer = key in ("max_panels", "panel_order", "max_subdivisions", "initial_panels", "n_r", "threads")
        number = _number(sec, key, "solver", integer)
        if key in QUADRATURE_KEYS:
            q_kwargs[QUADRATURE_KEYS[key]] = number
        elif key in TIME_KEYS:
            t_kwargs[TIME_KEYS[key]] = number
        elif key in FDM_KEYS:
            f_kwargs[FDM_KEYS[key]] = float(number)
        else:
            grid[key] = number
    rev_q = {v: k for k, v in QUADRATURE_KEYS.items()}
    rev_t = {v: k for k, v in TIME_KEYS.items()}
    quadrature = _build(QuadratureConfig, None, q_kwargs, "solver", rev_q)
    time_integral = _build(TimeIntegralConfig, None, t_kwargs, "solver", rev_t)
    if grid.get("r_max_m", 1.0) <= 0:
        raise ConfigError("must be > 0", "solver.r_max_m")
    if grid.get("n_r", 2) < 2:
        raise ConfigError("must be >= 2", "solver.n_r")
    if grid.get("threads", 0) < 0:
        raise ConfigError("must be >= 0", "solver.threads")
    return SolverSettings(
        quadrature, time_integral, FdmSettings(**f_kwargs),
        float(grid.get("r_max_m", 30e-3)), int(grid.get("n_r", 121)), grid.get("threads") or None,
    )


def load_scenario(path=None) -> Scenario:
    """Read a scenario file; ``None`` gives the reference scenario."""
    if path is None:
        return REFERENCE_SCENARIO
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc.strerror}", str(path)) from None
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", str(path)) from None
    return parse_scenario(tree)
