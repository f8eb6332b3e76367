"""Waveguide-array model of the search experiment.

Each waveguide is a lattice site; the propagation coordinate (mm) plays the
role of time, the evanescent coupling (1/mm) is the hopping rate and the
propagation-constant detuning of the target waveguide (1/mm) is the oracle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import DegeneratePoints, ZeroState
from .generators import SearchParams, classical_generator, quantum_hamiltonian
from .imaging import MODE_DIAMETER_UM, RasterImage, render_facet
from .lattice import Graph, TargetSpec, automorphism_orbit, build_paper31, resolve_target
from .propagator import evolve_classical, evolve_quantum

WAVELENGTH_NM = 633.0
BEAM_DIAMETER_UM = 400.0


@dataclass(frozen=True)
class FabPreset:
    """One row of the fabrication tables. Writing speeds are informational only."""

    name: str
    spacing_um: float
    v_mm_s: float
    v0_mm_s: float
    gamma_per_mm: float
    beta_per_mm: float
    lengths_mm: tuple[float, ...]
    table_gamma_t: tuple[float, ...]

    @property
    def beta_over_gamma(self) -> float:
        return self.beta_per_mm / self.gamma_per_mm

    def gamma_t(self, length_mm: float) -> float:
        return self.gamma_per_mm * length_mm

    def length(self, which) -> float:
        """Device length for ``"short"``, ``"long"`` or a number of millimetres."""
        if isinstance(which, str):
            key = which.lower()
            if key == "short":
                return self.lengths_mm[0]
            if key == "long":
                return self.lengths_mm[-1]
            return float(which)
        return float(which)


@lru_cache(maxsize=1)
def load_presets() -> dict[str, FabPreset]:
    text = resources.files("ctqw_search").joinpath("data/presets.json").read_text()
    data = json.loads(text)
    lengths = tuple(float(x) for x in data["lengths_mm"])
    return {
        row["name"]: FabPreset(
            name=row["name"],
            spacing_um=row["spacing_um"],
            v_mm_s=row["v_mm_s"],
            v0_mm_s=row["v0_mm_s"],
            gamma_per_mm=row["gamma_per_mm"],
            beta_per_mm=row["beta_per_mm"],
            lengths_mm=lengths,
            table_gamma_t=tuple(row["gamma_t"]),
        )
        for row in data["presets"]
    }


def get_preset(name: str) -> FabPreset:
    presets = load_presets()
    try:
        return presets[name.upper()]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(presets)}") from None


class CouplingLaw(RegressorMixin, BaseEstimator):
    """Exponential coupling law ``gamma(a) = gamma0 * exp(-a / decay_length)``.

    Fitted by least squares on ``log(gamma)``. ``X`` holds waveguide
    separations in micrometres, ``y`` couplings in 1/mm.
    """

    def fit(self, X, y):
        a = np.asarray(X, dtype=float).reshape(-1)
        g = np.asarray(y, dtype=float).reshape(-1)
        if a.shape != g.shape:
            raise ValueError("spacings and couplings must have the same length")
        if np.unique(a).shape[0] < 2:
            raise DegeneratePoints("need at least two distinct spacings")
        if np.any(g <= 0):
            raise DegeneratePoints("couplings must be positive")
        slope, intercept = np.polyfit(a, np.log(g), 1)
        if slope >= 0:
            raise DegeneratePoints("coupling does not decrease with separation")
        self.gamma0_ = float(math.exp(intercept))
        self.decay_length_um_ = float(-1.0 / slope)
        return self

    def predict(self, X):
        check_is_fitted(self)
        a = np.asarray(X, dtype=float).reshape(-1)
        return self.gamma0_ * np.exp(-a / self.decay_length_um_)


def fit_coupling_law(points: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """``(gamma0, decay_length_um)`` from ``(spacing_um, gamma_per_mm)`` pairs."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] < 2:
        raise DegeneratePoints("need at least two points")
    law = CouplingLaw().fit(pts[:, 0], pts[:, 1])
    return law.gamma0_, law.decay_length_um_


@dataclass(frozen=True)
class WaveguideArraySpec:
    graph: Graph
    gamma_per_mm: float
    beta_per_mm: float
    target: int | None
    length_mm: float
    wavelength_nm: float = WAVELENGTH_NM

    def __post_init__(self):
        if self.graph.spacing_um is None:
            raise ValueError("waveguide array graph needs spacing_um")
        if not self.length_mm >= 0:
            raise ValueError("length_mm must be non-negative")
        if not self.wavelength_nm > 0:
            raise ValueError("wavelength_nm must be positive")
        SearchParams(self.gamma_per_mm, self.beta_per_mm, self.target)

    @property
    def gamma_t(self) -> float:
        return self.gamma_per_mm * self.length_mm

    def hamiltonian(self) -> np.ndarray:
        params = SearchParams(self.gamma_per_mm, self.beta_per_mm, self.target)
        return quantum_hamiltonian(self.graph, params)

    @classmethod
    def from_preset(cls, preset, length="long", target="none", graph: Graph | None = None, **kwargs):
        """Array with a preset's spacing, coupling and detuning; 31-site layout by default."""
        if isinstance(preset, str):
            preset = get_preset(preset)
        if graph is None:
            graph = build_paper31()
        graph = graph.with_spacing(preset.spacing_um)
        return cls(
            graph=graph,
            gamma_per_mm=preset.gamma_per_mm,
            beta_per_mm=preset.beta_per_mm,
            target=resolve_target(graph, target),
            length_mm=preset.length(length),
            **kwargs,
        )


@dataclass(frozen=True)
class BeamSpec:
    """Input beam: 1/e^2 intensity diameter, tilt angles and transverse offset."""

    waist_diameter_um: float = math.inf
    tilt_x_mrad: float = 0.0
    tilt_y_mrad: float = 0.0
    offset_um: tuple[float, float] = field(default=(0.0, 0.0))

    def __post_init__(self):
        if not self.waist_diameter_um > 0:
            raise ValueError("waist diameter must be positive (or inf for flat illumination)")


def input_field(spec: WaveguideArraySpec, beam: BeamSpec) -> np.ndarray:
    """Beam field sampled at the waveguide centres, normalised to unit norm."""
    pos = spec.graph.positions()
    if math.isinf(beam.waist_diameter_um):
        amp = np.ones(spec.graph.n)
    else:
        w0 = beam.waist_diameter_um / 2.0
        dx = pos[:, 0] - beam.offset_um[0]
        dy = pos[:, 1] - beam.offset_um[1]
        amp = np.exp(-(dx**2 + dy**2) / w0**2)
    k = 2.0 * math.pi / (spec.wavelength_nm * 1e-3)  # 1/um
    sx = math.sin(beam.tilt_x_mrad * 1e-3)
    sy = math.sin(beam.tilt_y_mrad * 1e-3)
    psi = amp * np.exp(1j * k * (sx * pos[:, 0] + sy * pos[:, 1]))
    return psi / np.linalg.norm(psi)


def propagate_array(spec: WaveguideArraySpec, psi_in) -> np.ndarray:
    """Output field after ``length_mm`` of nearest-neighbour coupled-mode propagation."""
    return evolve_quantum(spec.hamiltonian(), psi_in, spec.length_mm)


def intensity_distribution(state) -> np.ndarray:
    p = np.abs(np.asarray(state, dtype=complex)) ** 2
    total = p.sum()
    if not total > 0:
        raise ZeroState("state has zero norm")
    return p / total


def rotation_asymmetry(graph: Graph, p) -> float:
    """Largest change of a site distribution under the lattice rotations of ``graph``."""
    p = np.asarray(p, dtype=float)
    return max(float(np.max(np.abs(p[perm] - p))) for perm in automorphism_orbit(graph))


def classical_distribution(graph: Graph, target, gamma_t: float) -> np.ndarray:
    """Classical walk distribution from the uniform start; absorbing at ``target`` if given."""
    w = resolve_target(graph, target)
    lc = classical_generator(graph, w)
    p0 = np.full(graph.n, 1.0 / graph.n)
    return evolve_classical(lc, p0, 1.0, gamma_t)


def classical_facet_series(
    graph: Graph,
    spec,
    gamma_t_list,
    mode_diameter_um: float = MODE_DIAMETER_UM,
    scale_um_per_px: float = 1.0,
) -> list[RasterImage]:
    """Classical distributions rendered like the measured output facets."""
    label = TargetSpec.parse(spec).label
    images = []
    for gt in gamma_t_list:
        p = classical_distribution(graph, spec, float(gt))
        comment = f"graph_id={graph.name} gamma_t={float(gt):.12g} target={label} walk=classical"
        images.append(render_facet(graph, p, mode_diameter_um, scale_um_per_px, comment))
    return images


def photonic_image(spec: WaveguideArraySpec, beam: BeamSpec, target_label: str, **render_kw):
    """Propagate, normalise and render one array; returns ``(distribution, image)``."""
    p = intensity_distribution(propagate_array(spec, input_field(spec, beam)))
    comment = f"graph_id={spec.graph.name} gamma_t={spec.gamma_t:.12g} target={target_label} walk=quantum"
    return p, render_facet(spec.graph, p, comment=comment, **render_kw)

