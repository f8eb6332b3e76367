"""Quantum spatial search versus the classical absorbing walk.

Time is measured in units of the inverse hopping rate throughout: the
hopping rate is fixed to one and the only physical knob is the detuning
ratio ``beta_over_gamma``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import DivisionDomain, TargetNotInGraph
from .generators import SearchParams, classical_generator, quantum_hamiltonian, transient_block
from .lattice import Graph, TargetSpec, build_hex_patch, resolve_target
from .propagator import eig_symmetric
from .validation import check_graph, check_time_grid, make_grid

logger = logging.getLogger(__name__)

DEFAULT_BETA_PAPER31 = 4.16
DEFAULT_BETA_SCALING = 4.0
DEFAULT_WINDOW_FACTOR = 2.0 / 6.0
SCALING_TARGETS = ("C", "1N", "2N")


def uniform_state(n: int) -> np.ndarray:
    """Equal-amplitude, zero-phase superposition over ``n`` sites."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return np.full(n, 1.0 / math.sqrt(n), dtype=complex)


@dataclass(frozen=True)
class EvolutionSeries:
    gamma_t_grid: np.ndarray
    quantum_site_probs: np.ndarray  # (len(grid), n)
    classical_target_prob: np.ndarray
    target: int
    params: SearchParams
    graph_id: str
    model: "SpatialSearch | None" = field(default=None, repr=False, compare=False)

    @property
    def quantum_target_prob(self) -> np.ndarray:
        return self.quantum_site_probs[:, self.target]


@dataclass(frozen=True)
class RatioSeries:
    gamma_t_grid: np.ndarray
    ratio: np.ndarray
    evaluate: Callable[[float], float] | None = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class ScalingRecord:
    n: int
    layers: int
    target_kind: str
    beta_over_gamma: float
    t_opt: float
    r_opt: float
    pq_opt: float
    pc_opt: float


class SpatialSearch(BaseEstimator):
    """Quantum walk search for one marked vertex, with its classical counterpart.

    ``fit`` takes a :class:`~ctqw_search.lattice.Graph` (or a graph token such
    as ``"paper31"``) and factorises both generators once; the evaluation
    methods then accept any array of dimensionless times.

    Parameters
    ----------
    beta_over_gamma : float
        Target detuning in units of the hopping rate.
    target : str, int or TargetSpec
        Marked vertex: ``"C"``, ``"S"``, ``"1N"``, ``"2N"`` or an index.
    """

    def __init__(self, beta_over_gamma: float = DEFAULT_BETA_PAPER31, target="C"):
        self.beta_over_gamma = beta_over_gamma
        self.target = target

    def fit(self, X, y=None):
        graph = check_graph(X)
        spec = TargetSpec.parse(self.target)
        target = resolve_target(graph, spec)
        if target is None:
            raise ValueError("spatial search needs a target; got target 'none'")
        self.params_ = SearchParams(gamma=1.0, beta=float(self.beta_over_gamma), target=target)
        self.graph_ = graph
        self.target_kind_ = spec.label
        self.target_index_ = target
        self.n_sites_ = graph.n
        self.hamiltonian_ = quantum_hamiltonian(graph, self.params_)
        self.eigensystem_ = eig_symmetric(self.hamiltonian_)
        self.classical_generator_ = classical_generator(graph, target)

        self.psi0_ = uniform_state(graph.n)
        v = self.eigensystem_.eigenvectors
        self._coeffs = v.T @ self.psi0_
        self._target_weights = v[target] * self._coeffs

        block, keep = transient_block(graph, target)
        self._transient = eig_symmetric(block)
        self._keep = keep
        p_transient0 = np.full(keep.shape[0], 1.0 / graph.n)
        self._transient_coeffs = self._transient.eigenvectors.T @ p_transient0
        # inflow into the sink from each transient vertex
        inflow = graph.adjacency[target, keep].astype(float)
        self._inflow_weights = (self._transient.eigenvectors.T @ inflow) * self._transient_coeffs
        return self

    def quantum_amplitudes(self, times) -> np.ndarray:
        check_is_fitted(self)
        t = check_time_grid(times, strictly_increasing=False)
        v = self.eigensystem_.eigenvectors
        phases = np.exp(-1j * np.outer(t, self.eigensystem_.eigenvalues))
        return (phases * self._coeffs) @ v.T

    def quantum_site_probabilities(self, times) -> np.ndarray:
        """``|<j| exp(-i H t) |psi0>|**2`` as a ``(len(times), n)`` array."""
        return np.abs(self.quantum_amplitudes(times)) ** 2

    def quantum_target_probability(self, times) -> np.ndarray:
        check_is_fitted(self)
        t = check_time_grid(times, strictly_increasing=False)
        phases = np.exp(-1j * np.outer(t, self.eigensystem_.eigenvalues))
        return np.abs(phases @ self._target_weights) ** 2

    def classical_target_probability(self, times) -> np.ndarray:
        """Probability that the absorbing walk has reached the target by each time.

        Integrates the inflow into the sink in the eigenbasis of the
        transient block, which keeps full relative accuracy at small times.
        """
        check_is_fitted(self)
        t = check_time_grid(times, strictly_increasing=False)
        lam = self._transient.eigenvalues
        lt = np.outer(t, lam)
        with np.errstate(divide="ignore", invalid="ignore"):
            integral = np.where(lam > 1e-300, -np.expm1(-lt) / lam, t[:, None])
        return 1.0 / self.n_sites_ + integral @ self._inflow_weights

    def classical_site_probabilities(self, times) -> np.ndarray:
        """Full classical distribution, ``(len(times), n)``."""
        check_is_fitted(self)
        t = check_time_grid(times, strictly_increasing=False)
        v = self._transient.eigenvectors
        decay = np.exp(-np.outer(t, self._transient.eigenvalues))
        out = np.empty((t.shape[0], self.n_sites_))
        out[:, self._keep] = np.clip((decay * self._transient_coeffs) @ v.T, 0.0, None)
        out[:, self.target_index_] = self.classical_target_probability(t)
        return out

    def ratio(self, times) -> np.ndarray:
        pq = self.quantum_target_probability(times)
        pc = self.classical_target_probability(times)
        if np.any(pc <= 1e-300):
            raise DivisionDomain("classical target probability vanishes on the grid")
        return pq / pc

    def transform(self, X) -> np.ndarray:
        """Columns ``[p_quantum_target, p_classical_target, ratio]`` for each time in ``X``."""
        pq = self.quantum_target_probability(X)
        pc = self.classical_target_probability(X)
        return np.column_stack([pq, pc, pq / pc])

    def evolution_series(self, times) -> EvolutionSeries:
        check_is_fitted(self)
        t = check_time_grid(times)
        return EvolutionSeries(
            gamma_t_grid=t,
            quantum_site_probs=self.quantum_site_probabilities(t),
            classical_target_prob=self.classical_target_probability(t),
            target=self.target_index_,
            params=self.params_,
            graph_id=self.graph_.name,
            model=self,
        )

    def optimal_time(self, t_max: float, step: float = 1e-3, refine: bool = True) -> tuple[float, float]:
        grid = make_grid(t_max, step)
        r = RatioSeries(grid, self.ratio(grid), evaluate=lambda t: float(self.ratio([t])[0]))
        return optimal_time(r, refine=refine)


def run_search(graph, spec, beta_over_gamma: float, gamma_t_grid) -> EvolutionSeries:
    """Quantum and classical search from the uniform state, sampled on ``gamma_t_grid``."""
    model = SpatialSearch(beta_over_gamma=beta_over_gamma, target=TargetSpec.parse(spec)).fit(graph)
    return model.evolution_series(gamma_t_grid)


def ratio_series(series: EvolutionSeries) -> RatioSeries:
    pc = np.asarray(series.classical_target_prob)
    if np.any(pc <= 1e-300):
        raise DivisionDomain("classical target probability vanishes on the grid")
    evaluate = None
    if series.model is not None:
        model = series.model
        evaluate = lambda t: float(model.ratio([t])[0])  # noqa: E731
    return RatioSeries(series.gamma_t_grid, series.quantum_target_prob / pc, evaluate)


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f: Callable[[float], float], a: float, b: float, rtol: float = 1e-6, max_iter: int = 200):
    """Maximise a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= rtol * max(abs(a) + abs(b), 1e-9) * 0.5:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def optimal_time(r: RatioSeries, refine: bool = False, rtol: float = 1e-6) -> tuple[float, float]:
    """Time of the largest ratio, first occurrence on ties.

    With ``refine`` the grid maximum is polished by golden-section search on
    the two neighbouring grid intervals; this needs ``r.evaluate``.
    """
    t = np.asarray(r.gamma_t_grid, dtype=float)
    values = np.asarray(r.ratio, dtype=float)
    if t.shape[0] < 3:
        raise ValueError("optimal_time needs at least three grid points")
    k = int(np.argmax(values))
    t_best, r_best = float(t[k]), float(values[k])
    if not refine:
        return t_best, r_best
    if r.evaluate is None:
        raise ValueError("refinement needs a ratio series with an evaluate callable")
    lo = float(t[max(k - 1, 0)])
    hi = float(t[min(k + 1, t.shape[0] - 1)])
    t_ref, r_ref = golden_section_max(r.evaluate, lo, hi, rtol=rtol)
    if r_ref > r_best:
        return float(t_ref), float(r_ref)
    return t_best, r_best


def beta_time_heatmap(graph, spec, beta_grid, gamma_t_grid, threads: int = 1) -> np.ndarray:
    """Target probability ``p_w^Q``; rows follow ``beta_grid``, columns ``gamma_t_grid``."""
    betas = np.atleast_1d(np.asarray(beta_grid, dtype=float))
    if betas.size == 0:
        raise ValueError("beta grid is empty")
    times = check_time_grid(gamma_t_grid)
    graph = check_graph(graph)

    def row(beta):
        model = SpatialSearch(beta_over_gamma=float(beta), target=spec).fit(graph)
        return model.quantum_target_probability(times)

    return np.array(_ordered_map(row, list(betas), threads)).reshape(betas.shape[0], times.shape[0])


def _ordered_map(func, items: Sequence, threads: int = 1) -> list:
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def scaling_point(
    graph: Graph,
    layers: int,
    target: str,
    beta_over_gamma: float,
    step: float = 1e-3,
    window_factor: float = DEFAULT_WINDOW_FACTOR,
    refine: bool = True,
) -> ScalingRecord:
    model = SpatialSearch(beta_over_gamma=beta_over_gamma, target=target).fit(graph)
    t_opt, _ = model.optimal_time(window_factor * graph.n, step=step, refine=refine)
    pq, pc, _ = model.transform([t_opt])[0]
    return ScalingRecord(
        n=graph.n,
        layers=layers,
        target_kind=TargetSpec.parse(target).label,
        beta_over_gamma=float(beta_over_gamma),
        t_opt=float(t_opt),
        r_opt=float(pq / pc),
        pq_opt=float(pq),
        pc_opt=float(pc),
    )


def _check_scaling_inputs(layer_range, targets) -> tuple[list[int], list[str]]:
    layers = [int(x) for x in layer_range]
    if not layers or min(layers) < 1:
        raise ValueError("layer range must be non-empty with layers >= 1")
    kinds = [TargetSpec.parse(t).label for t in targets]
    if not kinds:
        raise ValueError("at least one target is required")
    bad = [k for k in kinds if k not in SCALING_TARGETS]
    if bad:
        raise ValueError(f"scaling targets must be among {SCALING_TARGETS}, got {bad}")
    return layers, kinds


def _run_points(points, step, window_factor, refine, threads, on_missing) -> list[ScalingRecord | None]:
    graphs = {layers: build_hex_patch(layers) for layers in sorted({p[0] for p in points})}

    def work(point):
        layers, kind, beta = point
        try:
            return scaling_point(graphs[layers], layers, kind, beta, step, window_factor, refine)
        except TargetNotInGraph:
            if on_missing == "raise":
                raise
            logger.warning("skipping layers=%d target=%s: site not in the patch", layers, kind)
            return None

    return _ordered_map(work, points, threads)


def scaling_study(
    layer_range,
    targets=SCALING_TARGETS,
    beta_over_gamma: float = DEFAULT_BETA_SCALING,
    *,
    step: float = 1e-3,
    window_factor: float = DEFAULT_WINDOW_FACTOR,
    refine: bool = True,
    threads: int = 1,
    on_missing: str = "skip",
) -> list[ScalingRecord]:
    """Optimal ratio on growing hexagonal patches.

    Each ``(layers, target)`` pair is searched over ``0 <= gamma t <=
    window_factor * n``. Pairs whose target site does not exist in the patch
    (2N on a single ring) are skipped with a warning, or raise
    :class:`TargetNotInGraph` when ``on_missing="raise"``. Records come back
    in input order: layers first, then targets.
    """
    if not beta_over_gamma > 0:
        raise ValueError("beta_over_gamma must be positive")
    if on_missing not in ("skip", "raise"):
        raise ValueError("on_missing must be 'skip' or 'raise'")
    layers, kinds = _check_scaling_inputs(layer_range, targets)
    points = [(layer, kind, float(beta_over_gamma)) for layer in layers for kind in kinds]
    records = _run_points(points, step, window_factor, refine, threads, on_missing)
    return [r for r in records if r is not None]


@dataclass(frozen=True)
class ScalingSurface:
    """``r_opt[layer, beta, target]``; NaN where the target site does not exist."""

    layers: tuple[int, ...]
    betas: tuple[float, ...]
    targets: tuple[str, ...]
    r_opt: np.ndarray
    records: tuple[ScalingRecord, ...]

    def slice_beta(self, beta: float) -> list[ScalingRecord]:
        return [r for r in self.records if r.beta_over_gamma == float(beta)]


def beta_size_surface(
    layer_range,
    targets,
    beta_grid,
    *,
    step: float = 1e-3,
    window_factor: float = DEFAULT_WINDOW_FACTOR,
    refine: bool = True,
    threads: int = 1,
) -> ScalingSurface:
    betas = [float(b) for b in np.atleast_1d(np.asarray(beta_grid, dtype=float))]
    if not betas:
        raise ValueError("beta grid is empty")
    if min(betas) <= 0:
        raise ValueError("beta_over_gamma values must be positive")
    layers, kinds = _check_scaling_inputs(layer_range, targets)
    points = [(layer, kind, beta) for layer in layers for beta in betas for kind in kinds]
    results = _run_points(points, step, window_factor, refine, threads, "skip")
    table = np.full((len(layers), len(betas), len(kinds)), np.nan)
    for (layer, kind, beta), rec in zip(points, results):
        if rec is not None:
            table[layers.index(layer), betas.index(beta), kinds.index(kind)] = rec.r_opt
    return ScalingSurface(
        tuple(layers), tuple(betas), tuple(kinds), table, tuple(r for r in results if r is not None)
    )
