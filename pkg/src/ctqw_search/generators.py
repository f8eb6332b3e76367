"""Search Hamiltonian and classical absorbing-walk generator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import TargetOutOfRange
from .lattice import Graph


@dataclass(frozen=True)
class SearchParams:
    """Hopping rate ``gamma`` (> 0), target detuning ``beta`` (>= 0), optional target vertex."""

    gamma: float = 1.0
    beta: float = 0.0
    target: int | None = None

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")


def _check_target(target, n: int) -> int | None:
    if target is None:
        return None
    target = int(target)
    if not 0 <= target < n:
        raise TargetOutOfRange(f"target {target} outside [0, {n})")
    return target


def quantum_hamiltonian(graph: Graph, params: SearchParams) -> np.ndarray:
    """``-gamma * A - beta * |w><w|``; the oracle term is dropped when there is no target."""
    target = _check_target(params.target, graph.n)
    h = -params.gamma * graph.adjacency.astype(float)
    if target is not None:
        h[target, target] -= params.beta
    return h


def classical_generator(graph: Graph, target: int | None = None) -> np.ndarray:
    """Generator ``L_c`` of the absorbing walk, evolved as ``expm(-gamma t L_c)``.

    Off-diagonal entries are ``-A[j, k]``; the diagonal makes every column sum
    to zero, and the target column is zeroed so the target is a sink. With no
    target this is ``D - A``.
    """
    target = _check_target(target, graph.n)
    adj = graph.adjacency.astype(float)
    lc = -adj
    lc[np.diag_indices(graph.n)] = adj.sum(axis=0)
    if target is not None:
        lc[:, target] = 0.0
    return lc


def transient_block(graph: Graph, target: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows/columns of ``L_c`` not involving the sink.

    The block equals ``D - A`` restricted to the non-target vertices, with the
    full degrees kept on the diagonal, so it is symmetric. Returns the block
    and the indices of the vertices it covers.
    """
    target = _check_target(target, graph.n)
    keep = np.array([k for k in range(graph.n) if k != target], dtype=int)
    lc = classical_generator(graph, target)
    return lc[np.ix_(keep, keep)], keep


def matrix_to_csv(m: np.ndarray) -> str:
    """Row-major, comma-separated dump for debugging."""
    return "".join(",".join(format(float(v) + 0.0, ".12g") for v in row) + "\n" for row in np.asarray(m))
