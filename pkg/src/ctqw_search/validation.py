"""Input validation helpers shared by the estimators and the functional API."""

from __future__ import annotations

import numpy as np

from .lattice import Graph, build_hex_patch, build_paper31, load_graph


def check_time_grid(times, *, min_points: int = 1, strictly_increasing: bool = True) -> np.ndarray:
    """Return ``times`` as a 1-D float array after checking it is a usable time grid."""
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if t.ndim != 1:
        raise ValueError(f"time grid must be one-dimensional, got shape {t.shape}")
    if t.shape[0] < min_points:
        raise ValueError(f"time grid needs at least {min_points} points, got {t.shape[0]}")
    if not np.all(np.isfinite(t)):
        raise ValueError("time grid has non-finite entries")
    if np.any(t < 0):
        raise ValueError("times must be non-negative")
    if strictly_increasing and np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be strictly ascending")
    return t


def make_grid(t_max: float, step: float, t_min: float = 0.0) -> np.ndarray:
    """Uniform grid ``t_min, t_min + step, ...`` up to and including ``t_max``."""
    if not step > 0:
        raise ValueError("step must be positive")
    if t_max < t_min:
        raise ValueError("t_max must not be below t_min")
    count = int(np.floor((t_max - t_min) / step + 1e-9)) + 1
    return t_min + step * np.arange(count)


def check_probability_vector(p, n: int | None = None, tol: float = 1e-10) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1)
    if n is not None and p.shape[0] != n:
        raise ValueError(f"distribution has length {p.shape[0]}, expected {n}")
    if np.any(p < -1e-14):
        raise ValueError("distribution has negative entries")
    if abs(p.sum() - 1.0) > tol:
        raise ValueError(f"distribution sums to {p.sum():.12g}")
    return np.clip(p, 0.0, None)


def check_graph(graph) -> Graph:
    """Accept a :class:`Graph` or a graph token (``paper31``, ``hex:<L>``, ``file:<path>``)."""
    if isinstance(graph, Graph):
        return graph
    if isinstance(graph, str):
        return parse_graph_token(graph)
    raise TypeError(f"expected a Graph or a graph token, got {type(graph).__name__}")


def parse_graph_token(token: str) -> Graph:
    token = token.strip()
    if token == "paper31":
        return build_paper31()
    kind, _, arg = token.partition(":")
    if kind == "hex":
        try:
            layers = int(arg)
        except ValueError:
            raise ValueError(f"bad layer count in {token!r}") from None
        if layers < 0:
            raise ValueError(f"layer count must be non-negative in {token!r}")
        return build_hex_patch(layers)
    if kind == "file":
        if not arg:
            raise ValueError("file: token needs a path")
        return load_graph(arg)
    raise ValueError(f"unknown graph {token!r}; use paper31, hex:<layers> or file:<path>")
