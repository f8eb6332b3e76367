"""Finite patches of the triangular lattice.

Sites are labelled by integer Bravais indices ``(i, j)`` along two unit
vectors of equal length separated by 120 degrees. The embedding in the plane
is ``x = i - j/2``, ``y = j*sqrt(3)/2`` (in units of the lattice spacing), so
the squared embedded distance between two sites is ``di**2 - di*dj + dj**2``.
Nearest neighbours sit at squared distance 1, second neighbours at 3.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exceptions import DuplicateCoordinate, EmptyGraph, TargetNotInGraph, TargetOutOfRange

LatticeCoord = tuple[int, int]

NEIGHBOR_OFFSETS: tuple[LatticeCoord, ...] = ((1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1))

_SQRT3_2 = math.sqrt(3.0) / 2.0


def squared_distance(u: LatticeCoord, v: LatticeCoord) -> int:
    """Squared embedded distance between two sites, in units of the spacing squared."""
    di = v[0] - u[0]
    dj = v[1] - u[1]
    return di * di - di * dj + dj * dj


def hex_distance(c: LatticeCoord) -> int:
    """Number of nearest-neighbour hops from the origin to ``c``."""
    i, j = c
    return (abs(i) + abs(j) + abs(i - j)) // 2


def rotate60(c: LatticeCoord, times: int = 1) -> LatticeCoord:
    """Rotate a site counter-clockwise about the origin by ``times`` * 60 degrees."""
    i, j = c
    for _ in range(times % 6):
        i, j = i - j, i
    return i, j


def embed(coords: Sequence[LatticeCoord], spacing: float = 1.0) -> np.ndarray:
    """Cartesian positions of the sites as an ``(n, 2)`` array."""
    ij = np.asarray(coords, dtype=float).reshape(-1, 2)
    x = ij[:, 0] - 0.5 * ij[:, 1]
    y = _SQRT3_2 * ij[:, 1]
    return spacing * np.column_stack([x, y])


def _site_order(c: LatticeCoord) -> tuple[int, int]:
    # reading order: top row first, left to right
    return (-c[1], c[0])


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable lattice graph.

    ``coords[k]`` is the Bravais index of vertex ``k``; the adjacency matrix is
    derived from the coordinates and never stored independently.
    """

    coords: tuple[LatticeCoord, ...]
    spacing_um: float | None = None
    name: str = "custom"
    adjacency: np.ndarray = field(init=False, repr=False)
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        coords = tuple((int(i), int(j)) for i, j in self.coords)
        if not coords:
            raise EmptyGraph("a graph needs at least one vertex")
        index = {}
        for k, c in enumerate(coords):
            if c in index:
                raise DuplicateCoordinate(f"coordinate {c} appears at positions {index[c]} and {k}")
            index[c] = k
        n = len(coords)
        adj = np.zeros((n, n), dtype=np.int8)
        for k, (i, j) in enumerate(coords):
            for di, dj in NEIGHBOR_OFFSETS:
                m = index.get((i + di, j + dj))
                if m is not None:
                    adj[k, m] = 1
        adj.flags.writeable = False
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "_index", index)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.coords == other.coords and self.spacing_um == other.spacing_um

    def __hash__(self):
        return hash((self.coords, self.spacing_um))

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def n_edges(self) -> int:
        return int(self.adjacency.sum()) // 2

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=0).astype(int)

    def index_of(self, coord: LatticeCoord) -> int:
        try:
            return self._index[(int(coord[0]), int(coord[1]))]
        except KeyError:
            raise TargetNotInGraph(f"site {tuple(coord)} is not in graph {self.name!r}") from None

    def __contains__(self, coord) -> bool:
        return tuple(coord) in self._index

    def positions(self, spacing: float | None = None) -> np.ndarray:
        """Embedded positions; in micrometres when the graph carries a spacing."""
        if spacing is None:
            spacing = 1.0 if self.spacing_um is None else self.spacing_um
        return embed(self.coords, spacing)

    def with_spacing(self, spacing_um: float) -> Graph:
        return Graph(self.coords, spacing_um=float(spacing_um), name=self.name)

    def is_connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            k = stack.pop()
            for m in np.flatnonzero(self.adjacency[k]):
                if m not in seen:
                    seen.add(int(m))
                    stack.append(int(m))
        return len(seen) == self.n

    def to_dict(self) -> dict:
        return {"coords": [list(c) for c in self.coords], "spacing_um": self.spacing_um}

    @classmethod
    def from_dict(cls, data: dict, name: str = "custom") -> Graph:
        coords = [tuple(c) for c in data["coords"]]
        spacing = data.get("spacing_um")
        return cls(tuple(coords), spacing_um=None if spacing is None else float(spacing), name=name)


def build_from_coords(
    coords: Iterable[LatticeCoord], spacing_um: float | None = None, name: str = "custom"
) -> Graph:
    """Graph on the given sites, keeping their order, with nearest-neighbour edges."""
    return Graph(tuple(coords), spacing_um=spacing_um, name=name)


def hex_patch_coords(layers: int) -> list[LatticeCoord]:
    if layers < 0:
        raise ValueError(f"layers must be non-negative, got {layers}")
    coords = [
        (i, j)
        for i in range(-layers, layers + 1)
        for j in range(-layers, layers + 1)
        if hex_distance((i, j)) <= layers
    ]
    return sorted(coords, key=_site_order)


def build_hex_patch(layers: int, spacing_um: float | None = None) -> Graph:
    """Centred hexagonal patch with ``1 + 3*layers*(layers + 1)`` sites."""
    return Graph(tuple(hex_patch_coords(layers)), spacing_um=spacing_um, name=f"hex{layers}")


def build_paper31(spacing_um: float | None = None) -> Graph:
    """The 31-site layout: a three-ring hexagonal patch with its six corners removed."""
    corners = {rotate60((3, 0), k) for k in range(6)}
    coords = [c for c in hex_patch_coords(3) if c not in corners]
    return Graph(tuple(coords), spacing_um=spacing_um, name="paper31")


def load_graph(path: str | Path) -> Graph:
    path = Path(path)
    with path.open() as fh:
        data = json.load(fh)
    return Graph.from_dict(data, name=path.stem)


def save_graph(graph: Graph, path: str | Path) -> None:
    with Path(path).open("w") as fh:
        json.dump(graph.to_dict(), fh)


@dataclass(frozen=True)
class TargetSpec:
    """Which vertex to mark.

    ``kind`` is one of ``"none"``, ``"C"``, ``"S"``, ``"1N"``, ``"2N"`` or
    ``"index"`` (in which case ``index`` holds the vertex number).
    """

    kind: str = "C"
    index: int | None = None

    KINDS = ("none", "C", "S", "1N", "2N", "index")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown target kind {self.kind!r}; expected one of {self.KINDS}")
        if self.kind == "index" and (self.index is None or self.index < 0):
            raise ValueError("an explicit target needs a non-negative index")

    @classmethod
    def parse(cls, token) -> TargetSpec:
        """Parse ``None``, ``"none"``, ``"C"``, ``"S"``, ``"1N"``, ``"2N"`` or an integer."""
        if isinstance(token, TargetSpec):
            return token
        if token is None:
            return cls("none")
        if isinstance(token, (int, np.integer)):
            return cls("index", int(token))
        text = str(token).strip()
        upper = text.upper()
        if upper in ("NONE", ""):
            return cls("none")
        if upper in ("C", "S", "1N", "2N"):
            return cls(upper)
        try:
            return cls("index", int(text))
        except ValueError:
            raise ValueError(f"cannot parse target {token!r}") from None

    @property
    def label(self) -> str:
        return str(self.index) if self.kind == "index" else self.kind


def _shell_site(graph: Graph, squared_dist: int, what: str) -> int:
    center = graph.index_of((0, 0))
    c0 = graph.coords[center]
    candidates = sorted(c for c in graph.coords if squared_distance(c0, c) == squared_dist)
    if not candidates:
        raise TargetNotInGraph(f"graph {graph.name!r} has no {what} site of the centre")
    return graph.index_of(candidates[0])


def resolve_target(graph: Graph, spec) -> int | None:
    """Vertex index designated by ``spec`` (a :class:`TargetSpec` or a token).

    Among the symmetry-equivalent candidates for S/1N and 2N the one with the
    lexicographically smallest ``(i, j)`` is chosen.
    """
    spec = TargetSpec.parse(spec)
    if spec.kind == "none":
        return None
    if spec.kind == "index":
        if not 0 <= spec.index < graph.n:
            raise TargetOutOfRange(f"target index {spec.index} outside [0, {graph.n})")
        return spec.index
    if spec.kind == "C":
        return graph.index_of((0, 0))
    if spec.kind in ("S", "1N"):
        return _shell_site(graph, 1, "nearest-neighbour")
    return _shell_site(graph, 3, "second-neighbour")


def automorphism_orbit(graph: Graph) -> list[np.ndarray]:
    """Vertex permutations induced by the 60-degree rotations that preserve the site set.

    ``perm[k]`` is the index of the image of vertex ``k``. The identity is
    always first; rotations that coincide (e.g. a single site) are all kept.
    """
    perms = []
    for r in range(6):
        images = [rotate60(c, r) for c in graph.coords]
        if all(c in graph for c in images):
            perms.append(np.array([graph.index_of(c) for c in images], dtype=int))
    return perms
