"""Deterministic file output: fixed-precision CSV and atomic writes."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .search import EvolutionSeries, ScalingRecord

SIG_DIGITS = 12


def fmt(value) -> str:
    """12 significant digits, '.' decimal separator, independent of locale."""
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, str):
        return value
    if value is None:
        return ""
    out = format(float(value), f".{SIG_DIGITS}g")
    return "0" if out == "-0" else out


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def curves_csv(series: EvolutionSeries) -> str:
    pq = series.quantum_target_prob
    pc = series.classical_target_prob
    rows = zip(series.gamma_t_grid, pq, pc, pq / pc)
    return csv_text(["gamma_t", "p_quantum_target", "p_classical_target", "ratio"], rows)


SCALING_HEADER = ["n", "layers", "target", "beta_over_gamma", "t_opt", "r_opt", "pq_opt", "pc_opt"]


def scaling_csv(records: Sequence[ScalingRecord]) -> str:
    rows = (
        [r.n, r.layers, r.target_kind, r.beta_over_gamma, r.t_opt, r.r_opt, r.pq_opt, r.pc_opt]
        for r in records
    )
    return csv_text(SCALING_HEADER, rows)


def heatmap_csv(beta_grid, gamma_t_grid, table: np.ndarray) -> str:
    """Long format: one row per ``(beta_over_gamma, gamma_t)`` cell."""
    rows = (
        [beta, t, table[b, k]]
        for b, beta in enumerate(beta_grid)
        for k, t in enumerate(gamma_t_grid)
    )
    return csv_text(["beta_over_gamma", "gamma_t", "p_quantum_target"], rows)


def site_table_csv(graph, columns: Mapping[str, np.ndarray]) -> str:
    pos = graph.positions()
    header = ["site", "i", "j", "x", "y", *columns]
    rows = (
        [k, c[0], c[1], pos[k, 0], pos[k, 1], *(col[k] for col in columns.values())]
        for k, c in enumerate(graph.coords)
    )
    return csv_text(header, rows)


def write_atomic(path, data: bytes | str) -> Path:
    """Write via a temporary file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = data.encode("utf-8") if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
