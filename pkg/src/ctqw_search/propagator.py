"""Time evolution.

Three independent routes are provided:

* spectral propagation for real symmetric Hamiltonians (one factorisation,
  any number of times),
* a scaling-and-squaring Pade matrix exponential for general generators,
* a fixed-step RK4 integrator that serves as a brute-force reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    ConvergenceFailure,
    NegativeProbability,
    NonFiniteInput,
    NotSymmetric,
    StepCountTooSmall,
)

SYMMETRY_TOL = 1e-12
NEGATIVE_CLAMP_TOL = 1e-12
NORM_TOL = 1e-10


@dataclass(frozen=True)
class Eigensystem:
    """``m = V diag(eigenvalues) V^T`` with ``V`` orthonormal and eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.T


def _as_square(m, name="matrix") -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteInput(f"{name} has non-finite entries")
    return m


def eig_symmetric(m) -> Eigensystem:
    """Full spectral decomposition of a real symmetric matrix."""
    m = _as_square(np.asarray(m, dtype=float))
    if m.size and np.max(np.abs(m - m.T)) > SYMMETRY_TOL:
        raise NotSymmetric(f"asymmetry {np.max(np.abs(m - m.T)):.3g} exceeds {SYMMETRY_TOL}")
    m = 0.5 * (m + m.T)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc

    scale = max(np.max(np.abs(m)), 1.0) if m.size else 1.0
    ortho = np.max(np.abs(v.T @ v - np.eye(m.shape[0]))) if m.size else 0.0
    resid = np.max(np.abs(m @ v - v * w)) if m.size else 0.0
    if ortho > 1e-10 or resid > 1e-9 * scale:
        raise ConvergenceFailure(f"eigensystem check failed (orthogonality {ortho:.2e}, residual {resid:.2e})")
    w.flags.writeable = False
    v.flags.writeable = False
    return Eigensystem(w, v)


def _as_eigensystem(h) -> Eigensystem:
    return h if isinstance(h, Eigensystem) else eig_symmetric(h)


def _check_state(psi0, n: int) -> np.ndarray:
    psi0 = np.asarray(psi0, dtype=complex).reshape(-1)
    if psi0.shape[0] != n:
        raise ValueError(f"state has length {psi0.shape[0]}, expected {n}")
    norm = np.linalg.norm(psi0)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"initial state must be normalised, norm is {norm:.12g}")
    return psi0


def quantum_trajectory(h, psi0, times) -> np.ndarray:
    """States ``exp(-i h t) psi0`` for every ``t`` in ``times``, as a ``(len(times), n)`` array.

    ``h`` may be a Hamiltonian matrix or a precomputed :class:`Eigensystem`.
    """
    eig = _as_eigensystem(h)
    psi0 = _check_state(psi0, eig.n)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    v = eig.eigenvectors
    coeffs = v.T @ psi0
    phases = np.exp(-1j * np.outer(times, eig.eigenvalues))
    return (phases * coeffs) @ v.T


def evolve_quantum(h, psi0, t: float) -> np.ndarray:
    """``V diag(exp(-i lambda t)) V^T psi0``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return quantum_trajectory(h, psi0, [t])[0]


# Pade(13, 13) coefficients and the 1-norm bound for double precision.
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
THETA_13 = 5.371920351148152


def expm(m) -> np.ndarray:
    """Matrix exponential by scaling and squaring with the degree-13 diagonal Pade approximant."""
    a = _as_square(m)
    a = a.astype(complex if np.iscomplexobj(a) else float)
    n = a.shape[0]
    if n == 0:
        return a.copy()
    norm1 = np.max(np.sum(np.abs(a), axis=0))
    if norm1 == 0:
        return np.eye(n, dtype=a.dtype)
    s = 0
    if norm1 > THETA_13:
        s = max(0, int(math.ceil(math.log2(norm1 / THETA_13))))
        a = a / 2.0**s

    b = _PADE13
    ident = np.eye(n, dtype=a.dtype)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


def _clamp_probabilities(p: np.ndarray) -> np.ndarray:
    worst = p.min() if p.size else 0.0
    if worst < -NEGATIVE_CLAMP_TOL:
        raise NegativeProbability(f"probability {worst:.3e} below round-off tolerance")
    return np.where(p < 0.0, 0.0, p)


def classical_propagator(lc, gamma: float, t: float) -> np.ndarray:
    """``expm(-gamma t L_c)``; column-stochastic for a valid generator."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if t < 0:
        raise ValueError("t must be non-negative")
    lc = _as_square(np.asarray(lc, dtype=float), "generator")
    return expm(-gamma * t * lc)


def evolve_classical(lc, p0, gamma: float, t: float) -> np.ndarray:
    """``expm(-gamma t L_c) p0`` with round-off negatives clamped to zero."""
    p0 = np.asarray(p0, dtype=float).reshape(-1)
    if abs(p0.sum() - 1.0) > NORM_TOL:
        raise ValueError(f"initial distribution sums to {p0.sum():.12g}, not 1")
    p = classical_propagator(lc, gamma, t) @ p0
    return _clamp_probabilities(p)


def min_oracle_steps(m, t: float) -> int:
    """Smallest RK4 step count accepted by :func:`ode_oracle` (worst matrix of a stack)."""
    m = np.asarray(m)
    norm1 = float(np.max(np.sum(np.abs(m), axis=-2))) if m.size else 0.0
    return int(math.ceil(1000 * (norm1 * abs(t) + 1)))


def ode_oracle(m, v0, t: float, steps: int | None = None) -> np.ndarray:
    """Integrate ``v' = m v`` from 0 to ``t`` with classical RK4.

    Reference implementation only; ``steps`` must be at least
    ``1000 * (||m||_1 * t + 1)`` and defaults to that minimum. ``v0`` may be
    a vector or a matrix of column vectors. A stack of matrices of shape
    ``(batch, n, n)`` with ``v0`` of shape ``(batch, n)`` integrates every
    system together.
    """
    m = np.asarray(m)
    if m.ndim not in (2, 3) or m.shape[-1] != m.shape[-2]:
        raise ValueError(f"expected a square matrix or a stack of them, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteInput("matrix has non-finite entries")
    v = np.array(v0, dtype=np.result_type(m, np.asarray(v0), float))
    stacked = m.ndim == 3 and v.ndim == 2
    if stacked:
        v = v[..., None]
    required = min_oracle_steps(m, t)
    if steps is None:
        steps = required
    if steps < required:
        raise StepCountTooSmall(f"{steps} steps requested, at least {required} required")
    h = t / steps
    half = 0.5 * h
    sixth = h / 6.0
    for _ in range(steps):
        k1 = m @ v
        k2 = m @ (v + half * k1)
        k3 = m @ (v + half * k2)
        k4 = m @ (v + h * k3)
        v = v + sixth * (k1 + 2.0 * (k2 + k3) + k4)
    return v[..., 0] if stacked else v
