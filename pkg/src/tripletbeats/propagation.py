"""Exact unitary evolution for piecewise-constant pair Hamiltonians.

Phases are exp(-i 2 pi (E/h) t) with E/h in GHz and t in ns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .hamiltonian import PairHamiltonian, singlet_state
from .stationary import SpectralDecomposition, decompose

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Propagator:
    matrix: NDArray[np.complex128]
    generator: PairHamiltonian | None
    duration: float


def _as_decomposition(h) -> SpectralDecomposition:
    if isinstance(h, SpectralDecomposition):
        return h
    return decompose(h)


def unitary(dec: SpectralDecomposition, dt: float) -> NDArray[np.complex128]:
    v = dec.eigenvectors
    return (v * np.exp(-1j * TWO_PI * dec.eigenvalues * dt)) @ v.conj().T


def propagator(h, dt: float) -> Propagator:
    """U(dt) = V exp(-i 2 pi lambda dt) V^dagger."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    dec = _as_decomposition(h)
    generator = h if isinstance(h, PairHamiltonian) else None
    if dt == 0:
        return Propagator(np.eye(len(dec.eigenvalues), dtype=complex), generator, 0.0)
    return Propagator(unitary(dec, dt), generator, float(dt))


def check_grid(t_grid, start_at_zero: bool = True) -> NDArray[np.float64]:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("time grid must be a non-empty 1-d array")
    if start_at_zero and t[0] != 0.0:
        raise ValueError("time grid must start at t = 0")
    if t.size > 1:
        steps = np.diff(t)
        if np.any(steps <= 0):
            raise ValueError("time grid must be strictly ascending")
        if np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, abs(t[-1])):
            raise ValueError("time grid must be uniform")
    return t


def static_ps_trace(h, t_grid, state=None) -> NDArray[np.float64]:
    """P_S(t) = |sum_i |<S|psi_i>|^2 exp(-i 2 pi lambda_i t)|^2 under a constant H.

    The grid is only required to be ascending here, so symmetric grids about
    t = 0 are accepted.
    """
    t = np.asarray(t_grid, dtype=float)
    dec = _as_decomposition(h)
    s = singlet_state() if state is None else np.asarray(state)
    weights = np.abs(dec.eigenvectors.conj().T @ s) ** 2
    amp = np.exp(-1j * TWO_PI * np.outer(t, dec.eigenvalues)) @ weights
    return np.clip(np.abs(amp) ** 2, 0.0, 1.0)


def long_time_average(h, state=None) -> float:
    """Infinite-time mean of the static P_S trace.

    Degenerate clusters are lumped, so the result is sum over clusters of
    (cluster singlet weight)^2.
    """
    dec = _as_decomposition(h)
    s = singlet_state() if state is None else np.asarray(state)
    weights = np.abs(dec.eigenvectors.conj().T @ s) ** 2
    return float(sum(np.sum(weights[g]) ** 2 for g in dec.clusters()))
