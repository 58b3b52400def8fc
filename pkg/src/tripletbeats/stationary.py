"""Stationary states of pair Hamiltonians and their singlet projections."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from numpy.typing import NDArray

from .hamiltonian import (
    BASIS_LABELS,
    ZERO_FIELD,
    CrystalParams,
    FieldSpec,
    PairConfiguration,
    PairHamiltonian,
    check_hermitian,
    cm1_to_ghz,
    singlet_state,
    total_hamiltonian,
)

DEGENERACY_TOL = 1e-6  # GHz
PROJECTION_TOL = 1e-10


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: NDArray[np.float64]
    eigenvectors: NDArray[np.complex128]  # columns
    degeneracy_tol: float = DEGENERACY_TOL

    def clusters(self) -> list[list[int]]:
        """Index groups of (numerically) degenerate eigenvalues."""
        groups: list[list[int]] = []
        for i, lam in enumerate(self.eigenvalues):
            if groups and lam - self.eigenvalues[groups[-1][-1]] < self.degeneracy_tol:
                groups[-1].append(i)
            else:
                groups.append([i])
        return groups

    def projector(self, indices) -> NDArray[np.complex128]:
        v = self.eigenvectors[:, list(indices)]
        return v @ v.conj().T

    def reconstruct(self) -> NDArray[np.complex128]:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def decompose(h, degeneracy_tol: float = DEGENERACY_TOL, hermitian_tol: float = 1e-9) -> SpectralDecomposition:
    """Ascending eigen-decomposition of a Hermitian matrix or ``PairHamiltonian``.

    Within a degenerate cluster the eigenvectors are an arbitrary orthonormal
    basis; compare subspaces through ``projector`` rather than single vectors.
    """
    m = h.matrix if isinstance(h, PairHamiltonian) else np.asarray(h)
    check_hermitian(m, hermitian_tol)
    m = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(m)
    return SpectralDecomposition(w, v, degeneracy_tol)


def singlet_aligned(dec: SpectralDecomposition, state=None) -> SpectralDecomposition:
    """Re-choose the basis inside each degenerate cluster so that the whole
    projection of ``state`` lands on the first vector of the cluster.

    Cluster projection totals are unchanged; afterwards every vector past the
    first in a cluster is orthogonal to ``state``.
    """
    s = singlet_state() if state is None else np.asarray(state)
    vecs = dec.eigenvectors.copy()
    for group in dec.clusters():
        if len(group) < 2:
            continue
        sub = vecs[:, group]
        coeff = sub.conj().T @ s
        norm = np.linalg.norm(coeff)
        if norm < PROJECTION_TOL:
            continue
        # unitary on the cluster whose first column is coeff/|coeff|
        first = coeff / norm
        basis = np.eye(len(group), dtype=complex)
        basis[:, 0] = first
        q, r = np.linalg.qr(basis)
        q[:, 0] *= r[0, 0]
        vecs[:, group] = sub @ q
    return SpectralDecomposition(dec.eigenvalues, vecs, dec.degeneracy_tol)


@dataclass(frozen=True)
class StationaryState:
    index: int
    energy: float
    amplitude: float
    probability: float


@dataclass(frozen=True)
class StationaryReport:
    states: list[StationaryState]
    cluster_probabilities: list[tuple[float, tuple[int, ...], float]]
    configuration: object = None
    field: FieldSpec = dc_field(default_factory=FieldSpec)
    params: CrystalParams | None = None

    @property
    def energies(self) -> NDArray[np.float64]:
        return np.array([s.energy for s in self.states])

    @property
    def probabilities(self) -> NDArray[np.float64]:
        return np.array([s.probability for s in self.states])

    def contributing(self, threshold: float = 1e-6) -> list[StationaryState]:
        """States whose singlet projection probability exceeds ``threshold``."""
        return [s for s in self.states if s.probability > threshold]

    def rows(self) -> list[dict]:
        b = self.field.magnitude
        return [
            {"field_T": b, "state_index": s.index, "energy_GHz": s.energy, "proj_prob": s.probability}
            for s in self.states
        ]


def report_from_hamiltonian(h: PairHamiltonian, params=None, degeneracy_tol: float = DEGENERACY_TOL) -> StationaryReport:
    s = singlet_state()
    dec = singlet_aligned(decompose(h, degeneracy_tol), s)
    amps = dec.eigenvectors.conj().T @ s
    probs = np.abs(amps) ** 2
    states = [
        StationaryState(i, float(dec.eigenvalues[i]), float(abs(amps[i])), float(probs[i]))
        for i in range(len(probs))
    ]
    clusters = [
        (float(np.mean(dec.eigenvalues[g])), tuple(g), float(np.sum(probs[g])))
        for g in dec.clusters()
    ]
    return StationaryReport(states, clusters, h.configuration, h.field, params)


def stationary_report(config, params: CrystalParams, field: FieldSpec = ZERO_FIELD,
                      degeneracy_tol: float = DEGENERACY_TOL) -> StationaryReport:
    """Energies and singlet projections of every stationary state."""
    h = total_hamiltonian(config, params, field)
    return report_from_hamiltonian(h, params, degeneracy_tol)


def projection_field_sweep(config, params: CrystalParams, field_direction, magnitudes,
                           degeneracy_tol: float = DEGENERACY_TOL) -> list[StationaryReport]:
    """Stationary reports along a field ramp; states are sorted by energy at
    each point, with no adiabatic tracking between points."""
    mags = np.asarray(magnitudes, dtype=float)
    if mags.ndim != 1 or mags.size == 0:
        raise ValueError("magnitudes must be a non-empty 1-d sequence")
    if np.any(mags < 0) or np.any(np.diff(mags) < 0):
        raise ValueError("magnitudes must be nonnegative and ascending")
    return [
        stationary_report(config, params, FieldSpec.along(field_direction, b), degeneracy_tol)
        for b in mags
    ]


# Zero-field AB stationary states written out analytically.

def _ket(*terms) -> NDArray[np.complex128]:
    v = np.zeros(9, dtype=complex)
    for coeff, label in terms:
        v[BASIS_LABELS.index(label)] += coeff
    return v


@dataclass(frozen=True)
class ReferenceState:
    label: str
    energy: float  # GHz
    vector: NDArray[np.complex128]
    amplitude: float


def ab_reference_states(params: CrystalParams) -> list[ReferenceState]:
    """The nine analytic zero-field AB stationary states, global-frame vectors.

    Amplitudes are the magnitudes |<S|psi_i>| predicted in closed form.
    """
    th = np.deg2rad(params.theta)
    c, s = np.cos(th), np.sin(th)
    c2, s2 = np.cos(2 * th), np.sin(2 * th)
    r2 = 1.0 / np.sqrt(2.0)
    d, e = params.D, params.E
    energies = cm1_to_ghz(np.array([
        2 * (d / 3 + e), 2 * (d / 3 - e), -4 * d / 3,
        -d / 3 - e, -d / 3 - e, -d / 3 + e, -d / 3 + e, 2 * d / 3, 2 * d / 3,
    ]))
    vectors = [
        _ket((1, "zz")),
        _ket((-s * s, "xx"), (c * c, "yy"), (s2 / 2, "xy"), (-s2 / 2, "yx")),
        _ket((c * c, "xx"), (-s * s, "yy"), (s2 / 2, "xy"), (-s2 / 2, "yx")),
        _ket((-r2 * s2, "xx"), (-r2 * s2, "yy"), (r2 * c2, "xy"), (-r2 * c2, "yx")),
        _ket((r2, "xy"), (r2, "yx")),
        _ket((-r2 * c, "xz"), (r2 * c, "zx"), (r2 * s, "yz"), (r2 * s, "zy")),
        _ket((r2 * c, "xz"), (r2 * c, "zx"), (-r2 * s, "yz"), (r2 * s, "zy")),
        _ket((-r2 * c, "yz"), (r2 * c, "zy"), (-r2 * s, "xz"), (-r2 * s, "zx")),
        _ket((r2 * c, "yz"), (r2 * c, "zy"), (r2 * s, "xz"), (-r2 * s, "zx")),
    ]
    amps = [1 / np.sqrt(3), c2 / np.sqrt(3), c2 / np.sqrt(3), np.sqrt(2 / 3) * s2, 0, 0, 0, 0, 0]
    return [
        ReferenceState(f"psi{i + 1}", float(energies[i]), vectors[i], float(abs(amps[i])))
        for i in range(9)
    ]


def mixed_basis_singlet(params: CrystalParams, check: bool = True) -> NDArray[np.float64]:
    """Coefficients of the singlet over the nine reference AB states.

    With ``check`` the coefficients are verified to be normalised and to match
    the numerical overlaps <psi_i|S> up to a per-state sign.
    """
    th = np.deg2rad(params.theta)
    c2, s2 = np.cos(2 * th), np.sin(2 * th)
    coeffs = np.zeros(9)
    coeffs[:4] = np.array([1.0, c2, c2, -np.sqrt(2.0) * s2]) / np.sqrt(3.0)
    if check:
        total = float(np.sum(coeffs ** 2))
        if abs(total - 1.0) > PROJECTION_TOL:
            raise AssertionError(f"singlet coefficients not normalised: {total}")
        s = singlet_state()
        overlaps = np.array([np.vdot(ref.vector, s) for ref in ab_reference_states(params)])
        if np.max(np.abs(np.abs(overlaps) - np.abs(coeffs))) > PROJECTION_TOL:
            raise AssertionError("mixed-basis singlet coefficients disagree with numerical overlaps")
    return coeffs
