"""Spin Hamiltonians for a triplet-exciton pair on a two-site herringbone lattice.

All energies are stored as E/h in GHz. Single-triplet states use the
zero-field basis ``(|x>, |y>, |z>)``; pair states use the product basis

    (xx, xy, xz, yx, yy, yz, zx, zy, zz)

with the first factor belonging to the left exciton.

Site A is rotated by ``+theta`` and site B by ``-theta`` about the shared
global z axis. The rotation matrix used is the passive (frame) rotation, so
that ``|x_A> = cos(theta)|x> - sin(theta)|y>`` in global coordinates.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field

import numpy as np
from numpy.typing import NDArray

CM1_TO_GHZ = 29.9792458
MU_B_GHZ_PER_T = 13.9962449

BASIS_LABELS = ("xx", "xy", "xz", "yx", "yy", "yz", "zx", "zy", "zz")

_HERMITIAN_TOL = 1e-12


def cm1_to_ghz(value):
    return value * CM1_TO_GHZ


def ghz_to_cm1(value):
    return value / CM1_TO_GHZ


class PairConfiguration(enum.Enum):
    """Which inequivalent sites the two excitons of a pair occupy."""

    AA = "AA"
    BB = "BB"
    AB = "AB"

    @property
    def same_type(self) -> bool:
        return self is not PairConfiguration.AB

    @classmethod
    def parse(cls, value) -> "PairConfiguration":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown pair configuration {value!r}; expected AA, BB or AB") from None


@dataclass(frozen=True)
class CrystalParams:
    """Zero-field splitting constants (cm^-1), herringbone half-angle (deg) and g."""

    D: float
    E: float
    theta: float
    g: float = 2.0

    def __post_init__(self):
        for name in ("D", "E", "theta", "g"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not -90.0 < self.theta < 90.0:
            raise ValueError("theta must lie in (-90, 90) degrees")
        if self.g <= 0:
            raise ValueError("g must be positive")

    @classmethod
    def rubrene(cls) -> "CrystalParams":
        return cls(D=0.0555, E=-0.0040, theta=31.0, g=2.0)

    def site_energies(self) -> NDArray[np.float64]:
        """Main-axes energies (E_x, E_y, E_z) in GHz."""
        d, e = self.D, self.E
        return cm1_to_ghz(np.array([-2.0 * d / 3.0, d / 3.0 - e, d / 3.0 + e]))


PRESETS = {"rubrene": CrystalParams.rubrene}


def preset(name: str) -> CrystalParams:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; available: {sorted(PRESETS)}") from None


@dataclass(frozen=True)
class FieldSpec:
    """Magnetic field vector in tesla, global frame."""

    b: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        b = tuple(float(v) for v in self.b)
        if len(b) != 3 or not all(np.isfinite(b)):
            raise ValueError("field must be a finite 3-vector")
        object.__setattr__(self, "b", b)

    @classmethod
    def along(cls, axis, magnitude: float) -> "FieldSpec":
        """Field of ``magnitude`` tesla along a named axis or a direction vector."""
        if isinstance(axis, str):
            try:
                direction = {"x": (1, 0, 0), "y": (0, 1, 0), "z": (0, 0, 1)}[axis.lower()]
            except KeyError:
                raise ValueError(f"unknown axis {axis!r}") from None
        else:
            direction = axis
        u = np.asarray(direction, dtype=float)
        norm = np.linalg.norm(u)
        if norm == 0:
            raise ValueError("field direction must be nonzero")
        return cls(tuple(magnitude * u / norm))

    @property
    def vector(self) -> NDArray[np.float64]:
        return np.array(self.b)

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.b))


ZERO_FIELD = FieldSpec()


@dataclass(frozen=True)
class SpinOperators:
    sx: NDArray[np.complex128]
    sy: NDArray[np.complex128]
    sz: NDArray[np.complex128]

    def __iter__(self):
        return iter((self.sx, self.sy, self.sz))


def spin_operators() -> SpinOperators:
    """Spin-1 operators in the zero-field basis, ``(S_k)_lm = -i eps_klm``."""
    eps = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[i, j, k] = 1.0
        eps[i, k, j] = -1.0
    ops = [-1j * eps[k] for k in range(3)]
    for op in ops:
        op.setflags(write=False)
    return SpinOperators(*ops)


@dataclass(frozen=True)
class SiteHamiltonian:
    matrix: NDArray[np.complex128]
    site_label: str = "A"
    frame: str = "main-axes"


@dataclass(frozen=True)
class PairHamiltonian:
    """9x9 pair Hamiltonian (GHz) plus what it was built from."""

    matrix: NDArray[np.complex128]
    configuration: object = None  # PairConfiguration or "averaged"
    field: FieldSpec = dc_field(default_factory=FieldSpec)

    def __add__(self, other: "PairHamiltonian") -> "PairHamiltonian":
        return PairHamiltonian(self.matrix + other.matrix, self.configuration, self.field)


def _frozen(m):
    m = np.asarray(m, dtype=complex)
    m.setflags(write=False)
    return m


def site_hamiltonian(params: CrystalParams) -> SiteHamiltonian:
    """Diagonal zero-field Hamiltonian of one site in its own main axes."""
    return SiteHamiltonian(_frozen(np.diag(params.site_energies())), "A", "main-axes")


def rotation_matrix(angle: float) -> NDArray[np.float64]:
    """Frame rotation about z; column k holds site axis k in global coordinates."""
    a = np.deg2rad(angle)
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


def rotate_site_hamiltonian(h: SiteHamiltonian, angle: float, site_label: str | None = None) -> SiteHamiltonian:
    if h.frame != "main-axes":
        raise ValueError("only main-axes site Hamiltonians can be rotated")
    r = rotation_matrix(angle)
    return SiteHamiltonian(_frozen(r @ h.matrix @ r.T), site_label or h.site_label, "global")


def site_hamiltonians_global(params: CrystalParams) -> tuple[NDArray, NDArray]:
    """(H_A, H_B) expressed in the global frame."""
    h = site_hamiltonian(params)
    h_a = rotate_site_hamiltonian(h, params.theta, "A").matrix
    h_b = rotate_site_hamiltonian(h, -params.theta, "B").matrix
    return h_a, h_b


def pair_sum(left, right) -> NDArray[np.complex128]:
    """``left (x) I + I (x) right`` for two 3x3 operators."""
    eye = np.eye(3)
    return np.kron(left, eye) + np.kron(eye, right)


def configuration_hamiltonian(config, params: CrystalParams) -> PairHamiltonian:
    config = PairConfiguration.parse(config)
    h_a, h_b = site_hamiltonians_global(params)
    left, right = {
        PairConfiguration.AA: (h_a, h_a),
        PairConfiguration.BB: (h_b, h_b),
        PairConfiguration.AB: (h_a, h_b),
    }[config]
    return PairHamiltonian(_frozen(pair_sum(left, right)), config, ZERO_FIELD)


def zeeman_site_hamiltonian(field: FieldSpec, params: CrystalParams) -> NDArray[np.complex128]:
    bx, by, bz = field.vector
    sx, sy, sz = spin_operators()
    return params.g * MU_B_GHZ_PER_T * (sx * bx + sy * by + sz * bz)


def zeeman_pair_hamiltonian(field: FieldSpec, params: CrystalParams) -> PairHamiltonian:
    hz = zeeman_site_hamiltonian(field, params)
    return PairHamiltonian(_frozen(pair_sum(hz, hz)), None, field)


def total_hamiltonian(config, params: CrystalParams, field: FieldSpec = ZERO_FIELD) -> PairHamiltonian:
    config = PairConfiguration.parse(config)
    h = configuration_hamiltonian(config, params).matrix + zeeman_pair_hamiltonian(field, params).matrix
    return PairHamiltonian(_frozen(h), config, field)


def averaged_hamiltonian(params: CrystalParams, field: FieldSpec = ZERO_FIELD) -> PairHamiltonian:
    """Fast-hopping effective Hamiltonian, averaged over pair configurations.

    The average is taken in the 9-dimensional pair space with weights
    1/4, 1/4, 1/2 for AA, BB, AB. Averaging the 3x3 site Hamiltonians first
    gives a different (wrong) operator; see ``naive_averaged_hamiltonian``.
    """
    h = (
        configuration_hamiltonian(PairConfiguration.AA, params).matrix
        + configuration_hamiltonian(PairConfiguration.BB, params).matrix
        + 2.0 * configuration_hamiltonian(PairConfiguration.AB, params).matrix
    ) / 4.0
    h = h + zeeman_pair_hamiltonian(field, params).matrix
    return PairHamiltonian(_frozen(h), "averaged", field)


def naive_averaged_hamiltonian(params: CrystalParams, field: FieldSpec = ZERO_FIELD) -> PairHamiltonian:
    """Pair Hamiltonian built from the averaged site Hamiltonian (H_A + H_B)/2."""
    h_a, h_b = site_hamiltonians_global(params)
    h_avg = (h_a + h_b) / 2.0
    h = pair_sum(h_avg, h_avg) + zeeman_pair_hamiltonian(field, params).matrix
    return PairHamiltonian(_frozen(h), "site-averaged", field)


def singlet_state() -> NDArray[np.complex128]:
    """Overall pair singlet (|xx> + |yy> + |zz>)/sqrt(3)."""
    s = np.zeros(9, dtype=complex)
    s[[0, 4, 8]] = 1.0 / np.sqrt(3.0)
    s.setflags(write=False)
    return s


def pair_rotation(angle: float) -> NDArray[np.float64]:
    r = rotation_matrix(angle)
    return np.kron(r, r)


def check_hermitian(matrix, tol: float = _HERMITIAN_TOL) -> float:
    """Return max|H - H^dagger|, raising ValueError if it exceeds ``tol``."""
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian: max|H - H^dagger| = {dev:.3e} > {tol:.1e}")
    return dev
