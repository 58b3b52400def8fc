"""Monte Carlo ensembles of stochastic site-hopping trajectories.

Each trajectory is a sequence of pair configurations with exponentially
distributed dwell times (mean ``tau_hop / 2``). Segment 1 is AA or BB with
equal probability, even segments are AB, and every later odd segment
independently redraws AA or BB. The singlet amplitude is propagated exactly
through the piecewise-constant Hamiltonian and |<S|psi(t)>|^2 is averaged
over the ensemble.

Trajectory ``i`` draws from its own Philox stream keyed by
``(master_seed, i)``, and ensembles are reduced in fixed chunks of
trajectory indices, so results do not depend on the number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np
from numpy.typing import NDArray

from .hamiltonian import (
    ZERO_FIELD,
    CrystalParams,
    FieldSpec,
    PairConfiguration,
    singlet_state,
    total_hamiltonian,
)
from .propagation import TWO_PI, unitary
from .stationary import decompose

AA, BB, AB = 0, 1, 2
CONFIG_CODES = (PairConfiguration.AA, PairConfiguration.BB, PairConfiguration.AB)

CHUNK_SIZE = 512  # trajectories per reduction block; part of the determinism contract


@dataclass(frozen=True)
class MonteCarloParams:
    """Ensemble settings; times in ns."""

    tau_hop: float
    n_traj: int = 10_000
    t_max: float = 5.0
    dt: float = 0.01
    master_seed: int = 20240501

    def __post_init__(self):
        if not (np.isfinite(self.tau_hop) and self.tau_hop > 0):
            raise ValueError("tau_hop must be positive")
        if int(self.n_traj) != self.n_traj or self.n_traj < 1:
            raise ValueError("n_traj must be a positive integer")
        if not (np.isfinite(self.dt) and np.isfinite(self.t_max) and 0 < self.dt <= self.t_max):
            raise ValueError("need 0 < dt <= t_max")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    @property
    def dwell_mean(self) -> float:
        """Mean residence time of the pair in one configuration."""
        return self.tau_hop / 2.0

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))

    def time_grid(self) -> NDArray[np.float64]:
        return np.arange(self.n_steps + 1) * self.dt


def rng_stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent generator for trajectory ``index``; a pure function of its arguments."""
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class HopTrajectory:
    configs: NDArray[np.int8]  # codes AA=0, BB=1, AB=2
    dwells: NDArray[np.float64]

    @property
    def segments(self) -> list[tuple[PairConfiguration, float]]:
        return [(CONFIG_CODES[c], float(d)) for c, d in zip(self.configs, self.dwells)]

    @property
    def boundaries(self) -> NDArray[np.float64]:
        """Start time of every segment, plus the end of the last one."""
        return np.concatenate(([0.0], np.cumsum(self.dwells)))

    @property
    def duration(self) -> float:
        return float(np.sum(self.dwells))

    @classmethod
    def from_segments(cls, segments) -> "HopTrajectory":
        codes = [CONFIG_CODES.index(PairConfiguration.parse(c)) for c, _ in segments]
        dwells = [float(d) for _, d in segments]
        if any(d <= 0 for d in dwells):
            raise ValueError("dwell times must be positive")
        return cls(np.array(codes, dtype=np.int8), np.array(dwells))


def sample_trajectory(rng: np.random.Generator, mc: MonteCarloParams) -> HopTrajectory:
    """Draw segments until the cumulative dwell reaches ``mc.t_max``."""
    tau = mc.dwell_mean
    block = max(16, int(math.ceil(1.25 * mc.t_max / tau)) + 8)
    dwells, coins = [], []
    total = 0.0
    while total < mc.t_max:
        d = rng.exponential(tau, block)
        coin = rng.random(block) < 0.5
        dwells.append(d)
        coins.append(coin)
        total += float(np.sum(d))
    d = np.concatenate(dwells)
    coin = np.concatenate(coins)
    # exponential draws of exactly zero are possible in principle
    d[d <= 0] = np.finfo(float).tiny
    n = int(np.searchsorted(np.cumsum(d), mc.t_max)) + 1
    d, coin = d[:n], coin[:n]
    configs = np.where(coin, BB, AA).astype(np.int8)
    configs[1::2] = AB
    return HopTrajectory(configs, d)


class _Propagators:
    """Spectral data for the three configuration Hamiltonians at one field."""

    def __init__(self, params: CrystalParams, field: FieldSpec):
        s = singlet_state()
        decs = [decompose(total_hamiltonian(c, params, field)) for c in CONFIG_CODES]
        self.decs = decs
        self.lam = np.array([d.eigenvalues for d in decs])  # (3, 9)
        self.vec = np.array([d.eigenvectors for d in decs])  # (3, 9, 9)
        self.s_eig = np.array([v.conj().T @ s for v in self.vec])  # singlet in each eigenbasis
        # change of eigenbasis old -> new: V_new^dagger V_old
        self.change = np.einsum("nki,okj->onij", self.vec.conj(), self.vec)


def trajectory_ps_trace(traj: HopTrajectory, params: CrystalParams, field: FieldSpec, t_grid,
                        cache: _Propagators | None = None) -> NDArray[np.float64]:
    """P_S on ``t_grid`` for one trajectory, accumulating the full propagator.

    This is the direct product-of-unitaries form; the ensemble engine uses an
    equivalent eigenbasis recursion and is checked against this function.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.size and (t[0] < 0 or np.any(np.diff(t) < 0)):
        raise ValueError("time grid must be nonnegative and ascending")
    bounds = traj.boundaries
    if t.size and t[-1] > bounds[-1] * (1 + 1e-12):
        raise ValueError(f"grid extends to {t[-1]} ns beyond trajectory coverage {bounds[-1]} ns")
    props = cache or _Propagators(params, field)
    s = singlet_state()
    out = np.empty(t.size)
    u_cum = np.eye(9, dtype=complex)
    seg = 0
    for k, tk in enumerate(t):
        while seg < len(traj.dwells) - 1 and tk >= bounds[seg + 1]:
            u_cum = unitary(props.decs[traj.configs[seg]], traj.dwells[seg]) @ u_cum
            seg += 1
        u = unitary(props.decs[traj.configs[seg]], tk - bounds[seg])
        out[k] = abs(np.vdot(s, u @ (u_cum @ s))) ** 2
    return np.clip(out, 0.0, 1.0)


def _event_schedule(trajs: list[HopTrajectory], grid: NDArray[np.float64]):
    """Merge hop times and grid times per trajectory into padded event arrays.

    Returns (times, grid_index) with grid_index = -1 marking a hop and -2 padding.
    """
    n_grid = grid.size
    per = []
    for traj in trajs:
        hops = np.cumsum(traj.dwells)[:-1]
        hops = hops[hops < grid[-1]]
        times = np.concatenate((grid, hops))
        kind = np.concatenate((np.arange(n_grid), np.full(hops.size, -1)))
        order = np.argsort(times, kind="stable")
        per.append((times[order], kind[order]))
    length = max(p[0].size for p in per)
    times = np.full((len(trajs), length), grid[-1])
    kinds = np.full((len(trajs), length), -2, dtype=np.int64)
    for i, (tm, kd) in enumerate(per):
        times[i, : tm.size] = tm
        kinds[i, : kd.size] = kd
    return times, kinds


def _chunk_traces(trajs: list[HopTrajectory], props: _Propagators, grid: NDArray[np.float64]) -> NDArray[np.float64]:
    """P_S(t) for a block of trajectories, shape (len(trajs), grid.size)."""
    m = len(trajs)
    times, kinds = _event_schedule(trajs, grid)
    out = np.zeros((m, grid.size))
    rows = np.arange(m)
    cfg = np.array([t.configs[0] for t in trajs], dtype=np.int64)
    seg = np.zeros(m, dtype=np.int64)
    configs = [t.configs for t in trajs]
    coeff = props.s_eig[cfg].copy()  # state in the current eigenbasis
    prev = np.zeros(m)
    for e in range(times.shape[1]):
        now = times[:, e]
        delta = now - prev
        prev = now
        coeff *= np.exp(-1j * TWO_PI * props.lam[cfg] * delta[:, None])
        kind = kinds[:, e]
        at_grid = kind >= 0
        if at_grid.any():
            amp = np.einsum("ij,ij->i", props.s_eig[cfg[at_grid]].conj(), coeff[at_grid])
            out[rows[at_grid], kind[at_grid]] = amp.real ** 2 + amp.imag ** 2
        hop = np.flatnonzero(kind == -1)
        if hop.size:
            seg[hop] += 1
            new = np.array([configs[i][seg[i]] for i in hop], dtype=np.int64)
            coeff[hop] = np.einsum("nij,nj->ni", props.change[cfg[hop], new], coeff[hop])
            cfg[hop] = new
    return np.clip(out, 0.0, 1.0)


@dataclass
class BeatTrace:
    """Ensemble-averaged P_S on a uniform grid."""

    t: NDArray[np.float64]
    ps_mean: NDArray[np.float64]
    ps_stderr: NDArray[np.float64]
    meta: dict = dc_field(default_factory=dict)
    # per-chunk means and sizes, kept for resampling error estimates
    block_means: NDArray[np.float64] | None = dc_field(default=None, repr=False)
    block_sizes: NDArray[np.int64] | None = dc_field(default=None, repr=False)

    def __len__(self):
        return self.t.size

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if self.t.size > 1 else 0.0

    def window(self, t_lo: float = 0.0, t_hi: float = np.inf) -> "BeatTrace":
        keep = (self.t >= t_lo - 1e-12) & (self.t <= t_hi + 1e-12)
        blocks = None if self.block_means is None else self.block_means[:, keep]
        return BeatTrace(self.t[keep], self.ps_mean[keep], self.ps_stderr[keep], dict(self.meta),
                         blocks, self.block_sizes)


def _merge(stats, block):
    """Chan et al. pairwise merge of (n, mean, M2) accumulators."""
    n_a, mean_a, m2_a = stats
    n_b, mean_b, m2_b = block
    n = n_a + n_b
    delta = mean_b - mean_a
    mean = mean_a + delta * (n_b / n)
    m2 = m2_a + m2_b + delta ** 2 * (n_a * n_b / n)
    return n, mean, m2


def _run_chunk(start: int, stop: int, params, field, mc, props, grid):
    trajs = [sample_trajectory(rng_stream(mc.master_seed, i), mc) for i in range(start, stop)]
    ps = _chunk_traces(trajs, props, grid)
    mean = ps.mean(axis=0)
    m2 = ((ps - mean) ** 2).sum(axis=0)
    return stop - start, mean, m2


def ensemble_beats(params: CrystalParams, field: FieldSpec = ZERO_FIELD, mc: MonteCarloParams | None = None,
                   workers: int = 1, chunk_size: int = CHUNK_SIZE) -> BeatTrace:
    """Ensemble mean and standard error of P_S(t) over ``mc.n_traj`` trajectories."""
    mc = mc or MonteCarloParams(tau_hop=0.15)
    grid = mc.time_grid()
    props = _Propagators(params, field)
    starts = list(range(0, mc.n_traj, chunk_size))
    tasks = [(a, min(a + chunk_size, mc.n_traj)) for a in starts]
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda ab: _run_chunk(*ab, params, field, mc, props, grid), tasks))
    else:
        blocks = [_run_chunk(a, b, params, field, mc, props, grid) for a, b in tasks]
    # reduction in chunk-index order
    stats = blocks[0]
    for block in blocks[1:]:
        stats = _merge(stats, block)
    n, mean, m2 = stats
    if n > 1:
        stderr = np.sqrt(m2 / (n - 1) / n)
    else:
        stderr = np.zeros_like(mean)
    mean = np.clip(mean, 0.0, 1.0)
    mean[0] = 1.0
    stderr[0] = 0.0
    meta = {"params": params, "field": field, "mc": mc, "chunk_size": chunk_size}
    block_means = np.array([b[1] for b in blocks])
    block_sizes = np.array([b[0] for b in blocks])
    return BeatTrace(grid, mean, stderr, meta, block_means, block_sizes)
