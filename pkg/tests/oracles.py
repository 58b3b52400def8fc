"""Independent reference computations used only by the tests.

``exact_ensemble_ps`` gives the infinite-ensemble mean of P_S(t) without any
sampling. Exponential dwell times make the configuration sequence a
continuous-time Markov chain (AA/BB -> AB at rate 1/tau, AB -> AA or BB at
rate 1/(2 tau) each), so the configuration-resolved average density
matrices obey a linear stochastic Liouville equation that can be propagated
with a matrix exponential.
"""

import itertools

import numpy as np
from scipy.linalg import expm

from tripletbeats.hamiltonian import singlet_state, total_hamiltonian


def exact_ensemble_ps(params, field, tau_hop, t_grid):
    t = np.asarray(t_grid, dtype=float)
    dt = t[1] - t[0]
    assert np.allclose(np.diff(t), dt)
    tau = tau_hop / 2.0
    eye = np.eye(9)
    blocks = []
    for config in ("AA", "BB", "AB"):
        h = total_hamiltonian(config, params, field).matrix
        blocks.append(-2j * np.pi * (np.kron(h, eye) - np.kron(eye, h.T)))
    rates = np.array([
        [-1.0, 0.0, 0.5],
        [0.0, -1.0, 0.5],
        [1.0, 1.0, -1.0],
    ]) / tau  # rates[new, old]
    gen = np.kron(rates, np.eye(81)).astype(complex)
    for i in range(3):
        gen[81 * i : 81 * (i + 1), 81 * i : 81 * (i + 1)] += blocks[i]
    s = singlet_state()
    rho = np.outer(s, s.conj()).reshape(-1)
    state = np.concatenate((0.5 * rho, 0.5 * rho, 0 * rho))
    step = expm(gen * dt)
    bra = np.concatenate([rho.conj()] * 3)  # <S|X|S> = sum_ij S_i^* X_ij S_j
    out = np.empty(t.size)
    if t[0] != 0:
        state = expm(gen * t[0]) @ state
    for k in range(t.size):
        out[k] = (bra @ state).real
        state = step @ state
    return out


def brute_force_pair_spectrum(site_energies):
    """All pairwise sums E_i + E_j, sorted."""
    return np.sort([a + b for a, b in itertools.product(site_energies, repeat=2)])


def finite_difference_unitary_check(h, dt, n=2000):
    """Propagate with many tiny first-order steps (Crank-Nicolson) for comparison."""
    m = np.asarray(h)
    step = dt / n
    a = np.eye(m.shape[0]) + 1j * np.pi * step * m
    b = np.eye(m.shape[0]) - 1j * np.pi * step * m
    cn = np.linalg.solve(a, b)
    return np.linalg.matrix_power(cn, n)
