"""Ensemble quantum beats across hopping regimes at zero field.

Fast hopping approaches the configuration-averaged Hamiltonian, slow
hopping freezes the pair in its first configuration, and intermediate
hopping washes the beats out within about a nanosecond.
"""
import numpy as np

from tripletbeats import (
    CrystalParams,
    MonteCarloParams,
    averaged_hamiltonian,
    configuration_hamiltonian,
    ensemble_beats,
    extract_frequencies,
    fit_decay,
    static_ps_trace,
)

params = CrystalParams.rubrene()
N = 2000  # small ensembles keep the demo quick; the acceptance suite uses 10 000

fast = ensemble_beats(params, mc=MonteCarloParams(tau_hop=0.001, n_traj=N, t_max=2.0))
limit = static_ps_trace(averaged_hamiltonian(params), fast.t)
print(f"tau_hop = 1 ps: max |MC - averaged-H trace| = {np.max(np.abs(fast.ps_mean - limit)):.4f}")

slow = ensemble_beats(params, mc=MonteCarloParams(tau_hop=10.0, n_traj=N, t_max=8.0))
print("tau_hop = 10 ns: beat lines",
      np.round(extract_frequencies(slow).frequencies, 3), "GHz")
frozen = static_ps_trace(configuration_hamiltonian("AA", params), slow.t)
print(f"  deviation from the frozen AA trace at 1 ns: {abs(slow.ps_mean[100] - frozen[100]):.4f}")

for tau_ps in (100, 150, 200):
    trace = ensemble_beats(params, mc=MonteCarloParams(tau_hop=tau_ps / 1000, n_traj=N, t_max=5.0))
    fit = fit_decay(trace)
    print(f"tau_hop = {tau_ps} ps: decay {fit.decay_time:.2f} ns, asymptote {fit.asymptote:.3f} (2/9 = 0.222)")
