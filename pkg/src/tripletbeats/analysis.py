"""Beat frequencies, envelope decay times and steady-state levels of P_S traces."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np
from numpy.typing import NDArray
from scipy import optimize, signal
from scipy.ndimage import uniform_filter1d

from .montecarlo import BeatTrace

MIN_POINTS = 64
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SpectralPeak:
    frequency: float  # GHz
    amplitude: float
    uncertainty: float


@dataclass(frozen=True)
class BeatSpectrum:
    peaks: list[SpectralPeak]
    method: dict = dc_field(default_factory=dict)

    @property
    def frequencies(self) -> NDArray[np.float64]:
        return np.array([p.frequency for p in self.peaks])

    @property
    def amplitudes(self) -> NDArray[np.float64]:
        return np.array([p.amplitude for p in self.peaks])

    def dominant(self) -> SpectralPeak:
        if not self.peaks:
            raise ValueError("spectrum has no peaks above threshold")
        return max(self.peaks, key=lambda p: p.amplitude)


@dataclass(frozen=True)
class DecayFit:
    decay_time: float  # ns; nan when the fit failed
    asymptote: float
    residual: float
    confident: bool
    converged: bool = True
    mode: str = "envelope"
    decay_time_err: float = np.nan
    flags: tuple[str, ...] = ()

    @property
    def slower_than_window(self) -> bool:
        return "slower-than-window" in self.flags


def _series(trace) -> tuple[NDArray, NDArray, NDArray]:
    if isinstance(trace, BeatTrace):
        return trace.t, trace.ps_mean, trace.ps_stderr
    t, y = trace
    t, y = np.asarray(t, float), np.asarray(y, float)
    return t, y, np.zeros_like(y)


def extract_frequencies(trace, max_peaks: int = 6, threshold: float = 5.0, pad_factor: int = 8,
                        resolution: float | None = None, dynamic_range: float = 1e-4) -> BeatSpectrum:
    """Windowed periodogram peaks of a uniformly sampled trace.

    ``trace`` is a BeatTrace or a ``(t, y)`` pair. Peaks must exceed
    ``threshold`` times the median of the spectrum and ``dynamic_range``
    times the strongest bin (Blackman sidelobes sit near 1e-6 in power).
    Positions are refined by a parabola through the log power of the three
    nearest bins. Peaks below the resolution 1/span are dropped. If ``resolution`` (GHz) is given the trace must be long
    enough to reach it.
    """
    t, y, _ = _series(trace)
    if t.size < MIN_POINTS:
        raise ValueError(f"need at least {MIN_POINTS} samples, got {t.size}")
    dt = t[1] - t[0]
    span = dt * t.size
    if resolution is not None and 1.0 / span > resolution:
        raise ValueError(f"trace spans {span:.3g} ns; resolution {resolution} GHz needs >= {1 / resolution:.3g} ns")
    taper = signal.windows.blackman(t.size, sym=False)
    x = (y - y.mean()) * taper
    nfft = int(2 ** np.ceil(np.log2(t.size * pad_factor)))
    power = np.abs(np.fft.rfft(x, nfft)) ** 2
    freqs = np.fft.rfftfreq(nfft, dt)
    floor = np.median(power)
    idx, _ = signal.find_peaks(power, height=max(threshold * floor, dynamic_range * power.max()))
    idx = idx[(idx > 0) & (idx < power.size - 1)]
    # keep one maximum per native resolution cell, strongest first
    idx = idx[np.argsort(power[idx])[::-1]]
    kept: list[int] = []
    for i in idx:
        if all(abs(freqs[i] - freqs[j]) > 1.0 / span for j in kept):
            kept.append(i)
        if len(kept) == max_peaks:
            break
    bin_width = freqs[1] - freqs[0]
    peaks = []
    for i in kept:
        a, b, c = np.log(power[i - 1 : i + 2] + 1e-300)
        denom = a - 2 * b + c
        shift = 0.5 * (a - c) / denom if denom < 0 else 0.0
        f = freqs[i] + shift * bin_width
        amp = 2.0 * np.sqrt(power[i]) / np.sum(taper)
        peaks.append(SpectralPeak(float(f), float(amp), float(bin_width)))
    peaks.sort(key=lambda p: p.frequency)
    # under one cycle per trace is baseline drift, not a resolvable beat
    peaks = [p for p in peaks if p.frequency >= 1.0 / span]
    method = {"window": "blackman", "resolution_GHz": 1.0 / span, "bin_GHz": bin_width,
              "threshold": threshold, "floor": float(floor)}
    return BeatSpectrum(peaks, method)


def _beat_window(t, y) -> int | None:
    """Smoothing window in samples: one period of the dominant beat, ignoring
    components slower than one cycle per trace."""
    if t.size < MIN_POINTS:
        return None
    spectrum = extract_frequencies((t, y), max_peaks=12)
    if not spectrum.peaks:
        return None
    f_dom = spectrum.dominant().frequency
    return max(3, int(round(1.0 / (f_dom * (t[1] - t[0])))))


def _relaxation(t, y, p0):
    """Least-squares ``c + a exp(-t/T)``; returns (a, T, c) and the solver result."""
    span = max(t[-1] - t[0], 1e-3)

    def resid(p):
        return p[2] + p[0] * np.exp(-(t - t[0]) / p[1]) - y

    sol = optimize.least_squares(resid, p0, bounds=([-1.0, 1e-4, 0.0], [1.0, 1e4 * span, 1.0]),
                                 x_scale="jac", max_nfev=20000)
    return sol


def fit_decay(trace, window: int | None = None) -> DecayFit:
    """Exponential decay time and asymptote of a P_S trace.

    Oscillating traces: a running mean over one beat period gives the baseline,
    fitted as ``c + b exp(-t/Tb)`` to obtain the asymptote ``c``. The running
    mean square of the trace about that baseline is the squared beat envelope,
    fitted as ``A exp(-2t/T) + floor`` in relative units, which yields the
    decay time T. Using the whole trace rather than its extrema keeps the fit
    well conditioned when several beat frequencies interfere.

    Traces shorter than two beat periods are fitted as one damped cosine
    ``c + a exp(-t/T) cos(2 pi f t + phi)``; traces without a resolvable beat
    as ``c + a exp(-t/T)``.

    ``confident`` is False when T exceeds the trace length. A fit that does not
    converge comes back with ``converged=False`` and NaN values.
    """
    t, y, err = _series(trace)
    span = t[-1] - t[0]
    noise = float(np.median(err[1:])) if err.size > 1 else 0.0
    if window is None:
        window = _beat_window(t, y)
    tail = float(np.mean(y[-max(1, y.size // 4):]))

    def failed(mode, res, why):
        return DecayFit(np.nan, np.nan, res, False, False, mode, np.nan, (why,))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            if window is not None and 2 * window > y.size:
                # under two beat periods: fit one damped cosine directly
                mode = "damped-cosine"
                tt = t - t[0]
                f0 = 1.0 / (window * (t[1] - t[0]))
                amp0 = 0.5 * (y.max() - y.min())

                def resid(q):
                    return q[2] + q[0] * np.exp(-tt / q[1]) * np.cos(TWO_PI * q[3] * tt + q[4]) - y

                sol = optimize.least_squares(
                    resid, [amp0, max(span / 2, 1e-3), np.clip(tail, 0, 1), f0, 0.0],
                    bounds=([0.0, 1e-4, 0.0, 0.5 * f0, -np.pi], [1.0, 1e4 * max(span, 1.0), 1.0, 2 * f0, np.pi]),
                    x_scale="jac", max_nfev=20000)
                decay, asym = float(sol.x[1]), float(sol.x[2])
                fun, x, jac, idx = sol.fun, sol.x, sol.jac, 1
                amp = float(sol.x[0])
            elif window is None:
                mode = "relaxation"
                sol = _relaxation(t, y, [y[0] - tail, max(span / 4, 1e-3), np.clip(tail, 0, 1)])
                decay, asym = float(sol.x[1]), float(sol.x[2])
                fun, x, jac, idx = sol.fun, sol.x, sol.jac, 1
                amp = abs(sol.x[0])
            else:
                mode = "envelope"
                half = window // 2
                keep = slice(half, y.size - half)
                tt = t[keep]
                mean = uniform_filter1d(y, window, mode="nearest")[keep]
                base = _relaxation(tt, mean, [mean[0] - tail, max(span / 4, 1e-3), np.clip(tail, 0, 1)])
                asym = float(base.x[2]) if base.success else tail
                baseline = base.x[2] + base.x[0] * np.exp(-(t - tt[0]) / base.x[1]) if base.success else tail
                msq = uniform_filter1d((y - baseline) ** 2, window, mode="nearest")[keep]
                floor0 = max(noise ** 2, 1e-6 * float(msq.max()), 1e-15)

                def resid(q):
                    model = q[0] * np.exp(-2.0 * (tt - tt[0]) / q[1]) + q[2]
                    return (model - msq) / (model + floor0)

                sol = optimize.least_squares(
                    resid, [max(msq[0], 1e-12), max(span / 4, 1e-3), floor0],
                    bounds=([0.0, 1e-4, 0.0], [1.0, 1e4 * max(span, 1.0), 1.0]), x_scale="jac", max_nfev=20000)
                decay = float(sol.x[1])
                fun, x, jac, idx = sol.fun, sol.x, sol.jac, 1
                amp = float(np.sqrt(sol.x[0]))
        except (ValueError, np.linalg.LinAlgError) as exc:
            return failed("envelope" if window else "relaxation", np.inf, f"fit-error: {exc}")
    rms = float(np.sqrt(np.mean(fun ** 2)))
    if not sol.success or not np.all(np.isfinite(x)):
        return failed(mode, rms, "not-converged")
    try:
        dof = max(1, fun.size - x.size)
        cov = np.linalg.pinv(jac.T @ jac) * (fun @ fun) / dof
        decay_err = float(np.sqrt(max(cov[idx, idx], 0.0)))
    except np.linalg.LinAlgError:
        decay_err = np.nan
    flags = []
    confident = True
    if decay > span:
        flags.append("slower-than-window")
        confident = False
    if mode == "envelope" and rms > 0.5:
        flags.append("poor-fit")
        confident = False
    if mode != "envelope" and rms > 0.1 * max(y.max() - y.min(), 1e-12):
        flags.append("poor-fit")
        confident = False
    if amp < 10 * max(noise, 1e-12):
        flags.append("amplitude-at-noise")
        confident = False
    return DecayFit(decay, asym, rms, confident, True, mode, decay_err, tuple(flags))


def decay_time_jackknife(trace: BeatTrace, **fit_kwargs) -> tuple[float, float]:
    """Decay time with a delete-one-block jackknife standard error.

    Each Monte Carlo chunk is left out in turn; the spread of the refitted
    decay times measures the sampling uncertainty of T.
    """
    if trace.block_means is None or len(trace.block_means) < 2:
        raise ValueError("trace carries no per-block means; cannot resample")
    fit_kwargs.setdefault("window", _beat_window(trace.t, trace.ps_mean))
    full = fit_decay(trace, **fit_kwargs)
    sizes = trace.block_sizes.astype(float)
    total = sizes.sum()
    weighted = trace.block_means * sizes[:, None]
    summed = weighted.sum(axis=0)
    estimates = []
    for k in range(len(sizes)):
        mean = (summed - weighted[k]) / (total - sizes[k])
        mean[0] = 1.0
        estimates.append(fit_decay(BeatTrace(trace.t, mean, trace.ps_stderr), **fit_kwargs).decay_time)
    est = np.array(estimates)
    if not full.converged or not np.all(np.isfinite(est)):
        return float(full.decay_time), np.nan
    n = est.size
    err = np.sqrt((n - 1) / n * np.sum((est - est.mean()) ** 2))
    return float(full.decay_time), float(err)


def steady_state_level(trace, window_fraction: float = 0.25) -> tuple[float, float]:
    """Mean of ps_mean over the last ``window_fraction`` of the grid, with its
    standard error propagated from the per-point errors (treated as independent).
    """
    if not 0 < window_fraction <= 0.5:
        raise ValueError("window_fraction must lie in (0, 0.5]")
    t, y, err = _series(trace)
    n = max(1, int(round(window_fraction * y.size)))
    tail, tail_err = y[-n:], err[-n:]
    return float(np.mean(tail)), float(np.sqrt(np.sum(tail_err ** 2)) / n)


def analysis_report(trace, max_peaks: int = 6) -> dict:
    """JSON-ready summary of frequencies, decay and steady state."""
    spectrum = extract_frequencies(trace, max_peaks=max_peaks)
    fit = fit_decay(trace)
    level, level_err = steady_state_level(trace)

    def num(x):
        return None if x is None or not np.isfinite(x) else float(x)

    return {
        "frequencies": [
            {"frequency_GHz": p.frequency, "amplitude": p.amplitude, "uncertainty_GHz": p.uncertainty}
            for p in spectrum.peaks
        ],
        "decay_time_ns": num(fit.decay_time),
        "decay_time_err_ns": num(fit.decay_time_err),
        "asymptote": num(fit.asymptote),
        "steady_state": level,
        "steady_state_err": level_err,
        "fit_mode": fit.mode,
        "fit_residual": num(fit.residual),
        "flags": list(fit.flags) + ([] if fit.converged else ["fit-failed"]),
        "spectrum_method": spectrum.method,
    }
