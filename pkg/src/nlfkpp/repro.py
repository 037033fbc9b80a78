"""Bundled parameter presets that regenerate the reference figures and constants.

Each target writes CSV data plus ``summary.csv`` with columns
``check, value, low, high, pass``.  Plot rendering is left to the reader.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

A_INIT, W_INIT = 0.01, 0.1


def _check(name, value, low, high):
    ok = bool(math.isfinite(value) and low <= value <= high)
    return (name, float(value), float(low), float(high), ok)


def _band(name, value, target, rel):
    lo, hi = sorted((target * (1 - rel), target * (1 + rel)))
    return _check(name, value, lo, hi)


def _write(out, name, header, rows):
    from .cli import write_csv
    return write_csv(Path(out) / name, header, rows)


def _finish(out, files, checks):
    files.append(_write(out, "summary.csv", ["check", "value", "low", "high", "pass"], checks))
    return files, checks


# --- evolution presets -------------------------------------------------------

def moderate_run(D: float, A: float = A_INIT, periods: float = 9.0, snapshots=()):
    """u-form run on [0, 10] with 1000 nodes up to ``t = periods / (2 sqrt(D))``,
    when a front at the minimum speed has moved ``periods`` units."""
    from .evolve import EvolveConfig, InitialData, run
    t_end = periods / (2 * math.sqrt(D))
    cfg = EvolveConfig(D=D, L=10.0, n=1000, t_end=t_end, output_interval=t_end / 100)
    return run(InitialData(A=A), cfg, snapshot_times=snapshots)


def small_d_run(D: float, L: float, n: int, t_end: float, output_interval: float = 10.0):
    """Log-form run from Gaussian data, ``dt_max = 0.5``."""
    from .evolve import EvolveConfig, InitialData, InitialKind, Scheme, run
    cfg = EvolveConfig(D=D, L=L, n=n, t_end=t_end, dt_max=0.5, output_interval=output_interval,
                       scheme=Scheme.W_FORM)
    return run(InitialData(InitialKind.GAUSSIAN, A_INIT, W_INIT), cfg)


SMALL_D_PRESETS = {1e-4: (96.0, 3200, 2000.0), 1e-5: (96.0, 10240, 6600.0)}


def _fig1(out):
    from .travwave import front_mismatch, solve_tptw
    files, checks = [], []
    for D in (0.001, 0.003, 0.01):
        res = moderate_run(D)
        x, u = res.final.grid.x, res.final.values
        prof = solve_tptw(D)
        files.append(_write(out, f"evolve_D{D:g}.csv", ["x", "u"], zip(x, u)))
        files.append(_write(out, f"tw_D{D:g}.csv", ["z", "u"], zip(prof.z, prof.u)))
        if D >= 0.003:  # behind the front u -> 1 only above the stability threshold
            checks.append(_check(f"front_mismatch_D{D:g}", front_mismatch(x, u, prof), 0.0, 0.05))
        else:
            # the pattern grows right behind the front; compare the leading edge only
            gap = front_mismatch(x, u, prof, behind=0.5)
            checks.append(_check(f"front_mismatch_D{D:g}_leading_edge_info", gap, 0.0, math.inf))
    return _finish(out, files, checks)


def _fig2(out):
    from .evolve import fit_front_speed
    files, checks = [], []
    for D in (0.001, 0.002, 0.003):
        res = moderate_run(D)
        d = res.diagnostics.as_arrays()
        files.append(_write(out, f"front_D{D:g}.csv", ["time", "front"],
                            zip(d["times"], d["front_position"])))
        speed, _ = fit_front_speed(d["times"], d["front_position"], 0.5 * d["times"][-1])
        checks.append(_band(f"speed_over_2sqrtD_D{D:g}", speed / (2 * math.sqrt(D)), 1.0, 0.05))
        if D == 0.003:
            x, u = res.final.grid.x, res.final.values
            behind = (x > 2.0) & (x < d["front_position"][-1] - 2.0)
            checks.append(_check("trailing_max_abs_u_minus_1_D0.003",
                                 float(np.max(np.abs(u[behind] - 1))), 0.0, 0.02))
        if D == 0.001:
            checks.append(_band("trailing_wavelength_D0.001", d["wavelength"][-1], 0.7, 0.1 / 0.7))
    return _finish(out, files, checks)


def _fig4(out):
    from .evolve import front_predictor_xf
    files, checks = [], []
    for D, (L, n, T) in SMALL_D_PRESETS.items():
        res = small_d_run(D, L, n, T)
        d = res.diagnostics.as_arrays()
        xf = np.array([_safe_xf(t, D, front_predictor_xf) for t in d["times"]])
        files.append(_write(out, f"front_D{D:g}.csv", ["time", "front", "x_f"],
                            zip(d["times"], d["front_position"], xf)))
        m = d["times"] >= 2 * T / 3
        rel = float(np.max(np.abs(d["front_position"][m] / xf[m] - 1)))
        checks.append(_check(f"front_vs_xf_final_third_D{D:g}", rel, 0.0, 0.03))
    return _finish(out, files, checks)


def _safe_xf(t, D, fn):
    try:
        return fn(t, A_INIT, W_INIT, D)
    except ValueError:
        return math.nan


WAVELENGTH_DS = (0.002, 0.001, 5e-4, 2e-4, 1e-4)


def _wavelength_run(D):
    """u-form run resolving spikes of width ~sqrt(D); the front ends near x = 8."""
    from .evolve import EvolveConfig, InitialData, run
    n = max(1000, math.ceil(10.0 / (0.3 * math.sqrt(D))))
    t_end = 8.0 / (2 * math.sqrt(D))
    cfg = EvolveConfig(D=D, L=10.0, n=n, t_end=t_end, output_interval=t_end / 20)
    res = run(InitialData(), cfg)
    d = res.diagnostics.as_arrays()
    return d["wavelength"][-1], d["u_max"][-1]


def _wavelength_table():
    from .cli import parallel_map
    from .dispersion import most_unstable_k
    rows = []
    for D, (wl, um) in zip(WAVELENGTH_DS, parallel_map(_wavelength_run, WAVELENGTH_DS)):
        k_m, _ = most_unstable_k(D)
        rows.append((D, wl, 2 * math.pi / k_m, um))
    return rows


def _fig5(out):
    rows = _wavelength_table()
    files = [_write(out, "wavelength.csv", ["D", "wavelength", "most_unstable_wavelength", "u_max"],
                    rows)]
    wl = [r[1] for r in rows]
    checks = [_check("wavelength_min", min(wl), 0.5, math.inf),
              _check("wavelength_decreasing_steps", float(np.sum(np.diff(wl) < 0)),
                     len(wl) - 1, len(wl) - 1)]
    return _finish(out, files, checks)


def _fig6(out):
    from .asymptote import solve_spike
    from .steady import spike_scaling
    rows = _wavelength_table()
    files = [_write(out, "inverse_height.csv", ["D", "inverse_u_max", "u_max_sqrtD"],
                    [(D, 1 / um, um * math.sqrt(D)) for D, _, _, um in rows])]
    sc = spike_scaling([1e-3, 1e-4, 1e-5])
    files.append(_write(out, "steady_spike_scaling.csv", ["D", "lambda", "u_max", "u_max_sqrtD"], sc))
    scaled = np.array([r[3] for r in sc])
    v0 = solve_spike(10.0).v0
    checks = [_check("u_max_sqrtD_spread", float(scaled.max() / scaled.min() - 1), 0.0, 0.10),
              _band("u_max_sqrtD_vs_v0_D1e-3", float(scaled[0]), v0, 0.05)]
    return _finish(out, files, checks)


# --- steady states -----------------------------------------------------------

def _fig5_1(out):
    from .steady import continue_branch
    files, peaks = [], []
    for D in (2e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5):
        pts = continue_branch(1, D)
        files.append(_write(out, f"branch_D{D:g}.csv", ["lambda", "D", "alpha", "u_max", "converged"],
                            [(p.lam, p.D, p.alpha, p.u_max, p.converged) for p in pts]))
        peaks.append(max(p.alpha for p in pts if p.converged))
    checks = [_check("max_alpha_increasing_steps", float(np.sum(np.diff(peaks) > 0)),
                     len(peaks) - 1, len(peaks) - 1)]
    return _finish(out, files, checks)


def _fig5_5(out):
    from .asymptote import region1_profile
    from .steady import solve_by_continuation
    lam = 0.75
    ref = region1_profile(1, lam)
    files, checks = [], []
    for D in (1e-3, 1e-4, 1e-5, 1e-6):
        st = solve_by_continuation(lam, D)
        x, F = st.full_period()
        files.append(_write(out, f"profile_D{D:g}.csv", ["x", "F", "outer"], zip(x, F, ref.F0(x))))
        if D == 1e-6:
            checks.append(_band("u_max_vs_2pi_D1e-6", st.u_max, 2 * math.pi, 0.03))
            mass = 1 - math.pi**2 * D / (lam - 0.5) ** 2
            checks.append(_check("period_mass_D1e-6", st.mass, mass - 5e-5, mass + 5e-5))
    return _finish(out, files, checks)


def _fig5_8(out):
    from .asymptote import spike_family
    lam_bars = (0.5, 1.0, 2.0, 4.0, 5.8, 8.0, 10.0, 50.0, 100.0)
    sols = spike_family(lam_bars)
    rows = [(s.lam_bar, s.v0, s.lam_bar / 48, math.pi / (2 * s.lam_bar)) for s in sols]
    files = [_write(out, "spike_peak.csv", ["lam_bar", "v0", "small_lam_bar", "large_lam_bar"], rows)]
    v0 = np.array([r[1] for r in rows])
    peak_at = lam_bars[int(np.argmax(v0))]
    checks = [_band("v0_over_small_asymptote_lam_bar0.5", v0[0] / (0.5 / 48), 1.0, 0.10),
              _check("peak_lam_bar", peak_at, 4.0, 8.0),
              _check("single_peak_sign_changes",
                     float(np.sum(np.diff(np.sign(np.diff(v0))) != 0)), 1, 1)]
    return _finish(out, files, checks)


# --- constants ---------------------------------------------------------------

def constants_checks():
    from .asymptote import (L_STAR_REFERENCE, SECH2_EIGENVALUE, SECH2_PEAK, sech2_limit,
                            solve_spike, solve_transition_layer)
    from .dispersion import k_zero, threshold
    from .travwave import find_oscillation_threshold
    k0 = k_zero()
    s_plus, D_plus = find_oscillation_threshold()
    spike = solve_spike(0.25)
    lb = spike.lam_bar
    ref = lb * sech2_limit(lb * spike.X)
    layer = solve_transition_layer(8.0, 6.0, 4000)
    return [
        _check("Delta_1", threshold(1), 0.00297 - 2e-5, 0.00297 + 2e-5),
        _check("k0", k0, 2 * math.pi, 3 * math.pi),
        _check("k0_residual", abs(math.tan(k0 / 2) - k0 / 2), 0.0, 1e-10),
        _check("sigma_plus", s_plus, 4.437 - 1e-3, 4.437 + 1e-3),
        _check("D_plus", D_plus, 2.824e-2 - 1e-3, 2.824e-2 + 1e-3),
        _check("I_tilde", SECH2_EIGENVALUE, 1 / 72, 1 / 72),
        _check("v_tilde_0", SECH2_PEAK, 1 / 48, 1 / 48),
        _check("spike_lam_bar0.25_vs_sech2_rel_max",
               float(np.max(np.abs(spike.v - ref)) / ref[0]), 0.0, 0.05),
        _band("l_star", layer.l, L_STAR_REFERENCE, 0.01),
    ]


def _table_constants(out):
    return _finish(out, [], constants_checks())


TARGETS = {
    "FIG1": _fig1, "FIG2": _fig2, "FIG4": _fig4, "FIG5": _fig5, "FIG6": _fig6,
    "FIG5_1": _fig5_1, "FIG5_5": _fig5_5, "FIG5_8": _fig5_8,
    "TABLE_CONSTANTS": _table_constants,
}


def run_repro(target: str, out) -> tuple[list[Path], list[tuple]]:
    """Run a bundled target into directory ``out``; returns ``(files, checks)``."""
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}")
    Path(out).mkdir(parents=True, exist_ok=True)
    try:
        return TARGETS[target](out)
    except Exception as exc:
        raise RuntimeError(f"{target}: {exc}") from exc
