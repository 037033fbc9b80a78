"""Time integration of u_t = D u_xx + u (1 - phi*u) from localized data.

Two schemes are available:

``U_FORM``
    u on the half line ``[0, L]`` with reflection at ``x = 0`` and ``u = 0``
    beyond ``L``; second-order central differences and the trapezium-rule
    window integral.

``W_FORM``
    ``W = log u`` on a periodic domain of length ``L`` centred at 0, with
    fourth-order five-point stencils and the spectral window integral.  The
    logarithmic form resolves the exponentially small precursor ahead of the
    front.

Both use the explicit midpoint rule with step doubling/halving so that the
largest nodal change of u per step stays below ``max_change``.  The log form
is further limited by the transport speed ``2 D |W_x|`` of the far field.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .dispersion import w0, w1
from .kernel import Field, Grid1D, Representation, fourier_symbol, window_weights

log = logging.getLogger(__name__)


class BlowUpError(RuntimeError):
    pass


class LinearRegimeError(RuntimeError):
    pass


class InitialKind(Enum):
    COMPACT_BUMP = "bump"
    GAUSSIAN = "gaussian"


class Scheme(Enum):
    U_FORM = "u"
    W_FORM = "w"


@dataclass(frozen=True)
class InitialData:
    kind: InitialKind = InitialKind.COMPACT_BUMP
    A: float = 0.01
    w: float = 0.1

    def __post_init__(self):
        if not self.A > 0:
            raise ValueError("amplitude A must be positive")
        if not self.w > 0:
            raise ValueError("Gaussian width w must be positive")

    def u0(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind is InitialKind.COMPACT_BUMP:
            g = np.where(np.abs(x) <= 0.5, (1 - 2 * x) ** 2 * (1 + 2 * x) ** 2, 0.0)
            return self.A * g
        return self.A * np.exp(-(x / self.w) ** 2)

    def log_u0(self, x):
        if self.kind is not InitialKind.GAUSSIAN:
            raise ValueError("log-form evolution needs Gaussian initial data")
        return math.log(self.A) - (np.asarray(x, dtype=float) / self.w) ** 2


@dataclass(frozen=True)
class EvolveConfig:
    D: float
    L: float = 10.0
    n: int = 1000
    t_end: float = 10.0
    dt_max: float = 0.1
    max_change: float = 1e-2
    scheme: Scheme = Scheme.U_FORM
    output_interval: float = 1.0

    def __post_init__(self):
        if not self.D > 0:
            raise ValueError("D must be positive")
        if not self.L > 0 or self.n < 3:
            raise ValueError("need L > 0 and n >= 3")
        if not (self.t_end >= 0 and self.dt_max > 0 and self.max_change > 0
                and self.output_interval > 0):
            raise ValueError("t_end, dt_max, max_change and output_interval must be positive")

    def grid(self) -> Grid1D:
        if self.scheme is Scheme.U_FORM:
            return Grid1D.spanning(0.0, self.L, self.n)
        return Grid1D.periodic_of(self.L, self.n, centred=True)

    def stability_cap(self) -> float:
        dx = self.grid().dx
        # five-point Laplacian has spectral radius 16/3 dx^-2 instead of 4 dx^-2
        factor = 0.4 if self.scheme is Scheme.U_FORM else 0.3
        return min(self.dt_max, factor * dx * dx / self.D)


@dataclass
class EvolveDiagnostics:
    times: list = field(default_factory=list)
    front_position: list = field(default_factory=list)
    wavelength: list = field(default_factory=list)
    u_max: list = field(default_factory=list)
    mass: list = field(default_factory=list)

    def as_arrays(self) -> dict[str, np.ndarray]:
        return {k: np.asarray(getattr(self, k), dtype=float)
                for k in ("times", "front_position", "wavelength", "u_max", "mass")}


@dataclass
class RunResult:
    diagnostics: EvolveDiagnostics
    final: Field
    snapshots: dict = field(default_factory=dict)
    steps: int = 0


# --- right-hand sides -------------------------------------------------------

class _UForm:
    def __init__(self, cfg: EvolveConfig):
        self.D = cfg.D
        self.grid = cfg.grid()
        self.w, _ = window_weights(self.grid.dx)
        if 2 * self.grid.length < 1.0:
            raise ValueError("grid too small: span is narrower than the kernel support")

    def window(self, u):
        full = np.concatenate([u[:0:-1], u])
        return np.convolve(full, self.w, mode="same")[u.size - 1:]

    def rhs(self, u):
        dx2 = self.grid.dx ** 2
        lap = np.empty_like(u)
        lap[1:-1] = u[2:] - 2 * u[1:-1] + u[:-2]
        lap[0] = 2 * (u[1] - u[0])
        lap[-1] = u[-2] - 2 * u[-1]
        return self.D * lap / dx2 + u * (1.0 - self.window(u))


class _WForm:
    def __init__(self, cfg: EvolveConfig):
        self.D = cfg.D
        self.grid = cfg.grid()
        if self.grid.length < 1.0:
            raise ValueError("period shorter than kernel support")
        self.symbol = fourier_symbol(self.grid.n, self.grid.length)

    def window(self, W):
        return np.fft.irfft(np.fft.rfft(np.exp(W)) * self.symbol, n=W.size)

    def slope(self, W):
        m2, m1 = np.roll(W, 2), np.roll(W, 1)
        p1, p2 = np.roll(W, -1), np.roll(W, -2)
        return (m2 - 8 * m1 + 8 * p1 - p2) / (12 * self.grid.dx)

    def advective_cap(self, W):
        """Step bound for the transport term ``D W_x^2`` (speed ``2 D |W_x|``)."""
        speed = 2 * self.D * float(np.max(np.abs(self.slope(W))))
        return math.inf if speed == 0 else 0.5 * self.grid.dx / speed

    def rhs(self, W):
        dx = self.grid.dx
        m2, m1 = np.roll(W, 2), np.roll(W, 1)
        p1, p2 = np.roll(W, -1), np.roll(W, -2)
        Wxx = (-m2 + 16 * m1 - 30 * W + 16 * p1 - p2) / (12 * dx * dx)
        Wx = (m2 - 8 * m1 + 8 * p1 - p2) / (12 * dx)
        return self.D * (Wxx + Wx * Wx) + 1.0 - self.window(W)


def _rhs_for(cfg: EvolveConfig):
    return _UForm(cfg) if cfg.scheme is Scheme.U_FORM else _WForm(cfg)


def _midpoint(rhs, y, dt):
    half = y + 0.5 * dt * rhs(y)
    return y + dt * rhs(half)


def _check_finite(y):
    if not np.all(np.isfinite(y)):
        raise BlowUpError("blow-up detected: non-finite values in the solution")


def step_u(state: Field, cfg: EvolveConfig, dt: float) -> Field:
    """One explicit midpoint step of the u-form scheme; negatives clipped to 0."""
    if state.grid.periodic or state.representation is not Representation.U:
        raise ValueError("step_u needs a non-periodic U field")
    if dt > cfg.stability_cap() * (1 + 1e-12):
        raise ValueError(f"dt={dt} exceeds the stability cap {cfg.stability_cap()}")
    out = _midpoint(_UForm(cfg).rhs, state.values, dt)
    _check_finite(out)
    return Field(state.grid, np.maximum(out, 0.0))


def step_w(state: Field, cfg: EvolveConfig, dt: float) -> Field:
    """One explicit midpoint step of the log-form scheme on a periodic grid."""
    if not state.grid.periodic or state.representation is not Representation.LOG_U:
        raise ValueError("step_w needs a periodic LOG_U field")
    if dt > cfg.stability_cap() * (1 + 1e-12):
        raise ValueError(f"dt={dt} exceeds the stability cap {cfg.stability_cap()}")
    out = _midpoint(_WForm(cfg).rhs, state.values, dt)
    _check_finite(out)
    return Field(state.grid, out, Representation.LOG_U)


# --- diagnostics ------------------------------------------------------------

def front_position(x, u, level: float = 0.5) -> float:
    """Largest x at which u crosses ``level`` downwards (linear interpolation).

    Only ``x >= 0`` is searched; returns NaN when u never exceeds ``level``.
    """
    x = np.asarray(x)
    u = np.asarray(u)
    keep = x >= 0
    x, u = x[keep], u[keep]
    above = np.nonzero(u >= level)[0]
    if above.size == 0:
        return math.nan
    i = above[-1]
    if i == u.size - 1:
        return float(x[i])
    u0, u1 = u[i], u[i + 1]
    return float(x[i] + (x[i + 1] - x[i]) * (u0 - level) / (u0 - u1))


def trailing_wavelength(x, u, front: float, margin: float = 2.0,
                        level: float = 0.5, min_maxima: int = 4) -> float:
    """Mean spacing of local maxima above ``level`` in ``[margin, front - margin]``."""
    if not math.isfinite(front):
        return math.nan
    x = np.asarray(x)
    u = np.asarray(u)
    interior = np.nonzero((u[1:-1] > u[:-2]) & (u[1:-1] >= u[2:]) & (u[1:-1] > level))[0] + 1
    peaks = []
    for i in interior:
        if not (margin <= x[i] <= front - margin):
            continue
        # parabolic refinement of the peak location
        ym, y0, yp = u[i - 1], u[i], u[i + 1]
        den = ym - 2 * y0 + yp
        off = 0.5 * (ym - yp) / den if den != 0 else 0.0
        peaks.append(x[i] + off * (x[1] - x[0]))
    if len(peaks) < min_maxima:
        return math.nan
    return float(np.mean(np.diff(peaks)))


def _mass(grid: Grid1D, u: np.ndarray, scheme: Scheme) -> float:
    if scheme is Scheme.U_FORM:
        # symmetric half line: full-line trapezium sum
        return float(grid.dx * (2 * u.sum() - u[0] - u[-1]))
    return float(grid.dx * u.sum())


def _record(diag: EvolveDiagnostics, t, grid, y, scheme):
    u = np.exp(y) if scheme is Scheme.W_FORM else y
    x = grid.x
    xf = front_position(x, u)
    diag.times.append(t)
    diag.front_position.append(xf)
    diag.wavelength.append(trailing_wavelength(x, u, xf))
    diag.u_max.append(float(u.max()))
    diag.mass.append(_mass(grid, u, scheme))


def initial_field(init: InitialData, cfg: EvolveConfig) -> Field:
    grid = cfg.grid()
    if cfg.scheme is Scheme.U_FORM:
        return Field(grid, init.u0(grid.x))
    return Field(grid, init.log_u0(grid.x), Representation.LOG_U)


def run(init: InitialData, cfg: EvolveConfig, snapshot_times=(), callback=None) -> RunResult:
    """Integrate to ``cfg.t_end`` with adaptive steps and sampled diagnostics.

    ``callback(t, field)``, if given, is called at every output time.
    """
    model = _rhs_for(cfg)
    state = initial_field(init, cfg)
    grid = state.grid
    y = state.values.copy()
    is_w = cfg.scheme is Scheme.W_FORM
    cap = cfg.stability_cap()

    stops = np.arange(0.0, cfg.t_end + 0.5 * cfg.output_interval, cfg.output_interval)
    stops = stops[stops <= cfg.t_end + 1e-12]
    if stops[-1] < cfg.t_end - 1e-12:
        stops = np.append(stops, cfg.t_end)
    snaps = sorted(float(s) for s in snapshot_times)
    events = sorted(set(np.round(np.concatenate([stops, snaps]), 12)))

    diag = EvolveDiagnostics()
    snapshots: dict = {}
    t = 0.0
    dt = min(cap, 1e-3)
    steps = 0
    u_old = np.exp(y) if is_w else y

    def emit(t_now):
        if np.any(np.isclose(stops, t_now, atol=1e-12)):
            _record(diag, t_now, grid, y, cfg.scheme)
        for s in snaps:
            if abs(s - t_now) <= 1e-12:
                snapshots[s] = Field(grid, y.copy(), state.representation)
        if callback is not None:
            callback(t_now, Field(grid, y, state.representation))

    emit(0.0)
    for target in events[1:]:
        while t < target - 1e-12:
            h = min(dt, cap, target - t)
            if is_w:
                h = min(h, model.advective_cap(y))
            while True:
                y_new = _midpoint(model.rhs, y, h)
                if not is_w:
                    np.maximum(y_new, 0.0, out=y_new)
                if not np.all(np.isfinite(y_new)):
                    h *= 0.5
                    if h < 1e-14:
                        raise BlowUpError(f"blow-up detected at t={t:.6g}")
                    continue
                u_new = np.exp(y_new) if is_w else y_new
                change = float(np.max(np.abs(u_new - u_old)))
                if change > cfg.max_change and h > 1e-14:
                    h *= 0.5
                    continue
                break
            y, u_old = y_new, u_new
            t += h
            steps += 1
            if change < 0.25 * cfg.max_change and h >= dt:
                dt = min(2 * h, cap)
            elif h < dt and t < target - 1e-12:
                dt = h
        t = target
        emit(t)
    final = Field(grid, y, state.representation)
    return RunResult(diag, final, snapshots, steps)


# --- predictors and linear checks -------------------------------------------

def far_field(x, t, A, w, D):
    """Gaussian far-field approximation ahead of the front, as log u."""
    s = w * w + 4 * D * t
    return np.log(w * A / np.sqrt(s)) + t - np.asarray(x) ** 2 / s


def front_predictor_xf(t: float, A: float, w: float, D: float) -> float:
    """Location where the logarithm of the Gaussian far field vanishes."""
    s = w * w + 4 * D * t
    rad = t + math.log(A * w) - 0.5 * math.log(s)
    if rad < 0:
        raise ValueError("predictor undefined at this t (negative radicand)")
    return math.sqrt(s) * math.sqrt(rad)


def fit_front_speed(times, front, t_from: float) -> tuple[float, float]:
    """Least-squares slope and intercept of front position for ``t >= t_from``."""
    times = np.asarray(times)
    front = np.asarray(front)
    m = (times >= t_from) & np.isfinite(front)
    slope, intercept = np.polyfit(times[m], front[m], 1)
    return float(slope), float(intercept)


class Equilibrium(Enum):
    U0 = 0
    U1 = 1


def measure_growth_rate(k: float, D: float, about: Equilibrium = Equilibrium.U1,
                        eps: float = 1e-6, t_max: float | None = None,
                        nodes_per_wave: int = 64, dt: float | None = None) -> float:
    """Fitted exponential rate of a single Fourier mode about an equilibrium.

    Evolves ``u = u_e + eps cos(k x)`` on a periodic domain holding an integer
    number of wavelengths and fits ``log`` of the mode amplitude against t
    while it stays below ``1e-3``.  Positive means growth.
    """
    if not k > 0:
        raise ValueError("k must be positive")
    m = max(1, math.ceil(k / (2 * math.pi)))
    length = 2 * math.pi * m / k
    n = nodes_per_wave * m
    grid = Grid1D.periodic_of(length, n, centred=False)
    x = grid.x
    sym = fourier_symbol(n, length)
    dx = grid.dx
    ue = float(about.value)

    def rhs(u):
        m2, m1 = np.roll(u, 2), np.roll(u, 1)
        p1, p2 = np.roll(u, -1), np.roll(u, -2)
        lap = (-m2 + 16 * m1 - 30 * u + 16 * p1 - p2) / (12 * dx * dx)
        conv = np.fft.irfft(np.fft.rfft(u) * sym, n=n)
        return D * lap + u * (1.0 - conv)

    guess_rate = abs(-w0(k, D) if about is Equilibrium.U0 else -w1(k, D))
    if dt is None:
        dt = min(0.3 * dx * dx / D, 0.01 / max(guess_rate, 1e-3), 0.05)
    if t_max is None:
        t_max = min(5.0 / max(guess_rate, 1e-3), 2000.0)
    u = ue + eps * np.cos(k * x)
    ts, amps = [], []
    t = 0.0
    every = max(1, int(round(0.01 * t_max / dt)))
    step = 0
    while t < t_max:
        if step % every == 0:
            a = 2 * abs(np.fft.rfft(u - ue)[m]) / n
            if a >= 1e-3:
                break
            ts.append(t)
            amps.append(a)
        u = _midpoint(rhs, u, dt)
        t += dt
        step += 1
    if len(ts) < 5:
        raise LinearRegimeError("amplitude left the linear regime before the fit window")
    rate, _ = np.polyfit(np.array(ts), np.log(np.array(amps)), 1)
    return float(rate)

