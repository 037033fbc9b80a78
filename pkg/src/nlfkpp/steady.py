"""Even periodic steady states of ``D F'' + F (1 - phi*F) = 0``.

A state of wavelength ``lam`` is stored as its values on the half period
``[0, lam/2]`` (n nodes, Neumann ends); the full period is the even
extension with ``M = 2(n-1)`` nodes.  The window integral is the trapezium
rule of the periodic extension, so the nonlocal operator on the half grid is
a dense matrix obtained by folding a circulant.

Newton iterates on ``G = log F``.  The discrete equation divided by F,

    D (L F)_i / F_i - (K (F - 1))_i = 0,

is the same equation as the one in F, but positivity is built in and the
exponentially small gaps between humps keep full relative accuracy.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .dispersion import (TongueClosedError, delta_of, omega_membership, threshold,
                         tongue_boundaries)
from .kernel import window_weights

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
MAX_HALVINGS = 8


class SteadyStateError(RuntimeError):
    """Newton failed; ``residual`` holds the final residual max-norm."""

    def __init__(self, msg, residual=math.nan):
        super().__init__(msg)
        self.residual = residual


class TrivialStateError(SteadyStateError):
    pass


class NotInTongueError(ValueError):
    pass


WEAKLY_NONLINEAR = "weakly_nonlinear"


@dataclass
class PeriodicState:
    lam: float
    D: float
    half_profile: np.ndarray
    newton_iters: int = 0
    residual_norm: float = math.nan

    def __post_init__(self):
        self.half_profile = np.asarray(self.half_profile, dtype=float)

    @property
    def n(self) -> int:
        return self.half_profile.size

    @property
    def dx(self) -> float:
        return 0.5 * self.lam / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return self.dx * np.arange(self.n)

    @property
    def alpha(self) -> float:
        return float(self.half_profile.max() - self.half_profile.min())

    @property
    def u_max(self) -> float:
        return float(self.half_profile.max())

    @property
    def mass(self) -> float:
        F = self.half_profile
        return float(self.dx * (2 * F.sum() - F[0] - F[-1]))

    def full_period(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and values on ``[-lam/2, lam/2]`` by even reflection."""
        F = self.half_profile
        x = self.x
        return np.concatenate([-x[:0:-1], x]), np.concatenate([F[:0:-1], F])


@dataclass
class BranchPoint:
    lam: float
    D: float
    alpha: float = math.nan
    u_max: float = math.nan
    converged: bool = False
    newton_iters: int = 0
    error: str = ""


@dataclass
class _Operators:
    lam: float
    n: int
    lap: np.ndarray = field(init=False)
    inv_dx2: float = field(init=False)
    window: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.n < 8:
            raise ValueError("need at least 8 nodes on the half period")
        n = self.n
        dx = 0.5 * self.lam / (n - 1)
        lap = np.zeros((n, n))
        i = np.arange(1, n - 1)
        lap[i, i - 1] = lap[i, i + 1] = 1.0
        lap[i, i] = -2.0
        lap[0, 0], lap[0, 1] = -2.0, 2.0
        lap[-1, -1], lap[-1, -2] = -2.0, 2.0
        self.lap = lap / dx**2
        self.inv_dx2 = 1.0 / dx**2
        self.window = folded_window_matrix(self.lam, n)


def folded_window_matrix(lam: float, n: int) -> np.ndarray:
    """Matrix of the window integral acting on half-period values.

    Row i gives ``(phi*F)(x_i)`` for the even periodic extension of F.
    """
    M = 2 * (n - 1)
    dx = lam / M
    w, m = window_weights(dx)
    c = np.zeros(M)
    np.add.at(c, np.arange(-m, m + 1) % M, w)
    idx = (np.arange(M)[None, :] - np.arange(n)[:, None]) % M
    full = c[idx]
    K = full[:, :n].copy()
    K[:, 1:n - 1] += full[:, n:][:, ::-1]
    return K


def _ops_cache():
    cache: dict = {}

    def get(lam, n):
        key = (float(lam), int(n))
        if key not in cache:
            if len(cache) > 8:
                cache.clear()
            cache[key] = _Operators(lam, n)
        return cache[key]
    return get


_get_ops = _ops_cache()


def residual(state: PeriodicState) -> np.ndarray:
    """``D F'' + F (1 - phi*F)`` on the half-period nodes."""
    if state.n < 64:
        raise ValueError("residual needs at least 64 half-period nodes")
    ops = _get_ops(state.lam, state.n)
    F = state.half_profile
    return state.D * _apply_lap(ops, F) - F * (ops.window @ (F - 1.0))


def _apply_lap(ops, F):
    out = np.empty_like(F)
    out[1:-1] = F[2:] - 2 * F[1:-1] + F[:-2]
    out[0] = 2 * (F[1] - F[0])
    out[-1] = 2 * (F[-2] - F[-1])
    return out * ops.inv_dx2


def _log_residual(ops, D, G):
    F = np.exp(G)
    LF = _apply_lap(ops, F)
    return D * LF / F - ops.window @ (F - 1.0), F, LF


def _log_jacobian(ops, D, F, LF):
    J = ops.window * (-F)[None, :]
    n = F.size
    i = np.arange(n)
    h2 = ops.inv_dx2
    J[i, i] += -2 * D * h2 - D * LF / F
    lo = np.where(i[1:] == n - 1, 2.0, 1.0)
    up = np.where(i[:-1] == 0, 2.0, 1.0)
    J[i[1:], i[:-1]] += D * h2 * lo * F[:-1] / F[1:]
    J[i[:-1], i[1:]] += D * h2 * up * F[1:] / F[:-1]
    return J


def newton(lam: float, D: float, F0, max_iter: int = 60,
           tol: float = RESIDUAL_TOL) -> PeriodicState:
    """Damped Newton from the half-period profile ``F0`` (any positive data).

    No check is made on the tongue or on triviality of the limit.
    """
    F0 = np.asarray(F0, dtype=float)
    if np.any(F0 <= 0):
        raise ValueError("seed must be positive")
    ops = _get_ops(lam, F0.size)
    G = np.log(F0)
    R, F, LF = _log_residual(ops, D, G)
    # Convergence is judged on the F-residual F * R.  Damping uses the
    # natural monotonicity test: a trial step is accepted when the simplified
    # Newton correction at the trial point is shorter than the step itself.
    # The factorisation is reused (chord steps) while that contraction is
    # fast.
    lu = None
    fresh = False
    for it in range(1, max_iter + 1):
        rf = float(np.max(np.abs(F * R)))
        if rf < tol:
            return PeriodicState(lam, D, F, it - 1, rf)
        if lu is None:
            try:
                lu = lu_factor(_log_jacobian(ops, D, F, LF), check_finite=False)
            except (ValueError, np.linalg.LinAlgError) as exc:
                raise SteadyStateError(f"singular Jacobian: {exc}", rf) from exc
            fresh = True
        step = lu_solve(lu, -R, check_finite=False)
        if not np.all(np.isfinite(step)):
            raise SteadyStateError("non-finite Newton step", rf)
        size = float(np.linalg.norm(step))
        # cap the step in log space to avoid overflow of exp
        big = float(np.max(np.abs(step)))
        scale = min(1.0, 2.0 / big) if big > 0 else 1.0
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            Gt = G + scale * step
            Rt, Ft, LFt = _log_residual(ops, D, Gt)
            if np.all(np.isfinite(Rt)):
                simple = float(np.linalg.norm(lu_solve(lu, -Rt, check_finite=False)))
                if simple <= (1.0 - 0.25 * scale) * size or simple < 1e-13 * np.sqrt(F.size):
                    accepted = True
                    break
            scale *= 0.5
        if not accepted:
            if not fresh:
                lu = None
                continue
            rt = float(np.max(np.abs(Ft * Rt))) if np.all(np.isfinite(Rt)) else math.inf
            if rt < tol:
                return PeriodicState(lam, D, Ft, it, rt)
            raise SteadyStateError(f"Newton stagnated, residual {rf:.3e}", rf)
        G, R, F, LF = Gt, Rt, Ft, LFt
        if scale < 1.0 or simple > 0.25 * size:
            lu = None
        fresh = False
    rf = float(np.max(np.abs(F * R)))
    if rf < tol:
        return PeriodicState(lam, D, F, max_iter, rf)
    raise SteadyStateError(f"Newton stagnated, residual {rf:.3e}", rf)


def is_trivial(state: PeriodicState) -> bool:
    return state.alpha < 10 * state.dx**2


def has_fundamental_shape(state: PeriodicState) -> bool:
    """Maximum at x = 0 and minimum at x = lam/2, as for a single hump per period.

    States of wavelength lam/2 (or shorter) from higher tongues are also
    lam-periodic and fail this test.
    """
    F = state.half_profile
    return int(np.argmax(F)) == 0 and int(np.argmin(F)) == F.size - 1


def default_nodes(lam: float, D: float) -> int:
    """Half-period node count resolving the inner scale ``sqrt(D)``."""
    dx = min(lam / 512, 0.2 * math.sqrt(D))
    return int(min(4001, max(65, math.ceil(0.5 * lam / dx) + 1)))


def _boundary_distance(lam, D, i):
    lm, lp = tongue_boundaries(i, D)
    return min(lam - lm, lp - lam), lp - lm


def seed_amplitude(lam: float, D: float, i: int) -> float:
    """Cosine amplitude following the square-root law near the tongue edges."""
    dist, width = _boundary_distance(lam, D, i)
    return float(min(0.5, 2.0 * math.sqrt(max(dist, 0.0) / width)))


def weakly_nonlinear_seed(lam: float, n: int, amplitude: float) -> np.ndarray:
    x = np.linspace(0.0, 0.5 * lam, n)
    return 1.0 + amplitude * np.cos(2 * math.pi * x / lam)


def _tongue_of(lam, D):
    pt = omega_membership(lam, D)
    if pt.tongue_index is None:
        raise NotInTongueError(f"(lambda, D) = ({lam}, {D}) lies in no tongue")
    return pt.tongue_index


def _check_nontrivial(state):
    if is_trivial(state):
        raise TrivialStateError("trivial attractor; refine seed", state.residual_norm)
    if not has_fundamental_shape(state):
        raise SteadyStateError("converged to a state of shorter period", state.residual_norm)
    return state


def solve_at(lam: float, D: float, seed=WEAKLY_NONLINEAR, n: int | None = None) -> PeriodicState:
    """Nontrivial steady state at ``(lam, D)`` inside a tongue.

    ``seed`` is ``WEAKLY_NONLINEAR`` or a :class:`PeriodicState` whose
    half profile is reused (resampled on the new node count if needed).
    Deep inside a tongue the weakly nonlinear seed may be drawn to F = 1; in
    that case the state is reached by :func:`solve_by_continuation`.
    """
    i = _tongue_of(lam, D)
    if n is None:
        n = seed.n if isinstance(seed, PeriodicState) else default_nodes(lam, D)
    if isinstance(seed, PeriodicState):
        F0 = _resample(seed.half_profile, n)
    else:
        a0 = seed_amplitude(lam, D, i)
        err = None
        for mult in (1.0, 2.0, 4.0, 0.5):
            F0 = weakly_nonlinear_seed(lam, n, min(0.9, mult * a0))
            try:
                return _check_nontrivial(newton(lam, D, F0))
            except SteadyStateError as exc:
                err = exc
        if delta_of(2 * math.pi / lam) * 0.9 <= D:
            raise err
        return solve_by_continuation(lam, D, n=n)
    return _check_nontrivial(newton(lam, D, F0))


def _resample(F, n):
    if F.size == n:
        return F.copy()
    s_old = np.linspace(0.0, 1.0, F.size)
    s_new = np.linspace(0.0, 1.0, n)
    # interpolate the logarithm: the profile spans many decades
    return np.exp(np.interp(s_new, s_old, np.log(F)))


def solve_by_continuation(lam: float, D: float, n: int | None = None,
                          start_fraction: float = 0.9, factor: float = 0.5,
                          min_factor: float = 0.99, seed_tol: float = 1e-8) -> PeriodicState:
    """Solve at ``(lam, D)`` by stepping D down from near the tongue boundary.

    Starts at ``start_fraction * D_b`` with ``D_b = Delta(2 pi / lam)`` the
    bifurcation value at this wavelength, from the weakly nonlinear seed, and
    reduces D geometrically by ``factor`` (relaxed towards 1 on failure,
    tightened after easy steps).  Intermediate states only serve as seeds and
    are converged to ``seed_tol``; on fine grids at large D the round-off
    floor of the residual sits above the final tolerance.
    """
    i = _tongue_of(lam, D)
    if n is None:
        n = default_nodes(lam, D)
    D_b = delta_of(2 * math.pi / lam)
    D_cur = start_fraction * D_b
    if D_cur <= D:
        return solve_at(lam, D, n=n)
    amp = min(0.5, 2.0 * math.sqrt(1.0 - start_fraction))
    state = _check_nontrivial(newton(lam, D_cur, weakly_nonlinear_seed(lam, n, amp),
                                     tol=seed_tol))
    f = factor
    while D_cur > D:
        D_next = max(D, D_cur * f)
        try:
            tol = RESIDUAL_TOL if D_next == D else seed_tol
            trial = _check_nontrivial(newton(lam, D_next, state.half_profile, tol=tol))
        except SteadyStateError:
            f = math.sqrt(f)
            if f > min_factor:
                raise
            continue
        state, D_cur = trial, D_next
        f = max(0.1, f * f) if trial.newton_iters <= 5 else f
    log.debug("continuation in D reached (%g, %g) with i=%d", lam, D, i)
    return state


def _march_to_edge(state, edge, D, n, alpha_stop, ratio, max_steps):
    """Approach a tongue edge geometrically from a converged state.

    Small-amplitude seeds are predicted from the square-root law; the
    distance ratio is relaxed towards 1 whenever a step fails.
    """
    out = []
    prev = state
    r = ratio
    while len(out) < max_steps and r < 0.95:
        dist = (prev.lam - edge) * r
        F = prev.half_profile
        seed = 1.0 + (F - 1.0) * math.sqrt(r) if prev.alpha < 0.5 else F
        try:
            st = _check_nontrivial(newton(edge + dist, D, seed))
        except SteadyStateError:
            r = math.sqrt(r)
            continue
        out.append(BranchPoint(st.lam, D, st.alpha, st.u_max, True, st.newton_iters))
        prev = st
        if st.alpha < alpha_stop:
            break
        r = ratio if st.alpha < 0.5 else max(r, 0.5)
    return out


def continue_branch(i: int, D: float, lam_steps: int = 200, n: int | None = None,
                    end_offset: float = 0.5, alpha_stop: float = 0.01,
                    edge_ratio: float = 0.25, edge_steps: int = 40) -> list[BranchPoint]:
    """Natural continuation in lambda across tongue ``i`` at fixed D.

    The uniform march starts ``end_offset`` steps inside ``lambda_i^-`` and
    stops the same distance short of ``lambda_i^+``; the step is the tongue
    width over ``lam_steps`` and is halved on failure.  From the outermost
    converged points the distance to each edge is then reduced by
    ``edge_ratio`` per step until ``alpha < alpha_stop``: at small D the
    square-root regime is far narrower than one step.  Points are returned
    in increasing lambda.
    """
    if not D < threshold(i):
        raise TongueClosedError(f"tongue {i} closed: D >= Delta_{i}")
    lm, lp = tongue_boundaries(i, D)
    width = lp - lm
    h0 = width / lam_steps
    if n is None:
        n = default_nodes(0.5 * (lm + lp), D)
    lam_end = lp - end_offset * h0
    points: list[BranchPoint] = []
    states: list[PeriodicState] = []
    prev: PeriodicState | None = None
    base = lm + end_offset * h0
    h = h0
    lam = base
    while lam <= lam_end + 1e-12 * width:
        try:
            seed = prev if prev is not None else WEAKLY_NONLINEAR
            st = solve_at(lam, D, seed=seed, n=n)
            if prev is not None and abs(st.alpha - prev.alpha) > 0.5 * max(prev.alpha, 0.1):
                raise SteadyStateError("amplitude jump; step too large")
        except (SteadyStateError, NotInTongueError) as exc:
            if prev is not None and h > h0 / 64:
                h *= 0.5
                lam = prev.lam + h
                continue
            points.append(BranchPoint(lam, D, converged=False, error=str(exc)))
            prev = None
            base += h0
            lam, h = base, h0
            continue
        points.append(BranchPoint(lam, D, st.alpha, st.u_max, True, st.newton_iters))
        states.append(st)
        prev = st
        if abs(lam - base) < 1e-12 * width or h == h0:
            base = lam
        h = min(h0, 2 * h)
        lam = lam + h
    if states:
        left = _march_to_edge(states[0], lm, D, n, alpha_stop, edge_ratio, edge_steps)
        right = _march_to_edge(states[-1], lp, D, n, alpha_stop, edge_ratio, edge_steps)
        points = left[::-1] + points + right
    return points


def spike_scaling(D_list, lam_bar: float = 10.0, n: int | None = None):
    """Rows ``(D, lam, u_max, u_max * sqrt(D))`` along ``lam = 1/2 + lam_bar sqrt(D)``."""
    rows = []
    for D in D_list:
        lam = 0.5 + lam_bar * math.sqrt(D)
        if n is None:
            nn = int(min(4001, max(129, math.ceil(0.5 * lam / (0.05 * math.sqrt(D))) + 1)))
        else:
            nn = n
        st = solve_by_continuation(lam, D, n=nn)
        rows.append((D, lam, st.u_max, st.u_max * math.sqrt(D)))
    return rows


def end_slopes(state: PeriodicState) -> tuple[float, float]:
    """Centred slopes at ``x = 0`` and ``x = lam/2`` of the periodic extension."""
    x, F = state.full_period()
    M = F.size - 1  # last node repeats the first one a period later
    per = F[:M]
    c = M // 2  # node at x = 0
    left = (per[(c + 1) % M] - per[c - 1]) / (2 * state.dx)
    right = (per[(2 * c + 1) % M] - per[(2 * c - 1) % M]) / (2 * state.dx)
    return float(left), float(right)


def fit_edge_exponent(points, edge: float, alpha_max: float = 0.2) -> tuple[float, float]:
    """Least-squares ``(p, C)`` in ``alpha = C |lam - edge|^p`` over small-amplitude points."""
    lam = np.array([p.lam for p in points if p.converged and p.alpha < alpha_max])
    a = np.array([p.alpha for p in points if p.converged and p.alpha < alpha_max])
    if lam.size < 3:
        raise ValueError("need at least 3 small-amplitude points near the edge")
    p, c = np.polyfit(np.log(np.abs(lam - edge)), np.log(a), 1)
    return float(p), float(math.exp(c))
