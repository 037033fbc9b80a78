"""Permanent-form fronts connecting u = 1 (rear) to u = 0 (ahead).

In the moving frame ``z = x - v t`` the profile solves

    D u'' + v u' + u (1 - int_{z-1/2}^{z+1/2} u) = 0,   u(-inf) = 1, u(+inf) = 0.

The rear tail ``u = 1 + e^{sigma z}`` is governed by the characteristic
function ``D s^2 + 2 sqrt(D) s - (2/s) sinh(s/2)`` whose roots ``sigma_n(D)``
start at ``2 n pi i`` for small D.  The pair ``sigma_{+-1}`` meets on the
positive real axis at ``(sigma_+, D_+)``, separating oscillatory from monotone
rear tails; ``sigma_{+-2}`` meets on the negative real axis.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ._newton import NewtonError, damped_newton
from .kernel import window_weights

SERIES_CUTOFF = 1e-3
PATH_TOL = 1e-12


class TravelWaveError(RuntimeError):
    pass


class BranchJumpError(TravelWaveError):
    pass


class TailClass(Enum):
    OSCILLATORY = "oscillatory"
    MONOTONE = "monotone"


# --- characteristic function -------------------------------------------------

def _shc(s):
    """``(2/s) sinh(s/2)`` and its derivative, by series near 0."""
    if abs(s) < SERIES_CUTOFF:
        s2 = s * s
        return 1 + s2 / 24 + s2 * s2 / 1920, s / 12 + s * s2 / 480
    sh, ch = cmath.sinh(s / 2), cmath.cosh(s / 2)
    return 2 * sh / s, ch / s - 2 * sh / (s * s)


def char_residual(sigma, D: float):
    """``D s^2 + 2 sqrt(D) s - (2/s) sinh(s/2)`` at ``s = sigma``."""
    g, _ = _shc(complex(sigma))
    r = D * sigma * sigma + 2 * math.sqrt(D) * sigma - g
    return r if isinstance(sigma, complex) else r.real


def scaled_residual(sigma, D: float) -> float:
    """``|f|`` divided by ``max(1, largest term of f)``."""
    s = complex(sigma)
    g, _ = _shc(s)
    a, b = D * s * s, 2 * math.sqrt(D) * s
    return abs(a + b - g) / max(1.0, abs(a), abs(b), abs(g))


def _char_and_derivs(s: complex, D: float):
    g, gp = _shc(s)
    rD = math.sqrt(D)
    f = D * s * s + 2 * rD * s - g
    f_s = 2 * D * s + 2 * rD - gp
    f_D = s * s + s / rD
    return f, f_s, f_D


def _root_newton(s: complex, D: float, tol: float = PATH_TOL, max_iter: int = 40):
    for _ in range(max_iter):
        f, f_s, _ = _char_and_derivs(s, D)
        ds = -f / f_s
        s += ds
        if abs(ds) <= tol * max(1.0, abs(s)):
            if scaled_residual(s, D) < 1e-10:
                return s
    raise TravelWaveError(f"root Newton failed at D={D}")


def _double_root(seed: tuple[float, float], tol: float = 1e-13, max_iter: int = 50):
    """Real ``(sigma, D)`` where the characteristic function has a double root.

    Newton on ``D s^3 + 2 sqrt(D) s^2 - 2 sinh(s/2) = 0`` and its s-derivative
    ``3 D s^2 + 4 sqrt(D) s - cosh(s/2) = 0``.
    """
    s, D = map(float, seed)
    for _ in range(max_iter):
        if D <= 0:
            raise TravelWaveError("double-root Newton left D > 0")
        r = math.sqrt(D)
        F = np.array([D * s**3 + 2 * r * s**2 - 2 * math.sinh(s / 2),
                      3 * D * s**2 + 4 * r * s - math.cosh(s / 2)])
        J = np.array([[3 * D * s**2 + 4 * r * s - math.cosh(s / 2), s**3 + s**2 / r],
                      [6 * D * s + 4 * r - 0.5 * math.sinh(s / 2), 3 * s**2 + 2 * s / r]])
        ds, dD = np.linalg.solve(J, -F)
        s, D = s + ds, D + dD
        if abs(ds) < tol * abs(s) and abs(dD) < tol * D:
            return s, D
    raise TravelWaveError("double-root Newton diverged")


def find_oscillation_threshold(seed: tuple[float, float] = (4.4, 0.028)) -> tuple[float, float]:
    """``(sigma_+, D_+)``: where ``sigma_1`` and ``sigma_-1`` meet on the real axis."""
    s, D = _double_root(seed)
    if not s > 0:
        raise TravelWaveError("threshold Newton converged to a negative root")
    return s, D


_COLLISION_SEEDS = {1: (4.4, 0.028), 2: (-8.1, 0.225)}
_collisions: dict[int, tuple[float, float]] = {}


def collision_point(m: int) -> tuple[float, float]:
    """Real double root reached by the pair ``sigma_{+-m}``, m in {1, 2}."""
    if m not in _collisions:
        _collisions[m] = _double_root(_COLLISION_SEEDS[m])
    return _collisions[m]


def small_D_root(n: int, D: float) -> complex:
    """Two-term expansion ``2 n pi i - (-1)^n 8 n^2 pi^2 sqrt(D)``."""
    return complex(-((-1) ** n) * 8 * n * n * math.pi**2 * math.sqrt(D), 2 * n * math.pi)


# --- root paths --------------------------------------------------------------

@dataclass
class ComplexRootPath:
    n: int
    D: np.ndarray
    sigma: np.ndarray

    def residuals(self) -> np.ndarray:
        """Scaled residuals, see :func:`scaled_residual`."""
        return np.array([scaled_residual(s, d) for s, d in zip(self.sigma, self.D)])

    def rows(self):
        for d, s in zip(self.D, self.sigma):
            yield self.n, float(d), float(s.real), float(s.imag)


def _collision_seed(n: int, D: float) -> complex:
    """Root of the local quadratic ``f_ss d^2 / 2 + f_D (D - D_c) = 0``."""
    s_c, D_c = collision_point(abs(n))
    _, _, f_D = _char_and_derivs(complex(s_c), D_c)
    g, gp = _shc(complex(s_c))
    h = 1e-4 * abs(s_c)
    f_ss = (_char_and_derivs(complex(s_c + h), D_c)[1] - _char_and_derivs(complex(s_c - h), D_c)[1]) / (2 * h)
    d = cmath.sqrt(-2 * f_D * (D - D_c) / f_ss)
    if D < D_c:
        d = complex(d.real, abs(d.imag)) if n > 0 else complex(d.real, -abs(d.imag))
        return s_c + d
    # after the collision the roots are real: sigma_1 is the smaller of the
    # positive pair, sigma_2 the one nearer zero of the negative pair
    d = abs(d)
    return s_c + (-d if n == 1 or n == -2 else d)


def _advance(n: int, s: complex, D0: float, D1: float, max_halvings: int = 40) -> complex:
    """Tangent-predictor continuation of one root from D0 to D1."""
    D = D0
    h = D1 - D0
    fails = 0
    while D < D1:
        h = min(h, D1 - D)
        _, f_s, f_D = _char_and_derivs(s, D)
        slope = -f_D / f_s
        pred = s + h * slope
        try:
            new = _root_newton(pred, D + h)
            ok = abs(new - s) <= 10 * abs(h * slope) + 1e-12 * max(1.0, abs(s))
        except (TravelWaveError, OverflowError):
            ok = False
        if ok:
            s, D = new, D + h
            if fails == 0:
                h *= 2
            fails = 0
        else:
            h *= 0.5
            fails += 1
            if fails > max_halvings:
                raise BranchJumpError(f"branch jump for n={n} near D={D:.6g}: refine D grid")
    return s


def sigma_path(n: int, D_grid, collision_window: float = 1e-2) -> ComplexRootPath:
    """Follow ``sigma_n(D)`` along an increasing ``D_grid`` from small D.

    For ``|n| <= 2`` the root meets its partner on the real axis; samples
    within ``collision_window`` (relative) of that point are seeded from the
    local square-root expansion instead of continuation.
    """
    if n == 0:
        raise ValueError("n must be a nonzero integer")
    D_grid = np.asarray(D_grid, dtype=float)
    if np.any(D_grid <= 0) or np.any(np.diff(D_grid) <= 0):
        raise ValueError("D_grid must be positive and strictly increasing")
    m = abs(n)
    D_c = collision_point(m)[1] if m <= 2 else math.inf
    out = np.empty(D_grid.size, dtype=complex)
    s = _root_newton(small_D_root(n, D_grid[0]), D_grid[0])
    if abs(s - small_D_root(n, D_grid[0])) > 0.5:
        raise TravelWaveError("D_grid must start closer to 0")
    D = D_grid[0]
    out[0] = s
    lo, hi = D_c * (1 - collision_window), D_c * (1 + collision_window)
    for j in range(1, D_grid.size):
        target = D_grid[j]
        if D < lo < target:
            s = _advance(n, s, D, lo)
            D = lo
            if abs(s - D_c_root(n, lo)) > 1e-6 * abs(s):
                raise BranchJumpError(f"branch jump for n={n} entering the collision: refine D grid")
        if lo <= target <= hi:
            s, D = D_c_root(n, target), target
        elif D <= hi < target:
            s, D = D_c_root(n, hi), hi
        if target > D:
            s = _advance(n, s, D, target)
            D = target
        out[j] = s
    return ComplexRootPath(n, D_grid, out)


def D_c_root(n: int, D: float) -> complex:
    """``sigma_n(D)`` near the collision of the pair ``+-n`` (|n| <= 2)."""
    s_c, D_c = collision_point(abs(n))
    if abs(D - D_c) <= 1e-13 * D_c:
        return complex(s_c)
    s = _root_newton(_collision_seed(n, D), D)
    if D > D_c:
        s = complex(s.real, 0.0)
    return s


def sigma_root(n: int, D: float, samples: int = 200) -> complex:
    """``sigma_n(D)`` at a single D, by continuation from ``D = 1e-8``."""
    if D <= 1e-8:
        return _root_newton(small_D_root(n, D), D)
    grid = np.geomspace(1e-8, D, samples)
    return complex(sigma_path(n, grid).sigma[-1])


# --- front decay ahead -------------------------------------------------------

def front_decay_rates(v: float, D: float) -> tuple[float, float]:
    """``(lambda_+, lambda_-)``, roots of ``D l^2 + v l + 1 = 0``.

    Both are negative; at ``v = 2 sqrt(D)`` they coincide at ``-1/sqrt(D)``.
    """
    if D <= 0:
        raise ValueError("D must be positive")
    disc = v * v - 4 * D
    if disc < -1e-14 * v * v:
        raise TravelWaveError("no positive front solution: v < 2 sqrt(D)")
    r = math.sqrt(max(disc, 0.0))
    return -(v + r) / (2 * D), -(v - r) / (2 * D)


# --- the front BVP -----------------------------------------------------------

@dataclass
class TWProfile:
    D: float
    v: float
    z: np.ndarray
    u: np.ndarray
    tail_class: TailClass
    a: float
    b: float
    lambda_pm: tuple[float, float]
    shift: float
    ambiguous: bool = False
    fit_ratio: float = math.nan
    A_inf: float = math.nan
    phi_inf: float = math.nan
    newton_iters: int = 0
    history: list = field(default_factory=list)

    def fitted_front_decay(self) -> float:
        """Log-linear slope of the linear leading edge ``[1/2, L_p]``, fitted
        over its middle half.

        The cut-off edge is ``e^{lambda z}`` times an envelope vanishing at
        both ends of that interval and symmetric about its middle, so a
        centred window sees no net slope from it.
        """
        a, b = 0.5, self.z[-1]
        m = (self.z >= a + 0.25 * (b - a)) & (self.z <= a + 0.75 * (b - a))
        if m.sum() < 5:
            raise TravelWaveError("front tail not resolved")
        return float(np.polyfit(self.z[m], np.log(self.u[m]), 1)[0])


def default_tw_grid(D: float) -> tuple[float, float, float]:
    """``(L_m, L_p, h)``: spacing ``sqrt(D)/10`` capped at 0.01.

    The window reaches half a unit ahead of the front, so the linear leading
    edge starts near ``z = 1/2``; ``L_p = 1/2 + 25 sqrt(D)`` keeps it above
    ~1e-13, clear of round-off.
    """
    rD = math.sqrt(D)
    return 12.0, 0.5 + 25 * rD, min(0.01, rD / 10)


def _tw_operators(D, h, N, w, m, edge_rate=None):
    """Pieces of the discrete front equation on nodes 1..N-1.

    Five-point fourth-order differences; ghost values mirror oddly about the
    end values (``u_{-1} = 2 u_0 - u_1``, ``u_{N+1} = -u_{N-1}``).  With
    ``edge_rate`` the right end instead continues the last interior value as
    ``e^{edge_rate z}``, so ``u_N`` and ``u_{N+1}`` are multiples of
    ``u_{N-1}``.  Returns
    the difference matrices, their columns for ``u_0``, the window matrix and
    the window contribution of ``u = 1`` at and behind the left end.
    """
    ni = N - 1

    def five(c):
        A = sp.diags([np.full(ni - abs(k), c[k + 2]) for k in range(-2, 3)],
                     list(range(-2, 3)), format="lil")
        A[0, 0] = c[2] - c[0]
        if edge_rate is None:
            A[ni - 1, ni - 1] = c[2] - c[4]
        else:
            g = math.exp(edge_rate * h)
            A[ni - 1, ni - 1] = c[2] + c[3] * g + c[4] * g * g
            A[ni - 2, ni - 1] = c[3] + c[4] * g
        b = np.zeros(ni)
        b[0], b[1] = c[1] + 2 * c[0], c[0]
        return A.tocsr(), b

    T2, b2 = five(np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / (12 * h**2))
    T1, b1 = five(np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12 * h))
    K = sp.diags([np.full(ni - abs(k), w[k + m]) for k in range(-m, m + 1)],
                 list(range(-m, m + 1)), format="csr")
    j = np.arange(1, N)
    cw = np.concatenate([[0.0], np.cumsum(w)])  # cw[q] = sum of w[:q]
    kb = cw[np.clip(m - j + 1, 0, 2 * m + 1)]
    return T2, T1, b2, b1, K, kb


def _tw_seed(z, D, L_p):
    """tanh front at 0 whose leading edge vanishes linearly at ``L_p``."""
    u = 0.5 * (1 - np.tanh(z / (2 * math.sqrt(D))))
    return u * np.clip((L_p - z) / L_p, 0.0, 1.0) ** (z > 0)


def cutoff_speed(D: float, L_p: float) -> float:
    """Speed of a pulled front whose leading edge is cut off at distance L_p.

    The edge ``e^{-v z / 2D} sin(k (L_p - z))`` stays positive for
    ``k = pi / L_p``, so ``v = 2 sqrt(D) sqrt(1 - D k^2)``.
    """
    k = math.pi / L_p
    return 2 * math.sqrt(D) * math.sqrt(max(1 - D * k * k, 0.0))


def _fit_rear_tail(z, u, stride_len: float = 0.2, z_hi: float = -2.0, floor: float = 1e-11):
    """Prony fits of ``1 - u`` on the rear tail.

    One-term ``y_{k+1} = c y_k`` against two-term
    ``y_{k+2} = c1 y_{k+1} + c0 y_k`` on samples spaced ``stride_len``
    between ``z_hi`` and the last point where ``|1 - u|`` is above the
    absolute round-off ``floor``.  Equations are scaled by the local
    magnitude so every decade counts.  Returns ``(rates, one_term_rate,
    ratio)``; ratio is the factor by which the two-term fit reduces the
    residual.
    """
    h = z[1] - z[0]
    stride = max(1, int(round(stride_len / h)))
    y = 1.0 - u
    above = np.nonzero((np.abs(y) > floor) & (z >= z[0] + 1.0))[0]
    if above.size == 0:
        raise TravelWaveError("rear tail below round-off")
    top = int(np.searchsorted(z, z_hi, side="right")) - 1
    idx = np.arange(top, above[0] - 1, -stride)[::-1]
    ys = y[idx]
    if ys.size < 6:
        raise TravelWaveError("rear tail not resolved")
    dt = stride * h
    s1 = np.abs(ys[:-1]) + np.abs(ys[1:])
    c = np.sum(ys[:-1] * ys[1:] / s1**2) / np.sum(ys[:-1] ** 2 / s1**2)
    r1 = (ys[1:] - c * ys[:-1]) / s1
    s2 = np.abs(ys[:-2]) + np.abs(ys[1:-1]) + np.abs(ys[2:])
    A = np.column_stack([ys[1:-1], ys[:-2]]) / s2[:, None]
    coef, *_ = np.linalg.lstsq(A, ys[2:] / s2, rcond=None)
    r2 = ys[2:] / s2 - A @ coef
    n1, n2 = np.sqrt(np.mean(r1**2)), np.sqrt(np.mean(r2**2))
    roots = np.roots([1.0, -coef[0], -coef[1]])
    rates = np.log(roots.astype(complex)) / dt
    one = math.log(abs(c)) / dt if c != 0 else math.nan
    return rates, one, n1 / max(n2, 1e-300)


def tail_constants(z, u, a: float, b: float, z_hi: float = -2.0, floor: float = 1e-11):
    """``(A, phi)`` in ``1 - u ~ A e^{a z} cos(b z + phi)`` (``phi = 0`` when b = 0)."""
    y = 1.0 - u
    m = (z <= z_hi) & (np.abs(y) > floor)
    zz, yy = z[m], y[m] * np.exp(-a * z[m])
    if b == 0.0:
        return float(np.mean(yy)), 0.0
    P, Q = np.linalg.lstsq(np.column_stack([np.cos(b * zz), np.sin(b * zz)]), yy, rcond=None)[0]
    A = math.hypot(P, Q)
    return A, math.atan2(-Q, P) % (2 * math.pi)


def classify_tail(z, u, ratio_min: float = 10.0):
    """``(tail_class, a, b, ratio, ambiguous)`` from the rear tail of a front."""
    rates, one, ratio = _fit_rear_tail(z, u)
    complex_pair = abs(rates[0].imag) > 1e-8 and abs(rates[0].imag) < math.pi / (z[1] - z[0])
    if complex_pair and ratio >= ratio_min:
        r = rates[np.argmax(rates.imag)]
        return TailClass.OSCILLATORY, float(r.real), float(r.imag), ratio, False
    ambiguous = complex_pair and ratio > 0.5 * ratio_min
    return TailClass.MONOTONE, one, 0.0, ratio, ambiguous


def _pseudo_transient(residual, jacobian, x, n_dyn, dtau=0.05, switch=1e-6,
                      max_steps=1000, growth=1.5):
    """Implicit pseudo-time steps of ``u_t = R(u)`` with the constraint rows
    held algebraic; the step grows as the residual falls.  Returns once the
    residual is below ``switch``, handing over to Newton."""
    mass = sp.diags(np.r_[np.ones(n_dyn), np.zeros(x.size - n_dyn)], format="csc")
    r = residual(x)
    rn = float(np.max(np.abs(r[:n_dyn])))
    for _ in range(max_steps):
        if rn < switch:
            break
        dx = splu((mass / dtau - jacobian(x)).tocsc(), permc_spec="NATURAL").solve(r)
        x = x + dx
        r = residual(x)
        rn_new = float(np.max(np.abs(r[:n_dyn])))
        dtau = min(dtau * max(0.5, min(rn / max(rn_new, 1e-300), growth)), 1e12)
        rn = rn_new
    return x


PTC_MIN_D = 0.004


def _seed_from(profile: TWProfile, z, D):
    """Profile at a nearby D, with the leading edge stretched by ``sqrt(D ratio)``."""
    s = math.sqrt(profile.D / D)
    zz = np.where(z > 0, z * s, z)
    return np.interp(zz, profile.z, profile.u, left=1.0, right=0.0), profile.v / s


def solve_tptw(D: float, v: float | None = None, L_m: float | None = None,
               L_p: float | None = None, n: int | None = None, tol: float = 1e-11,
               seed: TWProfile | None = None) -> TWProfile:
    """Front on ``[-L_m, L_p]`` with ``u(-L_m) = 1``, ``u(L_p) = 0``.

    The window sees ``u = 1`` behind and ``u = 0`` ahead of the domain.  A
    phase condition ``u(0) = 1/2`` removes translations.  With ``v = None``
    the speed is an unknown: a pulled front cut off at ``L_p`` travels
    slightly below ``2 sqrt(D)`` and at fixed minimal speed it would slide
    onto the left end.  The selected speed is ``2 sqrt(D) (1 - O(D / L_p^2))``.
    With ``v`` given the right end carries the slow decay ``e^{lambda_- z}``
    of a front at that speed instead of ``u = 0``; the speed stays an unknown
    of the phase-fixed problem and comes out at ``v`` up to the truncation
    error, which is what the returned ``v`` reports.

    From the cut-off seed, pseudo-time steps bring the iterate close before
    Newton.  Below ``PTC_MIN_D`` (near and under the threshold where u = 1
    turns unstable) the pseudo-time flow drifts off towards patterns, so the
    front is continued in D from ``PTC_MIN_D`` by Newton alone; ``seed``
    starts that from a given profile.
    """
    if not D > 0:
        raise ValueError("D must be positive")
    rD = math.sqrt(D)
    lam = front_decay_rates(2 * rD if v is None else v, D)
    dL_m, dL_p, dh = default_tw_grid(D)
    L_m = dL_m if L_m is None else float(L_m)
    L_p = dL_p if L_p is None else float(L_p)
    if L_m < 10:
        raise ValueError("L_m must be at least 10")
    if L_p < 18.5 * rD:
        raise ValueError("L_p too short for the front decay to reach 1e-8")
    if seed is None and D < PTC_MIN_D:
        seed = _continue_down(D)
    h = dh if n is None else (L_m + L_p) / (n - 1)
    # put a node exactly at z = 0 for the phase condition
    j0 = int(round(L_m / h))
    h = L_m / j0
    N = j0 + int(round(L_p / h))
    z = h * (np.arange(N + 1) - j0)
    w, m = window_weights(h, 0.5)
    edge = None if v is None else lam[1]
    T2, T1, b2, b1, K, kb = _tw_operators(D, h, N, w, m, edge)
    ni = N - 1
    p = j0 - 1  # index of z = 0 among the interior unknowns
    e_p = sp.csr_matrix(([1.0], ([0], [p])), shape=(1, ni))

    def split(x):
        return x[:ni], x[ni], 1.0

    def residual(x):
        ui, vv, u0 = split(x)
        r = D * (T2 @ ui + b2 * u0) + vv * (T1 @ ui + b1 * u0) + ui * (1.0 - K @ ui - kb)
        return np.append(r, ui[p] - 0.5)

    def jacobian(x):
        ui, vv, u0 = split(x)
        J = D * T2 + vv * T1 + sp.diags(1.0 - K @ ui - kb) - sp.diags(ui) @ K
        extra = T1 @ ui + b1 * u0
        return sp.bmat([[J, sp.csr_matrix(extra[:, None])], [e_p, None]], format="csc")

    def factor(x):
        return splu(jacobian(x), permc_spec="NATURAL").solve

    if seed is None:
        if edge is None:
            u_seed = _tw_seed(z[1:-1], D, L_p)
        else:
            u_seed = 1.0 / (1.0 + np.exp(-edge * z[1:-1]))
        x = np.append(u_seed, cutoff_speed(D, L_p) if v is None else v)
        x = _pseudo_transient(residual, jacobian, x, ni)
    else:
        us, vs = _seed_from(seed, z, D)
        x = np.append(us[1:-1], vs if v is None else v)
    try:
        x, its, hist = damped_newton(residual, factor, x, tol=tol, max_iter=100)
    except NewtonError as exc:
        raise TravelWaveError(f"front Newton failed at D={D}: {exc}") from exc
    ui, vv, u0 = split(x)
    u_end = 0.0 if edge is None else ui[-1] * math.exp(edge * h)
    u = np.concatenate([[u0], ui, [u_end]])
    if ui.min() <= 0:
        raise TravelWaveError(f"front profile at D={D} lost positivity")
    tail, a, b, ratio, amb = classify_tail(z, u)
    if amb:
        warnings.warn(f"rear tail classification at D={D} is ambiguous (ratio {ratio:.3g})")
    A, phi = tail_constants(z, u, a, b)
    return TWProfile(D, float(vv), z, u, tail, a, b, lam, 0.0, amb, ratio, A, phi,
                     newton_iters=its, history=hist)


def _continue_down(D: float, ratio: float = 0.7) -> TWProfile:
    """Free-speed front at a D just above ``D``, reached by Newton steps in D
    from ``PTC_MIN_D``; the step ratio is relaxed towards 1 on failure."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        prof = solve_tptw(PTC_MIN_D)
        while prof.D / ratio > D and prof.D * ratio > D:
            target = max(prof.D * ratio, D / ratio)
            try:
                prof = solve_tptw(target, seed=prof)
            except TravelWaveError:
                ratio = math.sqrt(ratio)
                if ratio > 0.98:
                    raise
    return prof


def front_mismatch(x, u, profile: TWProfile, behind: float = 5.0) -> float:
    """Max-norm gap between an evolved front ``(x, u)`` and ``profile``.

    The profile is shifted so both cross 1/2 at the same place and compared
    on ``x - x_half > -behind`` (the last node is skipped: it carries the
    boundary condition of the evolution).
    """
    from .evolve import front_position
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    xf = front_position(x, u)
    if not math.isfinite(xf):
        raise TravelWaveError("evolved state has no front")
    s = x - xf
    ref = np.interp(s, profile.z, profile.u, left=1.0, right=0.0)
    m = s > -behind
    m[-1] = False
    return float(np.max(np.abs(u - ref)[m]))
