"""Linear stability of the equilibria u=0 and u=1 and the bifurcation tongues.

Perturbations ``exp(i k x - w t)`` about u=0 and u=1 obey

    w0(k) = D k^2 - 1
    w1(k) = D k^2 + (2/k) sin(k/2) = k^2 (D - Delta(k))

with ``Delta(X) = -(2/X^3) sin(X/2)``.  Steady periodic states of wavelength
``lam`` bifurcate from u=1 where ``D = Delta(2 pi / lam)``; the sets of
``(lam, D)`` under each hump of that curve are the tongues Omega_i.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

ROOT_TOL = 1e-14


class StableEquilibriumError(ValueError):
    pass


class TongueClosedError(ValueError):
    pass


@dataclass(frozen=True)
class DispersionPoint:
    k: float
    w: float


@dataclass(frozen=True)
class OmegaPoint:
    lam: float
    D: float
    tongue_index: int | None = None


@dataclass
class TongueAtlas:
    """Boundary curves of the first few tongues sampled on a D-grid.

    ``curves[i]`` is an array with columns ``D, lambda_minus, lambda_plus``.
    """

    thresholds: dict[int, float] = field(default_factory=dict)
    argmax: dict[int, float] = field(default_factory=dict)
    curves: dict[int, np.ndarray] = field(default_factory=dict)

    def rows(self):
        for i in sorted(self.curves):
            for D, lm, lp in self.curves[i]:
                yield (i, D, lm, lp, self.thresholds[i], self.argmax[i])


def _newton_polish(f, fp, x, n=3):
    for _ in range(n):
        d = fp(x)
        if d == 0:
            break
        step = f(x) / d
        if not math.isfinite(step) or abs(step) > 1e-6 * max(1.0, abs(x)):
            break
        x -= step
    return x


def _root(f, a, b, fp=None):
    x = brentq(f, a, b, xtol=ROOT_TOL * max(1.0, abs(a)), rtol=4 * np.finfo(float).eps,
               maxiter=500)
    if fp is not None:
        y = _newton_polish(f, fp, x)
        if a <= y <= b and abs(f(y)) <= abs(f(x)):
            x = y
    return x


def delta_of(X):
    """``Delta(X) = -(2/X^3) sin(X/2)`` for ``X > 0``."""
    Xa = np.asarray(X, dtype=float)
    if np.any(Xa <= 0):
        raise ValueError("Delta(X) is defined for X > 0 only")
    out = -2.0 * np.sin(0.5 * Xa) / Xa**3
    return float(out) if out.ndim == 0 else out


def delta_prime(X):
    X = np.asarray(X, dtype=float)
    return 6.0 * np.sin(0.5 * X) / X**4 - np.cos(0.5 * X) / X**3


def turning_point(n: int) -> float:
    """The unique stationary point ``delta_n`` of Delta in ``(2 n pi, 2 (n+1) pi)``.

    Stationary points satisfy ``6 sin(X/2) = X cos(X/2)``; the root lies in
    the first half of the interval, where ``tan(X/2)`` runs from 0 to infinity.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    g = lambda X: 6.0 * math.sin(0.5 * X) - X * math.cos(0.5 * X)
    gp = lambda X: 2.0 * math.cos(0.5 * X) + 0.5 * X * math.sin(0.5 * X)
    return _root(g, 2 * n * math.pi, (2 * n + 1) * math.pi, gp)


def delta_extrema(r_max: int) -> list[tuple[float, float]]:
    """Turning points ``(delta_n, Delta(delta_n))`` for ``n = 1..2*r_max``.

    Odd ``n`` are maxima, so ``Delta_r`` is entry ``2r-2`` of the list.
    """
    if r_max < 1:
        raise ValueError("r_max must be >= 1")
    out = []
    for n in range(1, 2 * r_max + 1):
        d = turning_point(n)
        out.append((d, delta_of(d)))
    return out


def threshold(i: int) -> float:
    """``Delta_i``, the height of tongue ``i``."""
    return delta_of(turning_point(2 * i - 1))


def w0(k, D):
    k = np.asarray(k, dtype=float)
    out = D * k**2 - 1.0
    return float(out) if out.ndim == 0 else out


def _sinc_term(k):
    """``(2/k) sin(k/2)`` with its Taylor series near zero."""
    k = np.asarray(k, dtype=float)
    small = np.abs(k) < 1e-4
    ks = np.where(small, 1.0, k)
    direct = 2.0 * np.sin(0.5 * ks) / ks
    k2 = k * k
    series = 1.0 - k2 / 24.0 + k2**2 / 1920.0 - k2**3 / 322560.0
    return np.where(small, series, direct)


def w1(k, D):
    k = np.asarray(k, dtype=float)
    out = D * k**2 + _sinc_term(k)
    return float(out) if out.ndim == 0 else out


def w1_prime(k, D):
    """``dw1/dk = (2 D k^3 - 2 sin(k/2) + k cos(k/2)) / k^2``."""
    k = np.asarray(k, dtype=float)
    out = (2 * D * k**3 - 2 * np.sin(0.5 * k) + k * np.cos(0.5 * k)) / k**2
    return float(out) if out.ndim == 0 else out


def k_zero() -> float:
    """Smallest positive root of ``tan(k/2) = k/2``, in ``(2 pi, 3 pi)``."""
    f = lambda k: 2 * math.sin(0.5 * k) - k * math.cos(0.5 * k)
    fp = lambda k: 0.5 * k * math.sin(0.5 * k)
    return _root(f, 2 * math.pi, 3 * math.pi, fp)


def most_unstable_k(D: float) -> tuple[float, float]:
    """Wavenumber ``k_m`` minimising ``w1`` and the value ``w1(k_m)``.

    ``k_m`` is bracketed by ``delta_1`` (where ``w1' < 0`` whenever
    ``D < Delta_1``) and ``k_0`` (where ``w1' = 2 D k_0 > 0``).
    """
    d1 = turning_point(1)
    if not D > 0:
        raise ValueError("D must be positive")
    if D >= delta_of(d1):
        raise StableEquilibriumError("state u=1 stable: D >= Delta_1")
    h = lambda k: 2 * D * k**3 - 2 * math.sin(0.5 * k) + k * math.cos(0.5 * k)
    hp = lambda k: 6 * D * k**2 - 0.5 * k * math.sin(0.5 * k)
    km = _root(h, d1, k_zero(), hp)
    return km, w1(km, D)


def _lambda_residual(D):
    return lambda lam: delta_of(2 * math.pi / lam) - D


def tongue_boundaries(i: int, D: float) -> tuple[float, float]:
    """The two roots ``lambda_i^-(D) < lambda_i^+(D)`` of ``Delta(2 pi/lam) = D``."""
    if i < 1:
        raise ValueError("tongue index must be >= 1")
    lo, hi = 1.0 / (2 * i), 1.0 / (2 * i - 1)
    if D == 0:
        return lo, hi
    if D < 0:
        raise ValueError("D must be non-negative")
    d = turning_point(2 * i - 1)
    if D >= delta_of(d):
        raise TongueClosedError(f"tongue closed at this D: D >= Delta_{i}")
    mid = 2 * math.pi / d
    f = _lambda_residual(D)
    return _root(f, lo, mid), _root(f, mid, hi)


def candidate_tongue(lam: float) -> int | None:
    """Index ``i`` with ``1/(2i) < lam < 1/(2i-1)``, if any."""
    if not lam > 0 or lam >= 1:
        return None
    q = 1.0 / lam
    i = math.ceil(q / 2)
    return i if 2 * i - 1 < q < 2 * i else None


def omega_membership(lam: float, D: float) -> OmegaPoint:
    if not (lam > 0 and D > 0):
        raise ValueError("lambda and D must be positive")
    i = candidate_tongue(lam)
    if i is not None and D < threshold(i):
        lm, lp = tongue_boundaries(i, D)
        if lm < lam < lp:
            return OmegaPoint(lam, D, i)
    return OmegaPoint(lam, D, None)


def build_atlas(i_max: int, n_D: int = 50, D_min_ratio: float = 1e-6) -> TongueAtlas:
    """Sample the first ``i_max`` tongue boundaries on a geometric D-grid.

    The grid runs from ``D_min_ratio * Delta_i`` up to just below ``Delta_i``,
    densest near D = 0, with D = 0 prepended.
    """
    atlas = TongueAtlas()
    for i in range(1, i_max + 1):
        d = turning_point(2 * i - 1)
        Di = delta_of(d)
        atlas.thresholds[i] = Di
        atlas.argmax[i] = d
        Ds = np.concatenate([[0.0], Di * (1 - np.geomspace(1.0, D_min_ratio, n_D))[1:]])
        Ds = np.sort(np.concatenate([Ds, Di * np.geomspace(D_min_ratio, 1.0, n_D)[:-1]]))
        Ds = np.unique(Ds)
        rows = [(D, *tongue_boundaries(i, D)) for D in Ds]
        atlas.curves[i] = np.array(rows)
    return atlas


def atlas_lookup(atlas: TongueAtlas, i: int, D: float) -> tuple[float, float]:
    """Monotone (piecewise cubic) interpolation of a stored boundary curve."""
    from scipy.interpolate import PchipInterpolator

    c = atlas.curves[i]
    return (float(PchipInterpolator(c[:, 0], c[:, 1])(D)),
            float(PchipInterpolator(c[:, 0], c[:, 2])(D)))


def periodic_tw_residual(D, lam_b, v_b):
    """Residual of the bifurcation condition for periodic travelling waves."""
    lam_b = np.asarray(lam_b, dtype=float)
    v_b = np.asarray(v_b, dtype=float)
    return (4 * math.pi**2 * D - 2j * math.pi * v_b * lam_b
            + lam_b**3 / math.pi * np.sin(math.pi / lam_b))


def periodic_tw_bifurcation_check(D: float, lam_grid, v_grid, tol: float = 1e-10):
    """Zeros of the periodic travelling-wave condition with ``v_b != 0``.

    The imaginary part ``-2 pi v_b lam_b`` vanishes only for ``v_b = 0``, so
    the returned list is empty for any grid of positive wavelengths.
    """
    L, V = np.meshgrid(np.asarray(lam_grid, float), np.asarray(v_grid, float), indexing="ij")
    mask = V != 0
    res = np.abs(periodic_tw_residual(D, L[mask], V[mask]))
    hits = res < tol
    return list(zip(L[mask][hits].tolist(), V[mask][hits].tolist()))
