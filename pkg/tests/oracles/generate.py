"""Regenerate ``frozen.py`` with mpmath at 40 digits.

Nothing here imports nlfkpp: every value comes from the defining formulas.
Run ``python tests/oracles/generate.py > tests/oracles/frozen.py``.
"""
import mpmath as mp

mp.mp.dps = 40


def delta(X):
    return -2 * mp.sin(X / 2) / X**3


def turning(n):
    g = lambda X: 6 * mp.sin(X / 2) - X * mp.cos(X / 2)
    return mp.findroot(g, (2 * n * mp.pi + 1e-9, (2 * n + 1) * mp.pi - 1e-9), solver="illinois")


def w1(k, D):
    return D * k**2 + 2 * mp.sin(k / 2) / k


def tongue(i, D):
    d = turning(2 * i - 1)
    f = lambda lam: delta(2 * mp.pi / lam) - D
    lo, hi, mid = mp.mpf(1) / (2 * i), mp.mpf(1) / (2 * i - 1), 2 * mp.pi / d
    return (mp.findroot(f, (lo + 1e-12, mid), solver="illinois"),
            mp.findroot(f, (mid, hi - 1e-12), solver="illinois"))


def char(s, D):
    return D * s**2 + 2 * mp.sqrt(D) * s - 2 * mp.sinh(s / 2) / s


def double_root():
    f1 = lambda s, D: D * s**3 + 2 * mp.sqrt(D) * s**2 - 2 * mp.sinh(s / 2)
    f2 = lambda s, D: 3 * D * s**2 + 4 * mp.sqrt(D) * s - mp.cosh(s / 2)
    return mp.findroot([f1, f2], (mp.mpf("4.4"), mp.mpf("0.028")))


def xf(t, A, w, D):
    s = w * w + 4 * D * t
    return mp.sqrt(s) * mp.sqrt(t + mp.log(A * w) - mp.log(s) / 2)


def phi0(lam):
    a = (lam - mp.mpf(1) / 2) / 2
    g = lambda w: mp.sqrt(1 - mp.sin(mp.pi * w / (lam - mp.mpf(1) / 2)))
    return mp.quad(g, [a, (lam - mp.mpf(1) / 2), lam / 2]) / mp.sqrt(2)


def main():
    d1 = turning(1)
    k0 = mp.findroot(lambda k: 2 * mp.sin(k / 2) - k * mp.cos(k / 2), (2 * mp.pi + 1e-9, 3 * mp.pi - 1e-9),
                     solver="illinois")
    D = mp.mpf("0.002")
    km = mp.findroot(lambda k: 2 * D * k**3 - 2 * mp.sin(k / 2) + k * mp.cos(k / 2), (d1, k0),
                     solver="illinois")
    sp, Dp = double_root()
    t1 = tongue(1, mp.mpf("0.001"))
    t2 = tongue(2, mp.mpf("1e-4"))
    D6 = mp.mpf("1e-6")
    s3 = mp.findroot(lambda s: char(s, D6), 6j * mp.pi + 72 * mp.pi**2 * mp.sqrt(D6))
    s1 = mp.findroot(lambda s: char(s, mp.mpf("0.01")), mp.mpc(3.4, 3.5))
    bump_mass = mp.quad(lambda x: (1 - 2 * x)**2 * (1 + 2 * x)**2, [-0.5, 0.5])
    vals = {
        "DELTA_1_ARGMAX": d1,
        "DELTA_1": delta(d1),
        "DELTA_5": delta(turning(9)),
        "K_ZERO": k0,
        "K_M_D0002": km,
        "W1_K_M_D0002": w1(km, D),
        "SIGMA_PLUS": sp,
        "D_PLUS": Dp,
        "TONGUE1_D0001": t1,
        "TONGUE2_D1EM4": t2,
        "SIGMA3_D1EM6": s3,
        "SIGMA1_D001": s1,
        "XF_D1EM8_T6000": xf(mp.mpf(6000), mp.mpf("0.01"), mp.mpf("0.1"), mp.mpf("1e-8")),
        "PHI0_3_4": phi0(mp.mpf(3) / 4),
        "BUMP_MASS": bump_mass,
    }
    print('"""Reference values from tests/oracles/generate.py (mpmath, 40 digits)."""')
    for k, v in vals.items():
        if isinstance(v, tuple):
            print(f"{k} = ({float(v[0])!r}, {float(v[1])!r})")
        elif isinstance(v, mp.mpc):
            print(f"{k} = complex({float(v.real)!r}, {float(v.imag)!r})")
        else:
            print(f"{k} = {float(v)!r}")


if __name__ == "__main__":
    main()
