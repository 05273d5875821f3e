"""Reference values for the extended beta function.

lambda = 1 uses E_1(-y) = exp(-y); lambda = 1/2 uses E_{1/2}(-y) = exp(y^2) erfc(y).
Run with mpmath installed; paste the output into tests/extbeta_oracle.rs.
"""
from mpmath import mp, mpf, quad, exp, erfc

mp.dps = 40


def kernel(lam, y):
    if y == 0:
        return mpf(1)
    if lam == 1:
        return exp(-y)
    return exp(y * y) * erfc(y) if y < 1e8 else 1 / (mp.sqrt(mp.pi) * y)


def ext_beta(e1, e2, p, q, lam, s, t):
    f = lambda x: x ** (e1 - 1) * (1 - x) ** (e2 - 1) * kernel(lam, p / x ** s) * kernel(lam, q / (1 - x) ** t)
    return quad(f, [0, mpf(1) / 4, mpf(1) / 2, mpf(3) / 4, 1])


POINTS = [
    (1, 1, 0.1, 0.1, 1, 1, 1),
    (1.5, 2.5, 0.3, 0.3, 1, 1, 1),
    (2, 3, 0.2, 0.5, 1, 1.2, 0.8),
    (0.5, 0.7, 1.0, 0.2, 1, 0.5, 2.0),
    (3, 1.5, 2.0, 2.0, 1, 1, 1),
    (0.8, 4, 0.05, 1.5, 1, 2, 0.6),
    (1.2, 0.8, 0.1, 0.2, 1, 1, 1),
    (2.5, 2.5, 5.0, 0.01, 1, 1, 1),
    (-0.5, 1.5, 0.4, 0.0, 1, 1, 1),
    (2, -1, 0.0, 1.0, 1, 1, 1),
    (1, 1, 0.1, 0.1, 0.5, 1, 1),
    (2, 3, 0.2, 0.5, 0.5, 1.2, 0.8),
    (0.7, 1.3, 1.0, 0.3, 0.5, 0.5, 1.5),
    (4, 2, 3.0, 3.0, 0.5, 1, 1),
]

print("const EXT_BETA: &[([f64; 7], f64)] = &[")
for pt in POINTS:
    v = ext_beta(*[mpf(x) for x in pt])
    print("    ([%s], %s)," % (", ".join(repr(float(x)) for x in pt), mp.nstr(v, 17, min_fixed=-5, max_fixed=5)))
print("];")
