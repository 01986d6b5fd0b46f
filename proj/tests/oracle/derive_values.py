"""Independent numpy reference for the constants frozen into the C++ tests.

Builds every operator directly from Kronecker products of small dense
matrices (no TT code involved) and prints the values with 17 digits.
Run: python3 tests/oracle/derive_values.py
"""
import numpy as np
from functools import reduce


def kron_all(mats):
    return reduce(np.kron, mats)


def kron_sum(one_d, d):
    n = one_d.shape[0]
    eye = np.eye(n)
    return sum(kron_all([one_d if k == j else eye for j in range(d)]) for k in range(d))


def laplace(d, n):
    k = 2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    return kron_sum(k, d)


def heisenberg(d):
    sx = np.array([[0, 1], [1, 0]]) / 2
    sy = np.array([[0, -1j], [1j, 0]]) / 2
    sz = np.array([[1, 0], [0, -1]]) / 2
    h = np.zeros((2 ** d, 2 ** d), dtype=complex)
    for i in range(d - 1):
        for s in (sx, sy, sz):
            h += kron_all([s if j in (i, i + 1) else np.eye(2) for j in range(d)])
    assert np.abs(h.imag).max() == 0
    return h.real


def hermite_nodes(n):
    return np.polynomial.hermite.hermgauss(n)[0]


def dvr(n):
    t = hermite_nodes(n)
    m = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            if i == j:
                m[i, j] = (4 * n - 1 - 2 * t[i] ** 2) / 6
            else:
                m[i, j] = (-1) ** (i - j) * (2 / (t[i] - t[j]) ** 2 - 0.5)
    return m


def henon_heiles(d, n, lam):
    t = hermite_nodes(n)
    q = np.diag(t)
    eye = np.eye(n)
    h = kron_sum(0.5 * dvr(n) + 0.5 * q @ q, d)
    for k in range(1, d):
        h -= lam / 3 * kron_all([q @ q @ q if j == k else eye for j in range(d)])
    for k in range(d - 1):
        h += lam * kron_all([q @ q if j == k else q if j == k + 1 else eye for j in range(d)])
    return h


def low(m, count):
    return np.linalg.eigvalsh(m)[:count]


def show(name, values):
    print(name + ":")
    print("  {" + ", ".join("%.17g" % v for v in values) + "}")


show("laplace d=3 n=4 lowest 10", low(laplace(3, 4), 10))
show("laplace d=2 n=3 times ones", laplace(2, 3) @ np.ones(9))
show("heisenberg d=2 spectrum", low(heisenberg(2), 4))
show("heisenberg d=3 spectrum", low(heisenberg(3), 8))
show("heisenberg d=8 lowest 5", low(heisenberg(8), 5))
show("heisenberg d=10 lowest 1", low(heisenberg(10), 1))
show("hermite nodes n=2", hermite_nodes(2))
show("hermite nodes n=5", hermite_nodes(5))
show("dvr n=2", dvr(2).ravel())
show("dvr n=3", dvr(3).ravel())
show("henon-heiles d=2 n=10 lambda=0 lowest 4", low(henon_heiles(2, 10, 0.0), 4))
show("henon-heiles d=2 n=6 lowest 6", low(henon_heiles(2, 6, 0.111803), 6))
show("henon-heiles d=3 n=8 lowest 5", low(henon_heiles(3, 8, 0.111803), 5))
