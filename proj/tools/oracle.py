#!/usr/bin/env python3
"""Brute-force reference values for the C++ tests.

Everything here is computed from first principles with Fractions and sympy,
cell by cell, without sharing code or formulas with the library. Run it and
compare against the constants frozen in tests/.
"""
from fractions import Fraction as F
from itertools import product
import sympy as sp

p = sp.symbols("p")


# --- martingale model ---------------------------------------------------------

def leaves_of(node, depth=0, out=None):
    out = [] if out is None else out
    if "children" not in node:
        out.append((node["leaf_id"], node["mass"], depth, node))
    else:
        for c in node["children"]:
            leaves_of(c, depth + 1, out)
    return out


def tree_depth(node):
    return 0 if "children" not in node else 1 + max(tree_depth(c) for c in node["children"])


def atom_path(node, leaf_id, path=None):
    path = [] if path is None else path
    path = path + [node]
    if "children" not in node:
        return path if node["leaf_id"] == leaf_id else None
    for c in node["children"]:
        r = atom_path(c, leaf_id, path)
        if r:
            return r
    return None


def indicator_mass(node, V):
    if "children" not in node:
        return node["mass"] if node["leaf_id"] in V else F(0)
    return sum(indicator_mass(c, V) for c in node["children"])


def differences(tree, V, include_root=True):
    """d_n evaluated on each leaf, n = 0..depth."""
    depth = tree_depth(tree)
    leaves = leaves_of(tree)
    ds = []
    for n in range(depth + 1):
        d = {}
        for lid, mass, _, _ in leaves:
            path = atom_path(tree, lid)
            a = path[min(n, len(path) - 1)]
            fn = indicator_mass(a, V) / a["mass"]
            if n == 0:
                d[lid] = fn
            else:
                b = path[min(n - 1, len(path) - 1)]
                d[lid] = fn - indicator_mass(b, V) / b["mass"]
        ds.append(d)
    return ds if include_root else ds[1:]


def chi_martingale(tree, V, include_root=True):
    ds = differences(tree, V, include_root)
    leaves = leaves_of(tree)
    total = 0
    for xs in product([0, 1], repeat=len(ds)):
        weight = sp.Integer(1)
        for x in xs:
            weight *= p if x else (1 - p)
        integral = sum(sp.Rational(mass.numerator, mass.denominator)
                       * sp.Rational(sum(x * d[lid] for x, d in zip(xs, ds)).numerator,
                                     sum(x * d[lid] for x, d in zip(xs, ds)).denominator) ** 3
                       for lid, mass, _, _ in leaves)
        total += weight * integral
    return sp.Poly(sp.expand(total), p).all_coeffs()[::-1]


# --- dyadic model ---------------------------------------------------------------
# h_{j,k} is positive on the right half: |I|^{-1/2} (1_{I+} - 1_{I-}).

def haar_cells(j, k, N):
    """Returns (scale^2, sign per cell); the actual value is sign * 2^{j/2}."""
    n = 1 << N
    width = n >> j
    signs = [0] * n
    for c in range(k * width, (k + 1) * width):
        signs[c] = 1 if c >= k * width + width // 2 else -1
    return signs


def haar_coeff_scaled(V, j, k, N):
    """<1_V, h> * 2^{-j/2} (rational)."""
    s = haar_cells(j, k, N)
    return sum(F(s[c], 1 << N) for c in V)


def mart_eta(N, V):
    """∫_V (S 1_V)^2 / |V| with the mean term, dyadic filtration of depth N."""
    n = 1 << N
    S2 = [F(len(V), n) ** 2] * n
    for j in range(N):
        for k in range(1 << j):
            c = haar_coeff_scaled(V, j, k, N)
            # (<1_V,h> h)^2 = c^2 2^j 2^j on the support
            s = haar_cells(j, k, N)
            for cell in range(n):
                if s[cell]:
                    S2[cell] += c * c * (1 << (2 * j))
    return sum(S2[c] for c in V) / len(V) * n / n


def shift_function(V, N):
    """Cell values of T 1_V (rational)."""
    n = 1 << N
    out = [F(0)] * n
    for j in range(1, N):
        for k in range(0, 1 << j, 2):
            left, right = k, k + 1  # I- , I+
            cl = haar_coeff_scaled(V, j, left, N) * (1 << j)
            cr = haar_coeff_scaled(V, j, right, N) * (1 << j)
            sl, sr = haar_cells(j, left, N), haar_cells(j, right, N)
            for cell in range(n):
                # T h_{I+} = h_{I-}, T h_{I-} = -h_{I+}
                out[cell] += cr * sl[cell] - cl * sr[cell]
    return out


def shift_ratio(N, V):
    t = shift_function(V, N)
    n = 1 << N
    return sum(t[c] ** 2 for c in V) / len(V)


def shift_energy(N, V):
    t = shift_function(V, N)
    n = 1 << N
    inside = sum(t[c] ** 2 for c in V) / n
    total = sum(x * x for x in t) / n
    pairing = sum(t[c] for c in V) / n
    return inside, total, pairing


def exhaustive(N, fn, better):
    n = 1 << N
    best = None
    for mask in range(1, 1 << n):
        V = [c for c in range(n) if mask >> c & 1]
        r = fn(N, V)
        if best is None or better(r, best[0]):
            best = (r, mask)
    return best


# --- 2D -------------------------------------------------------------------------

def functions_1d(N):
    """Mean plus Haar functions as (scale^2 per cell, sign) pairs, rational cell values squared."""
    n = 1 << N
    fs = [("mean", [F(1)] * n)]
    for j in range(N):
        for k in range(1 << j):
            s = haar_cells(j, k, N)
            fs.append(((j, k), [F(x) for x in s]))
    return fs


def tensor_square_eta(N, U):
    """U: set of (i1, i2); square function includes mean terms in either slot."""
    n = 1 << N
    fs = functions_1d(N)
    scale = {name: (F(1) if name == "mean" else F(1 << name[0])) for name, _ in fs}
    S2 = {}
    for (a, sa) in fs:
        for (b, sb) in fs:
            # coefficient <1_U, u_a (x) u_b> where u = sign * sqrt(scale)
            c = sum(sa[i1] * sb[i2] for (i1, i2) in U) / (n * n)
            c2 = c * c * scale[a] * scale[b]
            for (i1, i2) in U:
                S2[(i1, i2)] = S2.get((i1, i2), F(0)) + c2 * sa[i1] ** 2 * sb[i2] ** 2 * scale[a] * scale[b]
    return sum(S2[c] for c in U) / len(U)


def tensor_shift_ratio(N, U):
    n = 1 << N
    pairs = []
    for j in range(1, N):
        for k in range(0, 1 << j, 2):
            pairs.append((j, k, k + 1))
    # T 1_U in cells: sum over rectangle coefficients of T h_a (x) T h_b
    out = {(i1, i2): F(0) for i1 in range(n) for i2 in range(n)}
    images = []  # (j, source k, image k, sign)
    for j, left, right in pairs:
        images.append((j, right, left, 1))
        images.append((j, left, right, -1))
    for (ja, ka, ta, ea) in images:
        sa, ima = haar_cells(ja, ka, N), haar_cells(ja, ta, N)
        for (jb, kb, tb, eb) in images:
            sb, imb = haar_cells(jb, kb, N), haar_cells(jb, tb, N)
            c = sum(F(sa[i1] * sb[i2]) for (i1, i2) in U) / (n * n)
            w = c * (1 << ja) * (1 << jb) * ea * eb
            for i1 in range(n):
                if ima[i1]:
                    for i2 in range(n):
                        if imb[i2]:
                            out[(i1, i2)] += w * ima[i1] * imb[i2]
    return sum(out[c] ** 2 for c in U) / len(U)


def exhaustive_2d(N, fn, better):
    n = 1 << N
    best = None
    for mask in range(1, 1 << (n * n)):
        U = [(i // n, i % n) for i in range(n * n) if mask >> i & 1]
        r = fn(N, U)
        if best is None or better(r, best[0]):
            best = (r, mask)
    return best


# --- wavelet model ----------------------------------------------------------------

def chi_haar(system, V, N):
    """E ∫ φ^3 with φ = Σ X_I <1_V,h_I> h_I, one selector per interval."""
    n = 1 << N
    comps = []
    for (j, k) in system:
        c = haar_coeff_scaled(V, j, k, N) * (1 << j)
        s = haar_cells(j, k, N)
        comps.append([c * x for x in s])
    total = 0
    for xs in product([0, 1], repeat=len(comps)):
        weight = sp.Integer(1)
        for x in xs:
            weight *= p if x else (1 - p)
        integral = sum(sum(x * comp[cell] for x, comp in zip(xs, comps)) ** 3 for cell in range(n)) / n
        total += weight * sp.Rational(integral.numerator, integral.denominator)
    return sp.Poly(sp.expand(total) + p * 0, p).all_coeffs()[::-1]


def main():
    half = F(1, 2)
    two_leaf = {"mass": F(1), "children": [{"mass": half, "leaf_id": 0}, {"mass": half, "leaf_id": 1}]}
    print("two-leaf V={0}:", chi_martingale(two_leaf, {0}), "excluded:", chi_martingale(two_leaf, {0}, False))

    uneven = {"mass": F(1), "children": [
        {"mass": F(1, 3), "children": [{"mass": F(1, 6), "leaf_id": 0}, {"mass": F(1, 6), "leaf_id": 1}]},
        {"mass": F(2, 3), "leaf_id": 2}]}
    print("uneven V={0,2}:", chi_martingale(uneven, {0, 2}))
    print("uneven V={1}:", chi_martingale(uneven, {1}), "excluded:", chi_martingale(uneven, {1}, False))

    three = {"mass": F(1), "children": [
        {"mass": F(1, 5), "leaf_id": 0},
        {"mass": F(3, 10), "children": [{"mass": F(1, 10), "leaf_id": 1}, {"mass": F(1, 5), "leaf_id": 2}]},
        {"mass": F(1, 2), "children": [{"mass": F(1, 8), "leaf_id": 3},
                                      {"mass": F(3, 8), "children": [{"mass": F(1, 4), "leaf_id": 4},
                                                                     {"mass": F(1, 8), "leaf_id": 5}]}]}]}
    print("three V={1,3,4}:", chi_martingale(three, {1, 3, 4}))

    print("haar {0:0,1:0} V=[0,1/4):", chi_haar([(0, 0), (1, 0)], [0], 2))
    print("haar complete N=2 V={0,3}:", chi_haar([(0, 0), (1, 0), (1, 1)], [0, 3], 2))
    print("haar {1:1,2:0,2:2} V={0,1,5} N=3:", chi_haar([(1, 1), (2, 0), (2, 2)], [0, 1, 5], 3))

    print("shift energy N=2 V={0,3}:", shift_energy(2, [0, 3]))
    print("shift energy N=3 V={0,1,2,5}:", shift_energy(3, [0, 1, 2, 5]))

    for N in range(1, 5):
        print("mart-eta N=%d:" % N, exhaustive(N, mart_eta, lambda a, b: a < b))
    for N in range(1, 5):
        print("shift-ratio N=%d:" % N, exhaustive(N, shift_ratio, lambda a, b: a > b))
    for N in range(1, 3):
        print("tensor-square-eta N=%d:" % N, exhaustive_2d(N, tensor_square_eta, lambda a, b: a < b))
        print("tensor-shift-ratio N=%d:" % N, exhaustive_2d(N, tensor_shift_ratio, lambda a, b: a > b))


if __name__ == "__main__":
    main()
