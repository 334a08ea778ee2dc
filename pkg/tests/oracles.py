"""Floating-point reference computations, written directly from the defining formulas.

Nothing here imports qdeform internals beyond plain group tables, so agreement
with the exact library is a genuine cross-check.
"""
import numpy as np


def torus_elements(factors) -> np.ndarray:
    """Elements of Z/n1 + ... + Z/nk in mixed-radix order (last coordinate fastest)."""
    factors = np.asarray(factors)
    return np.array(np.unravel_index(np.arange(int(np.prod(factors))), factors)).T


def pairing(factors, s, t) -> complex:
    factors = np.asarray(factors)
    return complex(np.exp(2j * np.pi * np.sum(np.asarray(s) * np.asarray(t) / factors)))


def translation_matrices(table, inverse, inj, factors):
    """P[(s,u)][g, s g u^{-1}] = 1, i.e. alpha_(s,u)(delta_g) = delta_{s g u^{-1}}; plus H elements."""
    n = len(inj)
    d = len(table)
    els = torus_elements(factors)
    P = np.zeros((n * n, d, d))
    hs = np.zeros((n * n, 2 * len(factors)), dtype=int)
    g = np.arange(d)
    for si in range(n):
        for ui in range(n):
            x = si * n + ui
            P[x, g, table[table[inj[si], g], inverse[inj[ui]]]] = 1
            hs[x] = np.concatenate([els[si], els[ui]])
    return P, hs


def deformed_structure(table, inverse, inj, factors, S, J=None) -> np.ndarray:
    """c_J[i, j, k] = (1/|H|) sum_{x,y} <Jx, y> alpha_x(e_i)_k alpha_y(e_j)_k on C(G)."""
    factors = np.asarray(factors)
    k = len(factors)
    P, hs = translation_matrices(np.asarray(table), np.asarray(inverse), np.asarray(inj), factors)
    Hf = np.concatenate([factors, factors])
    if J is None:
        J = np.zeros((2 * k, 2 * k), dtype=int)
        J[:k, :k] = S
        J[k:, k:] = -np.asarray(S)
    Jh = hs @ np.asarray(J).T % Hf
    ph = np.exp(2j * np.pi * ((Jh[:, None, :] * hs[None, :, :]) / Hf).sum(-1))
    M = np.einsum("xy,yjk->xjk", ph, P)
    return np.einsum("xik,xjk->ijk", P, M) / len(P)


def conjugacy_class_count(table) -> int:
    table = np.asarray(table)
    n = len(table)
    e = int(np.argwhere((table == np.arange(n)).all(1))[0, 0])
    inv = np.array([int(np.argwhere(table[g] == e)[0, 0]) for g in range(n)])
    seen, count = set(), 0
    for g in range(n):
        if g in seen:
            continue
        count += 1
        seen |= {int(table[table[h, g], inv[h]]) for h in range(n)}
    return count


def block_sizes_numeric(c: np.ndarray, star: np.ndarray, seed: int = 1) -> list[int]:
    """Matrix block sizes of a semisimple *-algebra from the regular representation.

    A generic central self-adjoint z acts on the block M_n by a scalar, with
    multiplicity n^2 in the regular representation.
    """
    d = c.shape[0]
    comm = (np.transpose(c, (1, 2, 0)) - np.transpose(c, (0, 2, 1))).reshape(d * d, d)
    _, s, vh = np.linalg.svd(comm)
    k = int(np.sum(s < 1e-9)) + (d - len(s))
    Z = vh[d - k:]
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) @ Z
    z = 0.5 * (z + np.conj(z) @ star)
    L = np.tensordot(z, c, axes=(0, 0))
    vals = np.sort_complex(np.linalg.eigvals(L))
    groups, cur = [], [vals[0]]
    for v in vals[1:]:
        if abs(v - cur[-1]) < 1e-6:
            cur.append(v)
        else:
            groups.append(len(cur))
            cur = [v]
    groups.append(len(cur))
    return sorted(int(round(np.sqrt(m))) for m in groups)


def twist_numeric(table, inverse, inj, factors, S):
    """F and F^{-1} as |G| x |G| coefficient matrices in C*(G) (x) C*(G)."""
    d = len(table)
    els = torus_elements(factors)
    n = len(els)
    F = np.zeros((d, d), complex)
    Finv = np.zeros((d, d), complex)
    for si in range(n):
        Ss = np.asarray(S) @ els[si] % np.asarray(factors)
        for ti in range(n):
            w = pairing(factors, Ss, els[ti]) / n
            F[inj[si], inj[ti]] += w
            Finv[inverse[inj[si]], inj[ti]] += w
    return F, Finv


def group_conv2(table, X, Y):
    """Product in C*(G) (x) C*(G) of coefficient matrices."""
    table = np.asarray(table)
    d = len(table)
    out = np.zeros((d, d), complex)
    for a, b in zip(*np.nonzero(X)):
        for c_, e in zip(*np.nonzero(Y)):
            out[table[a, c_], table[b, e]] += X[a, b] * Y[c_, e]
    return out


def cocycle_defect_numeric(table, F) -> float:
    """|(F (x) 1)(Delta (x) id)F - (1 (x) F)(id (x) Delta)F| for C*(G), Delta(g) = g (x) g."""
    table = np.asarray(table)
    d = len(table)
    lhs = np.zeros((d, d, d), complex)
    rhs = np.zeros((d, d, d), complex)
    nz = list(zip(*np.nonzero(F)))
    for a, b in nz:
        for x, y in nz:
            # (a (x) b (x) 1)(x (x) x (x) y)
            lhs[table[a, x], table[b, x], y] += F[a, b] * F[x, y]
            # (1 (x) a (x) b)(x (x) y (x) y)
            rhs[x, table[a, y], table[b, y]] += F[a, b] * F[x, y]
    return float(np.linalg.norm(lhs - rhs))
