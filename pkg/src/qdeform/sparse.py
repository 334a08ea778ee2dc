"""Sparse exact tensors over Q(zeta_N) and their contraction kernel.

A :class:`CycTensor` stores only the nonzero entries of a tensor: integer
coordinates ``(nnz, rank)``, integer numerators ``(nnz, N)`` in the canonical
power basis of Q(zeta_N), and one shared positive denominator.  The stored
form is canonical (entries sorted by raveled index, no duplicates, no zeros,
gcd-reduced denominator), so exact equality is array equality.

Everything structural in this package (products, coproducts, actions, twists)
is expressed as chains of :func:`contract` calls on these tensors.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cyclotomic import CycArray, Scalar, euler_phi, lcm, reduction_matrix

# join results above this many entries are processed in slices of the left operand
CHUNK_ENTRIES = 3_000_000
_INT_LIMIT = 2**62


def _conv(a: np.ndarray, b: np.ndarray, N: int) -> np.ndarray:
    """Row-wise product in Z[x]/(x^N - 1)."""
    if N == 1:
        return a * b
    out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
    for k in range(N):
        ak = a[:, k : k + 1]
        if ak.any():
            out += ak * (np.roll(b, k, axis=1) if k else b)
    return out


def _reduce_rows(num: np.ndarray, N: int) -> np.ndarray:
    if N > 1 and euler_phi(N) < N and num.size:
        return num @ reduction_matrix(N)
    return num


def _check_range(*arrays: np.ndarray) -> None:
    for a in arrays:
        if a.size and int(np.abs(a).max()) >= _INT_LIMIT // 64:
            raise OverflowError("cyclotomic numerators left the exact int64 range")


class CycTensor:
    """Canonical sparse tensor with entries in Q(zeta_N)."""

    __slots__ = ("shape", "coords", "num", "den", "N")

    def __init__(self, shape, coords, num, den: int = 1, N: int | None = None, canonical: bool = False):
        self.shape = tuple(int(s) for s in shape)
        num = np.asarray(num, dtype=np.int64)
        if N is None:
            N = num.shape[1] if num.ndim == 2 and num.shape[1] else 1
        num = num.reshape(-1, N)
        coords = np.asarray(coords, dtype=np.int64).reshape(len(num), len(self.shape))
        self.N = int(N)
        if canonical:
            self.coords, self.num, self.den = coords, num, int(den)
        else:
            self.coords, self.num, self.den = _canonical(self.shape, coords, num, int(den), self.N)

    # construction ---------------------------------------------------------
    @classmethod
    def zeros(cls, shape, N: int = 1) -> "CycTensor":
        shape = tuple(shape)
        return cls(shape, np.zeros((0, len(shape)), np.int64), np.zeros((0, N), np.int64), 1, N, canonical=True)

    @classmethod
    def from_entries(cls, shape, coords, exponents=None, weights=None, den: int = 1, N: int = 1) -> "CycTensor":
        """Entries ``weights * zeta_N**exponents / den`` at ``coords``; duplicates add."""
        coords = np.asarray(coords, dtype=np.int64).reshape(-1, len(shape))
        n = len(coords)
        num = np.zeros((n, N), dtype=np.int64)
        e = np.zeros(n, np.int64) if exponents is None else np.asarray(exponents, np.int64) % N
        w = np.ones(n, np.int64) if weights is None else np.asarray(weights, np.int64)
        np.add.at(num, (np.arange(n), e), w)
        return cls(shape, coords, num, den, N)

    @classmethod
    def identity(cls, n: int, N: int = 1) -> "CycTensor":
        idx = np.arange(n)
        return cls.from_entries((n, n), np.stack([idx, idx], 1), N=N)

    @classmethod
    def basis_vector(cls, n: int, i: int, N: int = 1) -> "CycTensor":
        return cls.from_entries((n,), [[i]], N=N)

    @classmethod
    def from_dense(cls, arr: CycArray) -> "CycTensor":
        mask = arr.nonzero_mask()
        coords = np.argwhere(mask)
        return cls(arr.shape, coords, arr.num[mask], arr.den, arr.N)

    @classmethod
    def from_scalars(cls, shape, coords, scalars: Sequence[Scalar], N: int | None = None) -> "CycTensor":
        dense = CycArray.from_scalars(list(scalars), N)
        return cls(shape, coords, dense.num if len(scalars) else np.zeros((0, dense.N), np.int64), dense.den, dense.N)

    # basic properties -----------------------------------------------------
    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def nnz(self) -> int:
        return len(self.coords)

    def keys(self) -> np.ndarray:
        if not self.shape:
            return np.zeros(self.nnz, np.int64)
        return np.ravel_multi_index(self.coords.T, self.shape) if self.nnz else np.zeros(0, np.int64)

    def is_zero(self) -> bool:
        return self.nnz == 0

    def lift(self, L: int) -> "CycTensor":
        if L == self.N:
            return self
        if L % self.N:
            raise ValueError(f"Q(zeta_{self.N}) does not embed in Q(zeta_{L})")
        num = np.zeros((self.nnz, L), dtype=np.int64)
        num[:, :: L // self.N] = self.num
        return CycTensor(self.shape, self.coords, num, self.den, L)

    def equals(self, other: "CycTensor") -> bool:
        if self.shape != other.shape:
            return False
        L = lcm(self.N, other.N)
        a, b = self.lift(L), other.lift(L)
        return (
            a.den == b.den
            and np.array_equal(a.coords, b.coords)
            and np.array_equal(a.num, b.num)
        )

    def __eq__(self, other):  # pragma: no cover - prefer equals()
        return isinstance(other, CycTensor) and self.equals(other)

    __hash__ = None

    def __repr__(self):
        return f"CycTensor(shape={self.shape}, nnz={self.nnz}, N={self.N}, den={self.den})"

    # element access -------------------------------------------------------
    def item(self, *idx) -> Scalar:
        if len(idx) != self.ndim:
            raise IndexError("item() needs a full index")
        key = np.ravel_multi_index(idx, self.shape) if self.shape else 0
        keys = self.keys()
        pos = np.searchsorted(keys, key)
        if pos < len(keys) and keys[pos] == key:
            return Scalar([Fraction(int(x), self.den) for x in self.num[pos]], self.N)
        return Scalar([0], self.N)

    def entries(self):
        """Iterate ``(coords tuple, Scalar)`` pairs."""
        for c, v in zip(self.coords, self.num):
            yield tuple(int(x) for x in c), Scalar([Fraction(int(x), self.den) for x in v], self.N)

    def to_dense(self) -> CycArray:
        num = np.zeros(self.shape + (self.N,), dtype=np.int64)
        if self.nnz:
            num[tuple(self.coords.T)] = self.num
        return CycArray(num, self.den, self.N, canonical=True)

    def to_complex(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.complex128)
        if self.nnz:
            out[tuple(self.coords.T)] = self.complex_values()
        return out

    def complex_values(self) -> np.ndarray:
        z = np.exp(2j * np.pi * np.arange(self.N) / self.N)
        return (self.num.astype(np.float64) @ z) / self.den

    def to_scipy(self):
        """Complex CSR matrix (2-tensors only)."""
        import scipy.sparse as sp

        if self.ndim != 2:
            raise ValueError("to_scipy needs a matrix")
        return sp.csr_matrix((self.complex_values(), (self.coords[:, 0], self.coords[:, 1])), shape=self.shape)

    def channels(self):
        """Integer matrices ``M_k`` (scipy CSR) with self = sum_k zeta**k M_k / den."""
        import scipy.sparse as sp

        if self.ndim != 2:
            raise ValueError("channels needs a matrix")
        out = []
        for k in range(self.N):
            m = self.num[:, k] != 0
            out.append(
                sp.csr_matrix(
                    (self.num[m, k], (self.coords[m, 0], self.coords[m, 1])), shape=self.shape, dtype=np.int64
                )
            )
        return out

    # linear structure -----------------------------------------------------
    def _align(self, other: "CycTensor"):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        L = lcm(self.N, other.N)
        return self.lift(L), other.lift(L), L

    def __add__(self, other: "CycTensor") -> "CycTensor":
        a, b, L = self._align(other)
        den = a.den * b.den // math.gcd(a.den, b.den)
        num = np.concatenate([a.num * (den // a.den), b.num * (den // b.den)])
        return CycTensor(self.shape, np.concatenate([a.coords, b.coords]), num, den, L)

    def __neg__(self) -> "CycTensor":
        return CycTensor(self.shape, self.coords, -self.num, self.den, self.N, canonical=True)

    def __sub__(self, other: "CycTensor") -> "CycTensor":
        return self + (-other)

    def scale(self, r) -> "CycTensor":
        if isinstance(r, Scalar):
            return self.mul_scalar(r)
        r = Fraction(r)
        return CycTensor(self.shape, self.coords, self.num * r.numerator, self.den * r.denominator, self.N)

    def mul_scalar(self, s: Scalar) -> "CycTensor":
        L = lcm(self.N, s.N)
        a = self.lift(L)
        c = CycArray.from_scalars(s.lift(L))
        return CycTensor(self.shape, a.coords, _conv(a.num, c.num[None, :], L), a.den * c.den, L)

    def mul_roots(self, exponents) -> "CycTensor":
        """Multiply entry e by zeta_N**exponents[e]."""
        e = np.asarray(exponents, np.int64) % self.N
        idx = (np.arange(self.N)[None, :] - e[:, None]) % self.N
        num = np.take_along_axis(self.num, idx, axis=1)
        return CycTensor(self.shape, self.coords, num, self.den, self.N)

    def conj(self) -> "CycTensor":
        idx = (-np.arange(self.N)) % self.N
        return CycTensor(self.shape, self.coords, self.num[:, idx], self.den, self.N)

    def transpose(self, *axes) -> "CycTensor":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        shape = tuple(self.shape[a] for a in axes)
        return CycTensor(shape, self.coords[:, list(axes)], self.num, self.den, self.N)

    @property
    def T(self) -> "CycTensor":
        return self.transpose()

    def reshape(self, shape) -> "CycTensor":
        shape = tuple(shape)
        if math.prod(shape) != math.prod(self.shape):
            raise ValueError("reshape changes size")
        coords = np.stack(np.unravel_index(self.keys(), shape), axis=1) if self.nnz else np.zeros((0, len(shape)), np.int64)
        return CycTensor(shape, coords, self.num, self.den, self.N, canonical=True)

    def sum_axes(self, axes) -> "CycTensor":
        axes = sorted({a % self.ndim for a in np.atleast_1d(axes)})
        keep = [a for a in range(self.ndim) if a not in axes]
        return CycTensor(tuple(self.shape[a] for a in keep), self.coords[:, keep], self.num, self.den, self.N)

    def select(self, axis: int, index: int) -> "CycTensor":
        """Slice at a fixed coordinate, dropping the axis."""
        mask = self.coords[:, axis] == index
        keep = [a for a in range(self.ndim) if a != axis]
        shape = tuple(self.shape[a] for a in keep)
        return CycTensor(shape, self.coords[mask][:, keep], self.num[mask], self.den, self.N)

    def restrict(self, axis: int, indices) -> "CycTensor":
        """Keep entries whose coordinate on ``axis`` lies in ``indices``, renumbered 0..len-1."""
        indices = np.asarray(indices, np.int64)
        lookup = np.full(self.shape[axis], -1, np.int64)
        lookup[indices] = np.arange(len(indices))
        new = lookup[self.coords[:, axis]]
        mask = new >= 0
        coords = self.coords[mask].copy()
        coords[:, axis] = new[mask]
        shape = list(self.shape)
        shape[axis] = len(indices)
        return CycTensor(shape, coords, self.num[mask], self.den, self.N)

    def embed(self, axis: int, indices, size: int) -> "CycTensor":
        """Inverse of :meth:`restrict`: coordinate k on ``axis`` becomes ``indices[k]``."""
        indices = np.asarray(indices, np.int64)
        coords = self.coords.copy()
        coords[:, axis] = indices[coords[:, axis]]
        shape = list(self.shape)
        shape[axis] = size
        return CycTensor(shape, coords, self.num, self.den, self.N)

    def relabel(self, axis: int, perm) -> "CycTensor":
        """Apply the index map ``perm`` along ``axis`` (duplicates add)."""
        perm = np.asarray(perm, np.int64)
        coords = self.coords.copy()
        coords[:, axis] = perm[coords[:, axis]]
        return CycTensor(self.shape, coords, self.num, self.den, self.N)

    def max_abs_complex(self) -> float:
        return float(np.abs(self.complex_values()).max()) if self.nnz else 0.0

    def norm(self) -> float:
        return float(np.linalg.norm(self.complex_values())) if self.nnz else 0.0


def _canonical(shape, coords, num, den, N):
    if den <= 0:
        raise ValueError("denominator must be positive")
    if len(coords) == 0:
        return np.zeros((0, len(shape)), np.int64), np.zeros((0, N), np.int64), 1
    num = _reduce_rows(num, N)
    keys = np.ravel_multi_index(coords.T, shape) if shape else np.zeros(len(coords), np.int64)
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    num = num[order]
    starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
    if len(starts) < len(keys):
        num = np.add.reduceat(num, starts, axis=0)
        keys = keys[starts]
    nz = np.any(num != 0, axis=1)
    num, keys = num[nz], keys[nz]
    if not len(keys):
        return np.zeros((0, len(shape)), np.int64), np.zeros((0, N), np.int64), 1
    g = math.gcd(int(np.gcd.reduce(num.ravel())), den)
    if g > 1:
        num = num // g
        den //= g
    coords = np.stack(np.unravel_index(keys, shape), axis=1) if shape else np.zeros((len(keys), 0), np.int64)
    return coords.astype(np.int64), num, den


def _join_index(ka: np.ndarray, kb: np.ndarray):
    order = np.argsort(kb, kind="stable")
    sk = kb[order]
    lo = np.searchsorted(sk, ka, "left")
    hi = np.searchsorted(sk, ka, "right")
    cnt = hi - lo
    return order, lo, cnt


def join_size(a: CycTensor, b: CycTensor, pairs) -> int:
    """Number of entry pairs a join over ``pairs`` would produce (no values computed)."""
    ka, kb = _join_keys(a, b, pairs)
    _, _, cnt = _join_index(ka, kb)
    return int(cnt.sum())


def _join_keys(a, b, pairs):
    if not pairs:
        return np.zeros(a.nnz, np.int64), np.zeros(b.nnz, np.int64)
    ia = [p[0] for p in pairs]
    ib = [p[1] for p in pairs]
    dims = tuple(a.shape[i] for i in ia)
    if dims != tuple(b.shape[i] for i in ib):
        raise ValueError("joined axes differ in length")
    ka = np.ravel_multi_index(a.coords[:, ia].T, dims) if a.nnz else np.zeros(0, np.int64)
    kb = np.ravel_multi_index(b.coords[:, ib].T, dims) if b.nnz else np.zeros(0, np.int64)
    return ka, kb


def contract(a: CycTensor, b: CycTensor, pairs=(), batch=()) -> CycTensor:
    """Generalized einsum of two sparse tensors.

    ``pairs`` lists ``(axis_of_a, axis_of_b)`` that are matched and summed;
    ``batch`` lists matched axes that are kept.  Output axes: the batch axes
    (a's order), then a's free axes, then b's free axes.
    """
    pairs, batch = list(pairs), list(batch)
    L = lcm(a.N, b.N)
    a, b = a.lift(L), b.lift(L)
    joined = pairs + batch
    used_a = {p[0] for p in joined}
    used_b = {p[1] for p in joined}
    free_a = [i for i in range(a.ndim) if i not in used_a]
    free_b = [i for i in range(b.ndim) if i not in used_b]
    out_shape = tuple(a.shape[p[0]] for p in batch) + tuple(a.shape[i] for i in free_a) + tuple(
        b.shape[i] for i in free_b
    )
    den = a.den * b.den
    if a.nnz == 0 or b.nnz == 0:
        return CycTensor.zeros(out_shape, L)
    ka, kb = _join_keys(a, b, joined)
    order, lo, cnt = _join_index(ka, kb)
    bound = int(np.abs(a.num).max()) * int(np.abs(b.num).max()) * L * max(int(cnt.sum()), 1)
    if bound >= _INT_LIMIT:
        raise OverflowError("product of numerators exceeds the exact int64 range")
    pieces = []
    csum = np.cumsum(cnt)
    start = 0
    n = a.nnz
    while start < n:
        # grow the slice of a until the join reaches the chunk budget
        base = csum[start - 1] if start else 0
        stop = int(np.searchsorted(csum, base + CHUNK_ENTRIES, "right"))
        stop = max(stop, start + 1)
        stop = min(stop, n)
        c = cnt[start:stop]
        tot = int(c.sum())
        if tot:
            ia = np.repeat(np.arange(start, stop), c)
            offs = np.arange(tot) - np.repeat(np.cumsum(c) - c, c)
            ib = order[np.repeat(lo[start:stop], c) + offs]
            coords = np.concatenate(
                [a.coords[ia][:, [p[0] for p in batch]], a.coords[ia][:, free_a], b.coords[ib][:, free_b]], axis=1
            )
            num = _conv(a.num[ia], b.num[ib], L)
            pieces.append(CycTensor(out_shape, coords, num, 1, L))
        start = stop
    if not pieces:
        return CycTensor.zeros(out_shape, L)
    # chunk pieces are canonical with unit denominator
    if len(pieces) == 1:
        return CycTensor(out_shape, pieces[0].coords, pieces[0].num, den, L)
    coords = np.concatenate([p.coords for p in pieces])
    num = np.concatenate([p.num for p in pieces])
    return CycTensor(out_shape, coords, num, den, L)


def stack(tensors: Sequence[CycTensor]) -> CycTensor:
    """New leading axis indexing ``tensors`` (all of one shape)."""
    if not tensors:
        raise ValueError("nothing to stack")
    shape = tensors[0].shape
    L = lcm(*(t.N for t in tensors))
    ts = [t.lift(L) for t in tensors]
    den = math.lcm(*(t.den for t in ts))
    coords = np.concatenate(
        [np.concatenate([np.full((t.nnz, 1), i, np.int64), t.coords], axis=1) for i, t in enumerate(ts)]
    )
    num = np.concatenate([t.num * (den // t.den) for t in ts])
    _check_range(num)
    return CycTensor((len(ts),) + shape, coords, num, den, L)


def kron_vectors(a: CycTensor, b: CycTensor) -> CycTensor:
    return contract(a, b)


def dense_vector(t: CycTensor) -> CycArray:
    return t.to_dense()
