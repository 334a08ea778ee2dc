"""Exact arithmetic in cyclotomic fields Q(zeta_N).

Two representations live here:

* :class:`Scalar` -- a single exact number, canonical power-basis coefficients
  (Fractions) reduced modulo the N-th cyclotomic polynomial.
* :class:`CycArray` -- a dense numpy array of such numbers.  Entries are kept
  as integer numerators over one shared positive denominator; the trailing
  axis of length N holds coefficients of 1, zeta, ..., zeta^(N-1), and after
  every operation the numerators are reduced to the canonical power basis so
  that exact equality is plain array equality.

Bulk contractions run as float64 BLAS calls when an a-priori bound proves the
integer result is exactly representable (< 2**52); otherwise they fall back to
Python-integer object arrays.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache, reduce
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np

_EXACT_FLOAT = 2**52


# ---------------------------------------------------------------------------
# field data


@lru_cache(maxsize=None)
def euler_phi(n: int) -> int:
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def _poly_divexact(num: list[int], den: list[int]) -> list[int]:
    # both low-to-high, den monic
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1]
        out[i] = c
        if c:
            for j, d in enumerate(den):
                num[i + j] -= c * d
    assert not any(num[: len(den) - 1])
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Coefficients (low to high) of the n-th cyclotomic polynomial."""
    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            poly = _poly_divexact(poly, list(cyclotomic_poly(d)))
    return tuple(poly)


@lru_cache(maxsize=None)
def reduction_matrix(n: int) -> np.ndarray:
    """Row k holds the canonical coefficients of zeta_n**k (padded to length n)."""
    phi = euler_phi(n)
    cp = cyclotomic_poly(n)
    rows = np.zeros((n, n), dtype=np.int64)
    cur = [0] * phi
    cur[0] = 1
    for k in range(n):
        rows[k, :phi] = cur
        # multiply by x and reduce modulo the monic cyclotomic polynomial
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            cur = [c - top * cp[j] for j, c in enumerate(cur)]
    rows.setflags(write=False)
    return rows


@lru_cache(maxsize=None)
def _root_embedding(n: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(n) / n)


@lru_cache(maxsize=None)
def _ramanujan(n: int) -> tuple[Fraction, ...]:
    # normalized trace of zeta_n**k, i.e. Tr(zeta^k) / phi(n)
    out = []
    for k in range(n):
        g = math.gcd(k, n)
        m = n // g
        out.append(Fraction(_mobius(m) * euler_phi(n) // euler_phi(m), euler_phi(n)))
    return tuple(out)


def _mobius(n: int) -> int:
    result, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    if n > 1:
        result = -result
    return result


def _lcm(*ns: int) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), ns, 1)


# ---------------------------------------------------------------------------
# scalars


class Scalar:
    """Exact element of Q(zeta_N).

    Mixed-order arithmetic lifts both operands into Q(zeta_lcm).  Integers and
    Fractions coerce automatically.
    """

    __slots__ = ("N", "coeffs")

    def __init__(self, coeffs: Sequence, N: int = 1):
        phi = euler_phi(N)
        c = [Fraction(x) for x in coeffs]
        if len(c) > phi:
            red = reduction_matrix(N)
            acc = [Fraction(0)] * phi
            for k, x in enumerate(c):
                if x:
                    row = red[k % N]
                    for j in range(phi):
                        if row[j]:
                            acc[j] += x * int(row[j])
            c = acc
        else:
            c = c + [Fraction(0)] * (phi - len(c))
        self.N = N
        self.coeffs = tuple(c)

    # constructors ---------------------------------------------------------
    @classmethod
    def root(cls, N: int, k: int = 1) -> "Scalar":
        """zeta_N ** k."""
        return cls([int(x) for x in reduction_matrix(N)[k % N]], N)

    @classmethod
    def coerce(cls, x) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        if isinstance(x, (int, Rational)):
            return cls([x], 1)
        raise TypeError(f"cannot coerce {type(x).__name__} to Scalar")

    # helpers --------------------------------------------------------------
    def lift(self, L: int) -> "Scalar":
        if L == self.N:
            return self
        if L % self.N:
            raise ValueError(f"Q(zeta_{self.N}) does not embed in Q(zeta_{L})")
        step = L // self.N
        full = [Fraction(0)] * L
        for k, x in enumerate(self.coeffs):
            full[k * step] = x
        return Scalar(full, L)

    def _pair(self, other) -> tuple["Scalar", "Scalar"]:
        other = Scalar.coerce(other)
        L = _lcm(self.N, other.N)
        return self.lift(L), other.lift(L)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        try:
            a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        return Scalar([x + y for x, y in zip(a.coeffs, b.coeffs)], a.N)

    __radd__ = __add__

    def __neg__(self):
        return Scalar([-x for x in self.coeffs], self.N)

    def __sub__(self, other):
        try:
            return self + (-Scalar.coerce(other))
        except TypeError:
            return NotImplemented

    def __rsub__(self, other):
        return Scalar.coerce(other) - self

    def __mul__(self, other):
        try:
            a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        if b.is_rational():
            r = b.coeffs[0]
            return Scalar([x * r for x in a.coeffs], a.N)
        prod = [Fraction(0)] * (2 * len(a.coeffs))
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        prod[i + j] += x * y
        return Scalar(prod, a.N)

    __rmul__ = __mul__

    def galois(self, j: int) -> "Scalar":
        """Image under zeta -> zeta**j (j coprime to N)."""
        full = [Fraction(0)] * self.N
        for k, x in enumerate(self.coeffs):
            full[(k * j) % self.N] += x
        return Scalar(full, self.N)

    def conj(self) -> "Scalar":
        return self.galois(-1)

    def inverse(self) -> "Scalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(zeta_N)")
        others = Scalar([1], self.N)
        for j in range(2, self.N):
            if math.gcd(j, self.N) == 1:
                others = others * self.galois(j)
        norm = self * others
        assert norm.is_rational()
        return Scalar([x / norm.coeffs[0] for x in others.coeffs], self.N)

    def __truediv__(self, other):
        try:
            other = Scalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return Scalar.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Scalar([1], self.N)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # comparison -----------------------------------------------------------
    def __eq__(self, other):
        try:
            a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        return a.coeffs == b.coeffs

    def __hash__(self):
        # normalized trace is invariant under lifting between cyclotomic fields
        tr = _ramanujan(self.N)
        return hash(sum((x * tr[k] for k, x in enumerate(self.coeffs)), Fraction(0)))

    def __complex__(self):
        z = _root_embedding(self.N)
        return complex(sum(float(x) * z[k] for k, x in enumerate(self.coeffs)))

    def __float__(self):
        c = complex(self)
        if abs(c.imag) > 1e-9 * max(1.0, abs(c.real)):
            raise ValueError(f"{self!r} is not real")
        return c.real

    def __repr__(self):
        if self.is_rational():
            return f"Scalar({self.coeffs[0]})"
        terms = [f"{x}*z{self.N}^{k}" for k, x in enumerate(self.coeffs) if x]
        return "Scalar(" + " + ".join(terms) + ")"

    # serialization --------------------------------------------------------
    def to_terms(self) -> list[dict]:
        return [
            {"num": x.numerator, "den": x.denominator, "zeta_pow": k}
            for k, x in enumerate(self.coeffs)
            if x
        ]

    @classmethod
    def from_terms(cls, terms: Iterable[dict], N: int) -> "Scalar":
        full = [Fraction(0)] * N
        for t in terms:
            full[int(t["zeta_pow"]) % N] += Fraction(int(t["num"]), int(t["den"]))
        return cls(full, N)


def root_of_unity(N: int, k: int = 1) -> Scalar:
    return Scalar.root(N, k)


# ---------------------------------------------------------------------------
# arrays


def _as_intarray(x) -> np.ndarray:
    if x.dtype == object:
        flat = x.ravel()
        m = max((abs(int(v)) for v in flat), default=0)
        if m >= 2**62:
            raise OverflowError("cyclotomic numerator exceeds int64 range")
        return x.astype(np.int64)
    return x.astype(np.int64, copy=False)


def _maxabs(a: np.ndarray) -> int:
    return int(np.abs(a).max()) if a.size else 0


class CycArray:
    """Dense exact array over Q(zeta_N).

    ``num`` has shape ``shape + (N,)``; the value at an index is
    ``sum_k num[..., k] * zeta_N**k / den``.  Instances are treated as
    immutable.
    """

    __slots__ = ("num", "den", "N")

    def __init__(self, num: np.ndarray, den: int = 1, N: int | None = None, canonical: bool = False):
        num = np.asarray(num)
        if N is None:
            N = num.shape[-1]
        if num.shape[-1] != N:
            raise ValueError("trailing axis must have length N")
        den = int(den)
        if den <= 0:
            raise ValueError("denominator must be positive")
        self.N = int(N)
        if canonical:
            self.num, self.den = num, den
        else:
            self.num, self.den = _canonicalize(_as_intarray(num), den, self.N)

    # constructors ---------------------------------------------------------
    @classmethod
    def zeros(cls, shape, N: int = 1) -> "CycArray":
        shape = tuple(np.atleast_1d(shape)) if not isinstance(shape, tuple) else shape
        return cls(np.zeros(shape + (N,), dtype=np.int64), 1, N, canonical=True)

    @classmethod
    def from_rational(cls, values, N: int = 1) -> "CycArray":
        """From an array of ints / Fractions."""
        arr = np.asarray(values, dtype=object)
        if arr.size and all(isinstance(v, (int, np.integer)) for v in arr.ravel()):
            num = np.zeros(arr.shape + (N,), dtype=np.int64)
            num[..., 0] = arr.astype(np.int64)
            return cls(num, 1, N)
        fr = np.vectorize(Fraction, otypes=[object])(arr) if arr.size else arr
        den = _lcm(*(f.denominator for f in fr.ravel())) if arr.size else 1
        num = np.zeros(arr.shape + (N,), dtype=object)
        num[..., 0] = np.vectorize(lambda f: f.numerator * (den // f.denominator), otypes=[object])(fr) if arr.size else 0
        return cls(num, den, N)

    @classmethod
    def identity(cls, n: int, N: int = 1) -> "CycArray":
        return cls.from_rational(np.eye(n, dtype=np.int64), N)

    @classmethod
    def roots(cls, exponents, N: int, den: int = 1) -> "CycArray":
        """Array of zeta_N**exponents / den."""
        e = np.asarray(exponents, dtype=np.int64) % N
        num = np.zeros(e.shape + (N,), dtype=np.int64)
        np.put_along_axis(num, e[..., None], 1, axis=-1)
        return cls(num, den, N)

    @classmethod
    def from_scalars(cls, values, N: int | None = None) -> "CycArray":
        arr = np.asarray(values, dtype=object)
        flat = [Scalar.coerce(v) for v in arr.ravel()]
        if N is None:
            N = _lcm(*(s.N for s in flat)) if flat else 1
        flat = [s.lift(N) for s in flat]
        den = _lcm(*(c.denominator for s in flat for c in s.coeffs)) if flat else 1
        phi = euler_phi(N)
        num = np.zeros((len(flat), N), dtype=object)
        for i, s in enumerate(flat):
            for k in range(phi):
                c = s.coeffs[k]
                num[i, k] = c.numerator * (den // c.denominator)
        return cls(num.reshape(arr.shape + (N,)), den, N)

    @classmethod
    def stack(cls, arrays: Sequence["CycArray"], axis: int = 0) -> "CycArray":
        if not arrays:
            raise ValueError("nothing to stack")
        L = _lcm(*(a.N for a in arrays))
        arrays = [a.lift(L) for a in arrays]
        den = _lcm(*(a.den for a in arrays))
        ax = axis if axis >= 0 else axis - 1
        num = np.stack([a.num * (den // a.den) for a in arrays], axis=ax)
        return cls(num, den, L)

    # basic properties ------------------------------------------------------
    @property
    def shape(self) -> tuple:
        return self.num.shape[:-1]

    @property
    def ndim(self) -> int:
        return self.num.ndim - 1

    def __len__(self):
        return self.shape[0]

    def copy(self) -> "CycArray":
        return CycArray(self.num.copy(), self.den, self.N, canonical=True)

    def lift(self, L: int) -> "CycArray":
        if L == self.N:
            return self
        if L % self.N:
            raise ValueError(f"Q(zeta_{self.N}) does not embed in Q(zeta_{L})")
        step = L // self.N
        num = np.zeros(self.shape + (L,), dtype=np.int64)
        num[..., ::step] = self.num
        return CycArray(num, self.den, L)

    def __getitem__(self, idx) -> "CycArray":
        if not isinstance(idx, tuple):
            idx = (idx,)
        num = self.num[idx + (Ellipsis,)] if Ellipsis not in idx else self.num[idx]
        if num.ndim == 0 or num.shape[-1] != self.N:  # guard against indexing the N axis
            raise IndexError("cannot index the cyclotomic axis")
        return CycArray(num, self.den, self.N)

    def scalar(self, *idx) -> Scalar:
        """Element at ``idx`` as a :class:`Scalar`."""
        v = self.num[tuple(idx)] if idx else self.num
        if v.ndim != 1:
            raise IndexError("scalar() needs a full index")
        return Scalar([Fraction(int(x), self.den) for x in v], self.N)

    def tolist(self):
        """Nested lists of :class:`Scalar`."""
        if self.ndim == 0:
            return self.scalar()
        return [self[i].tolist() for i in range(self.shape[0])]

    def reshape(self, *shape) -> "CycArray":
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return CycArray(self.num.reshape(tuple(shape) + (self.N,)), self.den, self.N, canonical=True)

    def transpose(self, *axes) -> "CycArray":
        if not axes:
            axes = tuple(reversed(range(self.ndim)))
        elif len(axes) == 1 and isinstance(axes[0], tuple):
            axes = axes[0]
        return CycArray(self.num.transpose(tuple(axes) + (self.ndim,)), self.den, self.N, canonical=True)

    @property
    def T(self) -> "CycArray":
        return self.transpose()

    def take(self, indices, axis: int = 0) -> "CycArray":
        ax = axis if axis >= 0 else axis - 1
        return CycArray(np.take(self.num, indices, axis=ax), self.den, self.N)

    # predicates ---------------------------------------------------------------
    def nonzero_mask(self) -> np.ndarray:
        return np.any(self.num != 0, axis=-1)

    def is_zero(self) -> bool:
        return not np.any(self.num)

    def equals(self, other) -> bool:
        other = _coerce_array(other, self.shape)
        if self.shape != other.shape:
            return False
        L = _lcm(self.N, other.N)
        a, b = self.lift(L), other.lift(L)
        return a.den == b.den and np.array_equal(a.num, b.num)

    def __eq__(self, other):  # pragma: no cover - use equals()
        return self.equals(other)

    __hash__ = None

    # arithmetic ---------------------------------------------------------------
    def _align(self, other) -> tuple["CycArray", "CycArray", int]:
        other = _coerce_array(other, self.shape)
        L = _lcm(self.N, other.N)
        a, b = self.lift(L), other.lift(L)
        return a, b, L

    def __add__(self, other):
        a, b, L = self._align(other)
        den = a.den * b.den // math.gcd(a.den, b.den)
        return CycArray(a.num * (den // a.den) + b.num * (den // b.den), den, L)

    __radd__ = __add__

    def __neg__(self):
        return CycArray(-self.num, self.den, self.N, canonical=True)

    def __sub__(self, other):
        return self + (-_coerce_array(other, self.shape))

    def __rsub__(self, other):
        return _coerce_array(other, self.shape) - self

    def scale(self, r) -> "CycArray":
        """Multiply by a rational number."""
        r = Fraction(r)
        return CycArray(self.num * r.numerator, self.den * r.denominator, self.N)

    def __mul__(self, other):
        if isinstance(other, (int, Rational)):
            return self.scale(other)
        if isinstance(other, Scalar):
            other = CycArray.from_scalars(other)
        a, b, L = self._align(other)
        return CycArray(_hadamard(a.num, b.num, L), a.den * b.den, L)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)):
            return self.scale(Fraction(1) / Fraction(other))
        if isinstance(other, Scalar):
            return self * other.inverse()
        return NotImplemented

    def mul_roots(self, exponents) -> "CycArray":
        """Elementwise multiplication by zeta_N**exponents (broadcast)."""
        e = np.broadcast_to(np.asarray(exponents, dtype=np.int64) % self.N, self.shape)
        idx = (np.arange(self.N) - e[..., None]) % self.N
        num = np.take_along_axis(np.broadcast_to(self.num, idx.shape), idx, axis=-1)
        return CycArray(num, self.den, self.N)

    def conj(self) -> "CycArray":
        idx = (-np.arange(self.N)) % self.N
        return CycArray(self.num[..., idx], self.den, self.N)

    def sum(self, axis=None) -> "CycArray":
        if axis is None:
            axis = tuple(range(self.ndim))
        elif isinstance(axis, int):
            axis = (axis if axis >= 0 else self.ndim + axis,)
        return CycArray(self.num.sum(axis=axis), self.den, self.N)

    # numerics -----------------------------------------------------------------
    def to_complex(self) -> np.ndarray:
        z = _root_embedding(self.N)
        return (self.num.astype(np.float64) @ z) / self.den

    def __repr__(self):
        return f"CycArray(shape={self.shape}, N={self.N}, den={self.den})"


def _coerce_array(x, shape) -> CycArray:
    if isinstance(x, CycArray):
        return x
    if isinstance(x, Scalar):
        c = CycArray.from_scalars(x)
        return CycArray(np.broadcast_to(c.num, tuple(shape) + (c.N,)).copy(), c.den, c.N)
    if isinstance(x, (int, Rational)):
        c = CycArray.from_rational(x)
        return CycArray(np.broadcast_to(c.num, tuple(shape) + (1,)).copy(), c.den, 1)
    raise TypeError(f"cannot combine CycArray with {type(x).__name__}")


def _canonicalize(num: np.ndarray, den: int, N: int) -> tuple[np.ndarray, int]:
    if N > 1 and euler_phi(N) < N and num.size:
        num = num @ reduction_matrix(N)
    if not num.size or not num.any():
        return np.zeros(num.shape, dtype=np.int64), 1
    g = int(np.gcd.reduce(num.ravel()))
    g = math.gcd(g, den)
    if g > 1:
        num = num // g
        den //= g
    return num, den


def _hadamard(a: np.ndarray, b: np.ndarray, N: int) -> np.ndarray:
    a, b = np.broadcast_arrays(a, b)
    if N == 1:
        return a * b
    bound = _maxabs(a) * _maxabs(b) * N
    dtype = np.int64 if bound < 2**62 else object
    a = a.astype(dtype)
    b = b.astype(dtype)
    out = np.zeros(a.shape, dtype=dtype)
    for k in range(N):
        ak = a[..., k : k + 1]
        if np.any(ak):
            out = out + ak * np.roll(b, k, axis=-1)
    return out


def cyc_einsum(spec: str, a: CycArray, b: CycArray) -> CycArray:
    """Two-operand einsum over Q(zeta_N) (indices exclude the cyclotomic axis)."""
    ins, out = spec.replace(" ", "").split("->")
    sa, sb = ins.split(",")
    L = _lcm(a.N, b.N)
    a, b = a.lift(L), b.lift(L)
    sizes = {}
    for letters, arr in ((sa, a), (sb, b)):
        for ch, n in zip(letters, arr.shape):
            sizes[ch] = n
    contracted = set(sa) | set(sb)
    contracted -= set(out)
    K = math.prod(sizes[c] for c in contracted) if contracted else 1
    bound = _maxabs(a.num) * _maxabs(b.num) * K * L
    out_shape = tuple(sizes[c] for c in out) + (L,)
    if bound < _EXACT_FLOAT:
        an, bn = a.num.astype(np.float64), b.num.astype(np.float64)
        res = np.zeros(out_shape, dtype=np.float64)
        kw = {"optimize": True}
    else:
        an, bn = a.num.astype(object), b.num.astype(object)
        res = np.zeros(out_shape, dtype=object)
        kw = {"optimize": False}
    sub = f"{sa},{sb}Z->{out}Z"
    for k in range(L):
        ak = an[..., k]
        if not np.any(ak):
            continue
        part = np.einsum(sub, ak, bn, **kw)
        res = res + (np.roll(part, k, axis=-1) if k else part)
    if res.dtype == np.float64:
        res = np.rint(res).astype(np.int64)
    return CycArray(res, a.den * b.den, L)


def common_order(*items) -> int:
    """lcm of the cyclotomic orders of the given Scalars/CycArrays/ints."""
    ns = []
    for x in items:
        if isinstance(x, (Scalar, CycArray)):
            ns.append(x.N)
        elif isinstance(x, int):
            ns.append(x)
    return _lcm(*ns)


lcm = _lcm
