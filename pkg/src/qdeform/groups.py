"""Finite groups as multiplication tables, small finite fields, and the named
constructions used by the examples: semidirect products, S3, D4, the order-18
group (Z/3)^2 x| Z/2 and GL(2, F_q) with its diagonal torus."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .abelian import AbelianGroup, Endo
from .errors import InvalidAction, InvalidEmbedding, InvalidGroup, Unsupported


def _check_associative(table: np.ndarray, chunk: int = 16) -> tuple[int, int, int] | None:
    n = len(table)
    for start in range(0, n, chunk):
        a = np.arange(start, min(start + chunk, n))
        left = table[table[a]]  # [a, b, c] -> (ab)c
        right = np.take_along_axis(table[a][:, None, :], np.broadcast_to(table, (len(a), n, n)), axis=2)
        bad = np.argwhere(left != right)
        if len(bad):
            i, j, k = bad[0]
            return int(a[i]), int(j), int(k)
    return None


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """Group on indices ``0..order-1`` given by a multiplication table.

    ``table[a, b]`` is the index of the product ``a*b``.  Associativity,
    identity and inverses are checked on construction.
    """

    table: np.ndarray = field(repr=False)
    name: str = "G"
    labels: tuple | None = field(default=None, repr=False)
    generators: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        t = np.array(self.table, dtype=np.int64)
        n = len(t)
        if t.shape != (n, n) or n == 0:
            raise InvalidGroup("multiplication table must be a nonempty square array")
        if t.min() < 0 or t.max() >= n:
            raise InvalidGroup("table entries out of range")
        ids = [e for e in range(n) if np.array_equal(t[e], np.arange(n)) and np.array_equal(t[:, e], np.arange(n))]
        if len(ids) != 1:
            raise InvalidGroup("no two-sided identity")
        e = ids[0]
        if not all(np.sum(t[a] == e) == 1 for a in range(n)):
            raise InvalidGroup("some element lacks an inverse")
        inv = np.argmax(t == e, axis=1)
        if not np.all(t[inv, np.arange(n)] == e):
            raise InvalidGroup("left and right inverses differ")
        bad = _check_associative(t)
        if bad is not None:
            raise InvalidGroup(f"associativity fails at {bad}")
        t.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "table", t)
        object.__setattr__(self, "_identity", e)
        object.__setattr__(self, "_inverse", inv)

    @property
    def order(self) -> int:
        return len(self.table)

    @property
    def identity(self) -> int:
        return self._identity

    @property
    def inverse(self) -> np.ndarray:
        return self._inverse

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def element_order(self, g: int) -> int:
        k, x = 1, g
        while x != self.identity:
            x = self.table[x, g]
            k += 1
        return k

    @cached_property
    def conjugacy_classes(self) -> list[np.ndarray]:
        seen = np.zeros(self.order, bool)
        classes = []
        for x in range(self.order):
            if seen[x]:
                continue
            cls = np.unique(self.table[self.table[:, x], self.inverse])  # g x g^-1
            seen[cls] = True
            classes.append(cls)
        return classes

    def to_json(self) -> dict:
        return {"order": self.order, "table": self.table.tolist()}

    @classmethod
    def from_json(cls, data: dict, name: str = "G") -> "FiniteGroup":
        table = np.array(data["table"], dtype=np.int64)
        if "order" in data and int(data["order"]) != len(table):
            raise InvalidGroup("order does not match the table")
        return cls(table, name=name)


def conjugation_automorphism(G: FiniteGroup, g: int) -> np.ndarray:
    """Permutation x -> g x g^{-1} of element indices."""
    return G.table[G.table[g], G.inverse[g]]


group_automorphism_from_conjugation = conjugation_automorphism


def automorphism_order(perm: np.ndarray) -> int:
    k, p = 1, perm.copy()
    ident = np.arange(len(perm))
    while not np.array_equal(p, ident):
        p = perm[p]
        k += 1
    return k


def is_automorphism(G: FiniteGroup, perm) -> bool:
    perm = np.asarray(perm)
    if len(np.unique(perm)) != G.order:
        return False
    return bool(np.array_equal(perm[G.table], G.table[perm][:, perm]))


def cyclic_group(n: int) -> FiniteGroup:
    i = np.arange(n)
    return FiniteGroup((i[:, None] + i[None, :]) % n, name=f"Z/{n}")


def abelian_as_group(A: AbelianGroup) -> FiniteGroup:
    return FiniteGroup(A.add_table, name="+".join(f"Z/{n}" for n in A.factors) or "trivial")


@dataclass(frozen=True, eq=False)
class TorusEmbedding:
    """Injective homomorphism of an abelian group into a finite group.

    ``injection[i]`` is the G-index of the T-element with index i.
    """

    T: AbelianGroup
    G: FiniteGroup
    injection: np.ndarray

    def __post_init__(self):
        inj = np.array(self.injection, dtype=np.int64)
        if inj.shape != (self.T.order,):
            raise InvalidEmbedding(f"need {self.T.order} images, got {inj.shape}")
        if inj.min() < 0 or inj.max() >= self.G.order:
            raise InvalidEmbedding("image index out of range")
        if len(np.unique(inj)) != len(inj):
            raise InvalidEmbedding("embedding is not injective")
        lhs = inj[self.T.add_table]
        rhs = self.G.table[inj[:, None], inj[None, :]]
        if not np.array_equal(lhs, rhs):
            i, j = map(int, np.argwhere(lhs != rhs)[0])
            raise InvalidEmbedding(
                f"not a homomorphism at {self.T.element(i)}, {self.T.element(j)}"
            )
        inj.setflags(write=False)
        object.__setattr__(self, "injection", inj)

    def image(self, t) -> int:
        return int(self.injection[self.T.index(t)])

    def to_json(self) -> dict:
        return {"factors": list(self.T.factors), "injection": self.injection.tolist()}


def semidirect(
    N: AbelianGroup, K: FiniteGroup, action: Sequence[Endo] | Callable[[int], Endo], name: str = "N x| K"
) -> tuple[FiniteGroup, TorusEmbedding]:
    """N x|_action K with (n,k)(n',k') = (n + action_k(n'), kk').

    Element (n, k) has index ``n_index * |K| + k``.
    """
    acts = [action(k) for k in range(K.order)] if callable(action) else list(action)
    if len(acts) != K.order:
        raise InvalidAction("need one automorphism per element of K")
    for k, a in enumerate(acts):
        if a.group != N:
            raise InvalidAction(f"automorphism {k} acts on the wrong group")
    if acts[K.identity] != Endo.identity(N):
        raise InvalidAction("the identity of K must act trivially")
    for k in range(K.order):
        for k2 in range(K.order):
            if acts[k] @ acts[k2] != acts[K.mul(k, k2)]:
                raise InvalidAction(f"action_{k} o action_{k2} != action_{K.mul(k, k2)}")
    nN, nK = N.order, K.order
    tables = np.stack([a.table for a in acts])  # [k, n'] -> index of action_k(n')
    n_idx = np.repeat(np.arange(nN), nK)
    k_idx = np.tile(np.arange(nK), nN)
    moved = tables[k_idx[:, None], n_idx[None, :]]  # action_k(n')
    new_n = N.add_table[n_idx[:, None], moved]
    new_k = K.table[k_idx[:, None], k_idx[None, :]]
    G = FiniteGroup(new_n * nK + new_k, name=name)
    emb = TorusEmbedding(N, G, np.arange(nN) * nK + K.identity)
    return G, emb


def swap_action(n: int, k: int) -> list[Endo]:
    """Z/2 acting on (Z/n)^{2k} by exchanging coordinate j with j+k."""
    T = AbelianGroup((n,) * (2 * k))
    P = np.zeros((2 * k, 2 * k), dtype=np.int64)
    for j in range(k):
        P[j, j + k] = 1
        P[j + k, j] = 1
    return [Endo.identity(T), Endo(T, P)]


def swap_semidirect(n: int, k: int = 1) -> tuple[FiniteGroup, TorusEmbedding]:
    G, emb = semidirect(AbelianGroup((n,) * (2 * k)), cyclic_group(2), swap_action(n, k), name=f"(Z/{n})^{2 * k} x| Z/2")
    return G, emb


def order18() -> tuple[FiniteGroup, TorusEmbedding]:
    """(Z/3)^2 x| Z/2 with the coordinate swap."""
    return swap_semidirect(3, 1)


def d4() -> tuple[FiniteGroup, TorusEmbedding]:
    """The dihedral group of order 8 as (Z/2)^2 x| Z/2."""
    G, emb = swap_semidirect(2, 1)
    object.__setattr__(G, "name", "D4")
    return G, emb


def symmetric_s3() -> FiniteGroup:
    """S3 with composition (p q)(x) = p(q(x)); generators '3-cycle' and 'transposition'."""
    perms = [(0, 1, 2), (1, 2, 0), (2, 0, 1), (1, 0, 2), (0, 2, 1), (2, 1, 0)]
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(p[q[x]] for x in range(3))] for q in perms] for p in perms]
    return FiniteGroup(
        np.array(table), name="S3", labels=tuple(perms), generators={"3-cycle": 1, "transposition": 3}
    )


# ---------------------------------------------------------------------------
# finite fields

_IRREDUCIBLE = {4: (2, (1, 1, 1)), 8: (2, (1, 1, 0, 1)), 9: (3, (2, 1, 1))}  # low-to-high, monic


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


@dataclass(frozen=True, eq=False)
class FiniteField:
    """F_q with elements 0..q-1; element x encodes the polynomial with base-p digits of x."""

    q: int
    p: int
    degree: int
    modulus: tuple[int, ...]
    add: np.ndarray = field(repr=False)
    mul: np.ndarray = field(repr=False)
    generator: int = 0

    @property
    def neg(self) -> np.ndarray:
        return np.argmax(self.add == 0, axis=1)

    def power(self, x: int, k: int) -> int:
        r = 1
        for _ in range(k % (self.q - 1) if x else k):
            r = int(self.mul[r, x])
        return r


def _poly_mul_mod(a: list[int], b: list[int], p: int, modulus: tuple[int, ...]) -> list[int]:
    d = len(modulus) - 1
    prod = [0] * (2 * d)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] = (prod[i + j] + x * y) % p
    for i in range(len(prod) - 1, d - 1, -1):
        c = prod[i]
        if c:
            for j in range(d + 1):
                prod[i - d + j] = (prod[i - d + j] - c * modulus[j]) % p
    return prod[:d]


def make_field(q: int) -> FiniteField:
    if _is_prime(q):
        p, d, modulus = q, 1, (0, 1)
        i = np.arange(q)
        add = (i[:, None] + i[None, :]) % q
        mul = (i[:, None] * i[None, :]) % q
    elif q in _IRREDUCIBLE:
        p, modulus = _IRREDUCIBLE[q]
        d = len(modulus) - 1
        digits = [[(x // p**k) % p for k in range(d)] for x in range(q)]
        enc = lambda c: sum(v * p**k for k, v in enumerate(c))  # noqa: E731
        add = np.array([[enc([(a + b) % p for a, b in zip(digits[x], digits[y])]) for y in range(q)] for x in range(q)])
        mul = np.array([[enc(_poly_mul_mod(digits[x], digits[y], p, modulus)) for y in range(q)] for x in range(q)])
    else:
        raise Unsupported(f"q={q} is not a supported prime power (primes, 4, 8, 9)")
    _check_field(add, mul)
    gen = next(g for g in range(1, q) if _mult_order(mul, g) == q - 1) if q > 2 else 1
    return FiniteField(q, p, d, tuple(modulus), add, mul, gen)


def _mult_order(mul, g) -> int:
    k, x = 1, g
    while x != 1:
        x = mul[x, g]
        k += 1
    return k


def _check_field(add: np.ndarray, mul: np.ndarray) -> None:
    q = len(add)
    i = np.arange(q)
    ok = (
        np.array_equal(add[0], i)
        and np.array_equal(mul[1], i)
        and np.all(np.sort(add, axis=1) == i)
        and np.all(np.sort(mul[1:, 1:], axis=1) == i[1:])
        and np.array_equal(add, add.T)
        and np.array_equal(mul, mul.T)
    )
    if not ok:
        raise Unsupported("field tables fail the axioms")
    a, b, c = np.meshgrid(i, i, i, indexing="ij")
    if not np.array_equal(add[add[a, b], c], add[a, add[b, c]]):
        raise Unsupported("addition is not associative")
    if not np.array_equal(mul[mul[a, b], c], mul[a, mul[b, c]]):
        raise Unsupported("multiplication is not associative")
    if not np.array_equal(mul[a, add[b, c]], add[mul[a, b], mul[a, c]]):
        raise Unsupported("distributivity fails")


# ---------------------------------------------------------------------------
# GL(2, F_q)


def gl2(q: int) -> tuple[FiniteGroup, TorusEmbedding]:
    """GL(2, F_q) and its diagonal torus diag(g^a, g^b), T = (Z/(q-1))^2."""
    F = make_field(q)
    A, M = F.add, F.mul
    quads = np.indices((q, q, q, q)).reshape(4, -1).T
    a, b, c, d = quads.T
    det = A[M[a, d], F.neg[M[b, c]]]
    mats = quads[det != 0]
    n = len(mats)
    code = np.full(q**4, -1, np.int64)
    code[np.ravel_multi_index(mats.T, (q,) * 4)] = np.arange(n)
    a, b, c, d = (mats[:, k] for k in range(4))
    e, f, g, h = (x[None, :] for x in (a, b, c, d))
    a, b, c, d = (x[:, None] for x in (a, b, c, d))
    prod = np.stack([A[M[a, e], M[b, g]], A[M[a, f], M[b, h]], A[M[c, e], M[d, g]], A[M[c, f], M[d, h]]], axis=-1)
    table = code[np.ravel_multi_index(np.moveaxis(prod, -1, 0), (q,) * 4)]
    G = FiniteGroup(table, name=f"GL(2,{q})", labels=tuple(tuple(int(x) for x in m) for m in mats))
    T = AbelianGroup((q - 1, q - 1))
    powers = [F.power(F.generator, k) for k in range(q - 1)]
    inj = [
        code[np.ravel_multi_index((powers[x], 0, 0, powers[y]), (q,) * 4)]
        for x, y in T.elements
    ]
    return G, TorusEmbedding(T, G, np.array(inj))
