"""Finite abelian groups, their canonical self-pairing, and endomorphisms.

A group ``Z/n_1 + ... + Z/n_l`` is stored by its cyclic factors.  Elements are
integer tuples (or ``(..., l)`` arrays); the element index used throughout the
package is the row-major ravel of the tuple with respect to ``factors``.

The pairing is ``<s,t> = zeta_N ** sum_k (N/n_k) s_k t_k`` with
``N = lcm(n_k)``.  Most routines work with the integer exponent (mod N)
rather than the Scalar itself.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .cyclotomic import Scalar, lcm
from .errors import InvalidAction, InvalidEndo, NotInvertible
from .sparse import CycTensor, contract


@dataclass(frozen=True)
class AbelianGroup:
    factors: tuple[int, ...]

    def __post_init__(self):
        f = tuple(int(n) for n in self.factors)
        if any(n < 1 for n in f):
            raise ValueError(f"cyclic factors must be >= 1, got {f}")
        object.__setattr__(self, "factors", f)

    # size -----------------------------------------------------------------
    @property
    def rank(self) -> int:
        return len(self.factors)

    @property
    def order(self) -> int:
        return int(np.prod(self.factors, dtype=np.int64)) if self.factors else 1

    @property
    def exponent(self) -> int:
        """lcm of the cyclic factors; the pairing takes values in Q(zeta_exponent)."""
        return lcm(*self.factors)

    @property
    def moduli(self) -> np.ndarray:
        return np.array(self.factors, dtype=np.int64)

    # elements -------------------------------------------------------------
    @cached_property
    def elements(self) -> np.ndarray:
        """All elements as an ``(order, rank)`` array, in index order."""
        if not self.factors:
            return np.zeros((1, 0), dtype=np.int64)
        grids = np.indices(self.factors).reshape(self.rank, -1).T
        return grids.astype(np.int64)

    def reduce(self, e) -> np.ndarray:
        return np.mod(np.asarray(e, dtype=np.int64), self.moduli)

    def index(self, e) -> np.ndarray | int:
        e = self.reduce(e)
        if not self.factors:
            return 0 if e.ndim == 1 else np.zeros(e.shape[0], np.int64)
        if e.ndim == 1:
            return int(np.ravel_multi_index(tuple(e), self.factors))
        return np.ravel_multi_index(e.T, self.factors)

    def element(self, i: int) -> tuple[int, ...]:
        return tuple(int(x) for x in self.elements[i])

    def zero(self) -> tuple[int, ...]:
        return (0,) * self.rank

    def add(self, s, t) -> np.ndarray:
        return self.reduce(np.asarray(s) + np.asarray(t))

    def neg(self, s) -> np.ndarray:
        return self.reduce(-np.asarray(s))

    def generators(self) -> np.ndarray:
        return np.eye(self.rank, dtype=np.int64)

    @cached_property
    def add_table(self) -> np.ndarray:
        """``add_table[i, j]`` = index of element_i + element_j."""
        e = self.elements
        return self.index((e[:, None, :] + e[None, :, :]).reshape(-1, self.rank)).reshape(self.order, self.order)

    @cached_property
    def neg_table(self) -> np.ndarray:
        return np.asarray(self.index(-self.elements), dtype=np.int64)

    def direct_sum(self, other: "AbelianGroup") -> "AbelianGroup":
        return AbelianGroup(self.factors + other.factors)

    # pairing --------------------------------------------------------------
    @property
    def pairing_weights(self) -> np.ndarray:
        N = self.exponent
        return np.array([N // n for n in self.factors], dtype=np.int64)

    def pair_exponent(self, s, t) -> np.ndarray | int:
        """Exponent e with <s,t> = zeta_N**e, vectorized over leading axes."""
        s = self.reduce(s)
        t = self.reduce(t)
        e = np.mod(np.sum(s * t * self.pairing_weights, axis=-1), self.exponent)
        return int(e) if np.ndim(e) == 0 else e

    def pair(self, s, t) -> Scalar:
        return Scalar.root(self.exponent, self.pair_exponent(s, t))

    @cached_property
    def pairing_table(self) -> np.ndarray:
        """``(order, order)`` matrix of pairing exponents."""
        e = self.elements
        return np.mod((e * self.pairing_weights) @ e.T, self.exponent)

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        return {"factors": list(self.factors)}

    @classmethod
    def from_json(cls, data: dict) -> "AbelianGroup":
        return cls(tuple(data["factors"]))


def cyclic_power(n: int, k: int) -> AbelianGroup:
    """(Z/n)^k."""
    return AbelianGroup((n,) * k)


@dataclass(frozen=True, eq=False)
class Endo:
    """Endomorphism of an :class:`AbelianGroup` as an integer matrix.

    Entry ``m[k, j]`` is the homomorphism ``Z/n_j -> Z/n_k``, ``x -> m[k, j] x``;
    it must satisfy ``n_k | m[k, j] * n_j``.
    """

    group: AbelianGroup
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.int64).reshape(self.group.rank, self.group.rank)
        n = self.group.moduli
        bad = (m * n[None, :]) % n[:, None]
        if np.any(bad):
            k, j = map(int, np.argwhere(bad)[0])
            raise InvalidEndo(
                f"entry ({k},{j})={m[k, j]} is not a homomorphism Z/{n[j]} -> Z/{n[k]}"
            )
        m = np.mod(m, n[:, None])
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def identity(cls, group: AbelianGroup) -> "Endo":
        return cls(group, np.eye(group.rank, dtype=np.int64))

    @classmethod
    def zero(cls, group: AbelianGroup) -> "Endo":
        return cls(group, np.zeros((group.rank, group.rank), dtype=np.int64))

    def act(self, e) -> np.ndarray:
        """Image of an element (or ``(..., rank)`` array of elements)."""
        e = np.asarray(e, dtype=np.int64)
        return self.group.reduce(e @ self.matrix.T)

    @cached_property
    def table(self) -> np.ndarray:
        """Index permutation/map: ``table[i]`` = index of J(element_i)."""
        return np.asarray(self.group.index(self.act(self.group.elements)), dtype=np.int64)

    def compose(self, other: "Endo") -> "Endo":
        """self o other."""
        _same_group(self, other)
        return Endo(self.group, self.matrix @ other.matrix)

    def __matmul__(self, other: "Endo") -> "Endo":
        return self.compose(other)

    def __neg__(self) -> "Endo":
        return Endo(self.group, -self.matrix)

    def __add__(self, other: "Endo") -> "Endo":
        _same_group(self, other)
        return Endo(self.group, self.matrix + other.matrix)

    def __eq__(self, other):
        return (
            isinstance(other, Endo)
            and self.group == other.group
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self):
        return hash((self.group, self.matrix.tobytes()))

    def __repr__(self):
        return f"Endo({list(self.group.factors)}, {self.matrix.tolist()})"

    def transpose(self) -> "Endo":
        return transpose(self)

    def direct_sum(self, other: "Endo") -> "Endo":
        r1, r2 = self.group.rank, other.group.rank
        m = np.zeros((r1 + r2, r1 + r2), dtype=np.int64)
        m[:r1, :r1] = self.matrix
        m[r1:, r1:] = other.matrix
        return Endo(self.group.direct_sum(other.group), m)

    def to_json(self) -> dict:
        return {"factors": list(self.group.factors), "matrix": self.matrix.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "Endo":
        return cls(AbelianGroup(tuple(data["factors"])), np.array(data["matrix"], dtype=np.int64))


def _same_group(a: Endo, b: Endo) -> None:
    if a.group != b.group:
        raise ValueError("endomorphisms of different groups")


def pair(H: AbelianGroup, s, t) -> Scalar:
    return H.pair(s, t)


def transpose(J: Endo) -> Endo:
    """The endomorphism J^t with <Js, t> = <s, J^t t>."""
    n = J.group.moduli
    m = J.matrix
    # (J^t)[j, k] = m[k, j] * n_j / n_k, exact by the hom constraint
    t = (m.T * n[:, None]) // n[None, :]
    return Endo(J.group, t)


class SkewFlags(NamedTuple):
    skew: bool
    invertible: bool


def is_bijective(J: Endo) -> bool:
    return len(np.unique(J.table)) == J.group.order


def is_skew_auto(J: Endo) -> SkewFlags:
    return SkewFlags(transpose(J) == -J, is_bijective(J))


def is_alternating(J: Endo) -> bool:
    """<Jx, x> = 1 for every x.

    Implied by skewness when |H| is odd. With 2-torsion a skew J can have
    <Jx, x> = -1, and then the deformed Haar functional is not positive.
    """
    H = J.group
    return not np.any(H.pair_exponent(J.act(H.elements), H.elements))


def invert_endo(J: Endo) -> Endo:
    """Inverse automorphism; raises NotInvertible if J is not a bijection."""
    if not is_bijective(J):
        raise NotInvertible(f"{J!r} is not a bijection")
    H = J.group
    inv = np.empty(H.order, dtype=np.int64)
    inv[J.table] = np.arange(H.order)
    cols = [H.elements[inv[H.index(e)]] for e in H.generators()]
    m = np.stack(cols, axis=1) if cols else np.zeros((0, 0), np.int64)
    return Endo(H, m)


def canonical_symplectic(T: AbelianGroup) -> Endo:
    """The block matrix [[0, I], [-I, 0]] on (Z/n)^{2k}."""
    if T.rank % 2 or len(set(T.factors)) > 1:
        raise InvalidEndo(f"canonical S needs (Z/n)^(2k), got factors {list(T.factors)}")
    k = T.rank // 2
    m = np.zeros((2 * k, 2 * k), dtype=np.int64)
    m[:k, k:] = np.eye(k, dtype=np.int64)
    m[k:, :k] = -np.eye(k, dtype=np.int64)
    return Endo(T, m)


# ---------------------------------------------------------------------------
# averaging and Fourier analysis


def haar_avg(H: AbelianGroup, f: Callable):
    """(1/|H|) sum_t f(t); values may be Scalars, CycTensors or CycArrays."""
    total = None
    for e in H.elements:
        v = f(tuple(int(x) for x in e))
        total = v if total is None else total + v
    if isinstance(total, (int, Fraction)):
        return Fraction(total) / H.order
    return total.scale(Fraction(1, H.order)) if hasattr(total, "scale") else total * Fraction(1, H.order)


def character_tensor(H: AbelianGroup, sign: int = 1) -> CycTensor:
    """``(u, s)`` tensor with entries <u,s>**sign."""
    n = H.order
    idx = np.indices((n, n)).reshape(2, -1).T
    return CycTensor.from_entries((n, n), idx, sign * H.pairing_table.ravel(), N=H.exponent)


def fourier(H: AbelianGroup, F: CycTensor) -> CycTensor:
    """hat F(u) = (1/|H|) sum_s <u,s>^{-1} F(s), along axis 0 of F."""
    out = contract(character_tensor(H, -1), F, [(1, 0)])
    return out.scale(Fraction(1, H.order))


def inverse_fourier(H: AbelianGroup, Fh: CycTensor) -> CycTensor:
    """F(s) = sum_u <u,s> hat F(u), along axis 0."""
    return contract(character_tensor(H, 1), Fh, [(0, 0)])


# ---------------------------------------------------------------------------
# spectral subspaces of an action
#
# An action is any object with ``group`` (AbelianGroup) and ``tensor``
# (CycTensor of shape (|H|, dim, dim), alpha_s(e_i) = sum_j tensor[s, i, j] e_j).


def check_action_tensor(group: AbelianGroup, tensor: CycTensor) -> None:
    """alpha_0 = id and alpha_{s+g} = alpha_s alpha_g on the generators g."""
    dim = tensor.shape[1]
    if tensor.shape[0] != group.order:
        raise InvalidAction(f"action has {tensor.shape[0]} maps, group order is {group.order}")
    if not tensor.select(0, group.index(group.zero())).equals(CycTensor.identity(dim, tensor.N)):
        raise InvalidAction("alpha_0 is not the identity")
    for g in group.generators():
        gi = group.index(g)
        ag = tensor.select(0, gi)
        # (alpha_g o alpha_s)(e_i) = sum_j tensor[s,i,j] alpha_g(e_j)
        composed = contract(tensor, ag, [(2, 0)])
        # entry at s+g moves to s
        target = tensor.relabel(0, group.add_table[:, group.index(group.neg(g))])
        if not composed.equals(target):
            bad = (composed - target).coords[0]
            raise InvalidAction(
                f"alpha_(s+g) != alpha_g alpha_s for s={group.element(int(bad[0]))}, g={tuple(int(x) for x in g)}"
            )


def spectral_decompose(action, a: CycTensor) -> CycTensor:
    """All spectral components of ``a``: tensor ``(u, j)`` with rows a_u."""
    H = action.group
    images = contract(a, action.tensor, [(0, 1)])  # (s, j)
    return fourier(H, images)


def spectral_project(action, u, a: CycTensor) -> CycTensor:
    """a_u = (1/|H|) sum_s <u,s>^{-1} alpha_s(a)."""
    H = action.group
    ui = H.index(u)
    images = contract(a, action.tensor, [(0, 1)])
    w = CycTensor.from_entries((H.order,), np.arange(H.order)[:, None], -H.pairing_table[ui], N=H.exponent)
    return contract(w, images, [(0, 0)]).scale(Fraction(1, H.order))


def is_homogeneous(action, u, a: CycTensor) -> bool:
    """alpha_s(a) = <u,s> a for every s."""
    H = action.group
    ui = H.index(u)
    images = contract(a, action.tensor, [(0, 1)])
    expected = contract(
        CycTensor.from_entries((H.order,), np.arange(H.order)[:, None], H.pairing_table[ui], N=H.exponent), a
    )
    return images.equals(expected)


def dumps(obj) -> str:
    return json.dumps(obj.to_json(), sort_keys=False)
