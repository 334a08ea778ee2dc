"""Finite-dimensional *-algebras and Hopf *-algebras with exact structure constants.

Conventions (all maps act on row vectors of basis coefficients):

* product:    e_i e_j = sum_k structure[i, j, k] e_k
* star:       e_i^* = sum_j star[i, j] e_j, extended conjugate-linearly
* coproduct:  Delta(e_i) = sum_{x,y} coproduct[i, x, y] e_x (x) e_y
* antipode:   kappa(e_i) = sum_j antipode[i, j] e_j
* counit, haar: coefficient vectors of the functionals on the basis
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .cyclotomic import Scalar, lcm
from .errors import AlgebraCheckFailed, HopfCheckFailed, InvalidAction
from .groups import FiniteGroup, TorusEmbedding, abelian_as_group, is_automorphism
from .linalg import kernel_dim, nullspace, rank
from .sparse import CycTensor, contract, stack


# ---------------------------------------------------------------------------
# *-algebras


def components(n: int, edge_lists) -> list[np.ndarray]:
    """Connected components of the graph on range(n) with the given (k, 2) edge arrays."""
    import scipy.sparse as sp
    from scipy.sparse.csgraph import connected_components

    edges = np.concatenate([np.asarray(e, dtype=np.int64).reshape(-1, 2) for e in edge_lists] or [np.zeros((0, 2), np.int64)])
    g = sp.coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
    _, labels = connected_components(g, directed=False)
    firsts = {}
    for i, l in enumerate(labels):
        firsts.setdefault(l, i)
    order = sorted(firsts, key=firsts.get)
    return [np.flatnonzero(labels == l) for l in order]


class StarAlgebra:
    """Finite-dimensional unital *-algebra over Q(zeta_N)."""

    def __init__(
        self,
        structure: CycTensor,
        star: CycTensor,
        unit: CycTensor,
        labels=None,
        name: str = "A",
        verify: bool = True,
        provenance: dict | None = None,
    ):
        dim = structure.shape[0]
        if structure.shape != (dim, dim, dim) or star.shape != (dim, dim) or unit.shape != (dim,):
            raise ValueError("inconsistent shapes for structure/star/unit")
        N = lcm(structure.N, star.N, unit.N)
        self.structure = structure.lift(N)
        self.star = star.lift(N)
        self.unit = unit.lift(N)
        self.dim = dim
        self.N = N
        self.labels = list(labels) if labels is not None else list(range(dim))
        self.name = name
        self.provenance = provenance or {}
        if verify:
            from .analyze import verify_algebra

            report = verify_algebra(self)
            if not report.ok:
                f = report.first_failure()
                raise AlgebraCheckFailed(f"{name}: {f.name} fails ({f.witness})", f.name, f.witness)

    def __repr__(self):
        return f"StarAlgebra({self.name!r}, dim={self.dim}, N={self.N})"

    # elements -------------------------------------------------------------
    def basis(self, i: int) -> CycTensor:
        return CycTensor.basis_vector(self.dim, i, self.N)

    def zero(self) -> CycTensor:
        return CycTensor.zeros((self.dim,), self.N)

    def mul(self, a: CycTensor, b: CycTensor) -> CycTensor:
        t = contract(a, self.structure, [(0, 0)])  # (j, k)
        return contract(b, t, [(0, 0)])

    def mul_batch(self, a: CycTensor, b: CycTensor) -> CycTensor:
        """Rowwise products of two ``(n, dim)`` stacks."""
        t = contract(a, self.structure, [(1, 0)])  # (p, j, k)
        return contract(t, b, [(1, 1)], batch=[(0, 0)])  # (p, k)

    def star_of(self, a: CycTensor) -> CycTensor:
        return contract(a.conj(), self.star, [(a.ndim - 1, 0)])

    def left_matrix(self, a: CycTensor) -> CycTensor:
        """L[j, k]: a e_j = sum_k L[j, k] e_k."""
        return contract(a, self.structure, [(0, 0)])

    def right_matrix(self, a: CycTensor) -> CycTensor:
        return contract(a, self.structure, [(0, 1)])

    def product_of_basis(self, i: int, j: int) -> CycTensor:
        return self.structure.select(0, i).select(0, j)

    # structure ------------------------------------------------------------
    def is_commutative(self) -> bool:
        return self.structure.equals(self.structure.transpose(1, 0, 2))

    def commutativity_witness(self):
        diff = self.structure - self.structure.transpose(1, 0, 2)
        if diff.is_zero():
            return None
        i, j, _ = (int(x) for x in diff.coords[0])
        return i, j

    @cached_property
    def blocks(self) -> list[np.ndarray]:
        """Index sets of the connected components of the structure support.

        Products of basis elements from different components vanish, so
        the algebra is the direct sum of the spans of the components.
        """
        c = self.structure.coords
        return components(self.dim, [c[:, [0, 1]], c[:, [0, 2]], self.star.coords])

    def block_structure(self, idx: np.ndarray) -> CycTensor:
        t = self.structure
        for ax in range(3):
            t = t.restrict(ax, idx)
        return t

    def with_structure(self, structure: CycTensor, name: str | None = None, verify: bool = True, provenance=None):
        return StarAlgebra(
            structure, self.star, self.unit, self.labels, name or self.name, verify=verify,
            provenance=provenance if provenance is not None else self.provenance,
        )

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        out = {
            "kind": "StarAlgebra",
            "name": self.name,
            "dim": self.dim,
            "zeta_order": self.N,
            "structure": tensor_to_json(self.structure),
            "star": tensor_to_json(self.star),
            "unit": tensor_to_json(self.unit),
        }
        if self.provenance:
            out["provenance"] = self.provenance
        return out

    @classmethod
    def from_json(cls, data: dict, verify: bool = True) -> "StarAlgebra":
        N = int(data["zeta_order"])
        dim = int(data["dim"])
        return cls(
            tensor_from_json(data["structure"], (dim,) * 3, N),
            tensor_from_json(data["star"], (dim, dim), N),
            tensor_from_json(data["unit"], (dim,), N),
            name=data.get("name", "A"),
            verify=verify,
            provenance=data.get("provenance"),
        )


# ---------------------------------------------------------------------------
# Hopf *-algebras


class HopfAlgebra:
    """Finite-dimensional Hopf *-algebra: algebra plus coproduct, counit, antipode, Haar state."""

    def __init__(
        self,
        alg: StarAlgebra,
        coproduct: CycTensor,
        counit: CycTensor,
        antipode: CycTensor,
        haar: CycTensor,
        verify: bool = True,
    ):
        d = alg.dim
        if coproduct.shape != (d, d, d) or counit.shape != (d,) or antipode.shape != (d, d) or haar.shape != (d,):
            raise ValueError("inconsistent shapes for the Hopf structure")
        N = lcm(alg.N, coproduct.N, counit.N, antipode.N, haar.N)
        self.alg = alg
        self.coproduct = coproduct.lift(N)
        self.counit = counit.lift(N)
        self.antipode = antipode.lift(N)
        self.haar = haar.lift(N)
        self.N = N
        self.verify_report = None
        if verify:
            from .analyze import verify_hopf

            report = verify_hopf(self)
            self.verify_report = report
            if not report.ok:
                f = report.first_failure()
                raise HopfCheckFailed(f"{alg.name}: {f.name} fails ({f.witness})", f.name, f.witness)

    @property
    def dim(self) -> int:
        return self.alg.dim

    @property
    def name(self) -> str:
        return self.alg.name

    def __repr__(self):
        return f"HopfAlgebra({self.name!r}, dim={self.dim}, N={self.N})"

    def replace(self, verify: bool = True, **kw) -> "HopfAlgebra":
        args = dict(
            alg=self.alg, coproduct=self.coproduct, counit=self.counit, antipode=self.antipode, haar=self.haar
        )
        args.update(kw)
        return HopfAlgebra(verify=verify, **args)

    # coalgebra helpers ---------------------------------------------------
    def delta(self, a: CycTensor) -> CycTensor:
        return contract(a, self.coproduct, [(0, 0)])

    def counit_of(self, a: CycTensor) -> Scalar:
        v = contract(a, self.counit, [(0, 0)])
        return v.item() if v.nnz else Scalar([0], self.N)

    def haar_of(self, a: CycTensor) -> Scalar:
        v = contract(a, self.haar, [(0, 0)])
        return v.item() if v.nnz else Scalar([0], self.N)

    def antipode_of(self, a: CycTensor) -> CycTensor:
        return contract(a, self.antipode, [(0, 0)])

    def is_cocommutative(self) -> bool:
        return self.coproduct.equals(self.coproduct.transpose(0, 2, 1))

    def group_likes(self) -> list[int]:
        """Basis indices i with Delta(e_i) = e_i (x) e_i and eps(e_i) = 1."""
        out = []
        for i in range(self.dim):
            d = self.coproduct.select(0, i)
            if d.nnz == 1 and tuple(d.coords[0]) == (i, i) and d.item(i, i) == 1 and self.counit.item(i) == 1:
                out.append(i)
        return out

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        out = self.alg.to_json()
        out["kind"] = "HopfAlgebra"
        out["zeta_order"] = self.N
        out["coproduct"] = tensor_to_json(self.coproduct)
        out["counit"] = tensor_to_json(self.counit)
        out["antipode"] = tensor_to_json(self.antipode)
        out["haar"] = tensor_to_json(self.haar)
        return out

    @classmethod
    def from_json(cls, data: dict, verify: bool = True) -> "HopfAlgebra":
        N = int(data["zeta_order"])
        dim = int(data["dim"])
        alg = StarAlgebra.from_json(data, verify=verify)
        return cls(
            alg,
            tensor_from_json(data["coproduct"], (dim,) * 3, N),
            tensor_from_json(data["counit"], (dim,), N),
            tensor_from_json(data["antipode"], (dim, dim), N),
            tensor_from_json(data["haar"], (dim,), N),
            verify=verify,
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json())


@dataclass
class HopfMorphism:
    """Linear map theta: source -> target, theta(e_i) = sum_j matrix[i, j] f_j."""

    source: HopfAlgebra
    target: HopfAlgebra
    matrix: CycTensor

    def apply(self, a: CycTensor) -> CycTensor:
        return contract(a, self.matrix, [(a.ndim - 1, 0)])

    def rank(self) -> int:
        return rank(self.matrix.T)

    def kernel_dim(self) -> int:
        return self.source.dim - self.rank()


# ---------------------------------------------------------------------------
# serialization of tensors
#
# Dense nested lists (one list of {"num","den","zeta_pow"} terms per entry)
# for small tensors; a sparse entry list above DENSE_JSON_LIMIT entries.

DENSE_JSON_LIMIT = 300_000


def tensor_to_json(t: CycTensor):
    from math import prod

    if prod(t.shape) <= DENSE_JSON_LIMIT:
        dense = np.empty(t.shape, dtype=object)
        for idx in np.ndindex(*t.shape):
            dense[idx] = []
        for c, s in t.entries():
            dense[c] = s.to_terms()
        return dense.tolist()
    return {"format": "sparse", "entries": [[*c, s.to_terms()] for c, s in t.entries()]}


def tensor_from_json(obj, shape, N: int) -> CycTensor:
    coords, scalars = [], []
    if isinstance(obj, dict):
        if obj.get("format") != "sparse":
            raise ValueError("unknown tensor format")
        for row in obj["entries"]:
            coords.append(row[:-1])
            scalars.append(Scalar.from_terms(row[-1], N))
    else:
        arr = np.empty(shape, dtype=object)
        _fill(arr, obj, ())
        for idx in np.ndindex(*shape):
            terms = arr[idx]
            if terms:
                coords.append(idx)
                scalars.append(Scalar.from_terms(terms, N))
    if not coords:
        return CycTensor.zeros(shape, N)
    return CycTensor.from_scalars(shape, np.array(coords, dtype=np.int64).reshape(-1, len(shape)), scalars, N)


def _fill(arr, obj, prefix):
    if len(prefix) == arr.ndim:
        arr[prefix] = obj
        return
    if len(obj) != arr.shape[len(prefix)]:
        raise ValueError("nested list does not match the declared dimensions")
    for i, sub in enumerate(obj):
        _fill(arr, sub, prefix + (i,))


# ---------------------------------------------------------------------------
# constructors


def function_hopf(G: FiniteGroup, verify: bool = True) -> HopfAlgebra:
    """C(G): delta functions, pointwise product, Delta(d_g) = sum_{ab=g} d_a (x) d_b."""
    n = G.order
    idx = np.arange(n)
    structure = CycTensor.from_entries((n, n, n), np.stack([idx, idx, idx], 1))
    star = CycTensor.identity(n)
    unit = CycTensor.from_entries((n,), idx[:, None])
    a, b = np.meshgrid(idx, idx, indexing="ij")
    co = CycTensor.from_entries((n, n, n), np.stack([G.table.ravel(), a.ravel(), b.ravel()], 1))
    counit = CycTensor.basis_vector(n, G.identity)
    antipode = CycTensor.from_entries((n, n), np.stack([idx, G.inverse], 1))
    haar = CycTensor.from_entries((n,), idx[:, None], den=n)
    alg = StarAlgebra(structure, star, unit, labels=G.labels, name=f"C({G.name})", verify=verify)
    return HopfAlgebra(alg, co, counit, antipode, haar, verify=verify)


def group_hopf(G: FiniteGroup, verify: bool = True) -> HopfAlgebra:
    """C*(G): group elements as basis, Delta(g) = g (x) g, g^* = g^{-1}."""
    n = G.order
    idx = np.arange(n)
    a, b = np.meshgrid(idx, idx, indexing="ij")
    structure = CycTensor.from_entries((n, n, n), np.stack([a.ravel(), b.ravel(), G.table.ravel()], 1))
    star = CycTensor.from_entries((n, n), np.stack([idx, G.inverse], 1))
    unit = CycTensor.basis_vector(n, G.identity)
    co = CycTensor.from_entries((n, n, n), np.stack([idx, idx, idx], 1))
    counit = CycTensor.from_entries((n,), idx[:, None])
    antipode = star
    haar = CycTensor.basis_vector(n, G.identity)
    alg = StarAlgebra(structure, star, unit, labels=G.labels, name=f"C*({G.name})", verify=verify)
    return HopfAlgebra(alg, co, counit, antipode, haar, verify=verify)


def two_sided_integral(H: HopfAlgebra) -> CycTensor:
    """The element L with a L = L a = eps(a) L, normalized by eps(L) = 1."""
    d = H.dim
    S = H.alg.structure
    eps = H.counit
    eye = CycTensor.identity(d, H.N)
    # rows (i, k): sum_j L_j c[i, j, k] - eps_i L_k, and the same with c[j, i, k]
    left = S.transpose(0, 2, 1).reshape((d * d, d)) - contract(eps, eye).reshape((d * d, d))
    right = S.transpose(1, 2, 0).reshape((d * d, d)) - contract(eps, eye).reshape((d * d, d))
    K = stack([left, right]).reshape((2 * d * d, d))
    if kernel_dim(K) != 1:
        raise HopfCheckFailed("two-sided integral is not unique", "integral", None)
    v = nullspace(K)[0]
    e = contract(v, eps, [(0, 0)])
    if e.nnz == 0:
        raise HopfCheckFailed("integral is annihilated by the counit", "integral", None)
    return v.mul_scalar(e.item().inverse())


def dual_hopf(H: HopfAlgebra, verify: bool = True) -> HopfAlgebra:
    """The dual Hopf *-algebra in the dual basis f_i(e_j) = delta_ij."""
    structure = H.coproduct.transpose(1, 2, 0)
    coproduct = H.alg.structure.transpose(2, 0, 1)
    antipode = H.antipode.T
    # f^*(a) = conj(f(kappa(a)^*))
    star = contract(H.antipode, H.alg.star.conj(), [(1, 0)]).T
    haar = two_sided_integral(H)
    alg = StarAlgebra(
        structure, star, H.counit, name=f"dual({H.name})", verify=verify,
        provenance={"dual_of": H.alg.provenance} if H.alg.provenance else None,
    )
    return HopfAlgebra(alg, coproduct, H.alg.unit, antipode, haar, verify=verify)


def restriction_morphism(A: HopfAlgebra, emb: TorusEmbedding, verify: bool = True) -> HopfMorphism:
    """pi: C(G) -> C(T), restriction of functions to the embedded torus."""
    CT = function_hopf(abelian_as_group(emb.T), verify=verify)
    n = emb.T.order
    M = CycTensor.from_entries((A.dim, n), np.stack([emb.injection, np.arange(n)], 1))
    return HopfMorphism(A, CT, M)


def crossed_product_algebra(G1: FiniteGroup, G2: FiniteGroup, tau, verify: bool = True) -> StarAlgebra:
    """C(G1) x|_tau G2 with basis d_g k (index g*|G2| + k).

    ``tau[k]`` is the permutation of G1 indices given by the automorphism
    tau_k; products (d_g k)(d_h k') = [g = tau_k(h)] d_g kk'.
    """
    n1, n2 = G1.order, G2.order
    perms = np.array([np.asarray(tau[k], dtype=np.int64) for k in range(n2)])
    if perms.shape != (n2, n1):
        raise InvalidAction("need one permutation of G1 per element of G2")
    for k in range(n2):
        if not is_automorphism(G1, perms[k]):
            raise InvalidAction(f"tau_{k} is not an automorphism of {G1.name}")
        for k2 in range(n2):
            if not np.array_equal(perms[k][perms[k2]], perms[G2.mul(k, k2)]):
                raise InvalidAction(f"tau_{k} tau_{k2} != tau_{G2.mul(k, k2)}")
    g = np.repeat(np.arange(n1), n2)
    k = np.tile(np.arange(n2), n1)
    # (d_g k)(d_h k') nonzero iff h = tau_k^{-1}(g)
    inv = np.argsort(perms, axis=1)
    rows, cols, outs = [], [], []
    for kp in range(n2):
        h = inv[k, g]
        rows.append(g * n2 + k)
        cols.append(h * n2 + kp)
        outs.append(g * n2 + G2.table[k, kp])
    coords = np.stack([np.concatenate(rows), np.concatenate(cols), np.concatenate(outs)], 1)
    d = n1 * n2
    structure = CycTensor.from_entries((d, d, d), coords)
    kinv = G2.inverse[k]
    star = CycTensor.from_entries((d, d), np.stack([g * n2 + k, perms[kinv, g] * n2 + kinv], 1))
    unit = CycTensor.from_entries((d,), (np.arange(n1) * n2 + G2.identity)[:, None])
    return StarAlgebra(structure, star, unit, name=f"C({G1.name}) x| {G2.name}", verify=verify)
