"""Deformation of *-algebras and finite quantum groups along an abelian action.

Given an action alpha of a finite abelian group H on A and J in End(H), the
deformed product is

    a x_J b = (1/|H|) sum_{s,t in H} <Js, t> alpha_s(a) alpha_t(b),

which on spectral components reduces to a_u x_J b_v = <J^{-1}u, v> a_u b_v.
For a quantum group A with a torus quotient pi: A -> C(T), the action is
alpha_{(s,u)} = lambda_s rho_u on H = T + T with J = S + (-S).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .abelian import (
    AbelianGroup,
    Endo,
    canonical_symplectic,
    check_action_tensor,
    fourier,
    invert_endo,
    is_skew_auto,
    spectral_decompose,
)
from .cyclotomic import CycArray, cyc_einsum
from .errors import (
    ActionCheckFailed,
    DimensionMismatch,
    InvalidAction,
    InvalidEndo,
    NotEquivariant,
    NotGroupLike,
    NotInvertible,
)
from .groups import FiniteGroup, TorusEmbedding
from .hopf import HopfAlgebra, HopfMorphism, StarAlgebra, components
from .sparse import CycTensor, contract, stack


# ---------------------------------------------------------------------------
# data


@dataclass(frozen=True, eq=False)
class DeformationDatum:
    """A torus T with a skew-symmetric automorphism S; H = T + T, J = S + (-S)."""

    T: AbelianGroup
    S: Endo

    def __post_init__(self):
        if self.S.group != self.T:
            raise InvalidEndo("S must be an endomorphism of T")
        flags = is_skew_auto(self.S)
        if not (flags.skew and flags.invertible):
            raise InvalidEndo(f"is_skew_auto(S) = {tuple(flags)}; need (True, True)")

    @classmethod
    def canonical(cls, T: AbelianGroup) -> "DeformationDatum":
        return cls(T, canonical_symplectic(T))

    @property
    def H(self) -> AbelianGroup:
        return self.T.direct_sum(self.T)

    @property
    def J(self) -> Endo:
        return self.S.direct_sum(-self.S)

    def negated(self) -> "DeformationDatum":
        return DeformationDatum(self.T, -self.S)

    def to_json(self) -> dict:
        return {"torus_factors": list(self.T.factors), "S": self.S.matrix.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "DeformationDatum":
        T = AbelianGroup(tuple(data["torus_factors"]))
        return cls(T, Endo(T, np.array(data["S"], dtype=np.int64)))


@dataclass(eq=False)
class ActionDatum:
    """alpha_s(e_i) = sum_j tensor[s, i, j] e_j for s in ``group`` (indexed as group.elements)."""

    group: AbelianGroup
    alg: StarAlgebra
    tensor: CycTensor
    verify: bool = True

    def __post_init__(self):
        d = self.alg.dim
        if self.tensor.shape != (self.group.order, d, d):
            raise DimensionMismatch(f"action tensor has shape {self.tensor.shape}")
        if self.verify:
            check_action_tensor(self.group, self.tensor)
            for g in self.group.generators():
                gi = self.group.index(g)
                problem = automorphism_defect(self.alg, self.tensor.select(0, gi))
                if problem:
                    raise InvalidAction(f"alpha_{tuple(int(x) for x in g)} is not a *-automorphism: {problem}")

    @property
    def N(self) -> int:
        return self.tensor.N

    def matrix(self, s) -> CycTensor:
        return self.tensor.select(0, self.group.index(s))

    def apply(self, s, a: CycTensor) -> CycTensor:
        return contract(a, self.matrix(s), [(0, 0)])

    def orbit(self, a: CycTensor) -> CycTensor:
        """(s, j): alpha_s(a) for every s."""
        return contract(a, self.tensor, [(0, 1)])

    def on(self, alg: StarAlgebra, verify: bool = True) -> "ActionDatum":
        """The same maps regarded as an action on another algebra on the same space."""
        return ActionDatum(self.group, alg, self.tensor, verify)

    @property
    def blocks(self) -> list[np.ndarray]:
        """Basis index sets closed under the product, the star and the action."""
        c = self.alg.structure.coords
        return components(self.alg.dim, [c[:, [0, 1]], c[:, [0, 2]], self.alg.star.coords, self.tensor.coords[:, 1:]])


def automorphism_defect(alg: StarAlgebra, M: CycTensor) -> str | None:
    """Why M fails to be a unital *-automorphism of ``alg`` (None if it is one)."""
    c, st = alg.structure, alg.star
    if not contract(alg.unit, M, [(0, 0)]).equals(alg.unit):
        return "not unital"
    if not contract(st, M, [(1, 0)]).equals(contract(M.conj(), st, [(1, 0)])):
        return "does not commute with the star"
    lhs = contract(c, M, [(2, 0)])  # (i, j, k)
    t = contract(M, c, [(1, 0)])  # (i, b, k)
    rhs = contract(M, t, [(1, 1)]).transpose(1, 0, 2)  # (i, j, k)
    if not lhs.equals(rhs):
        w = (lhs - rhs).coords[0]
        return f"not multiplicative at basis pair ({int(w[0])}, {int(w[1])})"
    return None


def build_action(A: HopfAlgebra, pi: HopfMorphism, datum: DeformationDatum, verify: bool = True) -> ActionDatum:
    """alpha_{(s,u)} = lambda_s rho_u with lambda_s = (E_{-s} pi (x) id)Delta and rho_u = (id (x) E_u pi)Delta."""
    T = datum.T
    if pi.target.dim != T.order:
        raise DimensionMismatch(f"pi lands in a space of dimension {pi.target.dim}, |T| = {T.order}")
    D, P = A.coproduct, pi.matrix  # P[x, t] = (E_t pi)(e_x)
    Pneg = P.relabel(1, T.neg_table).T  # (s, x) -> E_{-s} pi (e_x)
    lam = contract(Pneg, D, [(1, 1)])  # (s, i, y)
    rho = contract(P, D, [(0, 2)])  # (u, i, x)
    alpha = contract(lam, rho, [(1, 2)]).transpose(0, 2, 3, 1)  # (s, u, i, y) = sum_x rho[u,i,x] lam[s,x,y]
    nT, d = T.order, A.dim
    tensor = alpha.reshape((nT * nT, d, d))
    if verify:
        # lambda and rho commute
        other = contract(rho, lam, [(2, 1)]).transpose(2, 0, 1, 3).reshape((nT * nT, d, d))
        if not other.equals(tensor):
            w = (other - tensor).coords[0]
            s, u = divmod(int(w[0]), nT)
            raise ActionCheckFailed(f"lambda_s and rho_u do not commute", (T.element(s), T.element(u)))
        try:
            check_action_tensor(datum.H, tensor)
        except InvalidAction as exc:
            raise ActionCheckFailed(str(exc), None) from exc
        H = datum.H
        for k in range(H.order):
            problem = automorphism_defect(A.alg, tensor.select(0, k))
            if problem:
                s, u = divmod(k, nT)
                raise ActionCheckFailed(f"alpha_(s,u) {problem}", (T.element(s), T.element(u)))
    return ActionDatum(datum.H, A.alg, tensor, verify=False)


def torus_action(CT: HopfAlgebra, datum: DeformationDatum, verify: bool = True) -> ActionDatum:
    """The action of T + T on C(T) itself (pi = identity)."""
    pi = HopfMorphism(CT, CT, CycTensor.identity(CT.dim, CT.N))
    return build_action(CT, pi, datum, verify)


# ---------------------------------------------------------------------------
# deformed products


def _pair_weights(H: AbelianGroup, J: Endo) -> np.ndarray:
    """w[s, t] = exponent of <Js, t>."""
    return H.pairing_table[J.table]


def deform_product_direct(action: ActionDatum, J: Endo, a: CycTensor, b: CycTensor) -> CycTensor:
    """(1/|H|) sum_{s,t} <Js,t> alpha_s(a) alpha_t(b), summed literally."""
    H = action.group
    n = H.order
    A = action.alg
    oa, ob = action.orbit(a), action.orbit(b)  # (s, j)
    idx = np.indices((n, n)).reshape(2, -1).T
    W = CycTensor.from_entries((n, n), idx, _pair_weights(H, J).ravel(), N=H.exponent)
    wb = contract(W, ob, [(1, 0)])  # (s, j) = sum_t <Js,t> alpha_t(b)
    prods = A.mul_batch(oa, wb)  # (s, k)
    return prods.sum_axes([0]).scale(Fraction(1, n))


def deform_product_spectral(action: ActionDatum, J: Endo, a: CycTensor, b: CycTensor) -> CycTensor:
    """sum_{u,v} <J^{-1}u, v> a_u b_v."""
    Jinv = invert_endo(J)
    H = action.group
    n = H.order
    au = spectral_decompose(action, a)  # (u, j)
    bv = spectral_decompose(action, b)
    W = CycTensor.from_entries((n, n), np.indices((n, n)).reshape(2, -1).T, _pair_weights(H, Jinv).ravel(), N=H.exponent)
    wb = contract(W, bv, [(1, 0)])  # (u, j) = sum_v <J^{-1}u, v> b_v
    return action.alg.mul_batch(au, wb).sum_axes([0])


def spectral_components(action: ActionDatum, idx: np.ndarray) -> CycTensor:
    """(u, i, x): spectral components of the basis elements ``idx``, restricted to ``idx``."""
    sub = action.tensor.restrict(1, idx).restrict(2, idx)
    return fourier(action.group, sub)


def _dense(t: CycTensor) -> CycArray:
    return t.to_dense()


def deformed_structure(action: ActionDatum, J: Endo) -> CycTensor:
    """Structure tensor of A_J, block by block.

    c_J[i, j, k] = sum_u sum_{x,y} P[u, i, x] alpha_{J^{-1}u}[j, y] c[x, y, k], where P
    holds the spectral components of the basis.  Sparse block structures are
    contracted entry by entry, dense ones in two einsum steps.
    """
    Jinv = invert_endo(J)
    H = action.group
    A = action.alg
    d = A.dim
    pieces = []
    for blk in action.blocks:
        m = len(blk)
        P = spectral_components(action, blk)
        us = np.unique(P.coords[:, 0])
        P = P.restrict(0, us)
        aJ = action.tensor.restrict(1, blk).restrict(2, blk).restrict(0, Jinv.table[us])
        cb = A.block_structure(blk)
        Pd, aJd = _dense(P), _dense(aJ)
        U = len(us)
        if cb.nnz * m * m * U <= 2 * U * m**4:
            xs, ys, ks = cb.coords.T
            R = cyc_einsum("uie,uje->ije", CycArray(Pd.num[:, :, xs], Pd.den, Pd.N), CycArray(aJd.num[:, :, ys], aJd.den, aJd.N))
            V = CycTensor((cb.nnz, m), np.stack([np.arange(cb.nnz), ks], 1), cb.num, cb.den, cb.N)
            block = cyc_einsum("ije,ek->ijk", R, _dense(V))
        else:
            t1 = cyc_einsum("uix,xyk->uiyk", Pd, _dense(cb))
            block = cyc_einsum("uiyk,ujy->ijk", t1, aJd)
        bt = CycTensor.from_dense(block)
        pieces.append(CycTensor((d, d, d), blk[bt.coords], bt.num, bt.den, bt.N))
    out = pieces[0]
    for p in pieces[1:]:
        out = out + p
    return out


def deform_algebra(
    A: StarAlgebra, action: ActionDatum, J: Endo, verify: bool = True, name: str | None = None, provenance=None
) -> StarAlgebra:
    """A_J: same space, star and unit; product x_J."""
    if action.alg is not A:
        action = action.on(A, verify=False)
    structure = deformed_structure(action, J)
    return A.with_structure(structure, name=name or f"{A.name}_J", verify=verify, provenance=provenance)


def deform_quantum_group(
    A: HopfAlgebra, pi: HopfMorphism, datum: DeformationDatum, verify: bool = True, action: ActionDatum | None = None
) -> HopfAlgebra:
    """(A_J, Delta): deformed product, with coproduct, counit, antipode and Haar state unchanged."""
    if action is None:
        action = build_action(A, pi, datum, verify=verify)
    prov = dict(A.alg.provenance)
    prov.update({"deformation": datum.to_json()})
    alg = deform_algebra(A.alg, action, datum.J, verify=verify, name=f"{A.name}_J", provenance=prov)
    return A.replace(verify=verify, alg=alg)


# ---------------------------------------------------------------------------
# homogeneous witnesses


@dataclass
class CommutatorWitness:
    u: tuple
    v: tuple
    a: CycTensor
    b: CycTensor
    phase_exponent: int  # <2 J^{-1} u, v> = zeta^phase_exponent
    ab: CycTensor
    ba: CycTensor


def noncommutativity_witness(action: ActionDatum, J: Endo, AJ: StarAlgebra) -> CommutatorWitness | None:
    """Homogeneous a in A_u, b in A_v with a x_J b = <2J^{-1}u, v> b x_J a != b x_J a.

    Requires the undeformed algebra to be commutative.  Returns None when the
    phase is trivial for every pair with a b != 0.
    """
    H = action.group
    Jinv = invert_endo(J)
    A = action.alg
    N = H.exponent
    for blk in action.blocks:
        P = spectral_components(action, blk)
        us = np.unique(P.coords[:, 0])
        comps = {}
        for u in us:
            rows = P.select(0, int(u))
            i = int(rows.coords[0, 0])
            comps[int(u)] = rows.select(0, i).embed(0, blk, A.dim)
        for u in us:
            for v in us:
                e = 2 * int(H.pair_exponent(H.elements[Jinv.table[u]], H.elements[v])) % N
                if e == 0:
                    continue
                a, b = comps[int(u)], comps[int(v)]
                ab0 = A.mul(a, b)
                if ab0.is_zero():
                    continue
                ab, ba = AJ.mul(a, b), AJ.mul(b, a)
                return CommutatorWitness(H.element(int(u)), H.element(int(v)), a, b, e, ab, ba)
    return None


# ---------------------------------------------------------------------------
# deformed C*-norm


@dataclass
class NormContext:
    """Precomputed data for ||a||_J: the operator of a on E = C(H) (x) A.

    On E the deformed product by a~(z) = alpha_z(a) acts by
    (L f)(x) = (1/|H|) sum_{y,z} <J(x - z), x - y> alpha_z(a) f(y),
    with A's original product.  The Hilbert structure is
    <f, g> = (1/|H|) sum_x phi(f(x)^* g(x)) with phi the normalized trace of the
    left regular representation (a faithful state).
    """

    action: ActionDatum
    J: Endo
    weights: np.ndarray = field(init=False, repr=False)
    left: np.ndarray = field(init=False, repr=False)
    root: np.ndarray = field(init=False, repr=False)
    root_inv: np.ndarray = field(init=False, repr=False)
    orbit: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        H = self.action.group
        A = self.action.alg
        n, d = H.order, A.dim
        el = H.elements
        diff = H.add_table[:, H.neg_table]  # diff[x, y] = index of x - y
        Jd = self.J.table[diff]  # J(x - z)
        N = H.exponent
        ex = H.pairing_table[Jd[:, None, :], diff[:, :, None]]  # [x, y, z]
        self.weights = np.exp(2j * np.pi * ex / N) / n
        c = A.structure.to_complex()  # c[i, j, k]
        self.left = np.transpose(c, (0, 2, 1))  # left[i] acts on column vectors: (e_i v)_k = sum_j c[i,j,k] v_j
        tr = np.trace(self.left, axis1=1, axis2=2) / d  # phi(e_i)
        st = A.star.to_complex()
        # Gram W[j, k] = phi(e_j^* e_k)
        prod_phi = np.tensordot(c, tr, axes=(2, 0))  # phi(e_a e_k)
        W = st @ prod_phi
        W = 0.5 * (W + W.conj().T)
        vals, vecs = np.linalg.eigh(W)
        if vals.min() <= 0:
            raise ValueError("the regular trace is not faithful on this algebra")
        self.root = (vecs * np.sqrt(vals)) @ vecs.conj().T
        self.root_inv = (vecs / np.sqrt(vals)) @ vecs.conj().T
        self.orbit = self.action.tensor.to_complex()  # (z, i, j)

    def operator(self, a: np.ndarray) -> np.ndarray:
        """Matrix of L_a~ on E in an orthonormal frame, shape (|H| d, |H| d)."""
        H = self.action.group
        n = H.order
        d = self.action.alg.dim
        az = np.einsum("i,zij->zj", a, self.orbit)  # alpha_z(a)
        Lz = np.tensordot(az, self.left, axes=(1, 0))  # (z, k, j)
        big = (self.weights.reshape(n * n, n) @ Lz.reshape(n, d * d)).reshape(n, n, d, d)
        big = self.root @ big @ self.root_inv
        return big.transpose(0, 2, 1, 3).reshape(n * d, n * d)

    def norm(self, a) -> float:
        a = _as_complex(a)
        if not np.any(a):
            return 0.0
        M = self.operator(a)
        return _spectral_norm(M)


def _as_complex(a) -> np.ndarray:
    if isinstance(a, CycTensor):
        return a.to_complex()
    return np.asarray(a, dtype=complex)


def _spectral_norm(M: np.ndarray) -> float:
    from scipy.sparse.linalg import svds

    if M.shape[0] <= 200:
        return float(np.linalg.norm(M, 2))
    try:
        s = svds(M, k=1, which="LM", tol=1e-12, return_singular_vectors=False, random_state=0)
        return float(s[0])
    except Exception:  # ARPACK convergence trouble: fall back to a dense SVD
        return float(np.linalg.norm(M, 2))


def deformed_norm(action: ActionDatum, J: Endo, a, context: NormContext | None = None) -> float:
    ctx = context or NormContext(action, J)
    return ctx.norm(a)


def regular_norm(alg: StarAlgebra, a) -> float:
    """C*-norm of a via left multiplication on L^2(alg, phi), phi the regular trace."""
    c = alg.structure.to_complex()
    d = alg.dim
    left = np.transpose(c, (0, 2, 1))
    tr = np.trace(left, axis1=1, axis2=2) / d
    st = alg.star.to_complex()
    W = st @ np.tensordot(c, tr, axes=(2, 0))
    W = 0.5 * (W + W.conj().T)
    vals, vecs = np.linalg.eigh(W)
    root = (vecs * np.sqrt(vals)) @ vecs.conj().T
    root_inv = (vecs / np.sqrt(vals)) @ vecs.conj().T
    La = np.tensordot(_as_complex(a), left, axes=(0, 0))
    return float(np.linalg.norm(root @ La @ root_inv, 2))


# ---------------------------------------------------------------------------
# morphisms


@dataclass
class AlgebraMorphism:
    """Linear map theta(e_i) = sum_j matrix[i, j] f_j between *-algebras."""

    source: StarAlgebra
    target: StarAlgebra
    matrix: CycTensor
    unital: bool = True

    def apply(self, a: CycTensor) -> CycTensor:
        return contract(a, self.matrix, [(a.ndim - 1, 0)])

    def rank(self) -> int:
        from .linalg import rank

        return rank(self.matrix.T)

    def kernel_dim(self) -> int:
        return self.source.dim - self.rank()


def check_equivariant(M: CycTensor, src: ActionDatum, tgt: ActionDatum) -> None:
    if src.group != tgt.group:
        raise NotEquivariant("the two actions are by different groups")
    lhs = contract(src.tensor, M, [(2, 0)])  # theta(alpha_s(e_i))
    rhs = contract(M, tgt.tensor, [(1, 1)]).transpose(1, 0, 2)  # alpha_s(theta(e_i))
    if not lhs.equals(rhs):
        s, i, _ = (int(x) for x in (lhs - rhs).coords[0])
        raise NotEquivariant(f"theta alpha_s != alpha_s theta at s={src.group.element(s)}, e_{i}")


def deform_morphism(theta, src: ActionDatum, tgt: ActionDatum, J: Endo, source_J=None, target_J=None, verify=True):
    """The same linear map, now between the deformed algebras (or quantum groups)."""
    check_equivariant(theta.matrix, src, tgt)
    if isinstance(theta, HopfMorphism):
        sJ = source_J or theta.source.replace(alg=deform_algebra(theta.source.alg, src, J), verify=verify)
        tJ = target_J or theta.target.replace(alg=deform_algebra(theta.target.alg, tgt, J), verify=verify)
        out = HopfMorphism(sJ, tJ, theta.matrix)
        coalg = True
    else:
        sJ = source_J or deform_algebra(theta.source, src, J, verify=verify)
        tJ = target_J or deform_algebra(theta.target, tgt, J, verify=verify)
        out = AlgebraMorphism(sJ, tJ, theta.matrix, theta.unital)
        coalg = False
    if verify:
        from .analyze import verify_morphism

        report = verify_morphism(out, coalgebra=coalg, unital=getattr(theta, "unital", True))
        if not report.ok:
            f = report.first_failure()
            raise NotEquivariant(f"deformed map fails {f.name}: {f.witness}")
    return out


def pullback_inclusion(A: StarAlgebra, CT: StarAlgebra, emb: TorusEmbedding) -> AlgebraMorphism:
    """C(T) -> C(G), delta_t -> delta_{iota(t)}: extension by zero (non-unital)."""
    n = emb.T.order
    M = CycTensor.from_entries((n, A.dim), np.stack([np.arange(n), emb.injection], 1))
    return AlgebraMorphism(CT, A, M, unital=False)


# ---------------------------------------------------------------------------
# dual picture: the twist


@dataclass
class Twist:
    """F = (1/|T|) sum_{s,t} <Ss, t> s (x) t in B (x) B and its inverse."""

    B: HopfAlgebra
    T: AbelianGroup
    S: Endo
    images: np.ndarray
    F: CycTensor
    F_inv: CycTensor

    @property
    def is_trivial(self) -> bool:
        return self.F.equals(contract(self.B.alg.unit, self.B.alg.unit))


def group_like_images(B: HopfAlgebra, emb) -> np.ndarray:
    images = np.asarray(emb.injection if isinstance(emb, TorusEmbedding) else emb, dtype=np.int64)
    likes = set(B.group_likes())
    bad = [int(i) for i in images if int(i) not in likes]
    if bad:
        raise NotGroupLike(f"basis elements {bad[:5]} are not group-like")
    return images


def twist_element(B: HopfAlgebra, emb, S: Endo, verify: bool = True) -> Twist:
    from .analyze import tensor_mul2, tensor_star2

    T = S.group
    images = group_like_images(B, emb)
    if len(images) != T.order:
        raise DimensionMismatch(f"{len(images)} images for a torus of order {T.order}")
    n, d = T.order, B.dim
    ii, jj = np.indices((n, n)).reshape(2, -1)
    ex = T.pairing_table[S.table[ii], jj]
    F = CycTensor.from_entries((d, d), np.stack([images[ii], images[jj]], 1), ex, den=n, N=T.exponent)
    # F^{-1} = (1/|T|) sum_{u,v} <Su, v> u^{-1} (x) v
    Finv = CycTensor.from_entries((d, d), np.stack([images[T.neg_table[ii]], images[jj]], 1), ex, den=n, N=T.exponent)
    tw = Twist(B, T, S, images, F, Finv)
    if verify:
        A = B.alg
        one = contract(A.unit, A.unit)
        if not tensor_mul2(A, F, Finv).equals(one) or not tensor_mul2(A, Finv, F).equals(one):
            raise NotGroupLike("F F^{-1} != 1 (x) 1: the images do not multiply like T")
        Fs = tensor_star2(A, F)
        if not tensor_mul2(A, Fs, F).equals(one) or not tensor_mul2(A, F, Fs).equals(one):
            raise NotGroupLike("F is not unitary")
        eps = B.counit
        for ax in (0, 1):
            if not contract(F, eps, [(ax, 0)]).equals(A.unit):
                raise NotGroupLike("counit condition on F fails")
    return tw


def _conjugate_rows(c: CycTensor, F: CycTensor, F_inv: CycTensor, D: CycTensor) -> CycTensor:
    """Rows F Delta(e_i) F^{-1} for a (n, x, y) stack of coproduct rows."""
    t = contract(D, F)  # (i, x', y', x, y)
    t = contract(t, c, [(3, 0), (1, 1)])  # (i, y', y, p)
    Z = contract(t, c, [(2, 0), (1, 1)])  # (i, p, q)
    t = contract(Z, F_inv)  # (i, p, q, x, y)
    t = contract(t, c, [(1, 0), (3, 1)])  # (i, q, y, r)
    return contract(t, c, [(1, 0), (2, 1)])  # (i, r, s)


def twist_coproduct(B: HopfAlgebra, tw: Twist, verify: bool = True, rows_per_chunk: int = 32) -> HopfAlgebra:
    """Delta_F(b) = F Delta(b) F^{-1}."""
    c = B.alg.structure
    d = B.dim
    parts = []
    for start in range(0, d, rows_per_chunk):
        rows = np.arange(start, min(d, start + rows_per_chunk))
        part = _conjugate_rows(c, tw.F, tw.F_inv, B.coproduct.restrict(0, rows))
        parts.append(CycTensor((d, d, d), part.coords + np.array([start, 0, 0]), part.num, part.den, part.N))
    DJ = parts[0]
    for p in parts[1:]:
        DJ = DJ + p
    alg = B.alg
    prov = dict(alg.provenance)
    prov["twist"] = {"torus_factors": list(tw.T.factors), "S": tw.S.matrix.tolist()}
    alg = StarAlgebra(alg.structure, alg.star, alg.unit, alg.labels, f"{alg.name}^S", verify=False, provenance=prov)
    return B.replace(verify=verify, alg=alg, coproduct=DJ)


def quadruple_sum_coproduct(G: FiniteGroup, emb: TorusEmbedding, S: Endo, g: int) -> dict:
    """Twisted coproduct of the group element g in C*(G), summed over (s, t, u, v) in T^4.

    (1/|T|^2) sum <Ss,t> <Su,v>^{-1} (s g u^{-1}) (x) (t g v^{-1}), as {(x, y): {zeta_exp: count}}.
    """
    T = S.group
    n = T.order
    N = T.exponent
    inj = emb.injection
    out: dict = {}
    for s in range(n):
        for t in range(n):
            e1 = T.pairing_table[S.table[s], t]
            for u in range(n):
                left = G.table[G.table[inj[s], g], G.inverse[inj[u]]]
                for v in range(n):
                    e = (e1 - T.pairing_table[S.table[u], v]) % N
                    right = G.table[G.table[inj[t], g], G.inverse[inj[v]]]
                    slot = out.setdefault((int(left), int(right)), {})
                    slot[int(e)] = slot.get(int(e), 0) + 1
    return out


def quadruple_sum_tensor(G: FiniteGroup, emb: TorusEmbedding, S: Endo, g: int) -> CycTensor:
    T = S.group
    terms = quadruple_sum_coproduct(G, emb, S, g)
    coords, exps, weights = [], [], []
    for (x, y), slot in terms.items():
        for e, cnt in slot.items():
            coords.append((x, y))
            exps.append(e)
            weights.append(cnt)
    return CycTensor.from_entries(
        (G.order, G.order), np.array(coords), np.array(exps), np.array(weights), den=T.order**2, N=T.exponent
    )


# ---------------------------------------------------------------------------
# numerical C*-norm battery

CSTAR_RTOL = 1e-6
SUBMULT_SLACK = 1e-9


def norm_battery(action: ActionDatum, J: Endo, AJ: StarAlgebra, samples: int = 50, seed: int = 0) -> dict:
    """Unit, faithfulness, C*-identity, submultiplicativity and the L^1 bound for ||.||_J."""
    ctx = NormContext(action, J)
    A = action.alg
    d = A.dim
    cJ = AJ.structure.to_complex()
    st = AJ.star.to_complex()
    orbit = ctx.orbit
    rng = np.random.default_rng(seed)

    def mulJ(a, b):
        return np.einsum("i,j,ijk->k", a, b, cJ)

    def star(a):
        return np.conj(a) @ st

    unit = ctx.norm(AJ.unit.to_complex())
    basis = [ctx.norm(np.eye(d)[i]) for i in range(d)]
    cstar = submult = l1_ratio = 0.0
    for _ in range(samples):
        a = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        b = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        na, nb = ctx.norm(a), ctx.norm(b)
        cstar = max(cstar, abs(ctx.norm(mulJ(star(a), a)) - na * na) / (na * na))
        submult = max(submult, (ctx.norm(mulJ(a, b)) - na * nb) / (na * nb))
        l1 = np.mean([regular_norm(A, a @ orbit[s]) for s in range(len(orbit))])
        l1_ratio = max(l1_ratio, na / l1)
    # the L^1 bound is reported separately: it is not implied by the C*-axioms
    passed = abs(unit - 1) <= CSTAR_RTOL and min(basis) > 1e-6 and cstar <= CSTAR_RTOL and submult <= SUBMULT_SLACK
    return {
        "unit_norm": unit,
        "min_basis_norm": min(basis),
        "samples": samples,
        "max_cstar_relative_error": cstar,
        "max_submultiplicativity_relative_excess": submult,
        "l1_bound_holds": bool(l1_ratio <= 1 + SUBMULT_SLACK),
        "max_l1_ratio": l1_ratio,
        "passed": bool(passed),
    }
