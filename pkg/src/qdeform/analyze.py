"""Verification and structural analysis of algebras and Hopf algebras.

Axiom checks are exact.  Each check runs over every basis element when the
work is small (dimension at most ``EXHAUSTIVE_DIM``, or for associativity,
every block of at most ``DENSE_BLOCK`` elements) and otherwise over a seeded
sample of basis indices; the mode is recorded in the result.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cyclotomic import cyc_einsum
from .errors import DecompositionUnstable, DimensionMismatch
from .linalg import kernel_dim, nullspace
from .sparse import CycTensor, contract, stack

EXHAUSTIVE_DIM = 64
DENSE_BLOCK = 40
DEFAULT_SAMPLES = 12
POSITIVITY_TOL = 1e-12
SPECTRAL_TOL = 1e-6


@dataclass
class AxiomResult:
    name: str
    passed: bool
    mode: str = "exhaustive"
    witness: dict | None = None

    def to_json(self) -> dict:
        out = {"name": self.name, "passed": self.passed, "mode": self.mode}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class AxiomReport:
    results: list[AxiomResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results)

    def first_failure(self) -> AxiomResult | None:
        return next((r for r in self.results if not r.passed), None)

    def __getitem__(self, name: str) -> AxiomResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def names(self) -> list[str]:
        return [r.name for r in self.results]

    def to_json(self) -> list[dict]:
        return [r.to_json() for r in self.results]


def _witness(diff: CycTensor, labels: Sequence[str]) -> dict | None:
    """First nonzero entry of a difference tensor, as a JSON-friendly dict."""
    if diff.is_zero():
        return None
    c = [int(x) for x in diff.coords[0]]
    v = diff.item(*c)
    return {"indices": dict(zip(labels, c)), "difference": str(v), "nonzero_entries": diff.nnz}


def _compare(name: str, lhs: CycTensor, rhs: CycTensor, labels, mode="exhaustive", index_maps=None) -> AxiomResult:
    diff = lhs - rhs
    w = _witness(diff, labels)
    if w is not None and index_maps:
        for lab, m in index_maps.items():
            if lab in w["indices"]:
                w["indices"][lab] = int(m[w["indices"][lab]])
    return AxiomResult(name, w is None, mode, w)


def _sample(n: int, k: int, rng) -> np.ndarray:
    if k >= n:
        return np.arange(n)
    return np.sort(rng.choice(n, size=k, replace=False))


# ---------------------------------------------------------------------------
# *-algebra axioms


def _assoc_dense(c: CycTensor) -> CycTensor:
    a = c.to_dense()
    lhs = cyc_einsum("ijm,mkl->ijkl", a, a)
    rhs = cyc_einsum("jkm,iml->ijkl", a, a)
    return CycTensor.from_dense(lhs - rhs)


def check_associativity(A, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> AxiomResult:
    rng = np.random.default_rng(seed)
    sampled = 0
    for blk in A.blocks:
        if len(blk) <= DENSE_BLOCK:
            diff = _assoc_dense(A.block_structure(blk))
            w = _witness(diff, ["i", "j", "k", "l"])
            if w is not None:
                for key in w["indices"]:
                    w["indices"][key] = int(blk[w["indices"][key]])
                return AxiomResult("associativity", False, "exhaustive", w)
            continue
        sampled += 1
        c = A.structure
        for i, j in zip(rng.choice(blk, samples), rng.choice(blk, samples)):
            cij = c.select(0, int(i)).select(0, int(j))  # (m)
            lhs = contract(cij, c, [(0, 0)])  # (k, l)
            cj = c.select(0, int(j))  # (k, m)
            ci = c.select(0, int(i))  # (m, l)
            rhs = contract(cj, ci, [(1, 0)])  # (k, l)
            r = _compare("associativity", lhs, rhs, ["k", "l"])
            if not r.passed:
                r.witness["indices"].update({"i": int(i), "j": int(j)})
                r.mode = "sampled"
                return r
    mode = "exhaustive" if not sampled else f"blockwise; {sampled} large blocks sampled ({samples} pairs each)"
    return AxiomResult("associativity", True, mode)


def check_unit(A) -> AxiomResult:
    eye = CycTensor.identity(A.dim, A.N)
    r = _compare("unit", A.left_matrix(A.unit), eye, ["j", "k"])
    if not r.passed:
        return r
    return _compare("unit", A.right_matrix(A.unit), eye, ["j", "k"])


def check_star_involutive(A) -> AxiomResult:
    twice = contract(A.star.conj(), A.star, [(1, 0)])
    return _compare("star_involutive", twice, CycTensor.identity(A.dim, A.N), ["i", "j"])


def check_star_antimultiplicative(A, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> AxiomResult:
    """(e_i e_j)^* = e_j^* e_i^*."""
    c, st = A.structure, A.star
    if A.dim <= EXHAUSTIVE_DIM or _is_monomial(st):
        lhs = contract(c.conj(), st, [(2, 0)])  # (i, j, l)
        t = contract(st, c, [(1, 1)])  # (i, a, l) = sum_b star[i,b] c[a,b,l]
        rhs = contract(st, t, [(1, 1)]).transpose(1, 0, 2)  # sum_a star[j,a] t[i,a,l]
        return _compare("star_antimultiplicative", lhs, rhs, ["i", "j", "l"])
    rng = np.random.default_rng(seed)
    idx = _sample(A.dim, samples, rng)
    ci = c.restrict(0, idx)
    lhs = contract(ci.conj(), st, [(2, 0)])
    t = contract(st.restrict(0, idx), c, [(1, 1)])
    rhs = contract(st, t, [(1, 1)]).transpose(1, 0, 2)
    return _compare("star_antimultiplicative", lhs, rhs, ["i", "j", "l"], f"sampled ({len(idx)} rows)", {"i": idx})


def _is_monomial(t: CycTensor) -> bool:
    return t.nnz == t.shape[0] and len(np.unique(t.coords[:, 0])) == t.shape[0]


def verify_algebra(A, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> AxiomReport:
    return AxiomReport(
        [
            check_associativity(A, samples, seed),
            check_unit(A),
            check_star_involutive(A),
            check_star_antimultiplicative(A, samples, seed),
        ]
    )


# ---------------------------------------------------------------------------
# tensor powers


def tensor_mul2(A, X: CycTensor, Y: CycTensor) -> CycTensor:
    """Product of two elements of A (x) A, given as (x, y) coefficient matrices."""
    c = A.structure
    t = contract(X, Y)  # (x, y, x', y')
    t = contract(t, c, [(0, 0), (2, 1)])  # (y, y', p)
    return contract(t, c, [(0, 0), (1, 1)])  # (p, q)


def tensor_mul3(A, X: CycTensor, Y: CycTensor) -> CycTensor:
    c = A.structure
    t = contract(X, Y)  # (x, y, z, x', y', z')
    t = contract(t, c, [(0, 0), (3, 1)])  # (y, z, y', z', p)
    t = contract(t, c, [(0, 0), (2, 1)])  # (z, z', p, q)
    return contract(t, c, [(0, 0), (1, 1)])  # (p, q, r)


def tensor_star2(A, X: CycTensor) -> CycTensor:
    st = A.star
    t = contract(X.conj(), st, [(0, 0)])  # (y, p)
    return contract(t, st, [(0, 0)])  # (p, q)


def _delta_products(H, I: np.ndarray, Jx: np.ndarray) -> tuple[CycTensor, CycTensor]:
    """Delta(e_i e_j) and Delta(e_i)Delta(e_j) for i in I, j in Jx, as (i, j, p, q)."""
    c, D = H.alg.structure, H.coproduct
    cij = c.restrict(0, I).restrict(1, Jx)
    lhs = contract(cij, D, [(2, 0)])  # (i, j, x, y)
    Di = D.restrict(0, I)
    Dj = D.restrict(0, Jx)
    t = contract(Di, c, [(1, 0)])  # (i, y, x', p)
    t = contract(t, Dj, [(2, 1)])  # (i, y, p, j, y')
    t = contract(t, c, [(1, 0), (4, 1)])  # (i, p, j, q)
    return lhs, t.transpose(0, 2, 1, 3)


# ---------------------------------------------------------------------------
# Hopf axioms


def verify_hopf(H, samples: int = DEFAULT_SAMPLES, seed: int = 0, include_algebra: bool = True) -> AxiomReport:
    A = H.alg
    d = H.dim
    c, D, eps, K, h = A.structure, H.coproduct, H.counit, H.antipode, H.haar
    unit = A.unit
    eye = CycTensor.identity(d, H.N)
    rng = np.random.default_rng(seed)
    small = d <= EXHAUSTIVE_DIM
    results: list[AxiomResult] = []
    if include_algebra:
        results += verify_algebra(A, samples, seed).results

    # coassociativity
    idx = np.arange(d) if small else _sample(d, samples, rng)
    mode = "exhaustive" if small else f"sampled ({len(idx)} elements)"
    Di = D.restrict(0, idx)
    lhs = contract(Di, D, [(1, 0)]).transpose(0, 2, 3, 1)  # (i, p, q, y)
    rhs = contract(Di, D, [(2, 0)])  # (i, x, q, r)
    results.append(_compare("coassociativity", lhs, rhs, ["i", "x", "y", "z"], mode, {"i": idx}))

    # counit law
    left = contract(D, eps, [(1, 0)])
    right = contract(D, eps, [(2, 0)])
    r = _compare("counit", left, eye, ["i", "j"])
    results.append(r if not r.passed else _compare("counit", right, eye, ["i", "j"]))

    # Delta is a unital *-homomorphism
    results.append(_compare("coproduct_unital", contract(unit, D, [(0, 0)]), contract(unit, unit), ["x", "y"]))
    if small:
        I = Jx = np.arange(d)
        mode = "exhaustive"
    else:
        I = _sample(d, max(2, samples // 3), rng)
        Jx = _sample(d, max(2, samples // 3), rng)
        mode = f"sampled ({len(I)}x{len(Jx)} pairs)"
    lhs, rhs = _delta_products(H, I, Jx)
    results.append(_compare("coproduct_multiplicative", lhs, rhs, ["i", "j", "p", "q"], mode, {"i": I, "j": Jx}))
    lhs = contract(A.star, D, [(1, 0)])  # Delta(e_i^*)
    t = contract(D.conj(), A.star, [(1, 0)])  # (i, y, p)
    rhs = contract(t, A.star, [(1, 0)])  # (i, p, q)
    results.append(_compare("coproduct_star", lhs, rhs, ["i", "p", "q"]))

    # counit is a unital *-character
    lhs = contract(c.restrict(0, idx), eps, [(2, 0)])
    rhs = contract(eps.restrict(0, idx), eps)
    results.append(_compare("counit_multiplicative", lhs, rhs, ["i", "j"], mode if not small else "exhaustive", {"i": idx}))
    e1 = contract(unit, eps, [(0, 0)])
    results.append(AxiomResult("counit_unital", e1.nnz == 1 and e1.item() == 1, "exhaustive",
                               None if (e1.nnz == 1 and e1.item() == 1) else {"value": str(e1.item() if e1.nnz else 0)}))
    results.append(_compare("counit_star", contract(A.star, eps, [(1, 0)]), eps.conj(), ["i"]))

    # antipode law m(kappa (x) id)Delta = eps 1 = m(id (x) kappa)Delta
    target = contract(eps.restrict(0, idx), unit)
    t = contract(Di, K, [(1, 0)])  # (i, y, a)
    left = contract(t, c, [(2, 0), (1, 1)])  # (i, k)
    t = contract(Di, K, [(2, 0)])  # (i, x, b)
    right = contract(t, c, [(1, 0), (2, 1)])
    r = _compare("antipode", left, target, ["i", "k"], mode if not small else "exhaustive", {"i": idx})
    results.append(r if not r.passed else _compare("antipode", right, target, ["i", "k"], r.mode, {"i": idx}))

    # kappa(ab) = kappa(b) kappa(a)
    lhs = contract(c.restrict(0, idx), K, [(2, 0)])  # (i, j, l)
    t = contract(K.restrict(0, idx), c, [(1, 1)])  # (i, a, l) sum_b K[i,b] c[a,b,l]
    rhs = contract(K, t, [(1, 1)]).transpose(1, 0, 2)
    results.append(_compare("antipode_antimultiplicative", lhs, rhs, ["i", "j", "l"], r.mode, {"i": idx}))

    # Haar state
    h1 = contract(unit, h, [(0, 0)])
    ok = h1.nnz == 1 and h1.item() == 1
    results.append(AxiomResult("haar_normalized", ok, "exhaustive", None if ok else {"value": str(h1.item() if h1.nnz else 0)}))
    hu = contract(h, unit)
    r = _compare("haar_invariance", contract(D, h, [(2, 0)]), hu, ["i", "x"])
    results.append(r if not r.passed else _compare("haar_invariance", contract(D, h, [(1, 0)]), hu, ["i", "y"]))
    results.append(check_haar_positive(H))
    return AxiomReport(results)


def haar_gram(H) -> CycTensor:
    """G[i, j] = h(e_i^* e_j)."""
    A = H.alg
    hc = contract(A.structure, H.haar, [(2, 0)])  # (a, b)
    return contract(A.star, hc, [(1, 0)])


def check_haar_positive(H) -> AxiomResult:
    G = haar_gram(H)
    if not G.equals(G.T.conj()):
        return AxiomResult("haar_positive", False, "exhaustive", {"reason": "h(x^* y) is not Hermitian"})
    vals = np.linalg.eigvalsh(G.to_complex())
    ok = bool(vals.min() >= -POSITIVITY_TOL * max(1.0, abs(vals).max()))
    return AxiomResult("haar_positive", ok, "numeric eigenvalues", None if ok else {"min_eigenvalue": float(vals.min())})


# ---------------------------------------------------------------------------
# morphisms


def verify_morphism(
    theta, samples: int = DEFAULT_SAMPLES, seed: int = 0, coalgebra: bool = True, unital: bool = True
) -> AxiomReport:
    """theta(e_i) = sum_j M[i, j] f_j: multiplicative, *-preserving and (optionally)
    unital and intertwining the coproducts."""
    A, B, M = getattr(theta.source, "alg", theta.source), getattr(theta.target, "alg", theta.target), theta.matrix
    rng = np.random.default_rng(seed)
    small = A.dim <= EXHAUSTIVE_DIM
    idx = np.arange(A.dim) if small else _sample(A.dim, samples, rng)
    mode = "exhaustive" if small else f"sampled ({len(idx)} rows)"
    res = []
    lhs = contract(A.structure.restrict(0, idx), M, [(2, 0)])  # theta(e_i e_j)
    Mi = M.restrict(0, idx)
    t = contract(Mi, B.structure, [(1, 0)])  # (i, b, q)
    rhs = contract(t, M, [(1, 1)]).transpose(0, 2, 1)  # (i, j, q)
    res.append(_compare("multiplicative", lhs, rhs, ["i", "j", "q"], mode, {"i": idx}))
    if unital:
        res.append(_compare("unital", contract(A.unit, M, [(0, 0)]), B.unit, ["q"]))
    lhs = contract(A.star, M, [(1, 0)])
    rhs = contract(M.conj(), B.star, [(1, 0)])
    res.append(_compare("star", lhs, rhs, ["i", "q"]))
    if coalgebra:
        DA, DB = theta.source.coproduct, theta.target.coproduct
        t = contract(DA, M, [(1, 0)])  # (i, y, p)
        lhs = contract(t, M, [(1, 0)])  # (i, p, q)
        rhs = contract(M, DB, [(1, 0)])
        res.append(_compare("coproduct", lhs, rhs, ["i", "p", "q"]))
    return AxiomReport(res)


# ---------------------------------------------------------------------------
# flags, center, Wedderburn


@dataclass(frozen=True)
class Flags:
    commutative: bool
    cocommutative: bool


def flags(H) -> Flags:
    return Flags(H.alg.is_commutative(), H.is_cocommutative())


def commutator_matrix(A) -> CycTensor:
    """Rows (i, k), columns j: c[j, i, k] - c[i, j, k]; its kernel is the center."""
    d = A.dim
    c = A.structure
    return (c.transpose(1, 2, 0) - c.transpose(0, 2, 1)).reshape((d * d, d))


def center_dim(A) -> int:
    return kernel_dim(commutator_matrix(A))


def center_basis_numeric(A) -> np.ndarray:
    """Orthonormal (numeric) basis of the exact center, rows are elements."""
    vecs = nullspace(commutator_matrix(A))
    k = center_dim(A)
    M = np.array([v.to_complex() for v in vecs])
    u, s, vh = np.linalg.svd(M, full_matrices=False)
    return vh[:k]


def _regular_matrices(A) -> np.ndarray:
    """Complex left-regular matrices L_i[j, k] for every basis element (dim^3 array)."""
    return A.structure.to_complex()


@dataclass
class WedderburnResult:
    dims: list[int]
    residual: float
    seed: int

    @property
    def center_dim(self) -> int:
        return len(self.dims)


def wedderburn(A, seed: int = 0, attempts: int = 3, return_details: bool = False):
    """Sorted block dimensions of the semisimple *-algebra A.

    Primitive central idempotents are the spectral projections of a random
    self-adjoint central element; the block size is sqrt(trace L_e).
    """
    Z = center_basis_numeric(A)
    k = len(Z)
    d = A.dim
    c = A.structure.to_complex() if d <= 200 else None
    st = A.star.to_complex()
    last = None
    for attempt in range(attempts):
        rng = np.random.default_rng(seed + attempt)
        coeffs = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        z = coeffs @ Z
        z = 0.5 * (z + np.conj(z) @ st)  # self-adjoint part, still central
        Lz = _left_mult(A, z, c)  # (j, k)
        # multiplication by z on the center, in the basis Z: Z @ Lz = M @ Z
        M = np.linalg.lstsq(Z.T, (Z @ Lz).T, rcond=None)[0].T
        # e = w Z is an eigenvector of multiplication by z iff w M = lambda w
        vals, vecs = np.linalg.eig(M.T)
        E = vecs.T @ Z  # candidate idempotents (unnormalized)
        dims, resid = [], 0.0
        for e in E:
            ee = e @ _left_mult(A, e, c)
            scale = np.vdot(e, ee) / np.vdot(e, e)
            e = e * (1 / scale) if abs(scale) > 1e-14 else e
            ee = e @ _left_mult(A, e, c)
            resid = max(resid, float(np.linalg.norm(ee - e) / max(1.0, np.linalg.norm(e))))
            tr = np.trace(_left_mult(A, e, c)).real
            di = int(round(math.sqrt(max(tr, 0.0))))
            resid = max(resid, abs(tr - di * di))
            dims.append(di)
        last = (sorted(dims), resid)
        if sum(x * x for x in dims) == d and min(dims) >= 1 and resid < SPECTRAL_TOL and len(set(np.round(vals, 8))) == k:
            res = WedderburnResult(sorted(dims), resid, seed + attempt)
            return res if return_details else res.dims
    raise DecompositionUnstable(f"no stable decomposition after {attempts} seeds (last {last})")


def _left_mult(A, a: np.ndarray, c: np.ndarray | None) -> np.ndarray:
    if c is not None:
        return np.tensordot(a, c, axes=(0, 0))
    import scipy.sparse as sp

    S = A.structure
    vals = S.complex_values() * a[S.coords[:, 0]]
    return sp.coo_matrix((vals, (S.coords[:, 1], S.coords[:, 2])), shape=(A.dim, A.dim)).toarray()


# ---------------------------------------------------------------------------
# twists and duality


def cocycle_residual(B, F: CycTensor) -> float:
    """|| (F (x) 1)(Delta (x) id)(F) - (1 (x) F)(id (x) Delta)(F) || in B^{(x)3}."""
    A = B.alg
    D = B.coproduct
    one = A.unit
    F1 = contract(F, one)  # (x, y, z)
    oneF = contract(one, F)  # (x, y, z)
    dF_left = contract(F, D, [(0, 0)]).transpose(1, 2, 0)  # (p, q, y)
    dF_right = contract(F, D, [(1, 0)])  # (x, q, r)
    lhs = tensor_mul3(A, F1, dF_left)
    rhs = tensor_mul3(A, oneF, dF_right)
    return (lhs - rhs).norm()


@dataclass
class DualityResult:
    passed: bool
    product_witness: dict | None
    coproduct_witness: dict | None

    def to_json(self) -> dict:
        return asdict(self)


def duality_residual(AJ, BS) -> DualityResult:
    """Check that the delta/group-element pairing identifies AJ with the dual of BS.

    (i) <a x_J b, x> = <a (x) b, Phi_J(x)>: structure of AJ equals the coproduct of BS, transposed;
    (ii) <Phi(a), x (x) y> = <a, x y>: coproduct of AJ equals the product of BS, transposed.
    """
    if AJ.dim != BS.dim:
        raise DimensionMismatch(f"dimensions {AJ.dim} and {BS.dim} differ")
    w1 = _witness(AJ.alg.structure - BS.coproduct.transpose(1, 2, 0), ["a", "b", "x"])
    w2 = _witness(AJ.coproduct - BS.alg.structure.transpose(2, 0, 1), ["a", "x", "y"])
    return DualityResult(w1 is None and w2 is None, w1, w2)


# ---------------------------------------------------------------------------
# report


SCHEMA = "qdeform/1"


def _round(x: float, nd: int = 9) -> float:
    return float(round(x, nd))


@dataclass
class DeformationReport:
    """Summary of a deformation run; serialized with a stable key order."""

    name: str
    dim: int
    axioms: AxiomReport
    commutative: bool
    cocommutative: bool
    wedderburn_dims: list[int]
    center_dim: int
    cocycle_residual: float | None = None
    trivial: bool | None = None
    undeformed: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    norms: dict | None = None
    provenance: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.axioms.ok and all(v is True or not isinstance(v, bool) for v in self.checks.values())

    def to_json(self, with_provenance: bool = True) -> dict:
        out = {
            "schema": SCHEMA,
            "name": self.name,
            "dim": self.dim,
            "ok": self.ok,
            "axioms": self.axioms.to_json(),
            "commutative": self.commutative,
            "cocommutative": self.cocommutative,
            "wedderburn_dims": list(self.wedderburn_dims),
            "center_dim": self.center_dim,
            "cocycle_residual": None if self.cocycle_residual is None else _round(self.cocycle_residual),
            "trivial_deformation": self.trivial,
            "undeformed": self.undeformed,
            "checks": self.checks,
            "norms": None if self.norms is None else {k: _round(v) if isinstance(v, float) else v for k, v in self.norms.items()},
            "notes": list(self.notes),
        }
        if with_provenance:
            out["provenance"] = self.provenance
        return out

    def dumps(self, with_provenance: bool = True) -> str:
        return json.dumps(self.to_json(with_provenance), indent=2)

    def render_text(self) -> str:
        lines = [f"{self.name}  (dim {self.dim})  {'PASS' if self.ok else 'FAIL'}", ""]
        width = max(len(r.name) for r in self.axioms.results) + 2
        for r in self.axioms.results:
            status = "pass" if r.passed else "FAIL"
            lines.append(f"  {r.name:<{width}}{status}  [{r.mode}]")
            if r.witness:
                lines.append(f"  {'':<{width}}witness {json.dumps(r.witness)}")
        lines.append("")
        lines.append(f"  commutative      {self.commutative}")
        lines.append(f"  cocommutative    {self.cocommutative}")
        lines.append(f"  center_dim       {self.center_dim}")
        lines.append(f"  wedderburn_dims  {self.wedderburn_dims}")
        if self.cocycle_residual is not None:
            lines.append(f"  cocycle_residual {self.cocycle_residual:.6g}")
        if self.trivial is not None:
            lines.append(f"  trivial_deformation {self.trivial}")
        for k, v in self.undeformed.items():
            lines.append(f"  undeformed.{k}  {v}")
        for k, v in self.checks.items():
            lines.append(f"  check.{k}  {v}")
        if self.norms:
            for k, v in self.norms.items():
                lines.append(f"  norm.{k}  {v}")
        for n in self.notes:
            lines.append(f"  note: {n}")
        return "\n".join(lines)
