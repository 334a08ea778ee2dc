"""End-to-end acceptance checks, one test group per criterion.

Each test records its parts through the ``criterion`` fixture; the terminal
summary prints one PASS/FAIL line per criterion.  Claims that the exact
computation refutes keep their original assertion and are marked strict xfail.
"""
import json
import time

import numpy as np
import pytest

from qdeform import analyze
from qdeform.abelian import AbelianGroup, Endo, is_bijective, is_homogeneous
from qdeform.cli import main
from qdeform.cyclotomic import Scalar
from qdeform.deform import (
    ActionDatum,
    deform_algebra,
    deform_morphism,
    deform_product_direct,
    deform_product_spectral,
    noncommutativity_witness,
    norm_battery,
    torus_action,
)
from qdeform.groups import conjugation_automorphism, cyclic_group, d4, gl2, symmetric_s3
from qdeform.hopf import crossed_product_algebra, dual_hopf, group_hopf
from qdeform.sparse import CycTensor, contract

from conftest import build_case


def _random_element(rng, d, lo=-3, hi=4):
    v = rng.integers(lo, hi, d)
    nz = np.nonzero(v)[0]
    return CycTensor.from_entries((d,), nz[:, None], weights=v[nz])


# -- 1 -------------------------------------------------------------------------


def test_criterion_01_order18_construction(o18, criterion, capsys, tmp_path):
    t0 = time.perf_counter()
    code = main(["example", "order18", "--skip-norm", "--format", "json", "--out", str(tmp_path / "r.json")])
    elapsed = time.perf_counter() - t0
    capsys.readouterr()
    report = json.loads((tmp_path / "r.json").read_text())
    rep = analyze.verify_hopf(o18.AJ)
    fl = analyze.flags(o18.AJ)
    criterion(1, "CLI exit code 0", code == 0, f"exit {code}")
    criterion(1, "dim 18", report["dim"] == 18 and o18.AJ.dim == 18)
    criterion(1, "all Hopf axioms exact", rep.ok and all(a["passed"] for a in report["axioms"]),
              f"{len(rep.results)} axioms")
    criterion(1, "noncommutative, noncocommutative", fl == analyze.Flags(False, False))
    criterion(1, "runtime < 30 s", elapsed < 30, f"{elapsed:.1f} s")
    assert code == 0
    assert rep.ok, rep.first_failure()
    assert all(r.mode == "exhaustive" for r in rep.results if r.name != "haar_positive")
    assert (report["commutative"], report["cocommutative"]) == (False, False)
    assert fl == analyze.Flags(False, False)
    assert elapsed < 30


# -- 2 -------------------------------------------------------------------------


def _s3_by_z3():
    S3 = symmetric_s3()
    rot = S3.generators["3-cycle"]
    powers = [S3.identity, rot, S3.mul(rot, rot)]
    tau = [conjugation_automorphism(S3, g) for g in powers]
    return crossed_product_algebra(S3, cyclic_group(3), tau)


def test_criterion_02_crossed_product(criterion):
    X = _s3_by_z3()
    res = analyze.wedderburn(X, return_details=True)
    ok = res.dims == [1] * 9 + [3] and analyze.center_dim(X) == 10 and res.residual < 1e-6
    criterion(2, "C(S3) x| Z/3 = {1^9, 3}, center 10", ok, f"{res.dims}, residual {res.residual:.1e}")
    assert res.dims == [1] * 9 + [3]
    assert analyze.center_dim(X) == 10
    assert res.residual < 1e-6


@pytest.mark.xfail(strict=True, reason="the order-18 group with the swap action is Z/3 x S3: 9 classes, not 6")
def test_criterion_02_group_algebra(o18, criterion):
    CG = o18.B.alg
    res = analyze.wedderburn(CG, return_details=True)
    z = analyze.center_dim(CG)
    criterion(2, "C*(G18) = {1,1,2,2,2,2}, center 6", res.dims == [1, 1, 2, 2, 2, 2] and z == 6,
              f"computed {res.dims}, center {z}")
    assert res.residual < 1e-6
    assert res.dims == [1, 1, 2, 2, 2, 2]
    assert z == 6


# -- 3 -------------------------------------------------------------------------


@pytest.mark.parametrize("case", ["o18", "gl2_4"])
def test_criterion_03_involutivity(case, request, criterion):
    c = request.getfixturevalue(case)
    back = deform_algebra(c.algJ, c.action.on(c.algJ, verify=False), c.datum.negated().J, verify=False)
    ok = back.structure.equals(c.A.alg.structure)
    criterion(3, f"(A_J)_-J = A for {case}", ok)
    assert ok


# -- 4 -------------------------------------------------------------------------


def test_criterion_04_order18_all_triples(o18, criterion):
    c = o18.algJ.structure.to_dense()
    from qdeform.cyclotomic import cyc_einsum

    lhs = cyc_einsum("ijm,mkl->ijkl", c, c)
    rhs = cyc_einsum("jkm,iml->ijkl", c, c)
    ok = (lhs - rhs).is_zero() and analyze.check_associativity(o18.algJ).passed
    criterion(4, "order 18: all 5832 triples", ok)
    assert ok


def _linear_characters(G):
    """Homomorphisms G -> Z/2 as 0/1 vectors."""
    out = []
    for mask in range(1 << G.order):
        chi = np.array([(mask >> g) & 1 for g in range(G.order)])
        if chi[G.identity] == 0 and np.array_equal(chi[G.table], (chi[:, None] + chi[None, :]) % 2):
            out.append(chi)
    return out


def dihedral_character_action(H: AbelianGroup):
    """C*(D4) with H = Z/4 + Z/4 acting through its reduction mod 2 onto the linear characters."""
    G, _ = d4()
    B = group_hopf(G)
    chars = _linear_characters(G)
    assert len(chars) == 4
    c1, c2 = chars[1], [ch for ch in chars[2:] if not np.array_equal(ch, (chars[1] + chars[1]) % 2)][0]
    coords, exps = [], []
    for hi, (h1, h2) in enumerate(H.elements):
        chi = (h1 * c1 + h2 * c2) % 2
        for g in range(G.order):
            coords.append((hi, g, g))
            exps.append(2 * chi[g])  # -1 = zeta_4^2
    tensor = CycTensor.from_entries((H.order, G.order, G.order), np.array(coords), np.array(exps), N=4)
    return ActionDatum(H, B.alg, tensor)


def test_criterion_04_noninvertible_J(criterion):
    t0 = time.perf_counter()
    H = AbelianGroup((4, 4))
    action = dihedral_character_action(H)
    A = action.alg
    rng = np.random.default_rng(7)
    Js = []
    while len(Js) < 5:
        M = rng.integers(0, 4, (2, 2))
        J = Endo(H, M)
        if not is_bijective(J) and M.any() and not any(np.array_equal(M, K.matrix) for K in Js):
            Js.append(J)
    bad = 0
    nontrivial = 0
    for J in Js:
        for _ in range(40):
            a, b, c = (_random_element(rng, A.dim) for _ in range(3))
            ab = deform_product_direct(action, J, a, b)
            bc = deform_product_direct(action, J, b, c)
            lhs = deform_product_direct(action, J, ab, c)
            rhs = deform_product_direct(action, J, a, bc)
            bad += not lhs.equals(rhs)
            nontrivial += not ab.equals(A.mul(a, b))
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < 120
    criterion(4, "dim 8: 200 random triples, 5 non-invertible J", ok,
              f"{bad} failures, {nontrivial} deformed products differ from the original, {elapsed:.1f} s")
    assert nontrivial > 0  # the test algebra genuinely deforms
    assert bad == 0
    assert elapsed < 120


# -- 5 -------------------------------------------------------------------------


def test_criterion_05_order18_all_pairs(o18, criterion):
    A, AJ, J = o18.A.alg, o18.algJ, o18.datum.J
    bad = 0
    for i in range(18):
        for j in range(18):
            a, b = A.basis(i), A.basis(j)
            s = deform_product_spectral(o18.action, J, a, b)
            d = deform_product_direct(o18.action, J, a, b)
            bad += not (s.equals(d) and s.equals(AJ.product_of_basis(i, j)))
    criterion(5, "order 18: 324 basis pairs", bad == 0, f"{bad} mismatches")
    assert bad == 0


def test_criterion_05_gl2_q4_random_pairs(gl2_4, criterion, rng):
    # both products are bilinear, so basis pairs carry the full comparison
    c = gl2_4
    A, J = c.A.alg, c.datum.J
    d = A.dim
    flat = rng.choice(d * d, size=500, replace=False)
    bad = 0
    for i, j in zip(*np.divmod(flat, d)):
        a, b = A.basis(int(i)), A.basis(int(j))
        s = deform_product_spectral(c.action, J, a, b)
        dp = deform_product_direct(c.action, J, a, b)
        bad += not (s.equals(dp) and s.equals(c.algJ.product_of_basis(int(i), int(j))))
    criterion(5, "gl2(4): 500 random basis pairs", bad == 0, f"{bad} mismatches")
    assert bad == 0


# -- 6 -------------------------------------------------------------------------


def test_criterion_06_subgroup_preservation(o18, criterion):
    CT = o18.pi.target
    tact = torus_action(CT, o18.datum)
    CTJ = deform_algebra(CT.alg, tact, o18.datum.J)
    same = CTJ.structure.equals(CT.alg.structure)
    piJ = deform_morphism(o18.pi, o18.action, tact, o18.datum.J, source_J=o18.AJ)
    M = piJ.matrix
    lhs = contract(contract(o18.AJ.coproduct, M, [(1, 0)]), M, [(1, 0)])  # (pi (x) pi) Phi_J
    rhs = contract(M, CT.coproduct, [(1, 0)])  # Phi_T pi
    intertwines = lhs.equals(rhs)
    mult = analyze.verify_morphism(piJ).ok
    criterion(6, "C(T)_J = C(T)", same)
    criterion(6, "(pi_J (x) pi_J) Phi_J = Phi_T pi_J", intertwines and mult)
    assert same
    assert intertwines
    assert mult


# -- 7 -------------------------------------------------------------------------


def test_criterion_07_d4_trivial(criterion):
    c = build_case(*d4(), twist=False)
    ok = c.algJ.structure.equals(c.A.alg.structure)
    criterion(7, "C(D4)_J = C(D4)", ok)
    assert ok


@pytest.mark.parametrize("q", [2, 3])
def test_criterion_07_gl2_commutative(q, criterion):
    c = build_case(*gl2(q), twist=False)
    st = c.algJ.structure
    ok = st.equals(st.transpose(1, 0, 2))
    criterion(7, f"gl2({q})_J commutative (all products)", ok)
    assert ok


def _witness_ok(c, H):
    w = noncommutativity_witness(c.action, c.datum.J, c.algJ)
    if w is None:
        return False, "no witness"
    phase = Scalar.root(H.exponent, w.phase_exponent)
    rel = w.ab.equals(w.ba.mul_scalar(phase)) and not w.ab.equals(w.ba)
    homog = is_homogeneous(c.action, w.u, w.a) and is_homogeneous(c.action, w.v, w.b)
    return rel and homog, f"u={w.u}, v={w.v}, phase zeta_{H.exponent}^{w.phase_exponent}"


def test_criterion_07_gl2_q4_witness(gl2_4, criterion):
    ok, detail = _witness_ok(gl2_4, gl2_4.datum.H)
    nc = not gl2_4.algJ.is_commutative()
    criterion(7, "gl2(4)_J noncommutative with homogeneous witness", ok and nc, detail)
    assert nc
    assert ok


@pytest.mark.slow
def test_criterion_07_gl2_q5_witness(criterion):
    t0 = time.perf_counter()
    c = build_case(*gl2(5), twist=False)
    ok, detail = _witness_ok(c, c.datum.H)
    elapsed = time.perf_counter() - t0
    criterion(7, "gl2(5)_J noncommutative with homogeneous witness, < 5 min", ok and elapsed < 300,
              f"{detail}, {elapsed:.0f} s")
    assert c.A.dim == 480
    assert ok
    assert elapsed < 300


# -- 8 -------------------------------------------------------------------------


def test_criterion_08_twist(o18, criterion):
    B, tw, BS = o18.B, o18.tw, o18.BS
    A = B.alg
    one = contract(A.unit, A.unit)
    Fs = analyze.tensor_star2(A, tw.F)
    unitary = analyze.tensor_mul2(A, Fs, tw.F).equals(one) and analyze.tensor_mul2(A, tw.F, Fs).equals(one)
    counit = all(contract(tw.F, B.counit, [(ax, 0)]).equals(A.unit) for ax in (0, 1))
    # F^{-1} = (1/|T|) sum <Su, v> u^{-1} (x) v, assembled here from the group table
    T, S, inj, G = o18.emb.T, o18.S, o18.emb.injection, o18.G
    coords, exps = [], []
    for u in range(T.order):
        for v in range(T.order):
            coords.append((G.inverse[inj[u]], inj[v]))
            exps.append(T.pairing_table[S.table[u], v])
    Finv = CycTensor.from_entries((18, 18), np.array(coords), np.array(exps), den=T.order, N=T.exponent)
    inverse_ok = Finv.equals(tw.F_inv) and analyze.tensor_mul2(A, tw.F, Finv).equals(one)
    rep = analyze.verify_hopf(BS)
    coassoc = rep["coassociativity"].passed
    dual = analyze.duality_residual(o18.AJ, BS).passed
    criterion(8, "F unitary", unitary)
    criterion(8, "(eps (x) id)F = (id (x) eps)F = 1", counit)
    criterion(8, "F^-1 formula", inverse_ok)
    criterion(8, "F Phi F^-1 coassociative (and a Hopf algebra)", coassoc and rep.ok)
    criterion(8, "duality A_J <-> B^S over all 18^3 triples", dual)
    assert unitary and counit and inverse_ok
    assert coassoc and rep.ok
    assert dual


@pytest.mark.xfail(strict=True, reason="F is a bicharacter on the dual torus, hence an honest 2-cocycle")
def test_criterion_08_cocycle_residual(o18, criterion):
    r = analyze.cocycle_residual(o18.B, o18.tw.F)
    criterion(8, "cocycle_residual > 1e-3", r > 1e-3, f"residual {r:.3g}")
    assert r > 1e-3


# -- 9 -------------------------------------------------------------------------


@pytest.fixture(scope="module")
def battery(o18):
    t0 = time.perf_counter()
    out = norm_battery(o18.action, o18.datum.J, o18.algJ, samples=50, seed=0)
    out["elapsed"] = time.perf_counter() - t0
    return out


def test_criterion_09_norm_battery(battery, criterion):
    b = battery
    criterion(9, "||1||_J = 1", abs(b["unit_norm"] - 1) <= 1e-6, f"{b['unit_norm']:.12f}")
    criterion(9, "C*-identity within 1e-6", b["max_cstar_relative_error"] <= 1e-6,
              f"{b['max_cstar_relative_error']:.1e}")
    criterion(9, "submultiplicative within 1e-9", b["max_submultiplicativity_relative_excess"] <= 1e-9,
              f"{b['max_submultiplicativity_relative_excess']:.1e}")
    criterion(9, "faithful on the basis", b["min_basis_norm"] > 1e-6, f"min {b['min_basis_norm']:.3f}")
    criterion(9, "runtime < 3 min", b["elapsed"] < 180, f"{b['elapsed']:.0f} s")
    assert abs(b["unit_norm"] - 1) <= 1e-6
    assert b["max_cstar_relative_error"] <= 1e-6
    assert b["max_submultiplicativity_relative_excess"] <= 1e-9
    assert b["min_basis_norm"] > 1e-6
    assert b["elapsed"] < 180


@pytest.mark.xfail(strict=True, reason="||a||_J exceeds the normalized Haar average of ||alpha_s(a)||")
def test_criterion_09_l1_bound(battery, criterion):
    criterion(9, "||a||_J <= (1/|H|) sum ||alpha_s(a)||", battery["l1_bound_holds"],
              f"max ratio {battery['max_l1_ratio']:.3f}")
    assert battery["l1_bound_holds"]


# -- 10 ------------------------------------------------------------------------


def test_criterion_10_haar_invariance(o18, criterion):
    AJ = o18.AJ
    D, h, unit = AJ.coproduct, AJ.haar, AJ.alg.unit
    left = contract(D, h, [(1, 0)])  # (i, y): (h (x) id) Phi(e_i)
    right = contract(D, h, [(2, 0)])
    target = contract(h, unit)  # h(e_i) 1
    ok = left.equals(target) and right.equals(target)
    criterion(10, "(h (x) id)Phi_J = h(.)1 = (id (x) h)Phi_J on every basis element", ok)
    assert ok


# -- 11 ------------------------------------------------------------------------


@pytest.mark.parametrize("case", ["o18", "gl2_4"])
def test_criterion_11_representation_ring(case, request, criterion):
    c = request.getfixturevalue(case)
    wa = analyze.wedderburn(dual_hopf(c.A, verify=False).alg)
    wj = analyze.wedderburn(dual_hopf(c.AJ, verify=False).alg)
    criterion(11, f"{case}: wedderburn(dual A) = wedderburn(dual A_J)", wa == wj, f"{len(wa)} blocks")
    assert wa == wj


# -- 12 ------------------------------------------------------------------------


def test_criterion_12_morphism_exactness(o18, criterion):
    CT = o18.pi.target
    tact = torus_action(CT, o18.datum)
    piJ = deform_morphism(o18.pi, o18.action, tact, o18.datum.J, source_J=o18.AJ)
    r, k = piJ.rank(), piJ.kernel_dim()
    ok = r == CT.dim == 9 and k == 9 and r + k == 18
    criterion(12, "pi_J surjective, kernel 9 + image 9 = 18", ok, f"rank {r}, kernel {k}")
    assert ok
