import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdeform import analyze
from qdeform.abelian import (
    AbelianGroup,
    Endo,
    invert_endo,
    is_alternating,
    is_homogeneous,
    is_skew_auto,
    spectral_project,
)
from qdeform.cyclotomic import Scalar
from qdeform.deform import (
    AlgebraMorphism,
    DeformationDatum,
    NormContext,
    build_action,
    deform_algebra,
    deform_morphism,
    deform_product_direct,
    deform_product_spectral,
    deform_quantum_group,
    noncommutativity_witness,
    pullback_inclusion,
    quadruple_sum_tensor,
    regular_norm,
    torus_action,
    twist_coproduct,
    twist_element,
)
from qdeform.cli import same_hopf_structure
from qdeform.errors import InvalidEndo, NotEquivariant, NotGroupLike
from qdeform.groups import abelian_as_group, d4, gl2, order18, swap_semidirect
from qdeform.hopf import HopfMorphism, dual_hopf, function_hopf, group_hopf, restriction_morphism
from qdeform.sparse import CycTensor, contract

from conftest import build_case
import oracles


def oracle_structure(case):
    G, emb = case.G, case.emb
    return oracles.deformed_structure(G.table, G.inverse, emb.injection, emb.T.factors, case.S.matrix)


def random_element(rng, d):
    v = rng.integers(-3, 4, d)
    nz = np.nonzero(v)[0]
    return CycTensor.from_entries((d,), nz[:, None], weights=v[nz])


# -- data ---------------------------------------------------------------------


def test_datum_validation():
    T = AbelianGroup((3, 3))
    with pytest.raises(InvalidEndo):
        DeformationDatum(T, Endo(T, [[0, 1], [1, 0]]))
    with pytest.raises(InvalidEndo):
        DeformationDatum(T, Endo.zero(T))
    d = DeformationDatum.canonical(T)
    assert d.H.factors == (3, 3, 3, 3)
    assert tuple(is_skew_auto(d.J)) == (True, True)
    assert DeformationDatum.from_json(d.to_json()).S == d.S


# -- actions ------------------------------------------------------------------


def test_action_identity_at_zero(o18):
    H = o18.action.group
    assert o18.action.matrix(H.zero()).equals(CycTensor.identity(18))


def test_action_is_two_sided_translation(o18):
    G, emb = o18.G, o18.emb
    P, _ = oracles.translation_matrices(G.table, G.inverse, emb.injection, emb.T.factors)
    assert np.array_equal(o18.action.tensor.to_complex().real, P)


def test_action_on_torus_functions_is_difference_translation(o18):
    CT = o18.pi.target
    tact = torus_action(CT, o18.datum)
    T = o18.emb.T
    for s in T.elements:
        for u in T.elements:
            lhs = tact.matrix(np.concatenate([s, u]))
            rhs = tact.matrix(np.concatenate([T.add(s, T.neg(u)), T.zero()]))
            assert lhs.equals(rhs)


# -- structure constants against the floating oracle ----------------------------


@pytest.mark.parametrize("make", [order18, d4, lambda: gl2(3), lambda: swap_semidirect(2, 2)])
def test_structure_matches_oracle(make):
    case = build_case(*make(), twist=False)
    assert np.abs(case.algJ.structure.to_complex() - oracle_structure(case)).max() < 1e-10


def test_order18_is_noncommutative(o18):
    assert not o18.algJ.is_commutative()
    assert analyze.flags(o18.AJ) == analyze.Flags(False, False)
    # blocks of the deformed algebra, checked against the numeric oracle
    assert analyze.wedderburn(o18.algJ) == [1] * 9 + [3]
    assert oracles.block_sizes_numeric(o18.algJ.structure.to_complex(), o18.algJ.star.to_complex()) == [1] * 9 + [3]


def test_unit_is_preserved(o18, rng):
    one = o18.A.alg.unit
    for _ in range(5):
        a = random_element(rng, 18)
        assert deform_product_direct(o18.action, o18.datum.J, a, one).equals(a)
        assert deform_product_direct(o18.action, o18.datum.J, one, a).equals(a)


def test_zero_J_is_product_of_averages(o18, rng):
    H = o18.action.group
    zero = Endo.zero(H)
    A = o18.A.alg
    for _ in range(5):
        a, b = random_element(rng, 18), random_element(rng, 18)
        lhs = deform_product_direct(o18.action, zero, a, b)
        pa, pb = spectral_project(o18.action, H.zero(), a), spectral_project(o18.action, H.zero(), b)
        # (1/|H|) sum_{x,y} a_x b_y = |H| P0(a) P0(b)
        assert lhs.equals(A.mul(pa, pb).scale(H.order))


def test_torus_functions_multiply_undeformed(o18, rng):
    CT = o18.pi.target
    inc = pullback_inclusion(o18.A.alg, CT.alg, o18.emb)
    for _ in range(5):
        f, g = random_element(rng, 9), random_element(rng, 9)
        F, Gf = inc.apply(f), inc.apply(g)
        assert deform_product_direct(o18.action, o18.datum.J, F, Gf).equals(o18.A.alg.mul(F, Gf))


def test_homogeneous_products_pick_up_the_pairing(o18):
    H = o18.action.group
    J = o18.datum.J
    Jinv = invert_endo(J)
    A = o18.A.alg
    checked = 0
    for blk in o18.action.blocks:
        a0 = A.basis(int(blk[0]))
        for u in H.elements[::7]:
            a = spectral_project(o18.action, u, a0)
            if a.is_zero():
                continue
            assert is_homogeneous(o18.action, u, a)
            for v in H.elements[::11]:
                b = spectral_project(o18.action, v, A.basis(int(blk[-1])))
                if b.is_zero():
                    continue
                phase = H.pair(Jinv.act(u), v)
                assert deform_product_spectral(o18.action, J, a, b).equals(A.mul(a, b).mul_scalar(phase))
                assert o18.algJ.mul(a, b).equals(A.mul(a, b).mul_scalar(phase))
                checked += 1
    assert checked > 10


def test_noncommutativity_witness(o18):
    w = noncommutativity_witness(o18.action, o18.datum.J, o18.algJ)
    assert w is not None
    H = o18.action.group
    assert w.ab.equals(w.ba.mul_scalar(Scalar.root(H.exponent, w.phase_exponent)))
    assert not w.ab.equals(w.ba)
    # phase = <2 J^{-1} u, v>
    Jinv = invert_endo(o18.datum.J)
    assert H.pair(2 * Jinv.act(w.u), w.v) == Scalar.root(H.exponent, w.phase_exponent)


def test_no_witness_for_trivial_deformation():
    case = build_case(*d4(), twist=False)
    assert noncommutativity_witness(case.action, case.datum.J, case.algJ) is None
    assert case.algJ.structure.equals(case.A.alg.structure)


def test_gl2_q3_commutative_but_sign_twisted():
    case = build_case(*gl2(3), twist=False)
    assert case.algJ.is_commutative()
    assert not case.algJ.structure.equals(case.A.alg.structure)
    assert analyze.wedderburn(case.algJ) == [1] * 48


def test_deform_quantum_group_verifies(o18):
    AJ = deform_quantum_group(o18.A, o18.pi, o18.datum)
    assert AJ.alg.structure.equals(o18.algJ.structure)
    assert AJ.verify_report.ok
    assert AJ.alg.provenance["deformation"]["S"] == o18.S.matrix.tolist()


# -- random skew S on a torus of rank 4 ------------------------------------------------


def _skew_autos_z2_rank4():
    T = AbelianGroup((2,) * 4)
    out = []
    for bits in range(1 << 10):
        M = np.zeros((4, 4), np.int64)
        M[np.triu_indices(4)] = [(bits >> k) & 1 for k in range(10)]
        M = M + np.triu(M, 1).T
        S = Endo(T, M)
        if tuple(is_skew_auto(S)) == (True, True):
            out.append(S)
    return out


SKEW_Z2_RANK4 = _skew_autos_z2_rank4()


@pytest.fixture(scope="module")
def order32():
    return swap_semidirect(2, 2)


ALTERNATING = [S for S in SKEW_Z2_RANK4 if is_alternating(S)]


def check_structure(case):
    back = deform_algebra(case.algJ, case.action.on(case.algJ, verify=False), case.datum.negated().J, verify=False)
    assert back.structure.equals(case.A.alg.structure)
    assert analyze.check_associativity(case.algJ).passed
    assert np.abs(case.algJ.structure.to_complex() - oracle_structure(case)).max() < 1e-10
    return analyze.verify_hopf(case.AJ)


@settings(max_examples=4)
@given(S=st.sampled_from(ALTERNATING))
def test_alternating_skew_deformation_is_compact_quantum_group(order32, S):
    rep = check_structure(build_case(*order32, S=S, twist=False))
    assert rep.ok, rep.first_failure()


@settings(max_examples=4)
@given(S=st.sampled_from(SKEW_Z2_RANK4))
def test_any_skew_deformation_is_hopf_star_algebra(order32, S):
    # the undeformed antipode and positivity are the only axioms a non-alternating S may break
    rep = check_structure(build_case(*order32, S=S, twist=False))
    fails = {r.name for r in rep.results if not r.passed}
    assert fails <= {"antipode", "haar_positive"}
    if is_alternating(S):
        assert not fails


def trace_form(alg):
    c, star = alg.structure.to_complex(), alg.star.to_complex()
    G = np.einsum("ik,kjl->ijl", star, c) @ np.einsum("ijj->i", c)
    return np.linalg.eigvalsh((G + G.conj().T) / 2)


def test_non_alternating_skew_S_breaks_antipode_and_positivity(order32):
    assert len(ALTERNATING) == 28 and len(SKEW_Z2_RANK4) == 448
    S = Endo(AbelianGroup((2,) * 4), [[1, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]])
    assert tuple(is_skew_auto(S)) == (True, True) and not is_alternating(S)
    case = build_case(*order32, S=S, twist=False)
    rep = analyze.verify_hopf(case.AJ)
    assert not rep["haar_positive"].passed
    # m(id (x) kappa) Delta picks up <Ss, s> = -1 on part of the torus
    assert not rep["antipode"].passed
    # the regular trace form is indefinite, so no C*-norm exists on A_J
    assert trace_form(case.algJ).min() < -0.5
    good = build_case(*order32, S=ALTERNATING[0], twist=False)
    assert trace_form(good.algJ).min() > 0.5


# -- deformed norm -----------------------------------------------------------------


@pytest.fixture(scope="module")
def norm_ctx(o18):
    return NormContext(o18.action, o18.datum.J)


def test_norm_of_unit(norm_ctx, o18):
    assert norm_ctx.norm(o18.algJ.unit) == pytest.approx(1.0, abs=1e-9)


def test_norm_faithful_on_basis(norm_ctx):
    norms = [norm_ctx.norm(np.eye(18)[i]) for i in range(18)]
    assert min(norms) > 1e-6
    assert norm_ctx.norm(np.zeros(18)) == 0.0


def test_module_norm_equals_regular_norm(norm_ctx, o18):
    # a finite-dimensional *-algebra has one C*-norm
    rng = np.random.default_rng(5)
    for _ in range(4):
        a = rng.standard_normal(18) + 1j * rng.standard_normal(18)
        assert norm_ctx.norm(a) == pytest.approx(regular_norm(o18.algJ, a), rel=1e-9)


def test_norm_on_torus_block_is_sup_norm(norm_ctx, o18):
    f = np.zeros(18, complex)
    f[o18.emb.injection] = np.arange(1, 10) * np.exp(1j * np.arange(9))
    assert norm_ctx.norm(f) == pytest.approx(9.0, rel=1e-9)


def test_regular_norm_of_commutative_algebra_is_sup(o18):
    a = np.arange(18) - 7.5
    assert regular_norm(o18.A.alg, a) == pytest.approx(9.5)


# -- morphisms ----------------------------------------------------------------------


def test_pi_J_surjective_and_exact(o18):
    tact = torus_action(o18.pi.target, o18.datum)
    piJ = deform_morphism(o18.pi, o18.action, tact, o18.datum.J, source_J=o18.AJ)
    assert isinstance(piJ, HopfMorphism)
    assert piJ.rank() == 9 and piJ.kernel_dim() == 9


def test_inclusion_deforms_to_injective(o18):
    CT = o18.pi.target
    tact = torus_action(CT, o18.datum)
    inc = pullback_inclusion(o18.A.alg, CT.alg, o18.emb)
    incJ = deform_morphism(inc, tact, o18.action, o18.datum.J, target_J=o18.algJ)
    assert isinstance(incJ, AlgebraMorphism)
    assert incJ.rank() == 9 and incJ.kernel_dim() == 0
    assert analyze.verify_morphism(incJ, coalgebra=False, unital=False).ok


def test_identity_morphism_deforms_to_identity(o18):
    ident = HopfMorphism(o18.A, o18.A, CycTensor.identity(18))
    idJ = deform_morphism(ident, o18.action, o18.action, o18.datum.J, source_J=o18.AJ, target_J=o18.AJ)
    assert idJ.matrix.equals(CycTensor.identity(18))


def test_non_equivariant_map_rejected(o18):
    # restriction composed with a nontrivial translation of G is not equivariant
    G = o18.G
    g = next(x for x in range(18) if x not in set(o18.emb.injection.tolist()))
    perm = G.table[:, g]
    M = o18.pi.matrix.relabel(0, perm)
    bad = HopfMorphism(o18.A, o18.pi.target, M)
    tact = torus_action(o18.pi.target, o18.datum)
    with pytest.raises(NotEquivariant):
        deform_morphism(bad, o18.action, tact, o18.datum.J, verify=False)


# -- twist ------------------------------------------------------------------------------


def test_twist_matches_oracle(o18):
    G, emb = o18.G, o18.emb
    F, Finv = oracles.twist_numeric(G.table, G.inverse, emb.injection, emb.T.factors, o18.S.matrix)
    assert np.allclose(o18.tw.F.to_complex(), F)
    assert np.allclose(o18.tw.F_inv.to_complex(), Finv)
    one = np.zeros((18, 18))
    one[G.identity, G.identity] = 1
    assert np.allclose(oracles.group_conv2(G.table, F, Finv), one)
    assert oracles.cocycle_defect_numeric(G.table, F) < 1e-12


def test_twist_unitary_exact(o18):
    A = o18.B.alg
    one = contract(A.unit, A.unit)
    Fs = analyze.tensor_star2(A, o18.tw.F)
    assert analyze.tensor_mul2(A, Fs, o18.tw.F).equals(one)


def test_twist_is_counital(o18):
    for ax in (0, 1):
        assert contract(o18.tw.F, o18.B.counit, [(ax, 0)]).equals(o18.B.alg.unit)
    # a degenerate pairing breaks this: S = 0 gives (counit (x) id) F = sum_t t
    tw0 = twist_element(o18.B, o18.emb, Endo.zero(o18.emb.T), verify=False)
    total = CycTensor.from_entries((18,), o18.emb.injection[:, None])
    assert contract(tw0.F, o18.B.counit, [(0, 0)]).equals(total)


def test_trivial_torus_gives_trivial_twist():
    G, emb = gl2(2)
    B = group_hopf(G)
    tw = twist_element(B, emb, Endo.zero(emb.T))
    assert tw.is_trivial
    BS = twist_coproduct(B, tw)
    assert BS.coproduct.equals(B.coproduct)


def test_twisted_coproduct_coassociative_not_cocommutative(o18):
    rep = analyze.verify_hopf(o18.BS)
    assert rep.ok, rep.first_failure()
    assert not o18.BS.is_cocommutative()


def test_quadruple_sum_form_on_all_group_elements(o18):
    G, emb = o18.G, o18.emb
    for g in range(G.order):
        assert quadruple_sum_tensor(G, emb, o18.S, g).equals(o18.BS.coproduct.select(0, g))


def test_dual_of_deformed_equals_twisted(o18):
    assert same_hopf_structure(dual_hopf(o18.AJ), o18.BS)


def test_twist_requires_group_likes(o18):
    with pytest.raises(NotGroupLike):
        twist_element(o18.A, o18.emb, o18.S)
