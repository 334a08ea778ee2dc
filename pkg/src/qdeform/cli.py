"""Command line: build named examples, deform user-supplied data, verify serialized algebras.

Exit codes: 0 all checks pass, 2 a verification failed, 3 invalid input.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analyze
from .abelian import AbelianGroup, Endo, canonical_symplectic, is_alternating, is_skew_auto
from .deform import (
    DeformationDatum,
    build_action,
    deform_algebra,
    deform_morphism,
    deform_product_direct,
    deform_product_spectral,
    noncommutativity_witness,
    norm_battery,
    torus_action,
    twist_coproduct,
    twist_element,
)
from .errors import DecompositionUnstable, HopfCheckFailed, QDeformError
from .groups import FiniteGroup, TorusEmbedding, d4, gl2, order18
from .hopf import HopfAlgebra, dual_hopf, function_hopf, group_hopf, restriction_morphism

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 2, 3

NORM_MAX_OPERATOR_DIM = 4000  # |H| * dim above which the norm battery is skipped
DUAL_MAX_DIM = 480
SPECTRAL_SAMPLE_PAIRS = 20

CROSSED_PRODUCT_NOTE = (
    "block counts for crossed-product candidates: C*(G) of the order-18 group has 9 blocks, "
    "C(S3) x| Z/3 has 10, the commutative candidates have 18"
)


class InputError(Exception):
    def __init__(self, invariant: str, message: str):
        super().__init__(message)
        self.invariant = invariant


@dataclass
class RunSpec:
    command: str
    group: FiniteGroup
    emb: TorusEmbedding
    S: Endo
    name: str
    seed: int = 0
    skip_norm: bool = False
    provenance: dict | None = None


# ---------------------------------------------------------------------------
# pipeline


def run_pipeline(spec: RunSpec, samples: int = analyze.DEFAULT_SAMPLES):
    """Deform C(G) along (T, S) and run the analysis suite; returns (report, A_J)."""
    G, emb = spec.group, spec.emb
    datum = DeformationDatum(emb.T, spec.S)
    A = function_hopf(G)
    pi = restriction_morphism(A, emb)
    action = build_action(A, pi, datum)
    algJ = deform_algebra(A.alg, action, datum.J, verify=False, name=f"C({spec.name})_J",
                          provenance=spec.provenance or {})
    AJ = A.replace(verify=False, alg=algJ)
    axioms = analyze.verify_hopf(AJ, samples=samples, seed=spec.seed)
    notes: list[str] = []
    checks: dict = {}
    undeformed = {
        "commutative": A.alg.is_commutative(),
        "cocommutative": A.is_cocommutative(),
    }
    trivial = algJ.structure.equals(A.alg.structure)
    if trivial:
        notes.append("the deformation is trivial: structure constants are unchanged")
    elif not is_alternating(datum.J):
        notes.append("J is skew but <Jx, x> = -1 for some x; the undeformed antipode and Haar positivity may fail")
    rng = np.random.default_rng(spec.seed)
    d = A.dim

    # (A_J)_{-J} = A
    back = deform_algebra(algJ, action.on(algJ, verify=False), datum.negated().J, verify=False)
    checks["involution"] = back.structure.equals(A.alg.structure)

    # spectral and direct products agree with the stored structure constants
    ok = True
    for _ in range(SPECTRAL_SAMPLE_PAIRS):
        i, j = (int(x) for x in rng.integers(0, d, 2))
        a, b = A.alg.basis(i), A.alg.basis(j)
        stored = algJ.product_of_basis(i, j)
        ok &= deform_product_spectral(action, datum.J, a, b).equals(stored)
        ok &= deform_product_direct(action, datum.J, a, b).equals(stored)
    checks["spectral_direct_agreement"] = bool(ok)

    # subgroup preservation
    torus = emb.injection
    tb = algJ.block_structure(torus)
    checks["torus_block_undeformed"] = tb.equals(A.alg.block_structure(torus))
    CT = pi.target
    tact = torus_action(CT, datum, verify=False)
    try:
        piJ = deform_morphism(pi, action, tact, datum.J, source_J=AJ, verify=False)
        CTJ = piJ.target
        checks["torus_quantum_group_undeformed"] = CTJ.alg.structure.equals(CT.alg.structure)
        rep = analyze.verify_morphism(piJ, samples=samples, seed=spec.seed)
        checks["pi_J_hopf_morphism"] = rep.ok
        r = piJ.rank()
        checks["pi_J_surjective"] = r == CT.dim
        checks["pi_J_exact"] = piJ.kernel_dim() + r == d
    except QDeformError as exc:
        checks["pi_J_hopf_morphism"] = False
        notes.append(f"pi_J: {exc}")

    witness = None
    if A.alg.is_commutative() and not trivial:
        w = noncommutativity_witness(action, datum.J, algJ)
        if w is not None:
            witness = {"u": list(w.u), "v": list(w.v), "phase_exponent": w.phase_exponent, "zeta_order": datum.H.exponent}
            checks["commutator_phase_relation"] = _phase_relation(w, datum.H.exponent)

    # dual picture and representation counts
    wed = _safe_wedderburn(algJ, spec.seed, notes, "A_J")
    wed_A = _safe_wedderburn(A.alg, spec.seed, notes, "A")
    undeformed["wedderburn_dims"] = wed_A
    cocycle = None
    if d <= DUAL_MAX_DIM:
        dA = dual_hopf(A, verify=False)
        dAJ = dual_hopf(AJ, verify=False)
        dual_rep = analyze.verify_hopf(dAJ, samples=samples, seed=spec.seed)
        checks["dual_of_A_J_hopf"] = dual_rep.ok
        wa = _safe_wedderburn(dA.alg, spec.seed, notes, "dual(A)")
        wj = _safe_wedderburn(dAJ.alg, spec.seed, notes, "dual(A_J)")
        undeformed["dual_wedderburn_dims"] = wa
        checks["dual_wedderburn_invariant"] = wa == wj
        B = group_hopf(G, verify=False)
        tw = twist_element(B, emb, datum.S)
        BS = twist_coproduct(B, tw, verify=False)
        twist_rep = analyze.verify_hopf(BS, samples=samples, seed=spec.seed)
        checks["twisted_coproduct_hopf"] = twist_rep.ok
        checks["duality"] = analyze.duality_residual(AJ, BS).passed
        checks["dual_of_A_J_equals_B_S"] = same_hopf_structure(dAJ, BS)
        cocycle = analyze.cocycle_residual(B, tw.F)
        if cocycle <= 1e-9:
            notes.append("the twist F satisfies the 2-cocycle identity exactly")

    norms = None
    if not spec.skip_norm:
        if datum.H.order * d <= NORM_MAX_OPERATOR_DIM:
            norms = norm_battery(action, datum.J, algJ, samples=50, seed=spec.seed)
            checks["norm_battery"] = norms["passed"]
        else:
            notes.append(f"norm battery skipped: operator dimension {datum.H.order * d} exceeds {NORM_MAX_OPERATOR_DIM}")
    if spec.name == "order18":
        notes.append(CROSSED_PRODUCT_NOTE)
    fl = analyze.flags(AJ)
    report = analyze.DeformationReport(
        name=spec.name,
        dim=d,
        axioms=axioms,
        commutative=fl.commutative,
        cocommutative=fl.cocommutative,
        wedderburn_dims=wed or [],
        center_dim=analyze.center_dim(algJ),
        cocycle_residual=cocycle,
        trivial=trivial,
        undeformed=undeformed,
        checks=checks,
        norms=norms,
        provenance=spec.provenance or {},
        notes=notes,
    )
    if witness is not None:
        report.checks["noncommutativity_witness"] = witness
    return report, AJ


def same_hopf_structure(X: HopfAlgebra, Y: HopfAlgebra) -> bool:
    pairs = [
        (X.alg.structure, Y.alg.structure), (X.alg.star, Y.alg.star), (X.alg.unit, Y.alg.unit),
        (X.coproduct, Y.coproduct), (X.counit, Y.counit), (X.antipode, Y.antipode), (X.haar, Y.haar),
    ]
    return all(a.equals(b) for a, b in pairs)


def _phase_relation(w, N: int) -> bool:
    """a x_J b = zeta^e (b x_J a) with e the witness phase, and the two sides differ."""
    from .cyclotomic import Scalar

    phase = Scalar.root(N, w.phase_exponent)
    rhs = w.ba.mul_scalar(phase)
    return w.ab.equals(rhs) and not w.ab.equals(w.ba)


def _safe_wedderburn(alg, seed, notes, label):
    try:
        return analyze.wedderburn(alg, seed=seed)
    except DecompositionUnstable as exc:
        notes.append(f"wedderburn({label}) unstable: {exc}")
        return None


# ---------------------------------------------------------------------------
# input parsing


NAMED = {"order18": order18, "d4": d4}


def named_group(name: str, q: int | None):
    if name == "gl2":
        if q is None:
            raise InputError("q", "gl2 needs --q")
        return gl2(q)
    if name not in NAMED:
        raise InputError("group", f"unknown group {name!r}; choose from order18, d4, gl2")
    return NAMED[name]()


def _load_json(value: str):
    p = Path(value)
    if p.exists():
        return json.loads(p.read_text())
    return json.loads(value)


def parse_S(value: str | None, T: AbelianGroup) -> Endo:
    if value is None or value == "canonical":
        try:
            return canonical_symplectic(T)
        except QDeformError as exc:
            raise InputError("canonical_S", str(exc)) from exc
    data = _load_json(value)
    matrix = data["matrix"] if isinstance(data, dict) else data
    try:
        return Endo(T, np.array(matrix, dtype=np.int64))
    except (ValueError, QDeformError) as exc:
        raise InputError("Endo", str(exc)) from exc


def build_spec(args) -> RunSpec:
    if args.command == "example":
        G, emb = named_group(args.name, args.q)
        name = args.name if args.name != "gl2" else f"gl2_q{args.q}"
        source = {"group": args.name, "q": args.q}
    else:
        if args.group is None:
            raise InputError("group", "deform needs --group")
        if args.group in NAMED or args.group == "gl2":
            G, emb = named_group(args.group, args.q)
            name = args.group if args.group != "gl2" else f"gl2_q{args.q}"
        else:
            data = _load_json(args.group)
            G = FiniteGroup.from_json(data, name=data.get("name", "G"))
            name = data.get("name", "G")
            emb = None
        if args.torus is not None:
            t = _load_json(args.torus)
            emb = TorusEmbedding(AbelianGroup(tuple(t["factors"])), G, np.array(t["injection"], dtype=np.int64))
        if emb is None:
            raise InputError("torus", "a group from JSON needs --torus")
        source = {"group": args.group, "q": args.q, "torus": emb.to_json()}
    S = parse_S(args.S, emb.T)
    flags = is_skew_auto(S)
    if not (flags.skew and flags.invertible):
        raise InputError("is_skew_auto", f"S is not a skew-symmetric automorphism: {flags._asdict()}")
    prov = {"command": args.command, **source, "S": S.matrix.tolist(), "seed": args.seed}
    return RunSpec(args.command, G, emb, S, name, args.seed, args.skip_norm, prov)


# ---------------------------------------------------------------------------
# output


def emit(report, args) -> None:
    text = report.dumps() if args.format == "json" else report.render_text()
    print(text)
    if args.out:
        Path(args.out).write_text(report.dumps() + "\n")


def input_error(exc, args) -> int:
    invariant = getattr(exc, "invariant", type(exc).__name__)
    payload = {"error": "invalid input", "invariant": invariant, "message": str(exc)}
    print(json.dumps(payload), file=sys.stderr)
    return EXIT_INPUT


def cmd_example(args) -> int:
    spec = build_spec(args)
    report, AJ = run_pipeline(spec)
    if args.dump_algebra:
        Path(args.dump_algebra).write_text(AJ.dumps())
    emit(report, args)
    return EXIT_OK if report.ok else EXIT_FAIL


cmd_deform = cmd_example


@dataclass
class VerifyReport:
    path: str
    axioms: analyze.AxiomReport
    commutative: bool
    cocommutative: bool
    wedderburn_dims: list | None
    N: int

    @property
    def ok(self) -> bool:
        return self.axioms.ok

    def to_json(self) -> dict:
        return {
            "schema": analyze.SCHEMA,
            "path": self.path,
            "ok": self.ok,
            "axioms": self.axioms.to_json(),
            "commutative": self.commutative,
            "cocommutative": self.cocommutative,
            "wedderburn_dims": self.wedderburn_dims,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    def render_text(self) -> str:
        lines = [f"{self.path}  {'PASS' if self.ok else 'FAIL'}"]
        for r in self.axioms.results:
            lines.append(f"  {r.name:<30}{'pass' if r.passed else 'FAIL'}  [{r.mode}]")
            if r.witness:
                lines.append(f"  {'':<30}witness {json.dumps(r.witness)}")
        lines.append(f"  commutative      {self.commutative}")
        lines.append(f"  cocommutative    {self.cocommutative}")
        lines.append(f"  wedderburn_dims  {self.wedderburn_dims}")
        return "\n".join(lines)


def cmd_verify(args) -> int:
    try:
        data = json.loads(Path(args.path).read_text())
        H = HopfAlgebra.from_json(data, verify=False)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError("parse", f"cannot read a Hopf algebra from {args.path}: {exc}") from exc
    axioms = analyze.verify_hopf(H, seed=args.seed)
    fl = analyze.flags(H)
    notes: list[str] = []
    wed = _safe_wedderburn(H.alg, args.seed, notes, "algebra") if axioms.ok else None
    rep = VerifyReport(args.path, axioms, fl.commutative, fl.cocommutative, wed, H.N)
    emit(rep, args)
    return EXIT_OK if rep.ok else EXIT_FAIL


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qdeform", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="also write the JSON report here")
        sp.add_argument("--format", choices=["json", "text"], default="text")

    ex = sub.add_parser("example", help="run a named example")
    ex.add_argument("name", choices=["order18", "d4", "gl2"])
    ex.add_argument("--q", type=int)
    ex.add_argument("--S", default="canonical")
    ex.add_argument("--skip-norm", action="store_true", dest="skip_norm")
    ex.add_argument("--dump-algebra", dest="dump_algebra", help="write the deformed Hopf algebra as JSON")
    common(ex)

    de = sub.add_parser("deform", help="deform C(G) along a torus and a skew automorphism S")
    de.add_argument("--group", help="order18, d4, gl2 or a JSON file {order, table[, name]}")
    de.add_argument("--torus", help='JSON {"factors": [...], "injection": [...]} (file or inline)')
    de.add_argument("--S", default="canonical", help='"canonical" or a JSON matrix (file or inline)')
    de.add_argument("--q", type=int)
    de.add_argument("--skip-norm", action="store_true", dest="skip_norm")
    de.add_argument("--dump-algebra", dest="dump_algebra")
    common(de)

    ve = sub.add_parser("verify", help="verify a serialized Hopf algebra")
    ve.add_argument("path")
    common(ve)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_example(args)
    except InputError as exc:
        return input_error(exc, args)
    except HopfCheckFailed as exc:
        print(json.dumps({"error": "verification failed", "axiom": exc.axiom, "message": str(exc)}), file=sys.stderr)
        return EXIT_FAIL
    except (QDeformError, ValueError, KeyError, json.JSONDecodeError) as exc:
        return input_error(exc, args)


if __name__ == "__main__":
    sys.exit(main())
