from collections import defaultdict
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qdeform.abelian import canonical_symplectic
from qdeform.deform import DeformationDatum, build_action, deform_algebra, twist_coproduct, twist_element
from qdeform.groups import gl2, order18
from qdeform.hopf import function_hopf, group_hopf, restriction_morphism

settings.register_profile("qdeform", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("qdeform")


def build_case(G, emb, S=None, twist=True):
    """Everything downstream of (G, T, S): C(G), pi, the action, A_J and optionally the twist."""
    S = canonical_symplectic(emb.T) if S is None else S
    datum = DeformationDatum(emb.T, S)
    A = function_hopf(G)
    pi = restriction_morphism(A, emb)
    action = build_action(A, pi, datum)
    algJ = deform_algebra(A.alg, action, datum.J, verify=False)
    ns = SimpleNamespace(G=G, emb=emb, S=S, datum=datum, A=A, pi=pi, action=action, algJ=algJ,
                         AJ=A.replace(verify=False, alg=algJ))
    if twist:
        ns.B = group_hopf(G)
        ns.tw = twist_element(ns.B, emb, S)
        ns.BS = twist_coproduct(ns.B, ns.tw, verify=False)
    return ns


@pytest.fixture(scope="session")
def o18():
    return build_case(*order18())


@pytest.fixture(scope="session")
def gl2_4():
    return build_case(*gl2(4), twist=False)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# -- acceptance summary: one PASS/FAIL line per criterion ----------------------

_CRITERIA: dict = defaultdict(list)


@pytest.fixture
def criterion():
    def record(number: int, part: str, ok: bool, detail: str = ""):
        _CRITERIA[number].append((part, bool(ok), detail))
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        parts = _CRITERIA[n]
        status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        terminalreporter.write_line(f"criterion {n:2d}: {status}")
        for part, ok, detail in parts:
            mark = "ok  " if ok else "FAIL"
            terminalreporter.write_line(f"    [{mark}] {part}" + (f"  ({detail})" if detail else ""))
