"""Sweep all skew-symmetric automorphisms S of a small torus and tabulate A_J.

For each S: whether it is alternating, whether every Hopf axiom holds,
commutativity and the block sizes of A_J.

    python3 scripts/sweep_S.py order18
    python3 scripts/sweep_S.py swap2 --limit 40
"""
import argparse
import itertools
from collections import Counter

import numpy as np

from qdeform import analyze
from qdeform.abelian import Endo, is_alternating, is_skew_auto
from qdeform.deform import DeformationDatum, build_action, deform_algebra
from qdeform.groups import order18, swap_semidirect
from qdeform.hopf import function_hopf, restriction_morphism

GROUPS = {"order18": order18, "swap2": lambda: swap_semidirect(2, 2)}


def skew_autos(T):
    n, k = T.factors[0], T.rank
    for entries in itertools.product(range(n), repeat=k * k):
        S = Endo(T, np.array(entries).reshape(k, k))
        if tuple(is_skew_auto(S)) == (True, True):
            yield S


def main():
    p = argparse.ArgumentParser()
    p.add_argument("group", choices=sorted(GROUPS))
    p.add_argument("--limit", type=int, default=None)
    args = p.parse_args()
    G, emb = GROUPS[args.group]()
    A = function_hopf(G)
    pi = restriction_morphism(A, emb)
    tally = Counter()
    for n, S in enumerate(skew_autos(emb.T)):
        if args.limit is not None and n >= args.limit:
            break
        datum = DeformationDatum(emb.T, S)
        action = build_action(A, pi, datum)
        algJ = deform_algebra(A.alg, action, datum.J, verify=False)
        rep = analyze.verify_hopf(A.replace(verify=False, alg=algJ))
        failed = ",".join(r.name for r in rep.results if not r.passed) or "-"
        alt = is_alternating(S)
        tally[(alt, rep.ok)] += 1
        print(f"{S.matrix.tolist()!s:44s} alt={alt!s:5s} comm={algJ.is_commutative()!s:5s} "
              f"blocks={analyze.wedderburn(algJ)} failed={failed}")
    print()
    for (alt, ok), count in sorted(tally.items()):
        print(f"alternating={alt!s:5s} hopf_ok={ok!s:5s} count={count}")


if __name__ == "__main__":
    main()
