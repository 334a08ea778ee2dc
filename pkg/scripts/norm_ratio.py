"""Distribution of ||a||_J / (1/|H|) sum_s ||alpha_s(a)|| on the order-18 deformation.

Prints quantiles over random a and the elements attaining the largest ratio.

    python3 scripts/norm_ratio.py --samples 200
"""
import argparse

import numpy as np

from qdeform.abelian import canonical_symplectic
from qdeform.deform import DeformationDatum, NormContext, build_action, deform_algebra, regular_norm
from qdeform.groups import order18
from qdeform.hopf import function_hopf, restriction_morphism


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    G, emb = order18()
    A = function_hopf(G)
    datum = DeformationDatum(emb.T, canonical_symplectic(emb.T))
    action = build_action(A, restriction_morphism(A, emb), datum)
    algJ = deform_algebra(A.alg, action, datum.J)
    ctx = NormContext(action, datum.J)
    orbit = ctx.orbit
    rng = np.random.default_rng(args.seed)
    ratios = []
    worst = (0.0, None)
    for _ in range(args.samples):
        a = rng.standard_normal(A.dim) + 1j * rng.standard_normal(A.dim)
        nJ = ctx.norm(a)
        assert abs(nJ - regular_norm(algJ, a)) < 1e-8 * nJ
        avg = np.mean([regular_norm(A.alg, a @ M) for M in orbit])
        ratios.append(nJ / avg)
        if ratios[-1] > worst[0]:
            worst = (ratios[-1], a)
    r = np.array(ratios)
    print(f"samples={len(r)}  min={r.min():.4f}  median={np.median(r):.4f}  max={r.max():.4f}")
    print(f"fraction above 1: {(r > 1 + 1e-9).mean():.3f}   sqrt|H| = {np.sqrt(datum.H.order):.1f}")
    a = worst[1]
    print("worst a, |a_g| on torus:", np.round(np.abs(a[emb.injection]), 2).tolist())


if __name__ == "__main__":
    main()
