"""Run every named example and write one JSON report per example.

    python3 scripts/run_examples.py --out reports/ [--with-norm] [--q 3 4]
"""
import argparse
import time
from pathlib import Path

from qdeform.abelian import canonical_symplectic
from qdeform.cli import RunSpec, run_pipeline
from qdeform.groups import d4, gl2, order18


def examples(qs):
    yield "order18", order18()
    yield "d4", d4()
    for q in qs:
        yield f"gl2_q{q}", gl2(q)


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--out", default="reports")
    p.add_argument("--q", type=int, nargs="*", default=[2, 3, 4])
    p.add_argument("--with-norm", action="store_true")
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, (G, emb) in examples(args.q):
        t0 = time.perf_counter()
        S = canonical_symplectic(emb.T)
        rep, _ = run_pipeline(RunSpec("example", G, emb, S, name, skip_norm=not args.with_norm))
        (out / f"{name}.json").write_text(rep.dumps() + "\n")
        dt = time.perf_counter() - t0
        print(f"{name:10s} dim={rep.dim:4d} ok={rep.ok!s:5s} wedderburn={rep.wedderburn_dims[:12]} {dt:6.1f}s")


if __name__ == "__main__":
    main()
