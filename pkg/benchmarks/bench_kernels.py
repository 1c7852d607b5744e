"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--depth 16] [--stems 64] [--repeat 20]

The numba path is compiled once before timing.  Results are checked for
equality so a speedup never hides a wrong answer.
"""

import argparse
import random
import timeit

import numpy as np

from offbranch import _kernels as K


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--depth", type=int, default=16)
    ap.add_argument("--stems", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = random.Random(args.seed)
    stems = [tuple(rng.randrange(2) for _ in range(rng.randrange(args.depth + 1)))
             for _ in range(args.stems)]
    values, lengths = K.encode(stems)
    d = args.depth
    mask = K._np_tree_mask(values, lengths, d)

    cases = [
        ("leaf_mask", K._np_leaf_mask, K._nb_leaf_mask, (values, lengths, d)),
        ("tree_mask", K._np_tree_mask, K._nb_tree_mask, (values, lengths, d)),
        ("split_counts", K._np_split_counts, K._nb_split_counts, (mask, d)),
    ]
    print(f"depth={d} stems={args.stems} repeat={args.repeat}")
    print(f"{'kernel':<14}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, np_fn, nb_fn, fn_args in cases:
        assert np.array_equal(np_fn(*fn_args), nb_fn(*fn_args)), name
        t_np = min(timeit.repeat(lambda: np_fn(*fn_args), number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(lambda: nb_fn(*fn_args), number=1, repeat=args.repeat))
        print(f"{name:<14}{t_np * 1e3:>12.3f}{t_nb * 1e3:>12.3f}{t_np / t_nb:>10.1f}x")


if __name__ == "__main__":
    main()
