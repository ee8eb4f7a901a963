#!/usr/bin/env python3
"""Census of depth-k equivalence classes of convex linear orders.

Reports the discovered class-chain size for small k, and for larger k the
number of distinct classes among structures of each size — which makes the
combinatorial explosion at depth 3 visible: almost every structure of size
up to ~16 ends up alone in its class, which is why exact limits for deeper
sentences go through sentence automata instead of the full class chain.
"""
import argparse
import sys
import time

from limlaw.efgame import shape_type_id
from limlaw.limitchain import build_chain
from limlaw.structures import enumerate_shapes


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-size", type=int, default=14,
                        help="largest structure size for the per-size census")
    parser.add_argument("--k", type=int, default=3,
                        help="depth for the per-size census")
    args = parser.parse_args(argv)

    for k in (0, 1, 2):
        t0 = time.time()
        chain = build_chain(k)
        print(f"depth {k}: class chain has {len(chain)} states "
              f"({time.time() - t0:.2f}s)")

    print(f"\nper-size distinct classes at depth {args.k}:")
    seen = set()
    for n in range(1, args.max_size + 1):
        t0 = time.time()
        at_n = {shape_type_id(s, args.k) for s in enumerate_shapes(n)}
        seen |= at_n
        total = 2 ** (n - 1)
        print(f"  size {n:2d}: {len(at_n):6d} of {total:6d} shapes distinct "
              f"(cumulative {len(seen):6d}, {time.time() - t0:.2f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
