"""Benchmark the morphism-search kernels: compiled extension vs pure Python.

Runs the same pattern-into-host searches through both kernels, checks
they return identical morphism lists, and reports per-problem timings.

    python3 benchmarks/bench_matching.py [--repeat N] [--seed N]
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from sygra.egraph import ANY_SPEC, MONO_SPEC, EGraph
from sygra.matching import active_kernel_name, find_morphisms


def random_host(rng: random.Random, nodes: int, edges: int, attrs: int) -> EGraph:
    node_ids = [f"n{i}" for i in range(nodes)]
    edge_map = {
        f"e{i}": (rng.choice(node_ids), rng.choice(node_ids)) for i in range(edges)
    }
    labels = [f"v{i}" for i in range(max(1, attrs // 2))]
    node_labels = {
        f"a{i}": (rng.choice(node_ids), rng.choice(labels), rng.choice(("val", "wt")))
        for i in range(attrs)
    }
    return EGraph(
        nodes=node_ids, edges=edge_map, label_nodes=labels, node_labels=node_labels
    )


def triangle_pattern() -> EGraph:
    return EGraph(
        nodes=["p0", "p1", "p2"],
        edges={"f0": ("p0", "p1"), "f1": ("p1", "p2"), "f2": ("p2", "p0")},
    )


def attr_path_pattern() -> EGraph:
    return EGraph(
        nodes=["p0", "p1"],
        edges={"f": ("p0", "p1")},
        label_nodes=["x", "y"],
        node_labels={"ax": ("p0", "x", "val"), "ay": ("p1", "y", "val")},
    )


def problems(seed: int):
    rng = random.Random(seed)
    yield "triangle/24n48e any", triangle_pattern(), random_host(rng, 24, 48, 0), ANY_SPEC
    yield "triangle/40n80e mono", triangle_pattern(), random_host(rng, 40, 80, 0), MONO_SPEC
    yield "attr-path/20n40e/30a any", attr_path_pattern(), random_host(rng, 20, 40, 30), ANY_SPEC
    yield "attr-path/32n64e/48a mono", attr_path_pattern(), random_host(rng, 32, 64, 48), MONO_SPEC


def time_kernel(kernel: str, pattern, host, spec, repeat: int) -> tuple[float, int]:
    best = float("inf")
    count = -1
    for _ in range(repeat):
        start = time.perf_counter()
        found = find_morphisms(pattern, host, spec, kernel=kernel)
        best = min(best, time.perf_counter() - start)
        count = len(found)
    return best, count


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=2024)
    args = parser.parse_args(argv)

    if active_kernel_name() != "compiled":
        print("compiled kernel unavailable; timing pure kernel only")

    header = f"{'problem':<28} {'matches':>8} {'pure ms':>9} {'compiled ms':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, pattern, host, spec in problems(args.seed):
        pure_t, pure_n = time_kernel("pure", pattern, host, spec, args.repeat)
        if active_kernel_name() == "compiled":
            comp_t, comp_n = time_kernel("compiled", pattern, host, spec, args.repeat)
            same = find_morphisms(pattern, host, spec, kernel="pure") == find_morphisms(
                pattern, host, spec, kernel="compiled"
            )
            if not same or pure_n != comp_n:
                print(f"{name}: KERNEL MISMATCH ({pure_n} vs {comp_n})")
                return 1
            print(
                f"{name:<28} {pure_n:>8} {pure_t * 1e3:>9.2f} "
                f"{comp_t * 1e3:>12.2f} {pure_t / comp_t:>7.1f}x"
            )
        else:
            print(f"{name:<28} {pure_n:>8} {pure_t * 1e3:>9.2f} {'-':>12} {'-':>8}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
