"""Shared builders and independent oracles used across the test modules.

Everything here deliberately avoids the package's own search and generation
code paths where an independent result is needed: connected graphs are
sampled with a local union-find check, and the two reference optima come
from exhaustive enumeration routes that do not touch the branch-and-bound
engine.
"""

import itertools
import random

from qkmp.graph import Graph, make_graph
from qkmp.ilp import IlpModel, build_ilp, x_name, y_name, z_name
from qkmp.instance import KeyAssignment, KmpInstance, evaluate

# dyadic memory weights: sums of these are exact in binary floating point,
# so budget arithmetic inside the solver matches evaluate() bit for bit
DYADIC_MEMS = (0.5, 1.0, 1.0, 2.0)


def connected_random_graph(rng: random.Random, n: int, prob: float) -> Graph:
    """Sample a connected simple graph without using the package generator."""
    if n == 1:
        return make_graph(1, [])
    while True:
        edges = [e for e in itertools.combinations(range(n), 2) if rng.random() < prob]
        parent = list(range(n))

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for a, b in edges:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        if len({find(v) for v in range(n)}) == 1:
            return make_graph(n, edges)


def random_small_instance(rng: random.Random) -> KmpInstance:
    """Random instance in the exhaustively checkable regime (n*K <= 15)."""
    n = rng.randint(2, 5)
    g = connected_random_graph(rng, n, 0.7)
    key_count = rng.randint(1, 3)
    return KmpInstance(
        graph=g,
        key_count=key_count,
        q=rng.choice([1, 1, 2]),
        p=rng.choice([0.2, 0.3, 0.5, 1.0]),
        alpha=rng.randint(1, 2),
        mem_per_key=tuple(rng.choice(DYADIC_MEMS) for _ in range(key_count)),
        capacity=tuple(float(rng.randint(1, 4)) for _ in range(n)),
        usage_limit=tuple(rng.randint(1, n) for _ in range(key_count)),
    )


def random_battery_instance(rng: random.Random) -> KmpInstance:
    """Random instance with n*K <= 9, small enough for point enumeration."""
    shapes = [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3), (4, 1), (4, 2), (5, 1)]
    n, key_count = rng.choice(shapes)
    g = connected_random_graph(rng, n, 0.8)
    return KmpInstance(
        graph=g,
        key_count=key_count,
        q=rng.choice([1, 2]),
        p=rng.choice([0.3, 0.5, 1.0]),
        alpha=1,
        mem_per_key=tuple(rng.choice(DYADIC_MEMS) for _ in range(key_count)),
        capacity=tuple(float(rng.randint(1, 4)) for _ in range(n)),
        usage_limit=tuple(rng.randint(1, n) for _ in range(key_count)),
    )


def quadratic_optimum(inst: KmpInstance) -> int:
    """Reference optimum by scoring every binary matrix with evaluate()."""
    n, K = inst.graph.n, inst.key_count
    best = 0
    for code in range(1 << (n * K)):
        rows = tuple(
            tuple((code >> (i * K + k)) & 1 for k in range(K)) for i in range(n)
        )
        report = evaluate(inst, KeyAssignment(x=rows))
        if report.feasible and report.objective > best:
            best = report.objective
    return best


def pinned_point(inst: KmpInstance, model: IlpModel, rows) -> list[int]:
    """Complete an x pattern to a full variable point of the linear model.

    y variables are pinned to the products they linearize and each z is
    switched on exactly when enough products are available, which is the
    objective-maximal completion for a fixed x. Returned in the model's
    variable order.
    """
    by_name = {}
    n, K = inst.graph.n, inst.key_count
    for i in range(n):
        for k in range(K):
            by_name[x_name(i, k)] = rows[i][k]
    for i, j in inst.graph.edges:
        for k in range(K):
            by_name[y_name(i, j, k)] = rows[i][k] * rows[j][k]
        shared = sum(rows[i][k] * rows[j][k] for k in range(K))
        by_name[z_name(i, j)] = 1 if shared >= inst.q else 0
    return [by_name[name] for name in model.variables]


def linear_optimum_by_x_enumeration(inst: KmpInstance) -> int:
    """Optimum of the linear model over all binary points.

    Enumerates x patterns, completes each to the pinned point, keeps the
    ones the model itself accepts, and maximizes the model objective. The
    pinning is validated separately by full joint enumeration on micro
    models.
    """
    model = build_ilp(inst)
    n, K = inst.graph.n, inst.key_count
    best = 0
    for code in range(1 << (n * K)):
        rows = tuple(
            tuple((code >> (i * K + k)) & 1 for k in range(K)) for i in range(n)
        )
        point = pinned_point(inst, model, rows)
        if model.satisfied(point):
            value = model.objective_value(point)
            if value > best:
                best = int(value)
    return best


def linear_optimum_by_joint_enumeration(inst: KmpInstance) -> int:
    """Optimum of the linear model over every 0/1 point of every variable.

    Exponential in the full variable count, so callers must stay tiny.
    """
    model = build_ilp(inst)
    nvar = model.num_variables
    assert nvar <= 16, "joint enumeration is for micro models only"
    best = 0
    for code in range(1 << nvar):
        point = [(code >> b) & 1 for b in range(nvar)]
        if model.satisfied(point):
            value = model.objective_value(point)
            if value > best:
                best = int(value)
    return best


def indirect_link_scenario():
    """Triangle where one edge lacks the two keys needed for a direct link.

    Rings: vertex 0 holds {1,3,4,5}, vertex 1 holds {5,6,7}, vertex 2 holds
    {3,4,6,7}, out of a pool of 8. Overlaps are 1, 2 and 2 keys.
    """
    g = make_graph(3, [(0, 1), (0, 2), (1, 2)])
    inst = KmpInstance(
        graph=g,
        key_count=8,
        q=2,
        p=1.0,
        alpha=1,
        mem_per_key=(1.0,) * 8,
        capacity=(10.0, 10.0, 10.0),
        usage_limit=(3,) * 8,
    )
    rings = [{1, 3, 4, 5}, {5, 6, 7}, {3, 4, 6, 7}]
    rows = [[1 if k in ring else 0 for k in range(8)] for ring in rings]
    return inst, KeyAssignment.from_rows(rows)


def isolated_node_scenario():
    """Four sensors where the last one shares nothing with its only neighbor.

    Vertex 3 hangs off vertex 1; its ring is disjoint from everyone else's,
    so under q=1 the secure graph drops the pendant edge.
    """
    g = make_graph(4, [(0, 1), (0, 2), (1, 2), (1, 3)])
    inst = KmpInstance(
        graph=g,
        key_count=4,
        q=1,
        p=1.0,
        alpha=1,
        mem_per_key=(1.0,) * 4,
        capacity=(4.0,) * 4,
        usage_limit=(4,) * 4,
    )
    rows = [
        [1, 1, 0, 0],
        [0, 1, 1, 0],
        [1, 0, 1, 0],
        [0, 0, 0, 1],
    ]
    return inst, KeyAssignment.from_rows(rows)
