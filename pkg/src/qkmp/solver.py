"""Exact solvers for the key distribution model.

Three entry points: ``solve_bb`` is a deterministic depth-first
branch-and-bound over the x variables with constraint propagation;
``brute_force`` enumerates every binary assignment and is the correctness
oracle for small instances; ``greedy_heuristic`` builds a feasible warm
start and is also usable on its own.

The search never relaxes to an LP. Its node bound treats each unsatisfied
edge as securable unless the fixed pattern, the per-key usage budgets, or
the vertex memory budgets rule it out, which keeps the bound admissible.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass

from .instance import KeyAssignment, KmpInstance, evaluate

OPTIMAL = "OPTIMAL"
FEASIBLE_TIMEOUT = "FEASIBLE_TIMEOUT"
# Never produced: the all-zero assignment is feasible for every valid
# instance, so a solve always has an incumbent.
INFEASIBLE_NONE = "INFEASIBLE_NONE"
ERROR = "ERROR"

BRANCH_DEGREE_KEY = "degree_key"

BRUTE_FORCE_LIMIT = 24

# warm-start restarts; distinct greedy seeds diversify the incumbent
GREEDY_RESTARTS = 8


class InstanceTooLargeError(ValueError):
    """brute_force refuses instances with more than BRUTE_FORCE_LIMIT cells."""


@dataclass(frozen=True)
class SolverConfig:
    time_limit: float = 3600.0
    seed: int = 0
    branch_rule: str = BRANCH_DEGREE_KEY
    node_limit: int | None = None

    def __post_init__(self) -> None:
        if self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.branch_rule != BRANCH_DEGREE_KEY:
            raise ValueError(f"unknown branch rule {self.branch_rule!r}")
        if self.node_limit is not None and self.node_limit < 1:
            raise ValueError("node_limit must be positive when given")


@dataclass(frozen=True)
class SolveResult:
    status: str
    incumbent: KeyAssignment
    lower_bound: int
    upper_bound: int
    gap: float
    nodes: int
    wall_time: float

    def to_json_dict(self, include_wall_time: bool = True) -> dict:
        out = {
            "status": self.status,
            "objective": self.lower_bound,
            "bound": self.upper_bound,
            "gap": self.gap,
            "nodes": self.nodes,
        }
        if include_wall_time:
            out["wall_time"] = self.wall_time
        out["x"] = [list(row) for row in self.incumbent.x]
        return out


def compute_gap(lower: float, upper: float) -> float:
    """Relative gap (UB - LB) / max(UB, 1).

    This differs from the MIPGap convention of commercial solvers, which can
    report a nonzero gap even at a proven optimum; comparisons with solver
    logs are qualitative only.
    """
    return (upper - lower) / max(upper, 1)


def brute_force(inst: KmpInstance) -> SolveResult:
    """Enumerate all 2^(n*K) assignments; exact but exponential."""
    n, K = inst.graph.n, inst.key_count
    cells = n * K
    if cells > BRUTE_FORCE_LIMIT:
        raise InstanceTooLargeError(
            f"{cells} binary cells exceed the enumeration limit of {BRUTE_FORCE_LIMIT}"
        )
    start = time.perf_counter()
    best_obj = -1
    best_rows: tuple[tuple[int, ...], ...] = ()
    for code in range(1 << cells):
        rows = tuple(
            tuple((code >> (i * K + k)) & 1 for k in range(K)) for i in range(n)
        )
        report = evaluate(inst, KeyAssignment(rows))
        if report.feasible and report.objective > best_obj:
            best_obj = report.objective
            best_rows = rows
    # the all-zero assignment is always feasible, so best_obj >= 0 here
    return SolveResult(
        status=OPTIMAL,
        incumbent=KeyAssignment(best_rows),
        lower_bound=best_obj,
        upper_bound=best_obj,
        gap=0.0,
        nodes=1 << cells,
        wall_time=time.perf_counter() - start,
    )


class _State:
    """Mutable search state shared by the heuristic and the tree search."""

    def __init__(self, inst: KmpInstance):
        g = inst.graph
        self.inst = inst
        self.n = g.n
        self.K = inst.key_count
        self.adj = [tuple(sorted(g.adjacency[i])) for i in range(g.n)]
        self.edges = list(g.edges)
        self.edge_id = {e: idx for idx, e in enumerate(self.edges)}
        # floor of the fractional cap: integer lhs <= float rhs iff lhs <= floor(rhs)
        self.ncap = [math.floor(inst.neighborhood_cap(i)) for i in range(g.n)]
        self.val = [[-1] * self.K for _ in range(g.n)]
        self.usage = [0] * self.K
        self.mem = [0.0] * g.n
        self.cnt = [[0] * self.K for _ in range(g.n)]  # fixed-1 neighbors per (i, k)
        self.shared = [0] * len(self.edges)  # keys fixed to 1 on both endpoints
        self.pair_count = [0] * self.K  # edges whose endpoints both hold k
        self.trail: list[tuple] = []
        # key order by memory footprint, for vertex budget estimation
        self.keys_by_mem = sorted(range(self.K), key=lambda k: (inst.mem_per_key[k], k))

    def ring_mem(self, v: int) -> float:
        """Fresh capacity lhs, summed the same way the validator sums it."""
        return sum(
            self.inst.mem_per_key[k] for k in range(self.K) if self.val[v][k] == 1
        )

    def fix(self, v: int, k: int, value: int) -> bool:
        """Fix one cell and propagate to a fixpoint. False means conflict."""
        pending = [(v, k, value)]
        while pending:
            pv, pk, pval = pending.pop()
            cur = self.val[pv][pk]
            if cur == pval:
                continue
            if cur != -1:
                return False
            self.val[pv][pk] = pval
            self.trail.append(("val", pv, pk))
            if pval == 0:
                continue

            # one-fixes carry all the constraint weight
            inst = self.inst
            if self.usage[pk] + 1 > inst.usage_limit[pk]:
                return False
            fresh = self.ring_mem(pv)
            if fresh > inst.capacity[pv]:
                return False
            if self.cnt[pv][pk] > self.ncap[pv]:
                return False
            self.usage[pk] += 1
            self.trail.append(("usage", pk))
            self.trail.append(("mem", pv, self.mem[pv]))
            self.mem[pv] = fresh

            for u in self.adj[pv]:
                self.cnt[u][pk] += 1
                self.trail.append(("cnt", u, pk))
                uval = self.val[u][pk]
                if uval == 1:
                    if self.cnt[u][pk] > self.ncap[u]:
                        return False
                    e = self.edge_id[(min(pv, u), max(pv, u))]
                    self.shared[e] += 1
                    self.pair_count[pk] += 1
                    self.trail.append(("shared", e, pk))
                elif uval == -1 and self.cnt[u][pk] > self.ncap[u]:
                    pending.append((u, pk, 0))

            # usage saturation closes the key for everyone else
            if self.usage[pk] == inst.usage_limit[pk]:
                for w in range(self.n):
                    if self.val[w][pk] == -1:
                        pending.append((w, pk, 0))
            # capacity: keys that no longer fit at pv are out
            left = inst.capacity[pv] - self.mem[pv]
            for kk in range(self.K):
                if self.val[pv][kk] == -1 and inst.mem_per_key[kk] > left:
                    pending.append((pv, kk, 0))
            # neighborhood saturation around every vertex that now holds pk
            # at its cap: unfixed neighbors may not take pk anymore
            if self.cnt[pv][pk] == self.ncap[pv]:
                for u in self.adj[pv]:
                    if self.val[u][pk] == -1:
                        pending.append((u, pk, 0))
            for u in self.adj[pv]:
                if self.val[u][pk] == 1 and self.cnt[u][pk] == self.ncap[u]:
                    for w in self.adj[u]:
                        if self.val[w][pk] == -1:
                            pending.append((w, pk, 0))
        return True

    def mark(self) -> int:
        return len(self.trail)

    def undo_to(self, mark: int) -> None:
        while len(self.trail) > mark:
            rec = self.trail.pop()
            kind = rec[0]
            if kind == "val":
                self.val[rec[1]][rec[2]] = -1
            elif kind == "cnt":
                self.cnt[rec[1]][rec[2]] -= 1
            elif kind == "usage":
                self.usage[rec[1]] -= 1
            elif kind == "mem":
                self.mem[rec[1]] = rec[2]
            elif kind == "shared":
                self.shared[rec[1]] -= 1
                self.pair_count[rec[2]] -= 1

    def secured_now(self) -> int:
        q = self.inst.q
        return sum(1 for s in self.shared if s >= q)

    def materialize(self) -> tuple[tuple[int, ...], ...]:
        """Zero-completion of the current fixed pattern; always feasible."""
        return tuple(
            tuple(1 if self.val[i][k] == 1 else 0 for k in range(self.K))
            for i in range(self.n)
        )

    def vertex_budgets(self) -> list[int]:
        """How many more keys could possibly fit on each vertex."""
        inst = self.inst
        budgets = []
        for v in range(self.n):
            left = inst.capacity[v] - self.mem[v]
            r = 0
            total = 0.0
            for k in self.keys_by_mem:
                if self.val[v][k] != -1:
                    continue
                total += inst.mem_per_key[k]
                if total > left:
                    break
                r += 1
            budgets.append(r)
        return budgets

    def key_pair_caps(self) -> list[int]:
        """Per-key cap on the number of co-holding adjacent pairs.

        Key k ends up on at most t_k vertices; a holder v shares it with at
        most min(ncap(v), co-holder candidates, t_k - 1) neighbors, so key k
        yields at most floor(sum of those weights / 2) pairs. Fixed holders
        always count; of the undecided ones only the t_k - usage_k heaviest
        can still join the ring.
        """
        inst = self.inst
        caps = []
        for k in range(self.K):
            t_k = inst.usage_limit[k]
            remaining = t_k - self.usage[k]
            weight_sum = 0
            addable: list[int] = []
            for v in range(self.n):
                state = self.val[v][k]
                if state == 0:
                    continue
                co_holders = sum(1 for u in self.adj[v] if self.val[u][k] != 0)
                w = min(self.ncap[v], co_holders, t_k - 1)
                if state == 1:
                    weight_sum += w
                elif w > 0:
                    addable.append(w)
            if remaining > 0 and addable:
                addable.sort(reverse=True)
                weight_sum += sum(addable[:remaining])
            caps.append(weight_sum // 2)
        return caps

    def coverage_bound(self, caps: list[int]) -> int:
        """Key-count bound for q = 1: how many edges can the keys still touch.

        A key whose ring never exceeds three vertices secures two or more
        edges only when those edges meet at a common holder, and that holder
        needs headroom for two shared neighbors (ncap >= 2). Edges at such
        hub vertices are scarce, so coverage beyond one edge per key is
        charged against them: a key with existing pairs extends its own hub
        for one hub edge per extra, while a fresh key spends an extra hub
        edge to open its hub. Rings allowed four or more vertices can hold
        disjoint pairs and are left uncharged.
        """
        inst = self.inst
        secured = 0
        unsec = 0
        hub_edges = 0
        for e, (i, j) in enumerate(self.edges):
            if self.shared[e] >= 1:
                secured += 1
            else:
                unsec += 1
                if self.ncap[i] >= 2 or self.ncap[j] >= 2:
                    hub_edges += 1
        first_units = 0
        extend_extras = 0  # keys that already pair somewhere, one hub edge each
        fresh_extras: list[int] = []  # extras of pairless small-ring keys
        free_extras = 0  # rings of four or more escape the hub argument
        for k in range(self.K):
            slack = caps[k] - self.pair_count[k]
            if slack <= 0:
                continue
            first_units += 1
            if slack == 1:
                continue
            if inst.usage_limit[k] >= 4:
                free_extras += slack - 1
            elif self.pair_count[k] > 0:
                extend_extras += slack - 1
            else:
                fresh_extras.append(slack - 1)
        budget = hub_edges
        taken = min(extend_extras, budget)
        extras = taken + free_extras
        budget -= taken
        fresh_extras.sort(reverse=True)
        for cap in fresh_extras:
            if budget < 2:
                break
            take = min(cap, budget - 1)
            extras += take
            budget -= take + 1
        return secured + min(unsec, first_units + extras)

    def bound(self) -> int:
        """Admissible completion bound: count edges not yet ruled out."""
        inst = self.inst
        q = inst.q
        budgets = self.vertex_budgets()
        total = 0
        for e, (i, j) in enumerate(self.edges):
            s = self.shared[e]
            if s >= q:
                total += 1
                continue
            need_i_only = 0  # key held by j, addable at i
            need_j_only = 0
            need_both = 0
            vi_row, vj_row = self.val[i], self.val[j]
            cnt_i, cnt_j = self.cnt[i], self.cnt[j]
            for k in range(self.K):
                vi, vj = vi_row[k], vj_row[k]
                if vi == 0 or vj == 0 or (vi == 1 and vj == 1):
                    continue
                if vi == 1:
                    if self.usage[k] + 1 > inst.usage_limit[k]:
                        continue
                    if cnt_j[k] > self.ncap[j] or cnt_i[k] + 1 > self.ncap[i]:
                        continue
                    need_j_only += 1
                elif vj == 1:
                    if self.usage[k] + 1 > inst.usage_limit[k]:
                        continue
                    if cnt_i[k] > self.ncap[i] or cnt_j[k] + 1 > self.ncap[j]:
                        continue
                    need_i_only += 1
                else:
                    if self.usage[k] + 2 > inst.usage_limit[k]:
                        continue
                    if cnt_i[k] + 1 > self.ncap[i] or cnt_j[k] + 1 > self.ncap[j]:
                        continue
                    need_both += 1
            bi, bj = budgets[i], budgets[j]
            best = 0
            for c in range(min(need_both, bi, bj) + 1):
                a = min(need_i_only, bi - c)
                b = min(need_j_only, bj - c)
                if a + b + c > best:
                    best = a + b + c
            if s + best >= q:
                total += 1
        caps = self.key_pair_caps()
        total = min(total, sum(caps) // q)
        if q == 1:
            total = min(total, self.coverage_bound(caps))
        return total


def greedy_heuristic(inst: KmpInstance, seed: int = 0) -> KeyAssignment:
    """Feasible constructive assignment plus 1-swap improvement.

    Edges are visited hubs-first; each edge greedily acquires up to q shared
    keys, preferring keys already held by one endpoint and breaking usage
    ties with the seeded generator. Every committed move is feasible, so the
    result always validates.
    """
    st = _State(inst)
    g = inst.graph
    rng = random.Random(seed)
    q = inst.q
    K = inst.key_count

    def can_hold(v: int, k: int) -> bool:
        if st.val[v][k] != -1:
            return False
        if st.usage[k] + 1 > inst.usage_limit[k]:
            return False
        if st.ring_mem(v) + inst.mem_per_key[k] > inst.capacity[v]:
            return False
        if st.cnt[v][k] > st.ncap[v]:
            return False
        for u in st.adj[v]:
            if st.val[u][k] == 1 and st.cnt[u][k] + 1 > st.ncap[u]:
                return False
        return True

    def place(v: int, k: int) -> None:
        st.val[v][k] = 1
        st.usage[k] += 1
        st.mem[v] = st.ring_mem(v)
        for u in st.adj[v]:
            st.cnt[u][k] += 1
            if st.val[u][k] == 1:
                e = st.edge_id[(min(u, v), max(u, v))]
                st.shared[e] += 1
                st.pair_count[k] += 1

    def unplace(v: int, k: int) -> None:
        st.val[v][k] = -1
        st.usage[k] -= 1
        st.mem[v] = st.ring_mem(v)
        for u in st.adj[v]:
            st.cnt[u][k] -= 1
            if st.val[u][k] == 1:
                e = st.edge_id[(min(u, v), max(u, v))]
                st.shared[e] -= 1
                st.pair_count[k] -= 1

    edge_order = sorted(
        g.edges, key=lambda e: (-(g.degree(e[0]) + g.degree(e[1])), e)
    )
    for i, j in edge_order:
        e = st.edge_id[(i, j)]
        placed: list[tuple[int, int]] = []
        tie = [rng.random() for _ in range(K)]
        # one-addition candidates first, then fresh keys, least used first
        candidates = sorted(
            (k for k in range(K) if not (st.val[i][k] == 1 and st.val[j][k] == 1)),
            key=lambda k: (
                (st.val[i][k] != 1 and st.val[j][k] != 1),
                st.usage[k],
                tie[k],
                k,
            ),
        )
        for k in candidates:
            if st.shared[e] >= q:
                break
            missing = [v for v in (i, j) if st.val[v][k] != 1]
            ok = True
            done: list[int] = []
            for v in missing:
                if can_hold(v, k):
                    place(v, k)
                    done.append(v)
                else:
                    ok = False
                    break
            if ok:
                placed.extend((v, k) for v in done)
            else:
                for v in reversed(done):
                    unplace(v, k)
        if st.shared[e] < q:
            # could not secure this edge; return its keys to the pool
            for v, k in reversed(placed):
                unplace(v, k)

    # 1-swap local search: replace one ring key with one absent key when the
    # move is feasible and strictly increases the secured-edge count
    def objective() -> int:
        return st.secured_now()

    improved = True
    passes = 0
    while improved and passes < 2 * g.n:
        improved = False
        passes += 1
        for v in range(g.n):
            for a in range(K):
                if st.val[v][a] != 1:
                    continue
                for b in range(K):
                    if st.val[v][b] == 1 or b == a:
                        continue
                    if not any(st.val[u][b] == 1 for u in st.adj[v]):
                        continue
                    before = objective()
                    unplace(v, a)
                    if can_hold(v, b):
                        place(v, b)
                        if objective() > before:
                            improved = True
                            break
                        unplace(v, b)
                    place(v, a)
                if st.val[v][a] != 1:
                    break
    rows = st.materialize()
    return KeyAssignment(rows)


def _branch_order(inst: KmpInstance) -> list[tuple[int, int]]:
    g = inst.graph
    vertices = sorted(range(g.n), key=lambda v: (-g.degree(v), v))
    return [(v, k) for v in vertices for k in range(inst.key_count)]


def solve_bb(inst: KmpInstance, cfg: SolverConfig | None = None) -> SolveResult:
    """Deterministic exact branch-and-bound over the key matrix.

    Branches highest-degree vertex first, keys in index order, value 1
    before 0. After each decision the propagator fixes forced zeros from
    capacity, usage saturation, and neighborhood saturation. Zero-completion
    of the fixed pattern is always feasible and feeds the incumbent. On a
    time or node limit the best open-node bound certifies the reported gap.
    """
    cfg = cfg or SolverConfig()
    start = time.perf_counter()
    st = _State(inst)
    order = _branch_order(inst)
    pos_in_order = {vk: idx for idx, vk in enumerate(order)}
    n_cells = len(order)
    K = inst.key_count
    mem = inst.mem_per_key
    tlim = inst.usage_limit

    # adjacent keys with identical parameters are interchangeable; insist
    # their columns come out lexicographically non-increasing along the
    # branch order, which prunes permuted duplicates of the same solution
    same_class = [
        k > 0 and mem[k] == mem[k - 1] and tlim[k] == tlim[k - 1] for k in range(K)
    ]
    vertex_seq = [v for v, k in order if k == 0]

    def lex_allows_one(v: int, k: int) -> bool:
        if not same_class[k]:
            return True
        for u in vertex_seq:
            if u == v:
                break
            a, b = st.val[u][k - 1], st.val[u][k]
            if a != b:
                # prefix already strictly ordered (a > b); nothing to enforce
                return True
        return st.val[v][k - 1] == 1

    best_obj = -1
    best_rows: tuple[tuple[int, ...], ...] = ()
    for restart in range(GREEDY_RESTARTS):
        warm = greedy_heuristic(inst, cfg.seed + restart)
        warm_obj = evaluate(inst, warm).objective
        if warm_obj > best_obj:
            best_obj = warm_obj
            best_rows = warm.x

    nodes = 0
    status = OPTIMAL
    root_bound = st.bound()
    upper = max(root_bound, best_obj)

    if root_bound <= best_obj:
        upper = best_obj
    else:
        # frame: [position in branch order, untried values, trail mark, bound]
        stack = [[0, [0, 1], st.mark(), root_bound]]
        while stack:
            frame = stack[-1]
            st.undo_to(frame[2])
            if cfg.node_limit is not None and nodes >= cfg.node_limit:
                status = FEASIBLE_TIMEOUT
                break
            if nodes % 64 == 0 and time.perf_counter() - start > cfg.time_limit:
                status = FEASIBLE_TIMEOUT
                break
            if not frame[1]:
                stack.pop()
                continue
            value = frame[1].pop()  # 1 first, then 0
            nodes += 1
            v, k = order[frame[0]]
            if value == 1 and not lex_allows_one(v, k):
                continue
            if not st.fix(v, k, value):
                continue
            obj_now = st.secured_now()
            if obj_now > best_obj:
                best_obj = obj_now
                best_rows = st.materialize()
            node_bound = st.bound()
            if node_bound <= best_obj:
                continue
            nxt = frame[0] + 1
            while nxt < n_cells and st.val[order[nxt][0]][order[nxt][1]] != -1:
                nxt += 1
            if nxt >= n_cells:
                continue
            stack.append([nxt, [0, 1], st.mark(), node_bound])

        if status == OPTIMAL:
            upper = best_obj
        else:
            open_bounds = [f[3] for f in stack if f[1]]
            if stack:
                open_bounds.append(stack[-1][3])
            upper = max([best_obj] + open_bounds)

    incumbent = KeyAssignment(best_rows)
    final = evaluate(inst, incumbent)
    if not final.feasible or final.objective != best_obj or best_obj > upper:
        return SolveResult(
            status=ERROR,
            incumbent=KeyAssignment.zeros(inst.graph.n, K),
            lower_bound=0,
            upper_bound=len(st.edges),
            gap=compute_gap(0, len(st.edges)),
            nodes=nodes,
            wall_time=time.perf_counter() - start,
        )
    return SolveResult(
        status=status,
        incumbent=incumbent,
        lower_bound=best_obj,
        upper_bound=upper,
        gap=compute_gap(best_obj, upper),
        nodes=nodes,
        wall_time=time.perf_counter() - start,
    )
