"""The finite state machine of equivalence classes and its exact limit.

States are classes of the depth-k agreement relation over convex linear
orders; every state has two successors — append a new singleton class, or
grow the last class — taken with probability 1/2 each.  Walking n-1 steps
from the one-point class visits states with exactly the distribution of a
uniformly random size-n structure, so the limiting distribution of the walk
gives the asymptotic probability of any sentence of quantifier depth <= k.

All chain analysis is exact: probabilities are ``fractions.Fraction`` values
throughout, so the acceptance checks are equalities rather than tolerances.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Callable

import numpy as np

from .efgame import (
    BudgetExceededError,
    GameSolver,
    reduce_representative,
    shape_type_id,
)
from .stepauto import compile_sentence
from .logic import (
    Formula,
    SIGNATURES,
    ensure_sentence,
    evaluate,
    parse,
    quantifier_depth,
    translate_to_convex,
)
from .structures import (
    BULLET,
    BuildStep,
    ConvexLinearOrder,
    PartSequence,
    as_relational,
    decompose,
    hat,
    oplus,
)


class PeriodicChainError(ValueError):
    """Raised when an operation requires a fully aperiodic chain."""


class InternalVerificationError(RuntimeError):
    """A built chain violated an invariant that should be impossible."""


@dataclass(frozen=True)
class ChainState:
    id: int
    representative: ConvexLinearOrder
    accepting: bool | None
    succ_plus: int
    succ_hat: int


@dataclass(frozen=True)
class Chain:
    k: int
    states: tuple[ChainState, ...]
    start: int

    def __post_init__(self) -> None:
        n = len(self.states)
        if not 0 <= self.start < n:
            raise ValueError(f"start state {self.start} out of range")
        for s in self.states:
            if not (0 <= s.succ_plus < n and 0 <= s.succ_hat < n):
                raise ValueError(f"state {s.id} has a dangling successor")

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class Distribution:
    probabilities: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        total = Fraction(0)
        for p in self.probabilities:
            if p < 0:
                raise ValueError(f"negative probability {p}")
            total += p
        if total != 1:
            raise ValueError(f"probabilities sum to {total}, not 1")

    def __getitem__(self, i: int) -> Fraction:
        return self.probabilities[i]

    def __len__(self) -> int:
        return len(self.probabilities)

    def max_norm_distance(self, other: "Distribution") -> Fraction:
        return max(abs(a - b) for a, b in
                   zip(self.probabilities, other.probabilities))


#: Default ceiling on discovered classes before build_chain reports
#: exhaustion instead of grinding on: the class count explodes with k (57 at
#: depth 2; at depth 3 nearly every structure of size <= 16 sits in its own
#: class, so the closure is far beyond any explicit enumeration).
DEFAULT_STATE_BUDGET = 50_000


def build_chain(k: int,
                accept: Callable[[ConvexLinearOrder], bool] | None = None,
                max_states: int | None = None) -> Chain:
    """Breadth-first closure from the one-point class.

    Each discovered representative is reduced, and successors are identified
    against existing states by the segment decider's canonical type.  The
    closure is finite for every k, but its size explodes with k; when it
    exceeds the state budget the error names the last representative rather
    than guessing.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    budget = DEFAULT_STATE_BUDGET if max_states is None else max_states
    first = reduce_representative(BULLET, k)
    reps: list[ConvexLinearOrder] = [first]
    state_of_type: dict[int, int] = {shape_type_id(first.shape, k): 0}
    successors: list[tuple[int, int]] = []
    i = 0
    while i < len(reps):
        rep = reps[i]
        found: list[int] = []
        for succ in (oplus(rep, BULLET), hat(rep)):
            reduced = reduce_representative(succ, k)
            tid = shape_type_id(reduced.shape, k)
            j = state_of_type.get(tid)
            if j is None:
                j = len(reps)
                if j >= budget:
                    raise BudgetExceededError(
                        f"class closure for k={k} exceeds {budget} states "
                        f"(last new representative {reduced.shape}); the "
                        f"depth-{k} class count is out of reach of explicit "
                        f"enumeration", j)
                reps.append(reduced)
                state_of_type[tid] = j
            found.append(j)
        successors.append((found[0], found[1]))
        i += 1
    states = tuple(
        ChainState(
            id=idx,
            representative=rep,
            accepting=None if accept is None else bool(accept(rep)),
            succ_plus=successors[idx][0],
            succ_hat=successors[idx][1],
        )
        for idx, rep in enumerate(reps)
    )
    return Chain(k=k, states=states, start=0)


def relabel_chain(chain: Chain,
                  accept: Callable[[ConvexLinearOrder], bool] | None) -> Chain:
    """Same states and transitions, fresh accepting flags (the state space
    depends only on k, not on the sentence)."""
    states = tuple(
        ChainState(s.id, s.representative,
                   None if accept is None else bool(accept(s.representative)),
                   s.succ_plus, s.succ_hat)
        for s in chain.states
    )
    return Chain(k=chain.k, states=states, start=chain.start)


def transition_matrix(chain: Chain) -> list[list[Fraction]]:
    """Row-stochastic matrix of exact rationals (entries 0, 1/2, or 1)."""
    n = len(chain.states)
    half = Fraction(1, 2)
    rows = []
    for s in chain.states:
        row = [Fraction(0)] * n
        row[s.succ_plus] += half
        row[s.succ_hat] += half
        rows.append(row)
    return rows


def _successor_sets(chain: Chain) -> list[tuple[int, ...]]:
    return [tuple(sorted({s.succ_plus, s.succ_hat})) for s in chain.states]


def _strongly_connected_components(adj: list[tuple[int, ...]]) -> list[list[int]]:
    """Iterative Tarjan; components are returned in reverse topological order."""
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    components: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            node, edge_idx = work.pop()
            if edge_idx == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack[node] = True
            advanced = False
            for ei in range(edge_idx, len(adj[node])):
                succ = adj[node][ei]
                if index[succ] == -1:
                    work.append((node, ei + 1))
                    work.append((succ, 0))
                    advanced = True
                    break
                if on_stack[succ]:
                    low[node] = min(low[node], index[succ])
            if advanced:
                continue
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == node:
                        break
                components.append(comp)
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    return components


def check_fully_aperiodic(chain: Chain) -> bool:
    """No family of disjoint state sets P_0..P_{d-1} (d > 1) exists where
    every state of P_i moves to P_{i+1 mod d} with probability 1.

    Such a family is closed under successors, so it always contains a sink
    strongly connected component carrying a consistent cyclic coloring, and
    conversely any sink component of period d > 1 yields one.  The condition
    is therefore equivalent to: every sink component has period 1 (gcd of
    its cycle lengths).  Transient components never witness periodicity —
    their leaked transitions break any probability-1 cyclic partition.
    """
    adj = _successor_sets(chain)
    comps = _strongly_connected_components(adj)
    for comp in comps:
        comp_set = set(comp)
        if any(v not in comp_set for u in comp for v in adj[u]):
            continue  # not a sink component
        if len(comp) == 1 and comp[0] not in adj[comp[0]]:
            continue
        root = comp[0]
        level = {root: 0}
        frontier = [root]
        while frontier:
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if v in comp_set and v not in level:
                        level[v] = level[u] + 1
                        nxt.append(v)
            frontier = nxt
        period = 0
        for u in comp:
            for v in adj[u]:
                if v in comp_set:
                    period = gcd(period, level[u] + 1 - level[v])
        if abs(period) != 1:
            return False
    return True


def _solve_exact(matrix: list[list[Fraction]],
                 rhs: list[list[Fraction]]) -> list[list[Fraction]]:
    """Gaussian elimination over the rationals; ``rhs`` holds one column per
    right-hand side."""
    n = len(matrix)
    a = [row[:] + r[:] for row, r in zip(matrix, rhs)]
    width = len(a[0])
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise InternalVerificationError("singular linear system")
        a[col], a[pivot] = a[pivot], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [v - factor * w for v, w in zip(a[r], a[col])]
    return [row[n:width] for row in a]


def limiting_distribution(chain: Chain) -> Distribution:
    """The exact limit of the n-step distribution from the start state.

    Condense to strongly connected components; every sink component is
    irreducible and (by the aperiodicity precondition) aperiodic, so it has
    a unique stationary distribution.  The limit weights each sink's
    stationary distribution by the probability of absorption into it.
    """
    if not check_fully_aperiodic(chain):
        raise PeriodicChainError("chain is not fully aperiodic")
    n = len(chain.states)
    adj = _successor_sets(chain)
    comps = _strongly_connected_components(adj)
    comp_of = [0] * n
    for ci, comp in enumerate(comps):
        for node in comp:
            comp_of[node] = ci
    is_sink = [all(comp_of[v] == ci for u in comp for v in adj[u])
               for ci, comp in enumerate(comps)]
    half = Fraction(1, 2)

    def weight(u: int, v: int) -> Fraction:
        s = chain.states[u]
        return half * ((s.succ_plus == v) + (s.succ_hat == v))

    stationary: dict[int, dict[int, Fraction]] = {}
    for ci, comp in enumerate(comps):
        if not is_sink[ci]:
            continue
        m = len(comp)
        pos = {node: idx for idx, node in enumerate(comp)}
        rows = []
        rhs = []
        for j in range(m - 1):
            target = comp[j]
            row = [weight(comp[i], target) - (1 if i == j else 0)
                   for i in range(m)]
            rows.append(row)
            rhs.append([Fraction(0)])
        rows.append([Fraction(1)] * m)
        rhs.append([Fraction(1)])
        solution = _solve_exact(rows, rhs)
        stationary[ci] = {node: solution[pos[node]][0] for node in comp}

    sink_ids = [ci for ci in range(len(comps)) if is_sink[ci]]
    start_comp = comp_of[chain.start]
    absorb: dict[int, Fraction] = {ci: Fraction(0) for ci in sink_ids}
    if is_sink[start_comp]:
        absorb[start_comp] = Fraction(1)
    else:
        transient = [u for u in range(n) if not is_sink[comp_of[u]]]
        t_pos = {u: idx for idx, u in enumerate(transient)}
        rows = []
        rhs = []
        for u in transient:
            row = [Fraction(0)] * len(transient)
            row[t_pos[u]] = Fraction(1)
            hit = [Fraction(0)] * len(sink_ids)
            for v in set(adj[u]):
                w = weight(u, v)
                if v in t_pos:
                    row[t_pos[v]] -= w
                else:
                    hit[sink_ids.index(comp_of[v])] += w
            rows.append(row)
            rhs.append(hit)
        solution = _solve_exact(rows, rhs)
        for si, ci in enumerate(sink_ids):
            absorb[ci] = solution[t_pos[chain.start]][si]
    if sum(absorb.values()) != 1:
        raise InternalVerificationError(
            f"absorption probabilities sum to {sum(absorb.values())}")

    probs = [Fraction(0)] * n
    for ci in sink_ids:
        for node, mass in stationary[ci].items():
            probs[node] = absorb[ci] * mass
    return Distribution(tuple(probs))


def distribution_after(chain: Chain, steps: int) -> Distribution:
    """Exact distribution after the given number of steps from the start."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    n = len(chain.states)
    plus = [s.succ_plus for s in chain.states]
    grow = [s.succ_hat for s in chain.states]
    nums = [0] * n
    nums[chain.start] = 1
    for _ in range(steps):
        nxt = [0] * n
        for i, v in enumerate(nums):
            if v:
                nxt[plus[i]] += v
                nxt[grow[i]] += v
        nums = nxt
    denom = 1 << steps
    return Distribution(tuple(Fraction(v, denom) for v in nums))


def chain_walk(chain: Chain, shape: PartSequence) -> int:
    """State reached by running the shape's construction steps from the start."""
    state = chain.start
    for step in decompose(ConvexLinearOrder(shape)):
        s = chain.states[state]
        state = s.succ_hat if step is BuildStep.HAT else s.succ_plus
    return state


def build_sentence_chain(translated: Formula) -> Chain:
    """Chain of the sentence's step automaton (states: acceptance-equivalent
    construction prefixes).

    This is the coarsest quotient of the class chain that still decides the
    sentence: equivalent prefixes stay equivalent under both constructors,
    so they agree on the sentence after every suffix, and the quotient
    preserves both full aperiodicity and the limiting accepting mass.  It
    stays small for sentences whose class chain is far too large to build.
    Each state carries the first structure reaching it; the automaton's
    acceptance bit is re-checked against the model checker on that
    representative.
    """
    auto = compile_sentence(translated)
    reps: list[ConvexLinearOrder | None] = [None] * auto.n_states
    reps[auto.start] = BULLET
    order = [auto.start]
    for q in order:
        rep = reps[q]
        for succ_state, make in ((auto.step_new[q], lambda c: oplus(c, BULLET)),
                                 (auto.step_grow[q], hat)):
            if reps[succ_state] is None:
                reps[succ_state] = make(rep)
                order.append(succ_state)
    states = []
    for q in range(auto.n_states):
        rep = reps[q]
        if rep is None:
            raise InternalVerificationError(
                f"automaton state {q} unreachable by construction steps")
        checked = evaluate(as_relational("convex", rep.shape), translated)
        if checked != auto.accepting[q]:
            raise InternalVerificationError(
                f"automaton acceptance disagrees with the model checker on "
                f"{rep.shape}: automaton={auto.accepting[q]} checker={checked}")
        states.append(ChainState(
            id=q,
            representative=rep,
            accepting=auto.accepting[q],
            succ_plus=auto.step_new[q],
            succ_hat=auto.step_grow[q],
        ))
    return Chain(k=quantifier_depth(translated), states=tuple(states),
                 start=auto.start)


# --- sentence-level interface --------------------------------------------------


@dataclass(frozen=True)
class LimitAnalysis:
    theory: str
    sentence: Formula
    translated: Formula
    k: int
    chain: Chain
    distribution: Distribution
    probability: Fraction


def _coerce_sentence(theory: str, sentence) -> Formula:
    if theory not in SIGNATURES:
        raise ValueError(f"unknown theory {theory!r}")
    if isinstance(sentence, str):
        sentence = parse(sentence, SIGNATURES[theory])
    ensure_sentence(sentence)
    return sentence


#: Largest depth at which the full class chain is materialized; deeper
#: sentences go through the (provably equivalent) step-automaton quotient.
CLASS_CHAIN_MAX_K = 2


def prepare_chain(theory: str, sentence, k_override: int | None = None,
                  chain_method: str = "auto"
                  ) -> tuple[Formula, Formula, int, Chain]:
    """Translate, fix k, and build a chain labeled by sentence satisfaction.

    ``chain_method``: "classes" forces the depth-k class chain, "automaton"
    the sentence's step-automaton quotient, "auto" picks the class chain
    for depths where it is materializable and the quotient beyond.
    """
    sentence = _coerce_sentence(theory, sentence)
    translated = translate_to_convex(theory, sentence)
    k = quantifier_depth(translated)
    if k_override is not None:
        if k_override < k:
            raise ValueError(
                f"k override {k_override} is below the quantifier depth {k}; "
                f"only upward overrides are allowed")
        k = k_override
    if chain_method == "auto":
        chain_method = "classes" if k <= CLASS_CHAIN_MAX_K else "automaton"
    if chain_method == "classes":
        def accept(rep: ConvexLinearOrder) -> bool:
            return evaluate(as_relational("convex", rep.shape), translated)

        chain = build_chain(k, accept)
    elif chain_method == "automaton":
        chain = build_sentence_chain(translated)
    else:
        raise ValueError(f"unknown chain method {chain_method!r}")
    return sentence, translated, k, chain


def analyze_limit(theory: str, sentence, k_override: int | None = None,
                  chain_method: str = "auto") -> LimitAnalysis:
    """Exact limiting probability of the sentence, with the chain evidence."""
    sentence, translated, k, chain = prepare_chain(
        theory, sentence, k_override, chain_method)
    if not check_fully_aperiodic(chain):
        raise InternalVerificationError(
            f"built chain for k={k} is not fully aperiodic")
    dist = limiting_distribution(chain)
    probability = sum((dist[s.id] for s in chain.states if s.accepting),
                      Fraction(0))
    return LimitAnalysis(theory, sentence, translated, k, chain, dist,
                         probability)


def limit_probability(theory: str, sentence) -> Fraction:
    """The asymptotic probability that a uniformly random size-n structure
    of the theory satisfies the sentence."""
    return analyze_limit(theory, sentence).probability


# --- sampling ------------------------------------------------------------------

_WILSON_Z99 = 2.5758293035489004
_CHUNK = 4096


@dataclass(frozen=True)
class EstimateResult:
    estimate: Fraction
    half_width: float
    hits: int
    samples: int


def _wilson_half_width(hits: int, samples: int, z: float = _WILSON_Z99) -> float:
    phat = hits / samples
    denom = 1.0 + z * z / samples
    return (z / denom) * math.sqrt(
        phat * (1.0 - phat) / samples + z * z / (4.0 * samples * samples))


def _chunks(samples: int) -> list[tuple[int, int]]:
    out = []
    start = 0
    idx = 0
    while start < samples:
        size = min(_CHUNK, samples - start)
        out.append((idx, size))
        start += size
        idx += 1
    return out


def _chunk_bits(seed: int, chunk_index: int, size: int, n: int) -> np.ndarray:
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(chunk_index,))
    rng = np.random.Generator(np.random.PCG64(seq))
    return rng.integers(0, 2, size=(size, max(n - 1, 0)), dtype=np.uint8)


def _shape_from_bits(row) -> PartSequence:
    parts = [1]
    for bit in row:
        if bit:
            parts[-1] += 1
        else:
            parts.append(1)
    return PartSequence(tuple(parts))


def estimate_probability(theory: str, sentence, n: int, samples: int,
                         seed: int, *, method: str = "walk",
                         threads: int = 1,
                         chain_method: str = "auto") -> EstimateResult:
    """Monte Carlo estimate with a 99% Wilson half-width.

    Draws uniform size-n structures as independent fair construction steps
    (one generator per fixed-size chunk, derived from the seed and the chunk
    index, so the result is deterministic and independent of scheduling).

    ``method="walk"`` classifies each sample by running its steps through
    the state machine and reads satisfaction off the class label — exact for
    every sample, and fast enough for large n.  ``method="direct"`` model
    checks every sampled structure with the evaluator; both methods decide
    the same satisfaction bit per sample.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if method not in ("walk", "direct"):
        raise ValueError(f"unknown method {method!r}")
    sentence, translated, k, chain = prepare_chain(
        theory, sentence, chain_method=chain_method)

    if method == "walk":
        trans = np.array(
            [[s.succ_plus for s in chain.states],
             [s.succ_hat for s in chain.states]], dtype=np.int64)
        accepting = np.array([bool(s.accepting) for s in chain.states])

        def run_chunk(job: tuple[int, int]) -> int:
            idx, size = job
            bits = _chunk_bits(seed, idx, size, n)
            state = np.full(size, chain.start, dtype=np.int64)
            for t in range(n - 1):
                state = trans[bits[:, t], state]
            return int(accepting[state].sum())
    else:
        def run_chunk(job: tuple[int, int]) -> int:
            idx, size = job
            bits = _chunk_bits(seed, idx, size, n)
            count = 0
            for row in bits:
                shape = _shape_from_bits(row)
                if evaluate(as_relational(theory, shape), sentence):
                    count += 1
            return count

    jobs = _chunks(samples)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            hits = sum(pool.map(run_chunk, jobs))
    else:
        hits = sum(run_chunk(job) for job in jobs)
    return EstimateResult(
        estimate=Fraction(hits, samples),
        half_width=_wilson_half_width(hits, samples),
        hits=hits,
        samples=samples,
    )


# --- verification and export ----------------------------------------------------


def verify_chain_states(chain: Chain, solver: GameSolver | None = None) -> None:
    """Re-check that representatives are pairwise non-equivalent with the
    game solver; raises naming the offending pair."""
    s = solver if solver is not None else GameSolver()
    reps = [st.representative for st in chain.states]
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            if s.equiv(reps[i], reps[j], chain.k):
                raise InternalVerificationError(
                    f"states {i} ({reps[i].shape}) and {j} ({reps[j].shape}) "
                    f"are equivalent at depth {chain.k}")


def chain_to_json(chain: Chain, include_limit: bool = True) -> dict:
    doc: dict = {
        "k": chain.k,
        "start": chain.start,
        "states": [
            {
                "id": s.id,
                "representative": str(s.representative.shape),
                "accepting": s.accepting,
                "succ_plus": s.succ_plus,
                "succ_hat": s.succ_hat,
            }
            for s in chain.states
        ],
    }
    if include_limit:
        dist = limiting_distribution(chain)
        doc["limit"] = [f"{p.numerator}/{p.denominator}"
                        for p in dist.probabilities]
        doc["limit_approx"] = [float(p) for p in dist.probabilities]
    return doc


def chain_from_json(doc: dict) -> Chain:
    states = tuple(
        ChainState(
            id=entry["id"],
            representative=ConvexLinearOrder(
                PartSequence.from_text(entry["representative"])),
            accepting=entry["accepting"],
            succ_plus=entry["succ_plus"],
            succ_hat=entry["succ_hat"],
        )
        for entry in doc["states"]
    )
    return Chain(k=doc["k"], states=states, start=doc["start"])


def chain_to_dot(chain: Chain) -> str:
    lines = ["digraph chain {", "  rankdir=LR;"]
    for s in chain.states:
        acc = " [acc]" if s.accepting else ""
        lines.append(f'  {s.id} [label="{s.id}: {s.representative.shape}{acc}"];')
    for s in chain.states:
        lines.append(f'  {s.id} -> {s.succ_plus} [label="⊕• 1/2"];')
        lines.append(f'  {s.id} -> {s.succ_hat} [label="^ 1/2"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
