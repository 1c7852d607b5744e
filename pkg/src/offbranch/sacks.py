"""Sacks conditions, finite-support products, and the stage construction.

A condition is a perfect binary tree given by a reduced antichain of free
stems: the tree is every node comparable with some stem, and above each
stem the tree is full.  This is the same normal form as a clopen set, and
``p <= q`` is containment of the corresponding clopen sets.

Splitting levels are counted from 0: ``split_set(p, 0)`` is the first
splitting node, and an element of ``split_set(p, n)`` has exactly ``n``
splitting nodes strictly below it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

import numpy as np

from . import _kernels
from .families import LazyNodeSet
from .measure import ClopenSet, _reduce, diff
from .treecore import Node, format_node, is_antichain, is_binary, parse_node, sorted_nodes


class NotInCondition(ValueError):
    pass


class InvalidVecSplit(ValueError):
    pass


class PreconditionViolated(ValueError):
    pass


class NotPowerOfTwo(ValueError):
    pass


class OracleContractViolated(RuntimeError):
    pass


class Exhausted(LookupError):
    """The oracle cannot meet a request within its probe depth."""


class BudgetExceeded(RuntimeError):
    pass


class NotAFusionSequence(ValueError):
    def __init__(self, index: int, detail: str = ""):
        super().__init__(f"not a fusion sequence at index {index}" + (f": {detail}" if detail else ""))
        self.index = index


@dataclass(frozen=True)
class SacksCondition:
    free_stems: frozenset

    def __init__(self, free_stems: Iterable[Node] = ((),)):
        stems = [tuple(s) for s in free_stems]
        if not stems:
            raise ValueError("a condition needs at least one stem")
        if not all(is_binary(s) for s in stems):
            raise ValueError("stems must be binary")
        object.__setattr__(self, "free_stems", _reduce(stems))

    def __contains__(self, sigma: Node) -> bool:
        n = len(sigma)
        return any(s[:n] == sigma or sigma[: len(s)] == s for s in self.free_stems)

    contains = __contains__

    @property
    def is_full(self) -> bool:
        return self.free_stems == frozenset({()})

    def clopen(self) -> ClopenSet:
        return ClopenSet(self.free_stems)

    def sorted_stems(self) -> list[Node]:
        return sorted_nodes(self.free_stems)

    def tree_mask(self, depth: int) -> np.ndarray:
        return _kernels.tree_mask(self.free_stems, depth)

    def to_json(self) -> list[str]:
        return [format_node(s) for s in self.sorted_stems()]

    @classmethod
    def from_json(cls, stems: Sequence[str]) -> "SacksCondition":
        return cls(parse_node(s) for s in stems)

    def __repr__(self) -> str:
        return "SacksCondition({" + ", ".join(self.to_json()) + "})"


FULL = SacksCondition()


def full_tree() -> SacksCondition:
    return FULL


def _split_level(sigma: Node, stems: list[Node], n: int) -> list[Node]:
    depth = len(sigma)
    if any(len(s) <= depth for s in stems):
        return [sigma + bits for bits in itertools.product((0, 1), repeat=n)]
    zero = [s for s in stems if s[depth] == 0]
    one = [s for s in stems if s[depth] == 1]
    if zero and one:
        if n == 0:
            return [sigma]
        return _split_level(sigma + (0,), zero, n - 1) + _split_level(sigma + (1,), one, n - 1)
    if zero:
        return _split_level(sigma + (0,), zero, n)
    return _split_level(sigma + (1,), one, n)


def split_set(p: SacksCondition, n: int) -> frozenset:
    """Splitting nodes with exactly ``n`` splitting nodes strictly below."""
    if n < 0:
        raise ValueError("split index must be non-negative")
    return frozenset(_split_level((), list(p.free_stems), n))


def sacks_leq(p: SacksCondition, q: SacksCondition) -> bool:
    """``p <= q``: the tree of ``p`` is contained in the tree of ``q``."""
    return diff(p.clopen(), q.clopen()).is_empty


def restrict(p: SacksCondition, sigma: Node) -> SacksCondition:
    """The nodes of ``p`` comparable with ``sigma``."""
    sigma = tuple(sigma)
    if sigma not in p:
        raise NotInCondition(f"{format_node(sigma)} is not in {p!r}")
    n = len(sigma)
    out = []
    for s in p.free_stems:
        if s[:n] == sigma:
            out.append(s)
        elif sigma[: len(s)] == s:
            out.append(sigma)
    return SacksCondition(out)


def tree_union(conditions: Iterable[SacksCondition]) -> SacksCondition:
    stems: list[Node] = []
    for c in conditions:
        stems.extend(c.free_stems)
    return SacksCondition(stems)


# --- products ------------------------------------------------------------


@dataclass(frozen=True)
class ProdCondition:
    """Finite-support product; every coordinate not stored is the full tree."""

    entries: tuple

    def __init__(self, entries: dict | Iterable = ()):
        items = entries.items() if isinstance(entries, dict) else entries
        kept = tuple(sorted((int(i), c) for i, c in items if not c.is_full))
        object.__setattr__(self, "entries", kept)

    def __getitem__(self, i: int) -> SacksCondition:
        for j, c in self.entries:
            if j == i:
                return c
        return FULL

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    def replace(self, updates: dict) -> "ProdCondition":
        d = dict(self.entries)
        d.update(updates)
        return ProdCondition(d)

    def to_json(self) -> dict:
        return {str(i): c.to_json() for i, c in self.entries}

    @classmethod
    def from_json(cls, data: dict) -> "ProdCondition":
        return cls({int(i): SacksCondition.from_json(v) for i, v in data.items()})

    def __repr__(self) -> str:
        return f"ProdCondition({self.to_json()})"


FULL_PRODUCT = ProdCondition()


def prod_leq(p: ProdCondition, q: ProdCondition) -> bool:
    coords = set(p.support) | set(q.support)
    return all(sacks_leq(p[i], q[i]) for i in coords)


def vec_splits(P: ProdCondition, n: int) -> list[tuple[Node, ...]]:
    """All ``(s_0, ..., s_n)`` with ``s_i`` in ``split_set(P[i], n - i)``."""
    levels = [sorted_nodes(split_set(P[i], n - i)) for i in range(n + 1)]
    return [tuple(v) for v in itertools.product(*levels)]


def leq_n(p, q, n: int) -> bool:
    """``p <= q`` and the ``n``-th splitting levels agree.

    Works on single conditions and on products (vector splitting points).
    """
    if isinstance(p, SacksCondition):
        return sacks_leq(p, q) and split_set(p, n) == split_set(q, n)
    return prod_leq(p, q) and set(vec_splits(p, n)) == set(vec_splits(q, n))


def restrict_vec(P: ProdCondition, v: Sequence[Node]) -> ProdCondition:
    """Restrict coordinate ``i`` to ``v[i]`` for ``i < len(v)``."""
    updates = {}
    for i, sigma in enumerate(v):
        try:
            updates[i] = restrict(P[i], sigma)
        except NotInCondition as e:
            raise InvalidVecSplit(f"coordinate {i}: {e}") from None
    return P.replace(updates)


def amalgamate(base: ProdCondition, refined: ProdCondition, v: Sequence[Node],
               *, anchor: ProdCondition | None = None) -> ProdCondition:
    """Put ``refined`` back under ``v`` while keeping the other branches of ``base``.

    ``v`` is a vector splitting point of level ``m = len(v) - 1`` of
    ``anchor`` (default ``base``).  For ``i <= m`` the result at ``i`` is
    ``refined[i]`` together with ``base[i]`` restricted to every other node
    of ``split_set(anchor[i], m - i)``; beyond ``m`` it is ``refined[i]``.
    """
    anchor = base if anchor is None else anchor
    m = len(v) - 1
    if not prod_leq(refined, restrict_vec(base, v)):
        raise PreconditionViolated("refined condition is not below base restricted to v")
    out = {}
    for i in range(m + 1):
        level = split_set(anchor[i], m - i)
        if v[i] not in level:
            raise InvalidVecSplit(f"coordinate {i}: {format_node(v[i])} not in split level {m - i}")
        parts = [refined[i]]
        for sigma in level:
            if sigma == v[i]:
                continue
            if sigma not in base[i]:
                raise PreconditionViolated(f"coordinate {i}: base lost branch {format_node(sigma)}")
            parts.append(restrict(base[i], sigma))
        out[i] = tree_union(parts)
    for i in refined.support:
        if i > m:
            out[i] = refined[i]
    return ProdCondition(out)


# --- names ---------------------------------------------------------------


@dataclass(frozen=True)
class Request:
    count: int
    forbidden: frozenset = frozenset()
    incomparable_to: frozenset = frozenset()


class NameOracle(Protocol):
    def decide(self, q: ProdCondition, request: Request) -> tuple[ProdCondition, frozenset]:
        ...


def _prefix_closure(nodes: Iterable[Node]) -> set[Node]:
    out = set()
    for s in nodes:
        out.update(s[:i] for i in range(len(s) + 1))
    return out


def _pick(listing: Sequence[Node], request: Request) -> frozenset:
    blocked = set(request.incomparable_to)
    closure = _prefix_closure(blocked)
    chosen: list[Node] = []
    for alpha in listing:
        if alpha in request.forbidden or alpha in closure:
            continue
        if any(alpha[:i] in blocked for i in range(len(alpha))):
            continue
        chosen.append(alpha)
        if len(chosen) == request.count:
            return frozenset(chosen)
        blocked.add(alpha)
        closure.update(alpha[:i] for i in range(len(alpha) + 1))
    raise Exhausted(f"only {len(chosen)} of {request.count} elements available")


class GroundSetName:
    """A ground-model antichain seen as a name; it never strengthens conditions."""

    def __init__(self, A: LazyNodeSet, probe_depth: int = 10):
        self.set = A
        self.probe_depth = probe_depth
        self.listing = A.listing(probe_depth)

    def members(self) -> frozenset:
        return frozenset(self.listing)

    def decide(self, q: ProdCondition, request: Request) -> tuple[ProdCondition, frozenset]:
        return q, _pick(self.listing, request)


def ground_set_name(A: LazyNodeSet, probe_depth: int = 10) -> GroundSetName:
    return GroundSetName(A, probe_depth)


class BitCodedName:
    """Name for ``A_b`` where ``b`` is bit ``position`` of the generic real at ``coord``.

    Deciding the name may strengthen the condition at ``coord`` to the
    leftmost node of length ``position + 1``.
    """

    def __init__(self, sets: tuple[LazyNodeSet, LazyNodeSet], coord: int = 0,
                 position: int = 0, probe_depth: int = 10):
        self.listings = tuple(a.listing(probe_depth) for a in sets)
        self.coord = coord
        self.position = position
        self.probe_depth = probe_depth

    def members(self) -> frozenset:
        return frozenset(self.listings[0]) | frozenset(self.listings[1])

    def decided_bit(self, p: SacksCondition) -> int | None:
        L = self.position
        bits = {s[L] if len(s) > L else None for s in p.free_stems}
        if len(bits) == 1 and None not in bits:
            return bits.pop()
        return None

    def decide(self, q: ProdCondition, request: Request) -> tuple[ProdCondition, frozenset]:
        tree = q[self.coord]
        bit = self.decided_bit(tree)
        if bit is None:
            L = self.position + 1
            candidates = sorted(
                {s[:L] for s in tree.free_stems if len(s) >= L}
                | {s + bits for s in tree.free_stems if len(s) < L
                   for bits in itertools.product((0, 1), repeat=L - len(s))}
            )
            node = candidates[0]
            q = q.replace({self.coord: restrict(tree, node)})
            bit = node[-1]
        return q, _pick(self.listings[bit], request)


# --- stage construction ---------------------------------------------------


@dataclass(frozen=True)
class StageState:
    n: int
    p: ProdCondition
    S_blocks: tuple[frozenset, ...]
    B_list: tuple[frozenset, ...]
    history: tuple[ProdCondition, ...] = ()
    records: tuple[dict, ...] = field(default=(), compare=False)

    def B(self, i: int) -> frozenset:
        return self.B_list[i] if i < len(self.B_list) else frozenset()

    def selected(self) -> frozenset:
        out: frozenset = frozenset()
        for block in self.S_blocks:
            out |= block
        return out


def initial_state(p0: ProdCondition = FULL_PRODUCT, B_list: Sequence[Iterable[Node]] = ()) -> StageState:
    return StageState(0, p0, (frozenset(),), tuple(frozenset(b) for b in B_list), (p0,))


def _checked_decide(oracle: NameOracle, q: ProdCondition, request: Request):
    try:
        q2, revealed = oracle.decide(q, request)
    except Exhausted as e:
        raise OracleContractViolated(f"oracle exhausted: {e}") from None
    _validate(q, q2, revealed, request)
    return q2, revealed


def _validate(q, q2, revealed, request: Request) -> None:
    if not prod_leq(q2, q):
        raise OracleContractViolated("oracle weakened the condition")
    if len(revealed) != request.count:
        raise OracleContractViolated(f"revealed {len(revealed)} of {request.count}")
    if not is_antichain(revealed):
        raise OracleContractViolated("revealed set is not an antichain")
    if revealed & request.forbidden:
        raise OracleContractViolated("revealed a forbidden element")
    if not is_antichain(revealed | request.incomparable_to) or revealed & request.incomparable_to:
        raise OracleContractViolated("revealed an element comparable with a protected node")


def _lits(nodes: Iterable[Node]) -> list[str]:
    return [format_node(s) for s in sorted_nodes(nodes)]


def pair_reduce(P: ProdCondition, v_list: Sequence[Sequence[Node]], a: Iterable[Node],
                oracle: NameOracle, incumbent: Iterable[Node] = (), *,
                forbidden: frozenset = frozenset(), probe: int | None = None,
                anchor: ProdCondition | None = None, rounds_log: list | None = None,
                conditions_log: list | None = None) -> tuple[ProdCondition, Node]:
    """Halve ``a`` once per vector split until one survivor is left.

    Round ``j`` restricts the current condition to ``v_list[j]``, asks the
    oracle for each pair which element keeps enough revealed nodes
    incomparable to it, and amalgamates the strengthened condition back.
    """
    remaining = sorted_nodes(a)
    size = len(remaining)
    if size == 0 or size & (size - 1):
        raise NotPowerOfTwo(f"|a| = {size}")
    rounds = size.bit_length() - 1
    if len(v_list) < rounds:
        raise PreconditionViolated(f"{rounds} rounds need {rounds} vector splits, got {len(v_list)}")
    if not is_antichain(remaining):
        raise PreconditionViolated("a is not an antichain")
    incumbent = frozenset(incumbent)
    if not is_antichain(set(remaining) | incumbent) or set(remaining) & incumbent:
        raise PreconditionViolated("a is comparable with an incumbent node")
    anchor = P if anchor is None else anchor
    probe = size if probe is None else probe
    current = P
    for j in range(rounds):
        v = v_list[j]
        q = restrict_vec(current, v)
        chosen, log = [], []
        for t1, t2 in zip(remaining[0::2], remaining[1::2]):
            pick = None
            for t, other in ((t1, t2), (t2, t1)):
                request = Request(probe, forbidden, incumbent | {t})
                try:
                    q2, revealed = oracle.decide(q, request)
                except Exhausted:
                    continue
                _validate(q, q2, revealed, request)
                q, pick = q2, t
                break
            if pick is None:
                raise OracleContractViolated(
                    f"neither {format_node(t1)} nor {format_node(t2)} keeps {probe} nodes incomparable"
                )
            chosen.append(pick)
            log.append({"pair": [format_node(t1), format_node(t2)], "chosen": format_node(pick),
                        "rejected": format_node(t2 if pick == t1 else t1)})
        current = amalgamate(current, q, v, anchor=anchor)
        remaining = chosen
        if rounds_log is not None:
            rounds_log.append({"round": j, "vec_split": _lits_vec(v), "pairs": log})
        if conditions_log is not None:
            conditions_log.append(current)
    return current, remaining[0]


def _lits_vec(v: Sequence[Node]) -> list[str]:
    return [format_node(s) for s in v]


def stage_step(state: StageState, oracle: NameOracle, *, max_k: int = 10,
               probe: int | None = None) -> StageState:
    """Build ``p_{n+1}`` and the block ``S_{n+1}`` from stage ``n``."""
    n, p_n = state.n, state.p
    vecs = vec_splits(p_n, n + 1)
    k = len(vecs) - 1
    if k > max_k:
        raise BudgetExceeded(f"stage {n + 1} needs a-sets of size 2^{k} > 2^{max_k}")
    forbidden: frozenset = frozenset()
    for i in range(n + 2):
        forbidden |= state.B(i)
    previous = state.selected()
    size = 1 << k
    survivors: list[Node] = []
    a_sets, rounds, grid = [], [], []
    current = p_n
    for i in range(k + 1):
        protected = previous | frozenset(survivors)
        q = restrict_vec(current, vecs[i])
        q2, a_i = _checked_decide(oracle, q, Request(size, forbidden, protected))
        current = amalgamate(current, q2, vecs[i], anchor=p_n)
        grid.append({"i": i, "j": i, "condition": current.to_json()})
        a_sets.append(_lits(a_i))
        order = [j for j in range(k + 1) if j != i]
        log: list = []
        conds: list = []
        current, s_i = pair_reduce(
            current, [vecs[j] for j in order], a_i, oracle, protected,
            forbidden=forbidden, probe=probe, anchor=p_n, rounds_log=log, conditions_log=conds,
        )
        for entry, j, c in zip(log, order, conds):
            entry["i"], entry["j"] = i, j
            grid.append({"i": i, "j": j, "condition": c.to_json()})
        rounds.extend(log)
        survivors.append(s_i)
    block = frozenset(survivors)
    p_next = current
    selected = previous | block
    witness_ok = True
    try:
        _checked_decide(oracle, p_next, Request(size, forbidden, selected))
    except OracleContractViolated:
        witness_ok = False
    checks = {
        "leq": prod_leq(p_next, p_n),
        "leq_n": leq_n(p_next, p_n, n),
        "antichain": is_antichain(selected) and len(selected) == len(previous) + len(block),
        "avoids_B": not any(block & state.B(i) for i in range(n + 2)),
        "incomparable_witness": witness_ok,
    }
    record = {
        "stage": n + 1,
        "k": k,
        "vec_splits": [_lits_vec(v) for v in vecs],
        "a_sets": a_sets,
        "pairing_rounds": rounds,
        "r_grid": grid,
        "survivors": [format_node(s) for s in survivors],
        "S_block": _lits(block),
        "leq_n_check": checks["leq_n"],
        "checks": checks,
        "condition": p_next.to_json(),
    }
    return StageState(
        n + 1, p_next, state.S_blocks + (block,), state.B_list,
        state.history + (p_next,), state.records + (record,),
    )


def run_stages(oracle: NameOracle, stages: int, B_list: Sequence[Iterable[Node]] = (),
               p0: ProdCondition = FULL_PRODUCT, **kw) -> StageState:
    state = initial_state(p0, B_list)
    for _ in range(stages):
        state = stage_step(state, oracle, **kw)
    return state


# --- fusion ---------------------------------------------------------------


@dataclass(frozen=True)
class FusedCondition:
    """Coordinatewise intersection of a fusion sequence, cut at ``depth``.

    ``masks[i]`` is the heap mask of the tree at coordinate ``i``; every
    coordinate outside ``masks`` is the full tree.
    """

    depth: int
    masks: dict = field(compare=False)

    def mask(self, i: int) -> np.ndarray:
        if i in self.masks:
            return self.masks[i]
        return _kernels.tree_mask([()], self.depth)

    def contains(self, i: int, sigma: Node) -> bool:
        return len(sigma) <= self.depth and bool(self.mask(i)[_kernels.heap_index(sigma)])

    def split_set(self, i: int, m: int) -> frozenset:
        """Splitting nodes of level ``m`` that can be seen below ``depth``."""
        mask = self.mask(i)
        counts = _kernels.split_counts(mask, self.depth)
        inner = (1 << self.depth) - 1
        idx = np.arange(inner)
        splits = mask[:inner] & mask[2 * idx + 1] & mask[2 * idx + 2]
        hits = np.nonzero(splits & (counts[:inner] == m))[0]
        return frozenset(_kernels.heap_node(int(h)) for h in hits)

    def is_pruned(self, i: int) -> bool:
        """Every node below ``depth`` has a child, so every node reaches ``depth``."""
        mask = self.mask(i)
        inner = (1 << self.depth) - 1
        idx = np.arange(inner)
        has_child = mask[2 * idx + 1] | mask[2 * idx + 2]
        return bool(np.all(~mask[:inner] | has_child))


def _visible(level: frozenset, depth: int) -> bool:
    return all(len(s) < depth for s in level)


def fuse(seq: Sequence[ProdCondition], depth: int) -> FusedCondition:
    if not seq:
        raise NotAFusionSequence(0, "empty sequence")
    for k in range(len(seq) - 1):
        if not leq_n(seq[k + 1], seq[k], k):
            raise NotAFusionSequence(k)
    coords = sorted({i for p in seq for i in p.support})
    masks = {}
    for i in coords:
        m = seq[0][i].tree_mask(depth)
        for p in seq[1:]:
            m = m & p[i].tree_mask(depth)
        masks[i] = m
    return FusedCondition(depth, masks)


def fusion_agreement(fused: FusedCondition, seq: Sequence[ProdCondition]) -> list[dict]:
    """Compare each ``seq[n]`` with the fusion on split levels ``<= n - i``.

    Levels whose nodes reach ``depth`` are skipped and marked as such.
    """
    out = []
    for n, p in enumerate(seq):
        for i in range(n + 1):
            for m in range(n - i + 1):
                want = split_set(p[i], m)
                if not _visible(want, fused.depth):
                    out.append({"n": n, "coord": i, "level": m, "status": "beyond-depth"})
                    continue
                got = fused.split_set(i, m)
                out.append({"n": n, "coord": i, "level": m,
                            "status": "agree" if got == want else "differ"})
    return out
