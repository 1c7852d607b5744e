"""Off-branch sets, almost disjoint families, and their transformations.

A :class:`LazyNodeSet` is a possibly infinite node set described by a
membership predicate and an enumerator of its truncations.  The truncation
at bound ``d`` is the intersection with the box
``{sigma : len(sigma) < d and every coordinate < d}``; on the binary tree
(``d >= 2``) that is exactly the set of nodes of length ``< d``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

from .treecore import (
    EpBranch,
    Node,
    format_node,
    is_binary,
    max_chain_len,
    rs,
    sorted_nodes,
)


class NotInImage(ValueError):
    pass


class BranchRootMismatch(ValueError):
    pass


class IndexOutOfRange(IndexError):
    pass


def in_box(sigma: Node, d: int) -> bool:
    return len(sigma) < d and all(c < d for c in sigma)


def box(d: int, *, binary: bool = False) -> Iterator[Node]:
    """All nodes of the truncation box, length-lexicographically."""
    alphabet = range(min(d, 2) if binary else d)
    for length in range(d):
        yield from itertools.product(alphabet, repeat=length)


@dataclass(frozen=True)
class LazyNodeSet:
    contains: Callable[[Node], bool]
    enumerate_upto: Callable[[int], frozenset]
    claims_infinite: bool = True
    description: str = ""

    def __contains__(self, sigma: Node) -> bool:
        return self.contains(tuple(sigma))

    def truncate(self, d: int) -> frozenset:
        return self.enumerate_upto(d)

    def listing(self, d: int) -> list[Node]:
        return sorted_nodes(self.enumerate_upto(d))

    def __and__(self, other: "LazyNodeSet") -> "LazyNodeSet":
        return intersect(self, other)


def from_predicate(contains: Callable[[Node], bool], *, binary: bool = False,
                   claims_infinite: bool = True, description: str = "") -> LazyNodeSet:
    """Generic set enumerated by filtering the box; only for small bounds."""
    def enum(d: int) -> frozenset:
        return frozenset(s for s in box(d, binary=binary) if contains(s))

    if binary:
        return LazyNodeSet(lambda s: is_binary(s) and contains(s), enum, claims_infinite, description)
    return LazyNodeSet(contains, enum, claims_infinite, description)


def explicit(nodes: Iterable[Node], description: str = "explicit") -> LazyNodeSet:
    s = frozenset(tuple(n) for n in nodes)
    return LazyNodeSet(
        lambda sigma: sigma in s,
        lambda d: frozenset(x for x in s if in_box(x, d)),
        claims_infinite=False,
        description=description,
    )


def level_set(n: int, *, binary: bool = False) -> LazyNodeSet:
    """All nodes of length ``n``."""
    def contains(sigma: Node) -> bool:
        return len(sigma) == n and (not binary or is_binary(sigma))

    def enum(d: int) -> frozenset:
        if n >= d:
            return frozenset()
        alphabet = range(min(d, 2) if binary else d)
        return frozenset(itertools.product(alphabet, repeat=n))

    return LazyNodeSet(contains, enum, claims_infinite=n > 0 and not binary,
                       description=f"level {n}")


def branch_prefixes(b: EpBranch) -> LazyNodeSet:
    return LazyNodeSet(
        b.contains,
        lambda d: frozenset(s for s in b.prefix_chain(d) if in_box(s, d)),
        description=f"prefixes of {b}",
    )


def hair_of_branch(b: EpBranch) -> LazyNodeSet:
    """Right shifts of the nonempty prefixes of ``b``."""
    def contains(sigma: Node) -> bool:
        return bool(sigma) and b.contains(sigma[:-1]) and sigma[-1] == b.value(len(sigma) - 1) + 1

    def enum(d: int) -> frozenset:
        return frozenset(s for s in (rs(b.node_at(i)) for i in range(1, d)) if in_box(s, d))

    return LazyNodeSet(contains, enum, description=f"hair of {b}")


def zeros_then_one() -> LazyNodeSet:
    """The binary antichain ``{0^n 1 : n >= 0}``."""
    def contains(sigma: Node) -> bool:
        return bool(sigma) and sigma[-1] == 1 and not any(sigma[:-1])

    def enum(d: int) -> frozenset:
        return frozenset((0,) * k + (1,) for k in range(d - 1)) if d >= 2 else frozenset()

    return LazyNodeSet(contains, enum, description="zeros-then-one")


def intersect(a: LazyNodeSet, b: LazyNodeSet) -> LazyNodeSet:
    return LazyNodeSet(
        lambda s: a.contains(s) and b.contains(s),
        lambda d: frozenset(s for s in a.enumerate_upto(d) if b.contains(s)),
        claims_infinite=a.claims_infinite and b.claims_infinite,
        description=f"({a.description}) & ({b.description})",
    )


# --- the coding of sequences of naturals as binary sequences -------------


def pi_embed(sigma: Node) -> Node:
    """Each coordinate ``n`` becomes ``n`` ones followed by a zero."""
    out: list[int] = []
    for c in sigma:
        out.extend([1] * c)
        out.append(0)
    return tuple(out)


def pi_decode(tau: Node) -> Node:
    if tau and tau[-1] != 0:
        raise NotInImage(f"{format_node(tau)} does not end in 0")
    if not is_binary(tau):
        raise NotInImage(f"{format_node(tau)} is not binary")
    out = []
    run = 0
    for bit in tau:
        if bit:
            run += 1
        else:
            out.append(run)
            run = 0
    return tuple(out)


def pi_length(sigma: Node) -> int:
    return len(sigma) + sum(sigma)


def pi_image_of(a: LazyNodeSet) -> LazyNodeSet:
    def contains(tau: Node) -> bool:
        try:
            return a.contains(pi_decode(tau))
        except NotInImage:
            return False

    def enum(d: int) -> frozenset:
        # pi-length < d forces length < d and coordinates < d
        return frozenset(
            t for t in (pi_embed(s) for s in a.enumerate_upto(d)) if len(t) < d
        )

    return LazyNodeSet(contains, enum, a.claims_infinite, f"pi-image of {a.description}")


# --- families ------------------------------------------------------------


@dataclass(frozen=True)
class Family:
    members: tuple[LazyNodeSet, ...]
    labels: tuple[str, ...]
    dropped: tuple[tuple[str, str], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "dropped", tuple(self.dropped))
        if len(self.members) != len(self.labels):
            raise ValueError("one label per member")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("labels must be unique")

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(zip(self.labels, self.members))

    def __getitem__(self, label: str) -> LazyNodeSet:
        try:
            return self.members[self.labels.index(label)]
        except ValueError:
            raise KeyError(label) from None


def appears_infinite(truncation: Iterable[Node], d: int) -> bool:
    """Desk-scale stand-in for infinitude at probe bound ``d``.

    True when the truncation has at least ``d/2`` elements or reaches the
    top third of the levels below ``d``.
    """
    t = list(truncation)
    top = d - d // 3
    return 2 * len(t) >= d or any(len(s) >= top for s in t)


def _filter_infinite(pairs, d: int, reason: str) -> Family:
    kept, labels, dropped = [], [], []
    for label, member in pairs:
        if appears_infinite(member.enumerate_upto(d), d):
            kept.append(member)
            labels.append(label)
        else:
            dropped.append((label, reason))
    return Family(kept, labels, dropped)


def pullback_identity(family: Family, d: int = 8) -> Family:
    """Intersect every member with the binary tree; keep the infinite ones."""
    def restrict(a: LazyNodeSet) -> LazyNodeSet:
        return LazyNodeSet(
            lambda s: is_binary(s) and a.contains(s),
            lambda k: frozenset(s for s in a.enumerate_upto(k) if is_binary(s)),
            a.claims_infinite,
            f"binary part of {a.description}",
        )

    return _filter_infinite(
        ((label, restrict(a)) for label, a in family), d, f"binary part finite at depth {d}"
    )


def pullback_pi_set(abar: LazyNodeSet) -> LazyNodeSet:
    def enum(d: int) -> frozenset:
        # the largest pi-image of a box-d node has length d*(d-1)
        out = set()
        for t in abar.enumerate_upto(d * (d - 1) + 1):
            if t and t[-1] != 0:
                continue
            s = pi_decode(t)
            if in_box(s, d):
                out.add(s)
        return frozenset(out)

    return LazyNodeSet(
        lambda s: abar.contains(pi_embed(s)), enum, abar.claims_infinite,
        f"pi-pullback of {abar.description}",
    )


def pullback_pi(family: Family, d: int = 8) -> Family:
    return _filter_infinite(
        ((label, pullback_pi_set(a)) for label, a in family), d, f"pullback finite at depth {d}"
    )


# --- decompositions ------------------------------------------------------


def canonical_enumeration() -> Iterator[Node]:
    """A bijection between the naturals and all nodes.

    Nodes are graded by ``len + sum`` (the length of their binary code),
    then by length, then lexicographically; each grade is finite.
    """
    w = 0
    while True:
        yield from _weight_class(w)
        w += 1


def _compositions(total: int, parts: int) -> Iterator[Node]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _weight_class(w: int) -> Iterator[Node]:
    if w == 0:
        yield ()
        return
    for length in range(1, w + 1):
        yield from _compositions(w - length, length)


def canonical_node(n: int) -> Node:
    return next(itertools.islice(canonical_enumeration(), n, None))


def canonical_prefix(count: int) -> list[Node]:
    return list(itertools.islice(canonical_enumeration(), count))


def h_decomp(f: Sequence[LazyNodeSet], g: Callable[[int], Node] | Sequence[Node] | None,
             n: int, d: int) -> frozenset:
    """``({g(n)} | f(n))`` minus every earlier ``f(k)`` and ``g(k)``, truncated to the box ``d``.

    Subtracting the earlier ``g(k)`` keeps the pieces pairwise disjoint when
    some ``f(n)`` contains an already placed ``g(k)``.
    """
    if not 0 <= n < len(f):
        raise IndexOutOfRange(f"h({n}) with only {len(f)} sets")
    if g is None:
        earlier = canonical_prefix(n + 1)
    elif callable(g):
        earlier = [tuple(g(k)) for k in range(n + 1)]
    else:
        earlier = [tuple(x) for x in g[: n + 1]]
    gn, placed = earlier[n], set(earlier[:n])
    candidates = set(f[n].enumerate_upto(d))
    if in_box(gn, d):
        candidates.add(gn)
    return frozenset(
        s for s in candidates if s not in placed and not any(f[k].contains(s) for k in range(n))
    )


def restrict_decomposition(D: Family, A: LazyNodeSet, d: int) -> Family:
    """Members ``D_n & A`` whose truncation at ``d`` looks infinite."""
    return _filter_infinite(
        # enumerate through A, which is usually the thinner side
        ((label, intersect(A, Dn)) for label, Dn in D), d, f"intersection finite at depth {d}"
    )


# --- translation to pairs ------------------------------------------------


PairSet = frozenset


def default_branches(count: int) -> list[EpBranch]:
    """``b_n`` = ``<n>`` followed by zeros."""
    return [EpBranch((n,), (0,)) for n in range(count)]


def _check_roots(bs: Sequence[EpBranch]) -> None:
    for n, b in enumerate(bs):
        if b.node_at(1) != (n,):
            raise BranchRootMismatch(f"branch {n} starts {format_node(b.node_at(1))}, not {n}")


def bar_O(O: LazyNodeSet, bs: Sequence[EpBranch], d: int) -> frozenset:
    """Pairs ``(n, i)`` such that the level-``i`` node of ``b_n`` lies in ``O``."""
    _check_roots(bs)
    return frozenset(
        (n, i) for n, b in enumerate(bs) for i in range(d) if O.contains(b.node_at(i))
    )


def unbar(pairs: Iterable[tuple[int, int]], bs: Sequence[EpBranch]) -> frozenset:
    _check_roots(bs)
    out = set()
    for n, i in pairs:
        if not 0 <= n < len(bs):
            raise BranchRootMismatch(f"no branch for column {n}")
        out.add(bs[n].node_at(i))
    return frozenset(out)


def column_multiplicity(pairs: Iterable[tuple[int, int]]) -> int:
    counts: dict[int, int] = {}
    for n, _ in set(pairs):
        counts[n] = counts.get(n, 0) + 1
    return max(counts.values(), default=0)


# --- finite evidence -----------------------------------------------------


CONSISTENT = "ConsistentWithAD"
CHAIN_FOUND = "ChainFound"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class AdReport:
    intersection_count: int
    last_hit_level: int | None
    depth_checked: int
    verdict: str
    chain_length: int | None = None

    def as_dict(self) -> dict:
        return {
            "intersection_count": self.intersection_count,
            "last_hit_level": self.last_hit_level,
            "depth_checked": self.depth_checked,
            "verdict": self.verdict,
            "chain_length": self.chain_length,
        }


def ad_upto(A: LazyNodeSet, B: LazyNodeSet, d: int) -> AdReport:
    """Size of ``A & B`` below ``d`` and whether it stopped growing.

    The verdict is ConsistentWithAD when the count at ``d`` equals the
    count at two thirds of ``d``; it is evidence, never proof.
    """
    common = [s for s in A.enumerate_upto(d) if B.contains(s)]
    last = max((len(s) for s in common), default=None)
    early = d - d // 3
    early_count = sum(1 for s in common if in_box(s, early))
    verdict = CONSISTENT if early_count == len(common) else INCONCLUSIVE
    return AdReport(len(common), last, d, verdict)


def offbranch_upto(A: LazyNodeSet, d: int, chain_threshold: int = 4) -> AdReport:
    t = A.enumerate_upto(d)
    chain = max_chain_len(t)
    last = max((len(s) for s in t), default=None)
    verdict = CHAIN_FOUND if chain >= chain_threshold else CONSISTENT
    return AdReport(len(t), last, d, verdict, chain)
