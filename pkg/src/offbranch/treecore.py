"""Nodes of the trees of finite sequences of naturals and of bits.

A node is a plain ``tuple`` of non-negative ints; a binary node is a tuple
whose entries are all 0 or 1.  Finite node sets are ``frozenset`` objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm
from typing import Iterable, Iterator, Sequence

Node = tuple[int, ...]
NodeSet = frozenset


class EmptySequence(ValueError):
    """Raised when an operation needs a last coordinate and gets the root."""


class NodeSyntaxError(ValueError):
    pass


ROOT: Node = ()


def node(*coords: int) -> Node:
    return tuple(coords)


def format_node(sigma: Sequence[int]) -> str:
    """Dotted-decimal literal, ``"e"`` for the empty node."""
    if len(sigma) == 0:
        return "e"
    return ".".join(str(c) for c in sigma)


def parse_node(text: str) -> Node:
    text = text.strip()
    if text == "e":
        return ()
    try:
        coords = tuple(int(part) for part in text.split("."))
    except ValueError:
        raise NodeSyntaxError(f"bad node literal {text!r}") from None
    if any(c < 0 for c in coords):
        raise NodeSyntaxError(f"negative coordinate in {text!r}")
    return coords


def sort_key(sigma: Node) -> tuple[int, Node]:
    """Length-lexicographic order, used for every deterministic listing."""
    return (len(sigma), sigma)


def sorted_nodes(nodes: Iterable[Node]) -> list[Node]:
    return sorted(nodes, key=sort_key)


def is_binary(sigma: Node) -> bool:
    return all(c in (0, 1) for c in sigma)


def is_prefix(sigma: Node, tau: Node) -> bool:
    """Tree order: ``sigma`` is an initial segment of ``tau``."""
    return len(sigma) <= len(tau) and tau[: len(sigma)] == sigma


def comparable(sigma: Node, tau: Node) -> bool:
    return is_prefix(sigma, tau) or is_prefix(tau, sigma)


def level(sigma: Node) -> int:
    return len(sigma)


def prefixes(sigma: Node, *, include_root: bool = True) -> list[Node]:
    start = 0 if include_root else 1
    return [sigma[:i] for i in range(start, len(sigma) + 1)]


def rs(sigma: Node) -> Node:
    """Right shift: increment the last coordinate."""
    if not sigma:
        raise EmptySequence("rs is undefined at the root")
    return sigma[:-1] + (sigma[-1] + 1,)


def pred(sigma: Node) -> Node:
    """Drop the last coordinate; the root is its own predecessor."""
    return sigma[:-1] if sigma else ()


def minimal_elements(nodes: Iterable[Node]) -> frozenset:
    s = set(nodes)
    return frozenset(
        sigma for sigma in s if not any(sigma[:i] in s for i in range(len(sigma)))
    )


def is_antichain(nodes: Iterable[Node]) -> bool:
    s = set(nodes)
    return all(
        not any(sigma[:i] in s for i in range(len(sigma))) for sigma in s
    )


def max_chain_len(nodes: Iterable[Node]) -> int:
    """Length of the longest prefix-linearly-ordered subset."""
    s = set(nodes)
    best: dict[Node, int] = {}
    for sigma in sorted(s, key=len):
        below = [best[sigma[:i]] for i in range(len(sigma)) if sigma[:i] in s]
        best[sigma] = 1 + max(below, default=0)
    return max(best.values(), default=0)


def hair_omega(chain: Iterable[Node]) -> frozenset:
    """Right shifts of the nonempty nodes of ``chain``; the root is skipped."""
    return frozenset(rs(sigma) for sigma in chain if sigma)


def hair_binary(g_stem: Node) -> frozenset:
    """Opposite-bit successors along ``g_stem``."""
    return frozenset(g_stem[:i] + (1 - g_stem[i],) for i in range(len(g_stem)))


@dataclass(frozen=True)
class EpBranch:
    """Eventually periodic element of Baire space: ``stem`` then ``period`` forever."""

    stem: Node
    period: Node

    def __post_init__(self):
        object.__setattr__(self, "stem", tuple(self.stem))
        object.__setattr__(self, "period", tuple(self.period))
        if not self.period:
            raise ValueError("period must be nonempty")
        if any(c < 0 for c in self.stem + self.period):
            raise ValueError("coordinates must be non-negative")

    def value(self, n: int) -> int:
        if n < len(self.stem):
            return self.stem[n]
        return self.period[(n - len(self.stem)) % len(self.period)]

    def node_at(self, n: int) -> Node:
        return tuple(self.value(i) for i in range(n))

    def contains(self, sigma: Node) -> bool:
        return all(self.value(i) == c for i, c in enumerate(sigma))

    def prefix_chain(self, d: int) -> Iterator[Node]:
        for i in range(d):
            yield self.node_at(i)

    def is_binary(self) -> bool:
        return is_binary(self.stem) and is_binary(self.period)

    def __str__(self) -> str:
        return f"{format_node(self.stem)}({format_node(self.period)})*"


def eventually_dominates(f: EpBranch, g: EpBranch) -> bool:
    """Decide ``f <* g``: the set ``{n : g(n) <= f(n)}`` is finite.

    Past both stems the pair ``(f(n), g(n))`` is periodic with period the lcm
    of the two periods, so one window decides it.
    """
    start = max(len(f.stem), len(g.stem))
    window = lcm(len(f.period), len(g.period))
    return all(g.value(n) > f.value(n) for n in range(start, start + window))
