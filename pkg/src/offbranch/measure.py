"""Exact dyadic measure on clopen subsets of Cantor space.

A clopen set is kept as a reduced antichain of binary stems: no stem is a
prefix of another and no two siblings ``s+(0,)``, ``s+(1,)`` are both
present.  That normal form is unique, so structural equality is set
equality.  All arithmetic is exact; nothing here touches floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Sequence

from . import _kernels
from .treecore import Node, is_binary, minimal_elements, pred, sorted_nodes


class WindowOutOfRange(IndexError):
    pass


@total_ordering
@dataclass(frozen=True)
class Dyadic:
    """``numerator / 2**exponent`` in lowest terms."""

    numerator: int
    exponent: int = 0

    def __post_init__(self):
        if self.numerator < 0 or self.exponent < 0:
            raise ValueError("dyadics here are non-negative")
        num, exp = self.numerator, self.exponent
        if num == 0:
            exp = 0
        while exp and num % 2 == 0:
            num //= 2
            exp -= 1
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "exponent", exp)

    @classmethod
    def of_length(cls, length: int) -> "Dyadic":
        """The measure ``2**-length`` of one basic interval."""
        return cls(1, length)

    def _aligned(self, other: "Dyadic") -> tuple[int, int, int]:
        e = max(self.exponent, other.exponent)
        return self.numerator << (e - self.exponent), other.numerator << (e - other.exponent), e

    def __add__(self, other: "Dyadic") -> "Dyadic":
        a, b, e = self._aligned(other)
        return Dyadic(a + b, e)

    def __sub__(self, other: "Dyadic") -> "Dyadic":
        a, b, e = self._aligned(other)
        if b > a:
            raise ValueError("negative dyadic")
        return Dyadic(a - b, e)

    def __mul__(self, k: int) -> "Dyadic":
        return Dyadic(self.numerator * k, self.exponent)

    __rmul__ = __mul__

    def __lt__(self, other: "Dyadic") -> bool:
        a, b, _ = self._aligned(other)
        return a < b

    def __str__(self) -> str:
        return f"{self.numerator}/2^{self.exponent}"

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        num, _, exp = text.partition("/2^")
        return cls(int(num), int(exp or 0))

    def as_fraction(self):
        from fractions import Fraction

        return Fraction(self.numerator, 2**self.exponent)


ZERO = Dyadic(0)
ONE = Dyadic(1)


def _reduce(stems: Iterable[Node]) -> frozenset:
    """Minimal elements, then merge sibling pairs bottom-up until stable."""
    s = set(minimal_elements(stems))
    work = sorted(s, key=len, reverse=True)
    while work:
        sigma = work.pop(0)
        if sigma not in s or not sigma:
            continue
        sib = sigma[:-1] + (1 - sigma[-1],)
        if sib in s:
            s.discard(sigma)
            s.discard(sib)
            parent = sigma[:-1]
            s.add(parent)
            # the parent may now pair with its own sibling
            work.insert(0, parent)
    return frozenset(s)


@dataclass(frozen=True)
class ClopenSet:
    stems: frozenset

    def __init__(self, stems: Iterable[Node] = ()):
        stems = [tuple(s) for s in stems]
        for s in stems:
            if not is_binary(s):
                raise ValueError(f"non-binary stem {s}")
        object.__setattr__(self, "stems", _reduce(stems))

    @property
    def is_empty(self) -> bool:
        return not self.stems

    @property
    def is_whole(self) -> bool:
        return self.stems == frozenset({()})

    def sorted_stems(self) -> list[Node]:
        return sorted_nodes(self.stems)

    def contains_branch_through(self, sigma: Node) -> bool:
        """Whether ``[sigma]`` is contained in this set."""
        return any(sigma[: len(s)] == s for s in self.stems)

    def meets(self, sigma: Node) -> bool:
        """Whether ``[sigma]`` meets this set."""
        n = len(sigma)
        return any(s[:n] == sigma or sigma[: len(s)] == s for s in self.stems)

    def __or__(self, other: "ClopenSet") -> "ClopenSet":
        return union(self, other)

    def __and__(self, other: "ClopenSet") -> "ClopenSet":
        return meet(self, other)

    def __sub__(self, other: "ClopenSet") -> "ClopenSet":
        return diff(self, other)

    def __le__(self, other: "ClopenSet") -> bool:
        return diff(self, other).is_empty

    def __repr__(self) -> str:
        from .treecore import format_node

        return "ClopenSet({" + ", ".join(format_node(s) for s in self.sorted_stems()) + "})"


EMPTY = ClopenSet()
WHOLE = ClopenSet([()])


def interval(sigma: Node) -> ClopenSet:
    return ClopenSet([sigma])


def union(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    return ClopenSet(a.stems | b.stems)


def meet(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    out = []
    for s in a.stems:
        for t in b.stems:
            if t[: len(s)] == s:
                out.append(t)
            elif s[: len(t)] == t:
                out.append(s)
    return ClopenSet(out)


def _diff_interval(sigma: Node, stems: frozenset) -> list[Node]:
    if any(sigma[: len(t)] == t for t in stems):
        return []
    below = [t for t in stems if len(t) > len(sigma) and t[: len(sigma)] == sigma]
    if not below:
        return [sigma]
    return _diff_interval(sigma + (0,), stems) + _diff_interval(sigma + (1,), stems)


def diff(a: ClopenSet, b: ClopenSet) -> ClopenSet:
    out: list[Node] = []
    for s in a.stems:
        out.extend(_diff_interval(s, b.stems))
    return ClopenSet(out)


def complement(a: ClopenSet) -> ClopenSet:
    return diff(WHOLE, a)


def measure(c: ClopenSet | Iterable[Node]) -> Dyadic:
    """Sum of ``2**-len`` over the stems; the stems must form an antichain."""
    stems = c.stems if isinstance(c, ClopenSet) else list(c)
    if not stems:
        return ZERO
    e = max(len(s) for s in stems)
    return Dyadic(sum(1 << (e - len(s)) for s in stems), e)


def to_bitset(c: ClopenSet, depth: int) -> int:
    """The set as an int whose bit ``v`` marks leaf ``v`` at ``depth``.

    Stems longer than ``depth`` mark the leaf they pass through, so the
    result is exact only when every stem has length ``<= depth``.
    """
    mask = _kernels.leaf_mask(c.stems, depth)
    out = 0
    for v in mask.nonzero()[0].tolist():
        out |= 1 << v
    return out


def _check_window(f: Sequence[Node], n: int, N: int) -> None:
    if not (0 <= n <= N <= len(f)):
        raise WindowOutOfRange(f"window [{n}, {N}) outside list of length {len(f)}")


def window_union(f: Sequence[Node], n: int, N: int) -> ClopenSet:
    """Union of ``[f(k)]`` for ``n <= k < N``."""
    _check_window(f, n, N)
    return ClopenSet(minimal_elements(f[n:N]))


def window_antichain(f: Sequence[Node], n: int, N: int) -> frozenset:
    """Minimal elements of the window, before sibling merging."""
    _check_window(f, n, N)
    return minimal_elements(f[n:N])


def tail_decay_table(f: Sequence[Node], N: int) -> list[tuple[int, Dyadic]]:
    if not 0 <= N <= len(f):
        raise WindowOutOfRange(f"N={N} outside list of length {len(f)}")
    return [(n, measure(window_union(f, n, N))) for n in range(N + 1)]


@dataclass(frozen=True)
class PredBound:
    lhs: Dyadic
    rhs: Dyadic
    holds: bool


def pred_window_union(f: Sequence[Node], n: int, N: int) -> ClopenSet:
    _check_window(f, n, N)
    return ClopenSet(pred(s) for s in f[n:N])


def pred_window_bound(f: Sequence[Node], n: int, N: int) -> PredBound:
    """Compare the predecessor union with twice the minimal-element sum."""
    lhs = measure(pred_window_union(f, n, N))
    rhs = 2 * measure(window_antichain(f, n, N))
    return PredBound(lhs, rhs, lhs <= rhs)


def shrink_condition(
    q: ClopenSet, f: Sequence[Node], n: int, N: int, *, via_pred: bool = False
) -> ClopenSet:
    """Remove the window from ``q``.

    With ``via_pred`` the removed set is the union of ``[pred(f(k))]``
    instead of the union of ``[f(k)]``.
    """
    removed = pred_window_union(f, n, N) if via_pred else window_union(f, n, N)
    return diff(q, removed)
