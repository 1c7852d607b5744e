"""Cohen forcing on finite sequences ordered by end-extension.

Conditions are plain nodes; ``p <= q`` (p is stronger) when ``q`` is a
prefix of ``p``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .treecore import Node, hair_omega, is_prefix, prefixes, rs


class MismatchedTargets(ValueError):
    pass


def cohen_leq(p: Node, q: Node) -> bool:
    return is_prefix(q, p)


def left_shift(alpha: Node) -> Node | None:
    """Inverse of ``rs``; ``None`` when ``alpha`` is not a right shift."""
    if not alpha or alpha[-1] == 0:
        return None
    return alpha[:-1] + (alpha[-1] - 1,)


def dense_member(sigma: Node, A: Iterable[Node]) -> bool:
    """Whether no right shift of an extension of ``sigma`` lands in ``A``."""
    for alpha in A:
        beta = left_shift(alpha)
        if beta is not None and is_prefix(sigma, beta):
            return False
    return True


def dense_extend(p: Node, A: Iterable[Node]) -> Node:
    """Append one coordinate larger than every coordinate occurring in ``A``.

    Every left shift of an element of ``A`` has all coordinates below that
    value, so none of them can extend the result.
    """
    top = max((c for alpha in A for c in alpha), default=-1)
    return tuple(p) + (top + 1,)


@dataclass(frozen=True)
class GenericRun:
    chain: tuple[Node, ...]
    met: tuple[tuple[str, int], ...] = field(default=())

    @property
    def stem(self) -> Node:
        return self.chain[-1]

    def witness(self, label: str) -> Node:
        for k, (lab, _) in enumerate(self.met):
            if lab == label:
                return self.chain[k + 1]
        raise KeyError(label)


def run_generic(p0: Node, targets: Sequence[tuple[str, Iterable[Node]]]) -> GenericRun:
    chain = [tuple(p0)]
    met = []
    for label, A in targets:
        q = dense_extend(chain[-1], A)
        chain.append(q)
        met.append((label, len(q)))
    return GenericRun(tuple(chain), tuple(met))


@dataclass(frozen=True)
class HairRecord:
    label: str
    witness: Node
    intersection: frozenset
    bound_ok: bool


def hair_report(run: GenericRun, targets: Sequence[tuple[str, Iterable[Node]]]) -> list[HairRecord]:
    labels = [label for label, _ in targets]
    if labels != [label for label, _ in run.met]:
        raise MismatchedTargets(f"run met {[l for l, _ in run.met]}, got {labels}")
    hair = hair_omega(prefixes(run.stem, include_root=False))
    out = []
    for label, A in targets:
        w = run.witness(label)
        hits = hair & frozenset(A)
        allowed = {rs(t) for t in prefixes(w, include_root=False)}
        out.append(HairRecord(label, w, hits, hits <= allowed))
    return out
