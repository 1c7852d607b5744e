"""Brute-force models used to check the library.

Nothing here imports the code paths it is used to check: clopen sets are
sets of leaves, trees are sets of nodes, chains come from a depth-first
search over pairwise comparisons.
"""

import itertools
import random


def leq(a, b):
    return len(a) <= len(b) and all(x == y for x, y in zip(a, b))


def all_binary(depth):
    """Every binary node of length <= depth."""
    for n in range(depth + 1):
        yield from itertools.product((0, 1), repeat=n)


def leaves_of(stems, depth=6):
    """Leaf set of a union of intervals, as an int bitmask over 2**depth leaves."""
    out = 0
    for v, leaf in enumerate(itertools.product((0, 1), repeat=depth)):
        if any(leq(s, leaf) for s in stems):
            out |= 1 << v
    return out


def tree_nodes(stems, depth=6):
    """Nodes of length <= depth comparable with some stem."""
    return frozenset(
        s for s in all_binary(depth) if any(leq(s, t) or leq(t, s) for t in stems)
    )


def split_levels(nodes, depth):
    """Map level -> splitting nodes, from a downward closed node set cut at depth."""
    out = {}
    for s in nodes:
        if len(s) >= depth:
            continue
        if s + (0,) in nodes and s + (1,) in nodes:
            below = sum(
                1 for i in range(len(s))
                if s[:i] + (0,) in nodes and s[:i] + (1,) in nodes
            )
            out.setdefault(below, set()).add(s)
    return out


def maximal_chains(nodes):
    """Every maximal chain, by depth-first search over pairwise comparisons."""
    nodes = list(set(nodes))
    if not nodes:
        return [[]]
    above = {
        a: [b for b in nodes if a != b and leq(a, b)
            and not any(c not in (a, b) and leq(a, c) and leq(c, b) for c in nodes)]
        for a in nodes
    }
    roots = [a for a in nodes if not any(b != a and leq(b, a) for b in nodes)]
    chains = []

    def walk(chain):
        nxt = above[chain[-1]]
        if not nxt:
            chains.append(list(chain))
            return
        for b in nxt:
            walk(chain + [b])

    for r in roots:
        walk([r])
    return chains


def longest_chain(nodes):
    return max(len(c) for c in maximal_chains(nodes))


def dense_member_brute(sigma, A, bound=None):
    """Check rs(sigma + tau) not in A over every tau that can possibly reach A."""
    A = set(A)
    if not A:
        return True
    maxlen = max(len(a) for a in A)
    top = bound if bound is not None else 1 + max((c for a in A for c in a), default=0)
    for extra in range(0, maxlen - len(sigma) + 1):
        for tau in itertools.product(range(top + 1), repeat=extra):
            s = tuple(sigma) + tau
            if not s:
                continue
            if s[:-1] + (s[-1] + 1,) in A:
                return False
    return True


def random_binary_node(rng, maxlen=6):
    return tuple(rng.randrange(2) for _ in range(rng.randrange(maxlen + 1)))


def random_node(rng, maxlen=5, maxcoord=3):
    return tuple(rng.randrange(maxcoord) for _ in range(rng.randrange(maxlen + 1)))


def random_antichain(rng, size, maxlen=5, maxcoord=4, minlen=1):
    out = []
    for _ in range(size * 4):
        s = tuple(rng.randrange(maxcoord) for _ in range(rng.randint(minlen, maxlen)))
        if all(not leq(s, t) and not leq(t, s) for t in out):
            out.append(s)
        if len(out) == size:
            break
    return out


def rng(seed=0):
    return random.Random(seed)
