"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line through :func:`criterion`; the lines are
printed in the terminal summary by ``conftest.py``.
"""

import itertools
import json
import random
import time
from contextlib import contextmanager
from pathlib import Path

from offbranch import cli, cohen
from offbranch import families as fam
from offbranch import measure as ms
from offbranch import sacks
from offbranch.treecore import EpBranch, is_antichain, is_prefix

import conftest
import oracles

FIX = Path(__file__).parent / "fixtures"


@contextmanager
def criterion(name: str):
    """Record the outcome of the enclosed checks under ``name``."""
    start = time.perf_counter()
    try:
        yield
    except BaseException as e:
        conftest.ACCEPTANCE[name] = (False, f"{type(e).__name__}: {e}"[:200])
        raise
    conftest.ACCEPTANCE[name] = (True, f"{time.perf_counter() - start:.2f}s")


def test_pi_roundtrip_and_order():
    with criterion("pi round-trip and order preservation"):
        start = time.perf_counter()
        nodes = [s for n in range(5) for s in itertools.product(range(4), repeat=n)]
        codes = {s: fam.pi_embed(s) for s in nodes}
        assert len(nodes) == 341
        assert all(fam.pi_decode(codes[s]) == s for s in nodes)
        for a, b in itertools.product(nodes, repeat=2):
            assert is_prefix(a, b) == is_prefix(codes[a], codes[b])
        assert time.perf_counter() - start < 1.0


def _random_finite_set(rng):
    # few symbols and short nodes so that long chains actually occur
    size = rng.randint(0, 12)
    return {oracles.random_node(rng, maxlen=5, maxcoord=rng.choice((2, 3))) for _ in range(size)}


def test_offbranch_chain_oracle():
    with criterion("off-branch chain verdict vs maximal chains"):
        rng = random.Random(101)
        elapsed = 0.0
        for _ in range(1000):
            s = _random_finite_set(rng)
            d = 6
            t0 = time.perf_counter()
            r = fam.offbranch_upto(fam.explicit(s), d, chain_threshold=4)
            elapsed += time.perf_counter() - t0
            brute = max(len(c) for c in oracles.maximal_chains(s))
            assert r.chain_length == brute
            assert (r.verdict == fam.CHAIN_FOUND) == (brute >= 4)
        assert elapsed < 5.0


def test_h_decomposition():
    with criterion("h-decomposition disjoint and covering"):
        rng = random.Random(102)
        d = 7
        # the first 64 nodes of the canonical enumeration: pi-code of length <= 6
        window = fam.canonical_prefix(64)
        wset = set(window)
        assert wset == {s for s in fam.box(d) if fam.pi_length(s) <= 6}
        for _ in range(100):
            f = [fam.explicit(rng.sample(window, rng.randrange(6))) for _ in range(64)]
            hs = [fam.h_decomp(f, None, n, d) for n in range(64)]
            seen: set = set()
            for h in hs:
                assert not (h & seen)
                seen |= h
            assert seen == wset


def _meets_branch(anti, bs):
    return any(b.contains(s) for s in anti for b in bs)


def test_bar_translation():
    with criterion("bar_O / unbar translation"):
        rng = random.Random(103)
        d = 6
        bs = fam.default_branches(d)
        antichains = 0
        for trial in range(200):
            if trial % 2:
                s = set(_random_finite_set(rng))
                # add points on the canonical branches so the recovery is nontrivial
                s |= {(n,) + (0,) * rng.randrange(4) for n in rng.sample(range(d), 2)}
                s = {x for x in s if fam.in_box(x, d)}
            else:
                n, k = rng.randrange(d), rng.randrange(4)
                s = [(n,) + (0,) * k]
                s += [x for x in oracles.random_antichain(rng, 6, maxlen=4, maxcoord=5)
                      if not is_prefix(x, s[0]) and not is_prefix(s[0], x)]
                s = set(s)
                assert is_antichain(s)
            O = fam.explicit(s)
            pairs = fam.bar_O(O, bs, d)
            back = fam.unbar(pairs, bs) - {()}
            want = {x for x in s if 1 <= len(x) < d and any(b.contains(x) for b in bs)}
            assert back == want
            if is_antichain(s) and _meets_branch(s, bs):
                antichains += 1
                assert fam.column_multiplicity(pairs) == 1
        assert antichains >= 100


def _leaf_model(stems, depth=6):
    out = 0
    for s in stems:
        v = int("".join(map(str, s)) or "0", 2)
        shift = depth - len(s)
        out |= ((1 << (1 << shift)) - 1) << (v << shift)
    return out


def test_measure_algebra_vs_bitset():
    with criterion("clopen algebra vs depth-6 bitset model"):
        rng = random.Random(104)

        def rand_set():
            return [oracles.random_binary_node(rng, 6) for _ in range(rng.randrange(6))]

        cases = [(rand_set(), rand_set()) for _ in range(5000)]
        full = (1 << 64) - 1
        t0 = time.perf_counter()
        results = []
        for a, b in cases:
            A, B = ms.ClopenSet(a), ms.ClopenSet(b)
            u, m, df, c = ms.union(A, B), ms.meet(A, B), ms.diff(A, B), ms.complement(A)
            results.append((A, u, m, df, c, ms.measure(A), ms.measure(u)))
        elapsed = time.perf_counter() - t0
        for (a, b), (A, u, m, df, c, mA, mu) in zip(cases, results):
            la, lb = _leaf_model(a), _leaf_model(b)
            assert _leaf_model(A.stems) == la
            assert _leaf_model(u.stems) == la | lb
            assert _leaf_model(m.stems) == la & lb
            assert _leaf_model(df.stems) == la & ~lb & full
            assert _leaf_model(c.stems) == ~la & full
            assert mA == ms.Dyadic(bin(la).count("1"), 6)
            assert mu == ms.Dyadic(bin(la | lb).count("1"), 6)
        assert elapsed < 5.0


def test_pred_bound_and_decay_table():
    with criterion("predecessor window bound and decay table"):
        rng = random.Random(105)
        for _ in range(1000):
            f = [oracles.random_binary_node(rng, 7) for _ in range(rng.randint(1, 12))]
            n = rng.randrange(len(f) + 1)
            N = rng.randint(n, len(f))
            assert ms.pred_window_bound(f, n, N).holds
        zeros = [(0,) * k + (1,) for k in range(8)]
        table = ms.tail_decay_table(zeros, 8)
        assert [n for n, _ in table] == list(range(9))
        for n, value in table:
            assert value.as_fraction() == ms.Dyadic(1, n).as_fraction() - ms.Dyadic(1, 8).as_fraction()


def test_cohen_hair_confinement():
    with criterion("Cohen hair confined below witnesses"):
        rng = random.Random(106)
        for _ in range(500):
            targets = []
            for t in range(rng.randint(0, 5)):
                A = {oracles.random_node(rng, maxlen=5, maxcoord=6) for _ in range(rng.randrange(41))}
                A.discard(())
                targets.append((f"A{t}", A))
            p0 = oracles.random_node(rng, maxlen=3, maxcoord=6)
            run = cohen.run_generic(p0, targets)
            for rec in cohen.hair_report(run, targets):
                assert rec.bound_ok
                assert all(len(s) <= len(rec.witness) for s in rec.intersection)
                assert cohen.dense_member(rec.witness, dict(targets)[rec.label])


def _blist():
    return [
        frozenset((n,) for n in range(10)),
        frozenset({(0, 0, 0), (0, 0, 1), (9, 9, 9)}),
        frozenset({(1, 1, 1), (1, 1, 2), (5, 0, 0)}),
    ]


def test_stage_engine():
    with criterion("stage engine, two stages and fusion"):
        B = _blist()
        assert all(is_antichain(b) for b in B)
        assert all(not (x & y) for x, y in itertools.combinations(B, 2))
        oracle = sacks.ground_set_name(fam.level_set(3), 10)
        t0 = time.perf_counter()
        state = sacks.run_stages(oracle, 2, B)
        assert time.perf_counter() - t0 < 60.0
        p0, p1, p2 = state.history
        assert sacks.leq_n(p1, p0, 0) and sacks.leq_n(p2, p1, 1)
        S = state.selected()
        assert S and is_antichain(S)
        for i, block in enumerate(state.S_blocks):
            for j in range(i + 1):
                assert not (block & state.B(j))
        assert S <= oracle.members()
        fused = sacks.fuse([p0, p1, p2], 8)
        rows = sacks.fusion_agreement(fused, [p0, p1, p2])
        assert all(r["status"] != "differ" for r in rows)
        assert sum(r["status"] == "agree" for r in rows) >= 3


def test_amalgamation_identity():
    with criterion("amalgamation identity"):
        rng = random.Random(107)
        count = 0
        for _ in range(50):
            b = sacks.ProdCondition({
                i: sacks.SacksCondition(
                    [oracles.random_binary_node(rng, 4) for _ in range(rng.randint(1, 3))])
                for i in range(3) if rng.random() < 0.8
            })
            for n in range(3):
                for v in sacks.vec_splits(b, n):
                    out = sacks.amalgamate(b, sacks.restrict_vec(b, v), v)
                    for i in range(4):
                        assert oracles.tree_nodes(out[i].free_stems) == oracles.tree_nodes(b[i].free_stems)
                    count += 1
        assert count > 50


def _cli_commands(tmp: Path):
    trace = tmp / "trace.json"
    return [
        ["embed", "2.1", "0.0.3", "e"],
        ["family-check", "--family", FIX / "antichains.json"],
        ["cohen-hair", "--family", FIX / "antichains.json"],
        ["measure-decay", "--family", FIX / "zeros.json", "--member", "Z"],
        ["measure-bound", "--family", FIX / "zeros.json", "--member", "Z", "--N", 6],
        ["bar-o", "--family", FIX / "antichains.json"],
        ["sacks-run", "--oracle", FIX / "oracle_level3.json", "--b-list", FIX / "blist.json",
         "--trace", trace],
        ["fuse-check", "--trace", trace],
        ["--self-test", "--seed", 7, "--cases", 50],
    ]


def test_cli_determinism(tmp_path):
    with criterion("CLI determinism"):
        outputs = []
        for attempt in range(2):
            texts = []
            for k, argv in enumerate(_cli_commands(tmp_path)):
                out = tmp_path / f"out{k}.json"
                code = cli.main([str(a) for a in ["--out", out, *argv]])
                assert code == 0, argv
                texts.append(out.read_bytes())
                if argv[0] == "sacks-run":
                    texts.append((tmp_path / "trace.json").read_bytes())
            outputs.append(texts)
        assert outputs[0] == outputs[1]
        assert len(outputs[0]) == 10
        for text in outputs[0]:
            json.loads(text)
