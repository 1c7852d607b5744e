"""Command line front end.

Every command prints one JSON report with sorted keys.  Exit status is 0
when all checks pass, 1 when some check fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import random
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import __version__
from . import cohen, families as fam, measure as ms, sacks
from .treecore import (
    EpBranch,
    NodeSyntaxError,
    format_node,
    is_antichain,
    is_binary,
    parse_node,
    sorted_nodes,
)

KINDS = ("explicit", "level", "branch-prefixes", "hair-of-branch", "zeros-then-one", "pi-image-of")

COMMANDS = (
    "embed", "family-check", "cohen-hair", "measure-decay", "measure-bound",
    "bar-o", "sacks-run", "fuse-check",
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0, kind: str | None = None):
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)
        self.line, self.column, self.kind = line, column, kind


class DuplicateLabel(ParseError):
    pass


@dataclass
class FamilySpec:
    family: fam.Family
    kinds: dict[str, str]
    raw: dict = field(default_factory=dict)


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _member_offsets(text: str) -> list[int]:
    return [m.start() for m in re.finditer(r'"kind"\s*:', text)]


def _coords(value: Any, where: str) -> tuple[int, ...]:
    if isinstance(value, str):
        return parse_node(value)
    if isinstance(value, list) and all(isinstance(c, int) and c >= 0 for c in value):
        return tuple(value)
    raise ValueError(f"{where}: expected a node literal or a list of naturals")


def parse_family_spec(text: str) -> FamilySpec:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    if not isinstance(data, dict) or not isinstance(data.get("members"), list):
        raise ParseError("expected an object with a \"members\" list", 1, 1)
    offsets = _member_offsets(text)
    raw_members = data["members"]
    built: dict[str, fam.LazyNodeSet] = {}
    kinds: dict[str, str] = {}
    order: list[str] = []
    pending: list[tuple[str, dict, int]] = []

    def pos(k: int) -> tuple[int, int]:
        return _position(text, offsets[k]) if k < len(offsets) else (1, 1)

    for k, m in enumerate(raw_members):
        if not isinstance(m, dict) or "label" not in m or "kind" not in m:
            raise ParseError(f"member {k} needs \"label\" and \"kind\"", *pos(k))
        label, kind = str(m["label"]), m["kind"]
        if kind not in KINDS:
            raise ParseError(f"unknown kind {kind!r}", *pos(k), kind=kind)
        if label in kinds:
            raise DuplicateLabel(f"duplicate label {label!r}", *pos(k), kind=kind)
        kinds[label] = kind
        order.append(label)
        try:
            if kind == "explicit":
                built[label] = fam.explicit(_coords(n, label) for n in m.get("nodes", []))
            elif kind == "level":
                built[label] = fam.level_set(int(m["n"]), binary=bool(m.get("binary", False)))
            elif kind in ("branch-prefixes", "hair-of-branch"):
                b = EpBranch(_coords(m.get("stem", []), label), _coords(m["period"], label))
                built[label] = fam.branch_prefixes(b) if kind == "branch-prefixes" else fam.hair_of_branch(b)
            elif kind == "zeros-then-one":
                built[label] = fam.zeros_then_one()
            else:
                pending.append((label, m, k))
        except (KeyError, ValueError, TypeError) as e:
            raise ParseError(f"bad parameters for {label!r}: {e}", *pos(k), kind=kind) from None
    while pending:
        progressed = False
        for item in list(pending):
            label, m, k = item
            src = m.get("of")
            if src not in kinds:
                raise ParseError(f"{label!r} refers to unknown member {src!r}", *pos(k), kind="pi-image-of")
            if src in built:
                built[label] = fam.pi_image_of(built[src])
                pending.remove(item)
                progressed = True
        if not progressed:
            raise ParseError("cyclic pi-image-of references", *pos(pending[0][2]), kind="pi-image-of")
    family = fam.Family([built[l] for l in order], order)
    return FamilySpec(family, kinds, data)


def load_family(path: str) -> FamilySpec:
    return parse_family_spec(Path(path).read_text())


# --- commands --------------------------------------------------------------


class Report:
    def __init__(self, command: str, params: dict):
        self.command = command
        self.params = params
        self.records: list[dict] = []
        self.checks_run = 0
        self.violations = 0

    def check(self, ok: bool) -> bool:
        self.checks_run += 1
        if not ok:
            self.violations += 1
        return ok

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "params": self.params,
            "records": self.records,
            "summary": {"checks_run": self.checks_run, "violations": self.violations},
        }


def _lits(nodes) -> list[str]:
    return [format_node(s) for s in sorted_nodes(nodes)]


def cmd_embed(args, rep: Report) -> None:
    for lit in args.nodes:
        sigma = parse_node(lit)
        image = fam.pi_embed(sigma)
        back = fam.pi_decode(image)
        rep.records.append({
            "node": format_node(sigma), "pi": format_node(image), "length": len(image),
            "decoded": format_node(back), "roundtrip_ok": rep.check(back == sigma),
        })


def cmd_family_check(args, rep: Report) -> None:
    spec = load_family(args.family)
    d = args.depth
    for label, member in spec.family:
        r = fam.offbranch_upto(member, d, args.chain_threshold)
        t = member.enumerate_upto(d)
        rep.check(r.verdict != fam.CHAIN_FOUND)
        rep.records.append({"label": label, "kind": spec.kinds[label], "offbranch": r.as_dict(),
                            "antichain": is_antichain(t)})
    labels = spec.family.labels
    for x in range(len(labels)):
        for y in range(x + 1, len(labels)):
            r = fam.ad_upto(spec.family[labels[x]], spec.family[labels[y]], d)
            rep.records.append({"pair": [labels[x], labels[y]], "ad": r.as_dict()})


def cmd_cohen_hair(args, rep: Report) -> None:
    spec = load_family(args.family)
    targets = [(label, member.enumerate_upto(args.depth)) for label, member in spec.family]
    start = parse_node(args.start) if args.start else ()
    run = cohen.run_generic(start, targets)
    for rec in cohen.hair_report(run, targets):
        rep.records.append({
            "label": rec.label, "witness": format_node(rec.witness),
            "witness_level": len(rec.witness), "intersection": _lits(rec.intersection),
            "bound_ok": rep.check(rec.bound_ok),
            "dense_member": rep.check(cohen.dense_member(rec.witness, dict(targets)[rec.label])),
        })
    rep.records.append({"stem": format_node(run.stem), "chain": [format_node(c) for c in run.chain]})


def _binary_listing(spec: FamilySpec, label: str, depth: int) -> list:
    try:
        member = spec.family[label]
    except KeyError:
        raise ParseError(f"no member {label!r}") from None
    f = member.listing(depth)
    if not all(is_binary(s) for s in f):
        raise ParseError(f"member {label!r} is not a binary set")
    return f


def _member_label(spec: FamilySpec, label: str | None) -> str:
    if label is None:
        if not spec.family.labels:
            raise ParseError("family has no members")
        return spec.family.labels[0]
    return label


def cmd_measure_decay(args, rep: Report) -> None:
    spec = load_family(args.family)
    label = _member_label(spec, args.member)
    f = _binary_listing(spec, label, args.depth)
    if args.N > len(f):
        raise ParseError(f"N={args.N} but only {len(f)} elements below depth {args.depth}")
    previous = None
    for n, value in ms.tail_decay_table(f, args.N):
        bound = ms.pred_window_bound(f, n, args.N)
        stems = ms.window_union(f, n, args.N).stems
        if previous is not None:
            rep.check(value <= previous)
        previous = value
        rep.records.append({
            "n": n, "stems_count": len(stems), "measure": str(value),
            "bound_rhs": str(bound.rhs), "holds": rep.check(bound.holds),
        })
    rep.params["member"] = label


def cmd_measure_bound(args, rep: Report) -> None:
    spec = load_family(args.family)
    label = _member_label(spec, args.member)
    f = _binary_listing(spec, label, args.depth)
    N = args.N
    if not 0 <= args.n <= N <= len(f):
        raise ParseError(f"window [{args.n}, {N}) outside {len(f)} elements")
    for n in range(args.n, N + 1):
        b = ms.pred_window_bound(f, n, N)
        shrunk = ms.shrink_condition(ms.WHOLE, f, n, N, via_pred=True)
        rep.records.append({
            "n": n, "stems_count": len(ms.window_antichain(f, n, N)), "measure": str(b.lhs),
            "bound_rhs": str(b.rhs), "holds": rep.check(b.holds),
            "shrunk_measure": str(ms.measure(shrunk)),
        })
    rep.params["member"] = label


def cmd_bar_o(args, rep: Report) -> None:
    spec = load_family(args.family)
    d = args.depth
    columns = args.columns if args.columns is not None else d
    bs = fam.default_branches(columns)
    for label, member in spec.family:
        pairs = fam.bar_O(member, bs, d)
        back = fam.unbar(pairs, bs)
        target = frozenset(
            s for s in member.enumerate_upto(d) if 1 <= len(s) and any(b.contains(s) for b in bs)
        )
        t = member.enumerate_upto(d)
        mult = fam.column_multiplicity(pairs)
        anti = is_antichain(t)
        rec = {
            "label": label, "pairs": [[n, i] for n, i in sorted(pairs)],
            "column_multiplicity": mult, "antichain": anti,
            "roundtrip_ok": rep.check(back - {()} == target),
        }
        if anti:
            rec["multiplicity_ok"] = rep.check(mult <= 1)
        rep.records.append(rec)


def _oracle_from_spec(spec: FamilySpec, depth: int):
    conf = spec.raw.get("oracle", {"kind": "ground"})
    kind = conf.get("kind", "ground")
    members = spec.family.members
    if kind == "ground":
        if not members:
            raise ParseError("oracle spec has no members")
        return sacks.ground_set_name(members[0], depth)
    if kind == "bit-coded":
        if len(members) < 2:
            raise ParseError("bit-coded oracle needs two members")
        return sacks.BitCodedName((members[0], members[1]), coord=int(conf.get("coord", 0)),
                                  position=int(conf.get("position", 0)), probe_depth=depth)
    raise ParseError(f"unknown oracle kind {kind!r}", kind=kind)


def cmd_sacks_run(args, rep: Report) -> None:
    spec = load_family(args.oracle)
    oracle = _oracle_from_spec(spec, args.depth)
    B_list = []
    if args.b_list:
        for _, member in load_family(args.b_list).family:
            B_list.append(member.enumerate_upto(args.depth))
    state = sacks.initial_state(sacks.FULL_PRODUCT, B_list)
    trace = []
    error = None
    for _ in range(args.stages):
        start = state.p
        try:
            state = sacks.stage_step(state, oracle, max_k=args.max_k)
        except (sacks.BudgetExceeded, sacks.OracleContractViolated) as e:
            error = f"{type(e).__name__}: {e}"
            rep.check(False)
            break
        record = dict(state.records[-1])
        record["start_condition"] = start.to_json()
        trace.append(record)
        for name, ok in sorted(record["checks"].items()):
            rep.check(ok)
        members = oracle.members()
        rep.check(all(s in members for s in state.S_blocks[-1]))
        rep.records.append({
            "stage": record["stage"], "k": record["k"], "survivors": record["survivors"],
            "checks": record["checks"], "condition": record["condition"],
        })
    for i, block in enumerate(state.S_blocks):
        for j in range(i + 1):
            rep.check(not (block & state.B(j)))
    if error:
        rep.records.append({"error": error})
    if args.trace:
        Path(args.trace).write_text(json.dumps(trace, sort_keys=True, indent=1) + "\n")


def cmd_fuse_check(args, rep: Report) -> None:
    try:
        trace = json.loads(Path(args.trace).read_text())
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno) from None
    if not trace:
        raise ParseError("empty trace")
    seq = [sacks.ProdCondition.from_json(trace[0]["start_condition"])]
    seq += [sacks.ProdCondition.from_json(r["condition"]) for r in trace]
    try:
        fused = sacks.fuse(seq, args.depth)
    except sacks.NotAFusionSequence as e:
        rep.check(False)
        rep.records.append({"error": str(e), "index": e.index})
        return
    rep.check(True)
    for row in sacks.fusion_agreement(fused, seq):
        if row["status"] != "beyond-depth":
            rep.check(row["status"] == "agree")
        rep.records.append(row)
    for i in sorted(fused.masks):
        rep.records.append({"coord": i, "pruned": rep.check(fused.is_pruned(i))})


def cmd_self_test(args, rep: Report) -> None:
    """Randomized cross-checks against brute-force models."""
    rng = random.Random(args.seed)
    for _ in range(args.cases):
        sigma = tuple(rng.randrange(4) for _ in range(rng.randrange(5)))
        rep.check(fam.pi_decode(fam.pi_embed(sigma)) == sigma)
        stems = [tuple(rng.randrange(2) for _ in range(rng.randrange(7))) for _ in range(rng.randrange(1, 5))]
        c = ms.ClopenSet(stems)
        bits = ms.to_bitset(c, 6)
        rep.check(ms.measure(c) == ms.Dyadic(bin(bits).count("1"), 6))
        f = [tuple(rng.randrange(2) for _ in range(rng.randrange(6))) for _ in range(rng.randrange(1, 8))]
        rep.check(ms.pred_window_bound(f, 0, len(f)).holds)
        A = {tuple(rng.randrange(6) for _ in range(rng.randrange(1, 4))) for _ in range(rng.randrange(6))}
        run = cohen.run_generic((), [("A", A)])
        rep.check(all(r.bound_ok for r in cohen.hair_report(run, [("A", A)])))
    rep.records.append({"seed": args.seed, "cases": args.cases})


HANDLERS = {
    "embed": cmd_embed,
    "family-check": cmd_family_check,
    "cohen-hair": cmd_cohen_hair,
    "measure-decay": cmd_measure_decay,
    "measure-bound": cmd_measure_bound,
    "bar-o": cmd_bar_o,
    "sacks-run": cmd_sacks_run,
    "fuse-check": cmd_fuse_check,
}

_GROUPED = {("measure", "decay"), ("measure", "bound"), ("cohen", "hair"),
            ("sacks", "run"), ("family", "check")}


def _normalize_argv(argv: list[str]) -> list[str]:
    """Accept ``measure decay`` as well as ``measure-decay``."""
    for k in range(len(argv) - 1):
        if (argv[k], argv[k + 1]) in _GROUPED:
            return argv[:k] + [f"{argv[k]}-{argv[k + 1]}"] + argv[k + 2:]
        if argv[k] == "sacks" and argv[k + 1] == "fuse-check":
            return argv[:k] + ["fuse-check"] + argv[k + 2:]
        if not argv[k].startswith("-"):
            break
    return argv


def _depth(text: str) -> int:
    d = int(text)
    if d < 1:
        raise argparse.ArgumentTypeError("depth must be at least 1")
    return d


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="offbranch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument("--self-test", action="store_true", help="run randomized cross-checks")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--cases", type=int, default=200)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("embed", help="binary codes of nodes")
    p.add_argument("nodes", nargs="+")

    p = sub.add_parser("family-check", help="off-branch and AD evidence for a family")
    p.add_argument("--family", required=True)
    p.add_argument("--depth", type=_depth, default=6)
    p.add_argument("--chain-threshold", type=int, default=4)

    p = sub.add_parser("cohen-hair", help="hair of a finite Cohen generic against a family")
    p.add_argument("--family", required=True)
    p.add_argument("--depth", type=_depth, default=6)
    p.add_argument("--start")

    for name in ("measure-decay", "measure-bound"):
        p = sub.add_parser(name)
        p.add_argument("--family", required=True)
        p.add_argument("--member")
        p.add_argument("--depth", type=_depth, default=12)
        p.add_argument("--N", type=int, default=8)
        if name == "measure-bound":
            p.add_argument("--n", type=int, default=0)

    p = sub.add_parser("bar-o", help="translate members to pairs of naturals")
    p.add_argument("--family", required=True)
    p.add_argument("--depth", type=_depth, default=6)
    p.add_argument("--columns", type=int)

    p = sub.add_parser("sacks-run", help="run the stage construction")
    p.add_argument("--oracle", required=True)
    p.add_argument("--stages", type=int, default=2)
    p.add_argument("--b-list")
    p.add_argument("--trace")
    p.add_argument("--depth", type=_depth, default=10)
    p.add_argument("--max-k", type=int, default=10)

    p = sub.add_parser("fuse-check", help="fuse the conditions of a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--depth", type=_depth, default=8)
    return parser


def _params(args) -> dict:
    skip = {"out", "self_test", "command"}
    if not args.self_test:
        skip |= {"seed", "cases"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv: list[str] | None = None) -> int:
    argv = _normalize_argv(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    if args.self_test:
        command, handler = "self-test", cmd_self_test
    elif args.command:
        command, handler = args.command, HANDLERS[args.command]
    else:
        parser.print_usage(sys.stderr)
        return 2
    rep = Report(command, _params(args))
    try:
        handler(args, rep)
    except (ParseError, NodeSyntaxError, fam.NotInImage, fam.BranchRootMismatch,
            ms.WindowOutOfRange, OSError, KeyError, ValueError) as e:
        print(f"offbranch: error: {e}", file=sys.stderr)
        return 2
    text = json.dumps(rep.as_dict(), sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 1 if rep.violations else 0


if __name__ == "__main__":
    sys.exit(main())
