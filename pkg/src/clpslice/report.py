"""Slice reports: size statistics, JSON round-tripping, and the
highlighted program listing."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .engine import DerivationTree, GroundnessLog
from .syntax import (
    Atom,
    Clause,
    ConstraintExpr,
    GOAL_CLAUSE,
    Program,
    ProgramPosition,
    TreePosition,
    render_term,
)


@dataclass(frozen=True)
class SliceStats:
    tree_node_count: int
    tree_argpos_count: int
    slice_node_pct: float
    slice_argpos_pct: float


@dataclass(frozen=True)
class SliceReport:
    mode: str  # "tree" | "dynamic" | "position"
    criterion: str
    tree_positions: frozenset[str]
    program_positions: frozenset[str]
    stats: SliceStats
    annotation_used: bool

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "criterion": self.criterion,
            "tree_positions": sorted(self.tree_positions),
            "program_positions": sorted(self.program_positions),
            "stats": {
                "tree_node_count": self.stats.tree_node_count,
                "tree_argpos_count": self.stats.tree_argpos_count,
                "slice_node_pct": self.stats.slice_node_pct,
                "slice_argpos_pct": self.stats.slice_argpos_pct,
            },
            "annotation_used": self.annotation_used,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SliceReport":
        stats = data["stats"]
        return cls(
            mode=data["mode"],
            criterion=data["criterion"],
            tree_positions=frozenset(data["tree_positions"]),
            program_positions=frozenset(data["program_positions"]),
            stats=SliceStats(
                tree_node_count=stats["tree_node_count"],
                tree_argpos_count=stats["tree_argpos_count"],
                slice_node_pct=stats["slice_node_pct"],
                slice_argpos_pct=stats["slice_argpos_pct"],
            ),
            annotation_used=data["annotation_used"],
        )


def argument_positions(tree: DerivationTree) -> frozenset[TreePosition]:
    """Top-level argument slots of every atom in the tree: the executed
    argument positions, the denominators of Table-style statistics and
    the criteria swept by the stats command."""
    out = set()
    for node in tree.skeleton.nodes:
        if node.label.head is not None:
            for i in range(1, len(node.label.head.args) + 1):
                out.add(TreePosition(node.index, 0, (i,)))
        for lit, item in enumerate(node.label.body, start=1):
            if isinstance(item, Atom):
                for i in range(1, len(item.args) + 1):
                    out.add(TreePosition(node.index, lit, (i,)))
    return frozenset(out)


def compute_stats(tree: DerivationTree, slice_positions: Iterable[TreePosition]) -> SliceStats:
    positions = set(slice_positions)
    nodes_touched = {p.node for p in positions}
    argpos = argument_positions(tree)
    node_count = tree.node_count()
    node_pct = 100 * Fraction(len(nodes_touched), node_count) if node_count else Fraction(0)
    arg_pct = (
        100 * Fraction(len(positions & argpos), len(argpos)) if argpos else Fraction(0)
    )
    return SliceStats(node_count, len(argpos), float(node_pct), float(arg_pct))


def log_to_json(log: GroundnessLog) -> list[dict]:
    return [
        {
            "event": e.kind,
            "node": e.node,
            "literal": e.literal,
            "ground": sorted(p.address for p in e.ground),
        }
        for e in log.events
    ]


def emit_report(report: SliceReport, *, goal: str | None = None,
                program: str | None = None, log: GroundnessLog | None = None) -> str:
    payload = report.to_dict()
    meta = {}
    if goal is not None:
        meta["goal"] = goal
    if program is not None:
        meta["program"] = program
    if meta:
        payload["meta"] = meta
    if log is not None:
        payload["groundness_log"] = log_to_json(log)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def load_report(text: str) -> SliceReport:
    return SliceReport.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Highlighted listing

def _mark(s: str, marked: bool) -> str:
    return f"[{s}]" if marked else s


def _render_term_marked(t, base: tuple[int, ...], marked: set[tuple[int, ...]]) -> str:
    from .syntax import ARITH_OPS, Compound

    if isinstance(t, Compound) and t.functor in ARITH_OPS and t.args:
        # Constraint arithmetic is handled occurrence-wise elsewhere.
        return render_term(t)
    if isinstance(t, Compound) and t.args:
        inner = ", ".join(
            _render_term_marked(a, (*base, i), marked)
            for i, a in enumerate(t.args, start=1)
        )
        return _mark(f"{t.functor}({inner})", base in marked)
    return _mark(render_term(t), base in marked)


def _render_atom_marked(a: Atom, literal: int,
                        marked_paths: dict[int, set[tuple[int, ...]]]) -> str:
    marked = marked_paths.get(literal, set())
    if not a.args:
        return _mark(a.pred, () in marked)
    inner = ", ".join(
        _render_term_marked(arg, (i,), marked) for i, arg in enumerate(a.args, start=1)
    )
    return _mark(f"{a.pred}({inner})", () in marked)


def _render_constraint_marked(c: ConstraintExpr, literal: int,
                              marked_paths: dict[int, set[tuple[int, ...]]]) -> str:
    from .syntax import ARITH_OPS, Compound, _PREC

    marked = marked_paths.get(literal, set())
    counter = {"k": 0}

    def walk(t, prec: int) -> str:
        if isinstance(t, Compound) and t.functor in ARITH_OPS and len(t.args) == 2:
            p = _PREC[t.functor]
            left = walk(t.args[0], p)
            right = walk(t.args[1], p + 1)
            if right.startswith("-"):
                right = f"({right})"
            s = f"{left}{t.functor}{right}"
            return f"({s})" if p < prec else s
        if isinstance(t, Compound) and t.functor == "-" and len(t.args) == 1:
            return "-" + walk(t.args[0], 3)
        counter["k"] += 1
        s = render_term(t)
        if prec >= 2 and s.startswith("-"):
            s = f"({s})"
        return _mark(s, (counter["k"],) in marked)

    body = f"{walk(c.lhs, 0)}{c.relation}{walk(c.rhs, 0)}"
    return _mark("{" + body + "}", () in marked)


def render_marked_clause(clause: Clause, marked_paths: dict[int, set[tuple[int, ...]]]) -> str:
    parts = []
    for lit, item in enumerate(clause.body, start=1):
        if isinstance(item, Atom):
            parts.append(_render_atom_marked(item, lit, marked_paths))
        else:
            parts.append(_render_constraint_marked(item, lit, marked_paths))
    body = ", ".join(parts)
    if clause.head is None:
        return f":- {body}."
    head = _render_atom_marked(clause.head, 0, marked_paths)
    return f"{head} :- {body}." if clause.body else f"{head}."


def highlight_listing(program: Program, goal: Clause,
                      positions: Iterable[ProgramPosition]) -> str:
    """The program plus goal with every sliced fragment bracketed."""
    by_clause: dict[int, dict[int, set[tuple[int, ...]]]] = {}
    for pos in positions:
        by_clause.setdefault(pos.clause, {}).setdefault(pos.literal, set()).add(pos.path)
    lines = [
        render_marked_clause(clause, by_clause.get(ci, {}))
        for ci, clause in enumerate(program.clauses)
    ]
    lines.append(render_marked_clause(goal, by_clause.get(GOAL_CLAUSE, {})))
    return "\n".join(lines) + "\n"
