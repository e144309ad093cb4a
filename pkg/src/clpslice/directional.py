"""Groundness annotations, input/output classification, and directed
dependency slicing.

An annotation marks each position Inherited (ground at call),
Synthesized (ground at success), or Dual (no information).  Combined
with head/body placement this classifies positions as Input or Output,
which orients transition and local edges; everything else stays
bidirectional.  The backward-reachable set of a position in the
directed graph is a slice, usually smaller than its undirected
component.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .depgraph import DepEdgeKind, DependencyGraph, Slice, SliceKind, tree_dep_graph
from .engine import GroundnessLog, ProofTree
from .syntax import HEAD_LITERAL, TreePosition, Variable


class Annot(Enum):
    INHERITED = "inherited"
    SYNTHESIZED = "synthesized"
    DUAL = "dual"


class IOKind(Enum):
    INPUT = "input"
    OUTPUT = "output"
    NEITHER = "neither"


@dataclass(frozen=True)
class Annotation:
    positions: Mapping[TreePosition, Annot]

    def of(self, pos: TreePosition) -> Annot:
        return self.positions.get(pos, Annot.DUAL)

    @property
    def is_all_dual(self) -> bool:
        return all(a is Annot.DUAL for a in self.positions.values())


def annotate(tree: ProofTree, log: GroundnessLog) -> Annotation:
    """Annotation induced by the observed groundness: ground at call
    beats ground at success; everything unobserved is Dual."""
    for event in log.events:
        if event.node >= len(tree.skeleton.nodes):
            raise ValueError("groundness log does not match tree: unknown node")
        for pos in event.ground:
            if pos not in tree.pos_table:
                raise ValueError(f"groundness log does not match tree: {pos.address}")
    call = log.call_ground()
    success = log.success_ground()
    positions = {}
    for pos in tree.pos_table:
        if pos in call:
            positions[pos] = Annot.INHERITED
        elif pos in success:
            positions[pos] = Annot.SYNTHESIZED
        else:
            positions[pos] = Annot.DUAL
    return Annotation(positions)


def all_dual(tree: ProofTree) -> Annotation:
    """The trivial annotation; orients nothing."""
    return Annotation({pos: Annot.DUAL for pos in tree.pos_table})


def io_classes(tree: ProofTree, annotation: Annotation) -> dict[TreePosition, IOKind]:
    """Input/Output roles: inherited head or synthesized body positions
    are inputs; synthesized head or inherited body positions outputs.
    The goal clause counts as body.  Dual positions classify as neither."""
    out = {}
    for pos in tree.pos_table:
        annot = annotation.of(pos)
        if annot is Annot.DUAL or not pos.path:
            out[pos] = IOKind.NEITHER
            continue
        at_head = pos.literal == HEAD_LITERAL
        if annot is Annot.INHERITED:
            out[pos] = IOKind.INPUT if at_head else IOKind.OUTPUT
        else:
            out[pos] = IOKind.OUTPUT if at_head else IOKind.INPUT
    return out


@dataclass(frozen=True)
class DirectedDepGraph:
    universe: frozenset[TreePosition]
    arcs: frozenset[tuple[TreePosition, TreePosition]]
    base: DependencyGraph

    def predecessors(self) -> dict[TreePosition, frozenset[TreePosition]]:
        pred: dict[TreePosition, set[TreePosition]] = {p: set() for p in self.universe}
        for a, b in self.arcs:
            pred[b].add(a)
        return {p: frozenset(s) for p, s in pred.items()}


def orient(graph: DependencyGraph, io: Mapping[TreePosition, IOKind]) -> DirectedDepGraph:
    """Direct each edge of the undirected graph.

    A transition edge runs output -> input, a local edge input -> output;
    every other combination, and every other edge kind, yields both arcs.
    """
    arcs: set[tuple[TreePosition, TreePosition]] = set()
    for e in graph.edges:
        a, b = e.a, e.b
        ka, kb = io.get(a, IOKind.NEITHER), io.get(b, IOKind.NEITHER)
        if e.kind is DepEdgeKind.TRANSITION and ka is IOKind.OUTPUT and kb is IOKind.INPUT:
            arcs.add((a, b))
        elif e.kind is DepEdgeKind.TRANSITION and kb is IOKind.OUTPUT and ka is IOKind.INPUT:
            arcs.add((b, a))
        elif e.kind is DepEdgeKind.LOCAL and ka is IOKind.INPUT and kb is IOKind.OUTPUT:
            arcs.add((a, b))
        elif e.kind is DepEdgeKind.LOCAL and kb is IOKind.INPUT and ka is IOKind.OUTPUT:
            arcs.add((b, a))
        else:
            arcs.add((a, b))
            arcs.add((b, a))
    return DirectedDepGraph(graph.universe, frozenset(arcs), graph)


def directional_slice(tree: ProofTree, annotation: Annotation, alpha: TreePosition,
                      graph: DependencyGraph | None = None) -> Slice:
    """Backward reachability to alpha in the directed dependency graph."""
    import warnings

    elem = tree.element_at(alpha)
    if not isinstance(elem, Variable):
        warnings.warn(
            "slicing criterion is not a variable position; the class of a "
            "constant or atom position is reported as-is",
            stacklevel=2,
        )
    base = graph if graph is not None else tree_dep_graph(tree)
    directed = orient(base, io_classes(tree, annotation))
    pred = directed.predecessors()
    reached = {alpha}
    frontier = [alpha]
    while frontier:
        pos = frontier.pop()
        for p in pred[pos]:
            if p not in reached:
                reached.add(p)
                frontier.append(p)
    return Slice(SliceKind.TREE, frozenset(reached), alpha)


# ---------------------------------------------------------------------------
# DOT emission

_ANNOT_SUFFIX = {Annot.INHERITED: "v", Annot.SYNTHESIZED: "^", Annot.DUAL: "<->"}


def directed_to_dot(directed: DirectedDepGraph, elements: Mapping[TreePosition, object],
                    annotation: Annotation,
                    slice_positions: frozenset[TreePosition] | None = None,
                    criterion: TreePosition | None = None) -> str:
    """Graphviz rendering: one-directional arcs get arrowheads, mutual
    pairs a single double-headed edge; labels carry annotation marks."""
    from .syntax import render_element

    lines = ["digraph directed_dependencies {", '  node [shape=box, fontname="monospace"];']
    for pos in sorted(directed.universe):
        label = f"{pos.address}\\n{render_element(elements[pos])} {_ANNOT_SUFFIX[annotation.of(pos)]}"
        attrs = [f'label="{label}"']
        if criterion is not None and pos == criterion:
            attrs.extend(("style=filled", "fillcolor=gold"))
        elif slice_positions is not None and pos in slice_positions:
            attrs.extend(("style=filled", "fillcolor=lightblue"))
        lines.append(f'  "{pos.address}" [{", ".join(attrs)}];')
    seen = set()
    for a, b in sorted(directed.arcs):
        if (b, a) in directed.arcs:
            key = (a, b) if a <= b else (b, a)
            if key in seen:
                continue
            seen.add(key)
            lines.append(f'  "{a.address}" -> "{b.address}" [dir=both];')
        else:
            lines.append(f'  "{a.address}" -> "{b.address}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
