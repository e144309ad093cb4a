"""Derivation and proof trees by SLD resolution over constraint stores.

A skeleton is an ordered tree of renamed clauses rooted at a goal; its
constraint set joins every clause constraint with one argument-passing
equation per (body atom, child head) pair.  ``derive`` searches with
leftmost selection, textual clause order, and chronological backtracking,
pruning any branch whose store goes unsatisfiable.

While searching, the engine logs groundness observations that later
drive directional slicing:

* call events: when a node is attached, which argument positions of the
  new edge are already ground, judged through the caller's instantiated
  arguments just before the edge equations exist;
* post events: when a body constraint is posted, which of its variable
  occurrences were already pinned by the store built so far;
* success events: when a subtree completes, which of its boundary and
  constraint positions are pinned by the subtree's own contribution
  (its clauses' constraints, its internal and boundary equations, and
  the values its caller had already fixed at call time).

Success groundness is judged against that subtree-local store rather
than the global one so that a value pinned only by the interplay of
caller and callee constraints is attributed to neither side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .constraints import (
    ConstraintStore,
    NumericConstraint,
    SolvedForm,
    StoreConstraint,
    TermEquation,
    satisfiable,
)
from .syntax import (
    Atom,
    Clause,
    ConstraintExpr,
    GOAL_CLAUSE,
    HEAD_LITERAL,
    Program,
    ProgramPosition,
    TreePosition,
    Variable,
    clause_positions,
    rename_clause,
    subterm_at,
    term_subpositions,
    vars_of,
    vars_of_term,
)

DEFAULT_DEPTH_LIMIT = 64


class NoSolution(Exception):
    """No proof tree within the limits.

    Carries the deepest derivation tree encountered (largest satisfiable
    partial skeleton), when one exists, for inspection.
    """

    def __init__(self, message: str, deepest: "DerivationTree | None" = None):
        super().__init__(message)
        self.deepest = deepest


@dataclass(frozen=True)
class SkelNode:
    """One node of a skeleton: a renamed clause at a tree position.

    ``children`` is aligned with the node's call literals, in body
    order; None marks an incomplete child.
    """

    index: int
    clause: int  # program clause ordinal, or GOAL_CLAUSE at the root
    label: Clause
    parent: int | None
    parent_literal: int | None
    children: tuple[int | None, ...]


@dataclass(frozen=True)
class Skeleton:
    nodes: tuple[SkelNode, ...]

    @property
    def root(self) -> SkelNode:
        return self.nodes[0]

    @property
    def is_complete(self) -> bool:
        return all(None not in n.children for n in self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)


def constraints_of(skeleton: Skeleton) -> ConstraintStore:
    """The constraint set of a skeleton: all clause constraints plus one
    equation per corresponding argument pair along each complete edge.

    Syntactically trivial equations (identical terms on both sides) are
    dropped.  No equation is created below an incomplete child.  Raises
    ValueError if a child's head does not match its body atom.
    """
    out: list[StoreConstraint] = []
    for node in skeleton.nodes:
        for lit, item in enumerate(node.label.body, start=1):
            if isinstance(item, ConstraintExpr):
                out.append(
                    NumericConstraint(item, frozenset((TreePosition(node.index, lit, ()),)))
                )
        for lit, child_idx in zip(node.label.call_literals(), node.children):
            if child_idx is None:
                continue
            atom = node.label.body[lit - 1]
            child = skeleton.nodes[child_idx]
            head = child.label.head
            if head is None or head.indicator != atom.indicator:
                raise ValueError(
                    f"malformed skeleton: node {child_idx} does not answer "
                    f"{atom.pred}/{len(atom.args)}"
                )
            out.extend(_edge_equations(node.index, lit, atom, child_idx, head))
    return ConstraintStore(out)


def _edge_equations(parent: int, literal: int, atom: Atom,
                    child: int, head: Atom) -> list[TermEquation]:
    eqs = []
    for i, (a, h) in enumerate(zip(atom.args, head.args), start=1):
        if a == h:
            continue
        origin = frozenset((TreePosition(parent, literal, (i,)), TreePosition(child, HEAD_LITERAL, (i,))))
        eqs.append(TermEquation(a, h, origin))
    return eqs


class DerivationTree:
    """A skeleton whose constraint set is satisfiable, with position
    tables and the natural map from tree to program/goal positions."""

    def __init__(self, skeleton: Skeleton, store: ConstraintStore | None = None):
        self.skeleton = skeleton
        self.store = constraints_of(skeleton) if store is None else store
        pos_table: dict[TreePosition, object] = {}
        phi: dict[TreePosition, ProgramPosition] = {}
        for node in skeleton.nodes:
            for literal, path, elem in clause_positions(node.label):
                tp = TreePosition(node.index, literal, path)
                pos_table[tp] = elem
                phi[tp] = ProgramPosition(node.clause, literal, path)
        self.pos_table = pos_table
        self.phi = phi

    @property
    def is_proof_tree(self) -> bool:
        return self.skeleton.is_complete

    def element_at(self, pos: TreePosition) -> object:
        try:
            return self.pos_table[pos]
        except KeyError:
            raise ValueError(f"no such tree position: {pos.address}") from None

    def node_count(self) -> int:
        return len(self.skeleton)

    def __repr__(self) -> str:
        kind = "ProofTree" if self.is_proof_tree else "DerivationTree"
        return f"{kind}({len(self.skeleton)} nodes, {len(self.store)} constraints)"


class ProofTree(DerivationTree):
    def __init__(self, skeleton: Skeleton, store: ConstraintStore | None = None):
        if not skeleton.is_complete:
            raise ValueError("a proof tree must have a complete skeleton")
        super().__init__(skeleton, store)


def phi_inverse(tree: DerivationTree, q: ProgramPosition) -> frozenset[TreePosition]:
    """All tree positions that are renamed copies of program position q;
    empty when the clause was never used."""
    out = set()
    for node in tree.skeleton.nodes:
        if node.clause != q.clause:
            continue
        tp = TreePosition(node.index, q.literal, q.path)
        if tp not in tree.pos_table:
            raise ValueError(f"position {q.address} does not exist in clause {q.clause}")
        out.add(tp)
    return frozenset(out)


def positions_to_store(tree: DerivationTree, positions: frozenset[TreePosition] | set[TreePosition]) -> ConstraintStore:
    """The store subset induced by a position set: all constraints whose
    variables meet the variables appearing at those positions."""
    psi: frozenset[str] = frozenset()
    for p in positions:
        elem = tree.element_at(p)
        if isinstance(elem, (Atom, ConstraintExpr)):
            psi |= vars_of(elem)
        else:
            psi |= vars_of_term(elem)  # type: ignore[arg-type]
    return ConstraintStore(c for c in tree.store if c.variables() & psi)


def origin_constraints(tree: DerivationTree, positions: frozenset[TreePosition] | set[TreePosition]) -> ConstraintStore:
    """The store constraints contributed by any of the given positions,
    via the origin provenance recorded on each constraint."""
    wanted = set(positions)
    return ConstraintStore(c for c in tree.store if c.origin & wanted)


# ---------------------------------------------------------------------------
# Groundness event log

@dataclass(frozen=True)
class GroundEvent:
    kind: str  # "call" | "post" | "success"
    node: int
    literal: int | None
    ground: frozenset[TreePosition]


@dataclass(frozen=True)
class GroundnessLog:
    events: tuple[GroundEvent, ...]

    def call_ground(self) -> frozenset[TreePosition]:
        out: frozenset[TreePosition] = frozenset()
        for e in self.events:
            if e.kind in ("call", "post"):
                out |= e.ground
        return out

    def success_ground(self) -> frozenset[TreePosition]:
        out: frozenset[TreePosition] = frozenset()
        for e in self.events:
            if e.kind == "success":
                out |= e.ground
        return out


@dataclass(frozen=True)
class Solution:
    tree: ProofTree
    log: GroundnessLog


# ---------------------------------------------------------------------------
# SLD search

@dataclass
class _SearchNode:
    index: int
    clause: int
    label: Clause
    parent: int | None
    parent_literal: int | None
    depth: int
    children: list[int | None] = field(default_factory=list)
    edge_eqs: tuple[TermEquation, ...] = ()
    call_pins: tuple[TermEquation, ...] = ()

    def freeze(self) -> SkelNode:
        return SkelNode(self.index, self.clause, self.label, self.parent,
                        self.parent_literal, tuple(self.children))


def derive(program: Program, goal: Clause, *, depth_limit: int = DEFAULT_DEPTH_LIMIT,
           max_solutions: int | None = 1) -> list[Solution]:
    """Proof trees for a goal, leftmost selection, clause order,
    chronological backtracking, bounded by depth_limit.

    Returns up to max_solutions solutions (all within the limits when
    None).  Raises NoSolution when there is no proof tree, carrying the
    deepest satisfiable derivation tree seen.
    """
    if depth_limit < 1:
        raise ValueError("depth_limit must be at least 1")
    if max_solutions is not None and max_solutions < 1:
        raise ValueError("max_solutions must be at least 1 (or None for all)")
    if goal.head is not None:
        raise ValueError("derive expects a goal clause (no head)")
    search = _Derivation(program, depth_limit, max_solutions)
    return search.run(goal)


class _Derivation:
    def __init__(self, program: Program, depth_limit: int, max_solutions: int | None):
        self.program = program
        self.depth_limit = depth_limit
        self.max_solutions = max_solutions
        self.nodes: list[_SearchNode] = []
        self.constraints: list[StoreConstraint] = []
        self.events: list[GroundEvent] = []
        self.solutions: list[Solution] = []
        self.deepest: Skeleton | None = None
        self.deepest_size = 0
        self.depth_hit = False

    def run(self, goal: Clause) -> list[Solution]:
        root = _SearchNode(0, GOAL_CLAUSE, goal, None, None, 0,
                           [None] * len(goal.call_literals()))
        self.nodes.append(root)
        self._record_deepest()
        solved = satisfiable(ConstraintStore())
        agenda = self._node_agenda(0, goal)
        self._expand(tuple(agenda), solved)
        if not self.solutions:
            deepest = DerivationTree(self.deepest) if self.deepest is not None else None
            reason = ("depth limit exceeded with no proof tree"
                      if self.depth_hit else "goal has no proof tree")
            raise NoSolution(reason, deepest)
        return self.solutions

    # -- agenda ------------------------------------------------------------

    def _node_agenda(self, index: int, clause: Clause) -> list[tuple]:
        agenda: list[tuple] = []
        slot = 0
        for lit, item in enumerate(clause.body, start=1):
            if isinstance(item, ConstraintExpr):
                agenda.append(("post", index, lit, item))
            else:
                agenda.append(("call", index, lit, item, slot))
                slot += 1
        agenda.append(("complete", index))
        return agenda

    def _done(self) -> bool:
        return self.max_solutions is not None and len(self.solutions) >= self.max_solutions

    def _expand(self, agenda: tuple, solved: SolvedForm) -> None:
        if self._done():
            return
        if not agenda:
            skeleton = Skeleton(tuple(n.freeze() for n in self.nodes))
            self.solutions.append(
                Solution(ProofTree(skeleton), GroundnessLog(tuple(self.events)))
            )
            return
        step, rest = agenda[0], agenda[1:]
        if step[0] == "post":
            self._step_post(step, rest, solved)
        elif step[0] == "call":
            self._step_call(step, rest, solved)
        else:
            self._step_complete(step, rest, solved)

    def _step_post(self, step: tuple, rest: tuple, solved: SolvedForm) -> None:
        _, index, lit, expr = step
        ground = self._constraint_ground(index, lit, expr, solved)
        self.events.append(GroundEvent("post", index, lit, ground))
        origin = frozenset((TreePosition(index, lit, ()),))
        self.constraints.append(NumericConstraint(expr, origin))
        new_solved = satisfiable(ConstraintStore(self.constraints))
        if new_solved.is_sat:
            self._expand(rest, new_solved)
        self.constraints.pop()
        self.events.pop()

    def _step_call(self, step: tuple, rest: tuple, solved: SolvedForm) -> None:
        _, parent_idx, lit, atom, slot = step
        parent = self.nodes[parent_idx]
        if parent.depth + 1 > self.depth_limit:
            self.depth_hit = True
            return
        for clause_idx in self.program.clauses_for(atom.indicator):
            if self._done():
                return
            index = len(self.nodes)
            label = rename_clause(self.program.clauses[clause_idx], index)
            head = label.head
            assert head is not None
            eqs = _edge_equations(parent_idx, lit, atom, index, head)
            pins = self._call_pins(atom, solved)
            node = _SearchNode(index, clause_idx, label, parent_idx, lit,
                               parent.depth + 1,
                               [None] * len(label.call_literals()),
                               tuple(eqs), pins)
            self.nodes.append(node)
            parent.children[slot] = index
            call_ground = self._call_ground(parent_idx, lit, atom, index, head, solved)
            self.events.append(GroundEvent("call", index, lit, call_ground))
            n_constraints = len(self.constraints)
            self.constraints.extend(eqs)
            new_solved = satisfiable(ConstraintStore(self.constraints))
            if new_solved.is_sat:
                self._record_deepest()
                agenda = tuple(self._node_agenda(index, label)) + rest
                self._expand(agenda, new_solved)
            del self.constraints[n_constraints:]
            self.events.pop()
            parent.children[slot] = None
            self.nodes.pop()

    def _step_complete(self, step: tuple, rest: tuple, solved: SolvedForm) -> None:
        _, index = step
        ground = self._success_ground(index)
        self.events.append(GroundEvent("success", index, None, ground))
        self._expand(rest, solved)
        self.events.pop()

    # -- groundness observation ---------------------------------------------

    def _call_pins(self, atom: Atom, solved: SolvedForm) -> tuple[TermEquation, ...]:
        pins = []
        seen = set()
        for arg in atom.args:
            for v in sorted(vars_of_term(arg)):
                if v in seen:
                    continue
                seen.add(v)
                value = solved.ground_value(Variable(v))
                if value is not None:
                    pins.append(TermEquation(Variable(v), value))
        return tuple(pins)

    def _call_ground(self, parent_idx: int, lit: int, atom: Atom, child_idx: int,
                     head: Atom, solved: SolvedForm) -> frozenset[TreePosition]:
        """Edge argument positions ground at call: both sides are judged
        through the caller's instantiated argument, the only information
        that exists before the edge equations do."""
        ground = set()
        for i, (carg, harg) in enumerate(zip(atom.args, head.args), start=1):
            resolved = solved.resolve_term(carg)
            for path, _sub in term_subpositions(carg):
                inst = subterm_at(resolved, path)
                if inst is not None and not vars_of_term(inst):
                    ground.add(TreePosition(parent_idx, lit, (i, *path)))
            for path, _sub in term_subpositions(harg):
                inst = subterm_at(resolved, path)
                if inst is not None and not vars_of_term(inst):
                    ground.add(TreePosition(child_idx, HEAD_LITERAL, (i, *path)))
        return frozenset(ground)

    def _constraint_ground(self, index: int, lit: int, expr: ConstraintExpr,
                           solved: SolvedForm) -> frozenset[TreePosition]:
        ground = set()
        for k, leaf in enumerate(expr.occurrences(), start=1):
            if not vars_of_term(leaf) or solved.is_ground(leaf):
                ground.add(TreePosition(index, lit, (k,)))
        return frozenset(ground)

    def _subtree_store(self, index: int) -> list[StoreConstraint]:
        """The node's own contribution: subtree clause constraints and
        equations, boundary equations, and call-time pinned values."""
        out: list[StoreConstraint] = []
        stack = [index]
        while stack:
            node = self.nodes[stack.pop()]
            out.extend(node.edge_eqs)
            out.extend(node.call_pins)
            for item in node.label.body:
                if isinstance(item, ConstraintExpr):
                    out.append(NumericConstraint(item))
            stack.extend(c for c in node.children if c is not None)
        return out

    def _success_ground(self, index: int) -> frozenset[TreePosition]:
        node = self.nodes[index]
        local = satisfiable(ConstraintStore(self._subtree_store(index)))
        ground = set()
        if node.parent is not None:
            parent = self.nodes[node.parent]
            atom = parent.label.body[node.parent_literal - 1]
            head = node.label.head
            assert isinstance(atom, Atom) and head is not None
            for i, (carg, harg) in enumerate(zip(atom.args, head.args), start=1):
                for path, sub in term_subpositions(carg):
                    if local.is_ground(sub):
                        ground.add(TreePosition(node.parent, node.parent_literal, (i, *path)))
                for path, sub in term_subpositions(harg):
                    if local.is_ground(sub):
                        ground.add(TreePosition(index, HEAD_LITERAL, (i, *path)))
        for lit, item in enumerate(node.label.body, start=1):
            if isinstance(item, ConstraintExpr):
                for k, leaf in enumerate(item.occurrences(), start=1):
                    if local.is_ground(leaf):
                        ground.add(TreePosition(index, lit, (k,)))
        return frozenset(ground)

    # -- bookkeeping ---------------------------------------------------------

    def _record_deepest(self) -> None:
        if len(self.nodes) <= self.deepest_size:
            return
        skeleton = Skeleton(tuple(n.freeze() for n in self.nodes))
        if satisfiable(constraints_of(skeleton)).is_sat:
            self.deepest = skeleton
            self.deepest_size = len(self.nodes)
