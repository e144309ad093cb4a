"""Syntax of CLP(Q) clause programs: terms, clauses, positions, rendering.

Programs are Edinburgh-style clause sequences terminated by ``.``; linear
rational constraints appear inside curly brackets in clause bodies.  Every
atom, constraint occurrence, and subterm has exactly one position, written
textually as ``clause/literal/path``:

* ``clause`` is the 0-based clause ordinal, or ``g`` for a goal clause;
* ``literal`` is 0 for the head and counts body items from 1;
* ``path`` is a dot-separated sequence of 1-based indices descending into
  term arguments, or indexing the variable/constant occurrences of a
  constraint (the empty path denotes the atom or constraint itself).

Tree positions use the same scheme with a node index in place of the
clause ordinal.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

#: Pseudo clause index used for goal positions, rendered as "g".
GOAL_CLAUSE = -1

HEAD_LITERAL = 0

#: Functors reserved for arithmetic inside constraint expressions.
ARITH_OPS = frozenset({"+", "-", "*", "/"})

RELATIONS = ("=", "<", "<=", ">", ">=")


class AddressError(ValueError):
    """Malformed or out-of-range position address."""


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class NumberLiteral:
    """An exact rational literal (lowest terms, positive denominator)."""

    value: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", Fraction(self.value))

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Compound:
    """A compound term; with zero arguments, an atom constant.

    Inside constraint expressions the functors ``+ - * /`` encode
    arithmetic; everywhere else functors are uninterpreted.
    """

    functor: str
    args: tuple[Term, ...] = ()

    def __str__(self) -> str:
        return render_term(self)


Term = Union[Variable, NumberLiteral, Compound]


@dataclass(frozen=True)
class Atom:
    """An atomic formula of a defined predicate."""

    pred: str
    args: tuple[Term, ...] = ()

    @property
    def indicator(self) -> tuple[str, int]:
        return (self.pred, len(self.args))

    def __str__(self) -> str:
        return render_atom(self)


@dataclass(frozen=True)
class ConstraintExpr:
    """A linear (in)equality between two arithmetic expressions.

    Both sides are kept as parsed syntax trees; their variable and
    constant leaves, enumerated left to right across ``lhs`` then
    ``rhs``, form the occurrence list addressed by constraint positions.
    """

    relation: str
    lhs: Term
    rhs: Term

    def __post_init__(self) -> None:
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")

    def occurrences(self) -> tuple[Term, ...]:
        out: list[Term] = []

        def walk(t: Term) -> None:
            if isinstance(t, Compound) and t.functor in ARITH_OPS and t.args:
                for a in t.args:
                    walk(a)
            else:
                out.append(t)

        walk(self.lhs)
        walk(self.rhs)
        return tuple(out)

    def __str__(self) -> str:
        return render_constraint(self)


#: A body item is a call (Atom) or a constraint (ConstraintExpr).
BodyItem = Union[Atom, ConstraintExpr]


@dataclass(frozen=True)
class Clause:
    """A clause ``head :- body``; a goal is a clause without a head."""

    head: Atom | None
    body: tuple[BodyItem, ...] = ()

    @property
    def is_goal(self) -> bool:
        return self.head is None

    def call_literals(self) -> tuple[int, ...]:
        """Literal indices of the non-constraint body atoms, in order."""
        return tuple(
            k for k, item in enumerate(self.body, start=1) if isinstance(item, Atom)
        )

    def __str__(self) -> str:
        return render_clause(self)


@dataclass(frozen=True, order=True)
class ProgramPosition:
    """Address of an atom, constraint, or subterm in a program or goal."""

    clause: int
    literal: int
    path: tuple[int, ...] = ()

    @property
    def address(self) -> str:
        return _format_address("g" if self.clause == GOAL_CLAUSE else str(self.clause),
                               self.literal, self.path)

    def __str__(self) -> str:
        return self.address


@dataclass(frozen=True, order=True)
class TreePosition:
    """Address of a syntactic element in a derivation tree: a skeleton
    node paired with a position inside the clause labeling it."""

    node: int
    literal: int
    path: tuple[int, ...] = ()

    @property
    def address(self) -> str:
        return _format_address(str(self.node), self.literal, self.path)

    def __str__(self) -> str:
        return self.address


def _format_address(first: str, literal: int, path: tuple[int, ...]) -> str:
    if path:
        return f"{first}/{literal}/" + ".".join(str(i) for i in path)
    return f"{first}/{literal}"


def _parse_address_parts(text: str) -> tuple[str, int, tuple[int, ...]]:
    parts = text.strip().split("/")
    if len(parts) not in (2, 3) or not parts[0]:
        raise AddressError(f"malformed address {text!r}; expected clause/literal/path")
    try:
        literal = int(parts[1])
        path = tuple(int(p) for p in parts[2].split(".")) if len(parts) == 3 and parts[2] else ()
    except ValueError:
        raise AddressError(f"malformed address {text!r}") from None
    return parts[0], literal, path


def parse_program_address(text: str) -> ProgramPosition:
    first, literal, path = _parse_address_parts(text)
    if first == "g":
        clause = GOAL_CLAUSE
    else:
        try:
            clause = int(first)
        except ValueError:
            raise AddressError(f"bad clause index {first!r} in {text!r}") from None
    return ProgramPosition(clause, literal, path)


def parse_tree_address(text: str) -> TreePosition:
    first, literal, path = _parse_address_parts(text)
    try:
        node = int(first)
    except ValueError:
        raise AddressError(f"bad node index {first!r} in {text!r}") from None
    return TreePosition(node, literal, path)


# ---------------------------------------------------------------------------
# Position enumeration

def term_subpositions(t: Term) -> Iterator[tuple[tuple[int, ...], Term]]:
    """Yield ``(path, subterm)`` for every subterm of ``t``, pre-order."""
    yield (), t
    if isinstance(t, Compound):
        for i, arg in enumerate(t.args, start=1):
            for path, sub in term_subpositions(arg):
                yield (i, *path), sub


def subterm_at(t: Term, path: tuple[int, ...]) -> Term | None:
    """The subterm of ``t`` at ``path``, or None if the path does not exist."""
    for i in path:
        if not isinstance(t, Compound) or not 1 <= i <= len(t.args):
            return None
        t = t.args[i - 1]
    return t


def item_positions(item: BodyItem) -> Iterator[tuple[tuple[int, ...], object]]:
    """Positions within a single literal: the item itself plus its
    argument subterms (atoms) or occurrence leaves (constraints)."""
    yield (), item
    if isinstance(item, Atom):
        for i, arg in enumerate(item.args, start=1):
            for path, sub in term_subpositions(arg):
                yield (i, *path), sub
    else:
        for k, leaf in enumerate(item.occurrences(), start=1):
            yield (k,), leaf


def clause_positions(clause: Clause) -> Iterator[tuple[int, tuple[int, ...], object]]:
    """Yield ``(literal, path, element)`` for every position of a clause."""
    if clause.head is not None:
        for path, elem in item_positions(clause.head):
            yield HEAD_LITERAL, path, elem
    for k, item in enumerate(clause.body, start=1):
        for path, elem in item_positions(item):
            yield k, path, elem


class Program:
    """A parsed program: an ordered clause sequence with a total,
    bijective table from positions to syntactic elements."""

    def __init__(self, clauses: tuple[Clause, ...] | list[Clause]):
        self.clauses: tuple[Clause, ...] = tuple(clauses)
        table: dict[ProgramPosition, object] = {}
        for ci, clause in enumerate(self.clauses):
            if clause.head is None:
                raise ValueError(f"clause {ci} has no head; goals are parsed separately")
            for literal, path, elem in clause_positions(clause):
                table[ProgramPosition(ci, literal, path)] = elem
        self.position_table: dict[ProgramPosition, object] = table
        by_indicator: dict[tuple[str, int], list[int]] = {}
        for ci, clause in enumerate(self.clauses):
            by_indicator.setdefault(clause.head.indicator, []).append(ci)
        self._by_indicator = by_indicator

    def clauses_for(self, indicator: tuple[str, int]) -> tuple[int, ...]:
        """Indices of the clauses defining a predicate, in textual order."""
        return tuple(self._by_indicator.get(indicator, ()))

    def element_at(self, pos: ProgramPosition) -> object:
        try:
            return self.position_table[pos]
        except KeyError:
            raise AddressError(f"no such program position: {pos.address}") from None

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Program) and self.clauses == other.clauses

    def __repr__(self) -> str:
        return f"Program({len(self.clauses)} clauses)"


def goal_positions(goal: Clause) -> dict[ProgramPosition, object]:
    """Position table of a goal clause, under the pseudo clause index."""
    if goal.head is not None:
        raise ValueError("goal clauses have no head")
    return {
        ProgramPosition(GOAL_CLAUSE, literal, path): elem
        for literal, path, elem in clause_positions(goal)
    }


def position_of(program: Program, addr: str) -> ProgramPosition:
    """Resolve a textual ``clause/literal/path`` address against a program."""
    pos = parse_program_address(addr)
    if pos.clause == GOAL_CLAUSE:
        raise AddressError("goal addresses are not program positions")
    program.element_at(pos)
    return pos


# ---------------------------------------------------------------------------
# Variables and renaming

def vars_of_term(t: Term) -> frozenset[str]:
    if isinstance(t, Variable):
        return frozenset((t.name,))
    if isinstance(t, Compound):
        out: frozenset[str] = frozenset()
        for a in t.args:
            out |= vars_of_term(a)
        return out
    return frozenset()


def vars_of(obj: object) -> frozenset[str]:
    """Variables of a term, atom, constraint, or clause."""
    if isinstance(obj, (Variable, NumberLiteral, Compound)):
        return vars_of_term(obj)
    if isinstance(obj, Atom):
        out: frozenset[str] = frozenset()
        for a in obj.args:
            out |= vars_of_term(a)
        return out
    if isinstance(obj, ConstraintExpr):
        return vars_of_term(obj.lhs) | vars_of_term(obj.rhs)
    if isinstance(obj, Clause):
        out = frozenset()
        if obj.head is not None:
            out |= vars_of(obj.head)
        for item in obj.body:
            out |= vars_of(item)
        return out
    raise TypeError(f"no variables in {type(obj).__name__}")


def rename_term(t: Term, mapping: dict[str, str]) -> Term:
    if isinstance(t, Variable):
        return Variable(mapping.get(t.name, t.name))
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(rename_term(a, mapping) for a in t.args))
    return t


def rename_clause(clause: Clause, tag: int) -> Clause:
    """A fresh variant of ``clause``: every variable ``X`` becomes
    ``X#tag``.  Structure, and hence the position set, is unchanged."""
    mapping = {name: f"{name}#{tag}" for name in vars_of(clause)}

    def ren_atom(a: Atom) -> Atom:
        return Atom(a.pred, tuple(rename_term(t, mapping) for t in a.args))

    def ren_item(item: BodyItem) -> BodyItem:
        if isinstance(item, Atom):
            return ren_atom(item)
        return ConstraintExpr(item.relation,
                              rename_term(item.lhs, mapping),
                              rename_term(item.rhs, mapping))

    head = ren_atom(clause.head) if clause.head is not None else None
    return Clause(head, tuple(ren_item(item) for item in clause.body))


def strip_tag(name: str) -> str:
    """The source variable name behind a renamed variable."""
    return name.split("#", 1)[0]


def strip_tags_term(t: Term) -> Term:
    if isinstance(t, Variable):
        return Variable(strip_tag(t.name))
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(strip_tags_term(a) for a in t.args))
    return t


# ---------------------------------------------------------------------------
# Rendering

def render_term(t: Term) -> str:
    if isinstance(t, Compound) and t.functor in ARITH_OPS and t.args:
        return _render_arith(t, 0)
    if isinstance(t, Variable):
        return t.name
    if isinstance(t, NumberLiteral):
        return str(t.value)
    if isinstance(t, Compound):
        if not t.args:
            return t.functor
        return f"{t.functor}({', '.join(render_term(a) for a in t.args)})"
    raise TypeError(f"not a term: {t!r}")


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _render_arith(t: Term, prec: int) -> str:
    if isinstance(t, Compound) and t.functor in ARITH_OPS and len(t.args) == 2:
        p = _PREC[t.functor]
        left = _render_arith(t.args[0], p)
        right = _render_arith(t.args[1], p + 1)
        if right.startswith("-"):
            right = f"({right})"
        s = f"{left}{t.functor}{right}"
        return f"({s})" if p < prec else s
    if isinstance(t, Compound) and t.functor == "-" and len(t.args) == 1:
        inner = _render_arith(t.args[0], 3)
        return f"-{inner}"
    if isinstance(t, Compound) and t.functor in ARITH_OPS:
        raise ValueError(f"malformed arithmetic term {t!r}")
    s = render_term(t)
    if prec >= 2 and s.startswith("-"):
        return f"({s})"
    return s


def render_atom(a: Atom) -> str:
    if not a.args:
        return a.pred
    return f"{a.pred}({', '.join(render_term(t) for t in a.args)})"


def render_constraint(c: ConstraintExpr) -> str:
    return f"{_render_arith(c.lhs, 0)}{c.relation}{_render_arith(c.rhs, 0)}"


def render_body_item(item: BodyItem) -> str:
    if isinstance(item, Atom):
        return render_atom(item)
    return "{" + render_constraint(item) + "}"


def render_clause(clause: Clause) -> str:
    body = ", ".join(render_body_item(item) for item in clause.body)
    if clause.head is None:
        return f":- {body}."
    head = render_atom(clause.head)
    if not clause.body:
        return f"{head}."
    return f"{head} :- {body}."


def render_program(program: Program) -> str:
    return "\n".join(render_clause(c) for c in program.clauses) + ("\n" if program.clauses else "")


def render_element(elem: object) -> str:
    """Render whatever a position table stores: atom, constraint, or term."""
    if isinstance(elem, Atom):
        return render_atom(elem)
    if isinstance(elem, ConstraintExpr):
        return render_constraint(elem)
    return render_term(elem)  # type: ignore[arg-type]
