"""Constraint stores over CLP(Q) plus Herbrand terms.

A store mixes linear rational (in)equalities with term equations.
Satisfiability is decided exactly: term equations by syntactic
unification with occurs check, numeric equalities by Gauss-Jordan
elimination over Fractions, inequalities by Fourier-Motzkin
elimination.  Numeric values cross between the two worlds through the
unifier's bindings: a variable bound to a number contributes that
number to the linear system, and a numerically pinned variable grounds
the Herbrand terms it appears in.

Groundness detection is deliberately syntactic: a variable counts as
ground only when the solved form certifies a unique value through
equalities (a pair of opposing inequalities does not).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Union

from .linexpr import LinExpr, to_linear
from .syntax import (
    Compound,
    ConstraintExpr,
    NumberLiteral,
    Term,
    TreePosition,
    Variable,
    render_constraint,
    render_term,
    strip_tags_term,
    vars_of,
    vars_of_term,
)


@dataclass(frozen=True)
class NumericConstraint:
    """A linear (in)equality, with the tree positions that produced it."""

    expr: ConstraintExpr
    origin: frozenset[TreePosition] = field(default=frozenset(), compare=False)

    def variables(self) -> frozenset[str]:
        return vars_of(self.expr)

    def __str__(self) -> str:
        return render_constraint(self.expr)


@dataclass(frozen=True)
class TermEquation:
    """An equation between two terms, e.g. an argument-passing equation."""

    lhs: Term
    rhs: Term
    origin: frozenset[TreePosition] = field(default=frozenset(), compare=False)

    def variables(self) -> frozenset[str]:
        return vars_of_term(self.lhs) | vars_of_term(self.rhs)

    def __str__(self) -> str:
        return f"{render_term(self.lhs)}={render_term(self.rhs)}"


StoreConstraint = Union[NumericConstraint, TermEquation]


class ConstraintStore:
    """An immutable set of store constraints.

    Identity of a constraint ignores its origin; building a store merges
    the origins of duplicates.
    """

    def __init__(self, constraints: Iterable[StoreConstraint] = ()):
        merged: dict[StoreConstraint, frozenset[TreePosition]] = {}
        order: list[StoreConstraint] = []
        for c in constraints:
            if c in merged:
                merged[c] = merged[c] | c.origin
            else:
                merged[c] = c.origin
                order.append(c)
        self.constraints: tuple[StoreConstraint, ...] = tuple(
            replace(c, origin=merged[c]) for c in order
        )
        v: frozenset[str] = frozenset()
        for c in self.constraints:
            v |= c.variables()
        self.vars: frozenset[str] = v

    def __iter__(self) -> Iterator[StoreConstraint]:
        return iter(self.constraints)

    def __len__(self) -> int:
        return len(self.constraints)

    def __contains__(self, c: StoreConstraint) -> bool:
        return c in set(self.constraints)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ConstraintStore) and set(self.constraints) == set(
            other.constraints
        )

    def __repr__(self) -> str:
        return "{" + ", ".join(str(c) for c in self.constraints) + "}"

    def issubset(self, other: "ConstraintStore") -> bool:
        return set(self.constraints) <= set(other.constraints)

    def restrict(self, keep: Iterable[StoreConstraint]) -> "ConstraintStore":
        wanted = set(keep)
        return ConstraintStore(c for c in self.constraints if c in wanted)

    def union(self, extra: Iterable[StoreConstraint]) -> "ConstraintStore":
        return ConstraintStore((*self.constraints, *extra))


def strip_rename_tags(store: ConstraintStore) -> ConstraintStore:
    """Map every renamed variable back to its source name and drop the
    equations that become trivial.  Useful for display and for comparing
    a derived store with its textbook form."""
    out: list[StoreConstraint] = []
    for c in store:
        if isinstance(c, TermEquation):
            lhs, rhs = strip_tags_term(c.lhs), strip_tags_term(c.rhs)
            if lhs == rhs:
                continue
            out.append(TermEquation(lhs, rhs, c.origin))
        else:
            out.append(
                NumericConstraint(
                    ConstraintExpr(
                        c.expr.relation,
                        strip_tags_term(c.expr.lhs),
                        strip_tags_term(c.expr.rhs),
                    ),
                    c.origin,
                )
            )
    return ConstraintStore(out)


# ---------------------------------------------------------------------------
# Solved forms

class Satisfiability(Enum):
    SAT = "sat"
    UNSAT = "unsat"


@dataclass(frozen=True)
class SolvedForm:
    """Canonical form of a satisfiable store (or the Unsat verdict).

    ``herbrand_bindings`` is an idempotent substitution; ``pivots`` maps
    each eliminated numeric variable to an affine form over free
    variables; ``residual`` holds the substituted inequalities, each as
    ``expr <= 0`` (strict flag set for ``<``).
    """

    status: Satisfiability
    vars: frozenset[str] = frozenset()
    herbrand_bindings: dict[str, Term] = field(default_factory=dict)
    pivots: dict[str, LinExpr] = field(default_factory=dict)
    residual: tuple[tuple[LinExpr, bool], ...] = ()
    _fm_order: tuple[tuple[str, tuple[tuple[LinExpr, bool], ...]], ...] = field(
        default=(), repr=False
    )

    @property
    def is_sat(self) -> bool:
        return self.status is Satisfiability.SAT

    def resolve_term(self, t: Term) -> Term:
        """Substitute certified values: Herbrand bindings, then pinned
        numeric pivots."""
        if isinstance(t, Variable):
            bound = self.herbrand_bindings.get(t.name)
            if bound is not None:
                return self.resolve_term(bound)
            pivot = self.pivots.get(t.name)
            if pivot is not None and pivot.is_constant:
                return NumberLiteral(pivot.const)
            return t
        if isinstance(t, Compound):
            return Compound(t.functor, tuple(self.resolve_term(a) for a in t.args))
        return t

    def is_ground(self, t: Term) -> bool:
        return not vars_of_term(self.resolve_term(t))

    def ground_value(self, t: Term) -> Term | None:
        resolved = self.resolve_term(t)
        return resolved if not vars_of_term(resolved) else None

    def sample_valuation(self) -> dict[str, Fraction]:
        """One rational witness for the numeric part of the store.

        Free variables are chosen by walking the Fourier-Motzkin
        elimination back to front; pivots follow by substitution.
        """
        if not self.is_sat:
            raise ValueError("no valuation for an unsatisfiable store")
        values: dict[str, Fraction] = {}
        for var, bounds in reversed(self._fm_order):
            lo: tuple[Fraction, bool] | None = None
            hi: tuple[Fraction, bool] | None = None
            for expr, strict in bounds:
                coef = expr.coeffs[var]
                rest = LinExpr({v: c for v, c in expr.coeffs.items() if v != var}, expr.const)
                bound = -rest.evaluate(values) / coef
                if coef < 0:  # lower bound
                    if lo is None or bound > lo[0] or (bound == lo[0] and strict):
                        lo = (bound, strict)
                else:
                    if hi is None or bound < hi[0] or (bound == hi[0] and strict):
                        hi = (bound, strict)
            values[var] = _pick_value(lo, hi)
        # Numeric variables untouched by any inequality default to zero.
        for var, form in self.pivots.items():
            for free in form.coeffs:
                values.setdefault(free, Fraction(0))
        for var, form in self.pivots.items():
            values[var] = form.evaluate(values)
        return values


def _pick_value(lo: tuple[Fraction, bool] | None, hi: tuple[Fraction, bool] | None) -> Fraction:
    if lo is None and hi is None:
        return Fraction(0)
    if lo is None:
        return hi[0] - 1 if hi[1] else hi[0]  # type: ignore[index]
    if hi is None:
        return lo[0] + 1 if lo[1] else lo[0]
    if lo[0] == hi[0]:
        return lo[0]
    return (lo[0] + hi[0]) / 2


# ---------------------------------------------------------------------------
# Unification (occurs check on)

def _walk(t: Term, subst: dict[str, Term]) -> Term:
    while isinstance(t, Variable) and t.name in subst:
        t = subst[t.name]
    return t


def _occurs(name: str, t: Term, subst: dict[str, Term]) -> bool:
    t = _walk(t, subst)
    if isinstance(t, Variable):
        return t.name == name
    if isinstance(t, Compound):
        return any(_occurs(name, a, subst) for a in t.args)
    return False


def _unify_all(pairs: Iterable[tuple[Term, Term]]) -> dict[str, Term] | None:
    subst: dict[str, Term] = {}
    stack = list(pairs)
    while stack:
        left, right = stack.pop()
        left, right = _walk(left, subst), _walk(right, subst)
        if left == right:
            continue
        if isinstance(left, Variable):
            if _occurs(left.name, right, subst):
                return None
            subst[left.name] = right
        elif isinstance(right, Variable):
            if _occurs(right.name, left, subst):
                return None
            subst[right.name] = left
        elif isinstance(left, Compound) and isinstance(right, Compound):
            if left.functor != right.functor or len(left.args) != len(right.args):
                return None
            stack.extend(zip(left.args, right.args))
        else:
            # number vs unequal number, or number vs compound
            return None
    return subst


def _deep_resolve(t: Term, subst: dict[str, Term]) -> Term:
    t = _walk(t, subst)
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(_deep_resolve(a, subst) for a in t.args))
    return t


# ---------------------------------------------------------------------------
# Linear solving

def constraint_linear(expr: ConstraintExpr) -> tuple[LinExpr, str]:
    """Normalize to ``form rel 0`` with rel one of ``=``, ``<=``, ``<``."""
    diff = to_linear(expr.lhs) - to_linear(expr.rhs)
    rel = expr.relation
    if rel in (">", ">="):
        diff = diff.scale(Fraction(-1))
        rel = "<" if rel == ">" else "<="
    return diff, rel


def _gauss_jordan(equalities: list[LinExpr]) -> dict[str, LinExpr] | None:
    """Pivot dictionary var -> affine form over free variables, or None."""
    pivots: dict[str, LinExpr] = {}
    for eq in equalities:
        for var, form in pivots.items():
            eq = eq.substitute(var, form)
        if eq.is_constant:
            if eq.const:
                return None
            continue
        var = min(eq.coeffs)
        coef = eq.coeffs[var]
        rest = LinExpr({v: c for v, c in eq.coeffs.items() if v != var}, eq.const)
        form = rest.scale(Fraction(-1) / coef)
        pivots = {v: f.substitute(var, form) for v, f in pivots.items()}
        pivots[var] = form
    return pivots


def _fourier_motzkin(
    inequalities: list[tuple[LinExpr, bool]]
) -> tuple[bool, tuple[tuple[str, tuple[tuple[LinExpr, bool], ...]], ...]]:
    """Decide ``all(expr <= 0 / < 0)`` over the rationals.

    Returns (satisfiable, elimination order with the bounds seen at each
    step) so that a witness can be reconstructed.
    """
    rows = list(inequalities)
    order: list[tuple[str, tuple[tuple[LinExpr, bool], ...]]] = []
    while True:
        pending = [r for r in rows if not r[0].is_constant]
        for expr, strict in rows:
            if expr.is_constant and (expr.const > 0 or (strict and expr.const == 0)):
                return False, ()
        if not pending:
            return True, tuple(order)
        var = min(min(r[0].coeffs) for r in pending)
        lows, ups, rest = [], [], []
        for expr, strict in rows:
            coef = expr.coeffs.get(var)
            if coef is None or not coef:
                rest.append((expr, strict))
            elif coef < 0:
                lows.append((expr, strict))
            else:
                ups.append((expr, strict))
        order.append((var, tuple(lows + ups)))
        seen = set()
        combined = []
        for lo_expr, lo_strict in lows:
            for up_expr, up_strict in ups:
                new = lo_expr.scale(up_expr.coeffs[var]) - up_expr.scale(lo_expr.coeffs[var])
                strict = lo_strict or up_strict
                key = (new.normalized(), strict)
                if key not in seen:
                    seen.add(key)
                    combined.append((new, strict))
        rows = rest + combined


def satisfiable(store: ConstraintStore) -> SolvedForm:
    """Decide a mixed store; Unsat is a verdict, never an exception."""
    unsat = SolvedForm(Satisfiability.UNSAT, store.vars)

    pairs = [(c.lhs, c.rhs) for c in store if isinstance(c, TermEquation)]
    subst = _unify_all(pairs)
    if subst is None:
        return unsat
    herbrand = {v: _deep_resolve(Variable(v), subst) for v in subst}

    equalities: list[LinExpr] = []
    inequalities: list[tuple[LinExpr, bool]] = []
    for c in store:
        if not isinstance(c, NumericConstraint):
            continue
        form, rel = constraint_linear(c.expr)
        substituted = LinExpr({}, form.const)
        for var, coef in form.coeffs.items():
            rep = _walk(Variable(var), subst)
            if isinstance(rep, Variable):
                substituted += LinExpr({rep.name: coef})
            elif isinstance(rep, NumberLiteral):
                substituted += LinExpr.of_const(coef * rep.value)
            else:
                # a numerically constrained variable equated to a
                # non-numeric term can take no rational value
                return unsat
        if rel == "=":
            equalities.append(substituted)
        else:
            inequalities.append((substituted, rel == "<"))
    # Variables Herbrand-bound to numbers feed the linear system too.
    for var, bound in herbrand.items():
        if isinstance(bound, NumberLiteral):
            equalities.append(LinExpr({var: Fraction(1)}, -bound.value))

    pivots = _gauss_jordan(equalities)
    if pivots is None:
        return unsat

    residual = []
    seen = set()
    for expr, strict in inequalities:
        for var, form in pivots.items():
            expr = expr.substitute(var, form)
        if expr.is_constant:
            if expr.const > 0 or (strict and expr.const == 0):
                return unsat
            continue
        key = (expr.normalized(), strict)
        if key not in seen:
            seen.add(key)
            residual.append((expr, strict))

    ok, fm_order = _fourier_motzkin(residual)
    if not ok:
        return unsat
    return SolvedForm(
        Satisfiability.SAT,
        store.vars,
        herbrand,
        pivots,
        tuple(residual),
        fm_order,
    )


def ground_vars(solved: SolvedForm) -> dict[str, Term]:
    """Variables with the same value in every solution, as certified by
    the solved form: bound to a ground term, or pinned by equalities."""
    if not solved.is_sat:
        raise ValueError("ground_vars needs a satisfiable solved form")
    out: dict[str, Term] = {}
    for var in sorted(solved.vars):
        value = solved.ground_value(Variable(var))
        if value is not None:
            out[var] = value
    return out


# ---------------------------------------------------------------------------
# Variable dependency classes

class _UnionFind:
    def __init__(self) -> None:
        self.parent: dict = {}

    def add(self, x) -> None:
        self.parent.setdefault(x, x)

    def find(self, x):
        self.add(x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra

    def classes(self) -> frozenset[frozenset]:
        groups: dict = {}
        for x in self.parent:
            groups.setdefault(self.find(x), set()).add(x)
        return frozenset(frozenset(g) for g in groups.values())


def dep_classes(store: ConstraintStore) -> frozenset[frozenset[str]]:
    """Equivalence classes of the transitive closure of variable
    co-occurrence within a constraint."""
    uf = _UnionFind()
    for v in store.vars:
        uf.add(v)
    for c in store:
        cvars = sorted(c.variables())
        for other in cvars[1:]:
            uf.union(cvars[0], other)
    return uf.classes()


def class_slice(store: ConstraintStore, x: str) -> ConstraintStore:
    """All constraints whose variables meet the dependency class of x."""
    if x not in store.vars:
        raise ValueError(f"unknown variable {x!r}")
    cls = next(c for c in dep_classes(store) if x in c)
    return ConstraintStore(c for c in store if c.variables() & cls)
