"""Finite-domain enumeration oracle for constraint-set slices.

Independent of the rational solver: solution sets are computed by
complete search over an integer box, so the oracle can certify slices
(equal solution sets for the criterion variable) without trusting the
machinery under test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .constraints import ConstraintStore, NumericConstraint, constraint_linear
from .linexpr import LinExpr
from .syntax import Compound, NumberLiteral, Term, Variable

Domain = tuple[int, int]


class OracleDomainError(ValueError):
    """The store is not expressible over the integer domain."""


@dataclass(frozen=True)
class SolutionSet:
    variable: str
    values: frozenset[int]


def _check_integral(store: ConstraintStore) -> None:
    """Numeric constraints evaluate exactly whatever their coefficients,
    but a term equation against a non-integer literal has no reading
    once every variable ranges over integers."""
    def leaves(t: Term):
        if isinstance(t, Compound):
            for a in t.args:
                yield from leaves(a)
        else:
            yield t

    for c in store:
        if isinstance(c, NumericConstraint):
            continue
        for t in (c.lhs, c.rhs):
            for leaf in leaves(t):
                if isinstance(leaf, NumberLiteral) and leaf.value.denominator != 1:
                    raise OracleDomainError(
                        f"term equation mentions {leaf.value}, which no integer-valued "
                        "term can equal"
                    )


def _decompose(store: ConstraintStore) -> list[tuple[LinExpr, str]] | None:
    """Flatten the store to linear rows over integer-valued variables.

    Term equations decompose structurally; an equation forcing a
    variable to equal a compound term can never hold over integers, so
    it makes the whole store infeasible (None).
    """
    rows: list[tuple[LinExpr, str]] = []
    stack: list[tuple[Term, Term]] = []
    for c in store:
        if isinstance(c, NumericConstraint):
            rows.append(constraint_linear(c.expr))
        else:
            stack.append((c.lhs, c.rhs))
    while stack:
        left, right = stack.pop()
        if isinstance(left, Compound) and isinstance(right, Compound):
            if left.functor != right.functor or len(left.args) != len(right.args):
                return None
            stack.extend(zip(left.args, right.args))
        elif isinstance(left, Compound) or isinstance(right, Compound):
            return None  # integer variable or number vs structure
        else:
            row = _leaf_linear(left) - _leaf_linear(right)
            if row.is_constant and row.const:
                return None
            if not row.is_constant:
                rows.append((row, "="))
    return rows


def _leaf_linear(t: Term) -> LinExpr:
    if isinstance(t, Variable):
        return LinExpr.of_var(t.name)
    if isinstance(t, NumberLiteral):
        return LinExpr.of_const(t.value)
    raise AssertionError("compound survived decomposition")


def _holds(value: Fraction, rel: str) -> bool:
    if rel == "=":
        return value == 0
    if rel == "<":
        return value < 0
    return value <= 0


def _search(rows: list[tuple[LinExpr, str]], variables: list[str],
            dom: Domain, assignment: dict[str, Fraction]) -> bool:
    """Depth-first search for one integer witness, propagating through
    rows whose remaining support is a single variable."""
    lo, hi = dom
    unassigned = [v for v in variables if v not in assignment]
    # rows fully determined by the assignment must hold
    pending: list[tuple[LinExpr, str]] = []
    for row, rel in rows:
        free = [v for v in row.coeffs if v not in assignment]
        if not free:
            if not _holds(row.evaluate(assignment), rel):
                return False
        else:
            pending.append((row, rel))
    if not unassigned:
        return True

    # choose the variable with the tightest unit row, equalities first
    def unit_rows(v: str):
        return [
            (row, rel)
            for row, rel in pending
            if [u for u in row.coeffs if u not in assignment] == [v]
        ]

    var = None
    var_units: list[tuple[LinExpr, str]] = []
    for v in unassigned:
        units = unit_rows(v)
        if any(rel == "=" for _, rel in units):
            var, var_units = v, units
            break
        if var is None or (units and not var_units):
            var, var_units = v, units
    assert var is not None

    lo_f, hi_f = Fraction(lo), Fraction(hi)
    forced: set[Fraction] | None = None
    for row, rel in var_units:
        coef = row.coeffs[var]
        rest = Fraction(row.const)
        for u, c in row.coeffs.items():
            if u != var:
                rest += c * assignment[u]
        bound = -rest / coef
        if rel == "=":
            forced = {bound} if forced is None else forced & {bound}
        elif coef > 0:  # coef*var + rest <= 0  ->  var <= bound
            hi_f = min(hi_f, bound - 1 if rel == "<" and bound.denominator == 1 else bound)
        else:
            lo_f = max(lo_f, bound + 1 if rel == "<" and bound.denominator == 1 else bound)

    if forced is not None:
        candidates = [v for v in forced if v.denominator == 1 and lo_f <= v <= hi_f]
    else:
        start = max(lo, math.ceil(lo_f))
        stop = min(hi, math.floor(hi_f))
        candidates = [Fraction(v) for v in range(start, stop + 1)]
    for value in candidates:
        assignment[var] = value
        if _search(rows, variables, dom, assignment):
            del assignment[var]
            return True
        del assignment[var]
    return False


def sol_finite(store: ConstraintStore, x: str, dom: Domain) -> SolutionSet:
    """Exact Sol(x, store) with every variable ranging over dom."""
    if dom[0] > dom[1]:
        raise OracleDomainError(f"empty domain {dom}")
    _check_integral(store)
    rows = _decompose(store)
    values: set[int] = set()
    if rows is not None:
        variables = sorted(store.vars | {x})
        for v in range(dom[0], dom[1] + 1):
            if _search(rows, variables, dom, {x: Fraction(v)}):
                values.add(v)
    return SolutionSet(x, frozenset(values))


def is_slice(store: ConstraintStore, subset: ConstraintStore, x: str, dom: Domain) -> bool:
    """Does the subset leave Sol(x, .) unchanged over the domain?"""
    if not subset.issubset(store):
        raise ValueError("candidate slice is not a subset of the store")
    return sol_finite(subset, x, dom).values == sol_finite(store, x, dom).values


def minimal_slices(store: ConstraintStore, x: str, dom: Domain,
                   max_constraints: int = 6) -> list[ConstraintStore]:
    """All inclusion-minimal slices, by subset enumeration.

    Exponential; intended for building small test fixtures only.
    """
    if len(store) > max_constraints:
        raise ValueError(f"store too large for subset enumeration ({len(store)} constraints)")
    full = sol_finite(store, x, dom).values
    found: list[tuple[frozenset, ConstraintStore]] = []
    for size in range(len(store) + 1):
        for combo in combinations(store.constraints, size):
            key = frozenset(combo)
            if any(prev <= key for prev, _ in found):
                continue
            candidate = ConstraintStore(combo)
            if sol_finite(candidate, x, dom).values == full:
                found.append((key, candidate))
    return [s for _, s in found]
