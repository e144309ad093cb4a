from fractions import Fraction

import pytest

from clpslice import (
    ConstraintStore,
    NoSolution,
    NumberLiteral,
    ProgramPosition,
    Skeleton,
    TreePosition,
    constraints_of,
    derive,
    ground_vars,
    origin_constraints,
    parse_goal,
    parse_program,
    phi_inverse,
    positions_to_store,
    satisfiable,
    strip_rename_tags,
)
from clpslice.engine import SkelNode
from conftest import store_of, teq


def chain_skeleton(chain_program_text):
    """The complete skeleton for chain goal p(X,Y,Z), unrenamed labels."""
    program = parse_program(chain_program_text)
    goal = parse_goal("p(X,Y,Z).")
    return Skeleton(
        (
            SkelNode(0, -1, goal, None, None, (1,)),
            SkelNode(1, 0, program.clauses[0], 0, 1, (2, 3)),
            SkelNode(2, 1, program.clauses[1], 1, 2, ()),
            SkelNode(3, 2, program.clauses[2], 1, 3, ()),
        )
    )


CHAIN_STORE = store_of("{X-Y=1, U+V=3}.").union(
    [teq("X", "U"), teq("Y", "V"), teq("Z", 42)]
)


def test_constraints_of_chain_skeleton(chain_program_text):
    store = constraints_of(chain_skeleton(chain_program_text))
    assert store == CHAIN_STORE


def test_constraints_of_single_edge():
    goal = parse_goal("r(Z).")
    fact = parse_program("r(42).").clauses[0]
    skeleton = Skeleton(
        (SkelNode(0, -1, goal, None, None, (1,)), SkelNode(1, 0, fact, 0, 1, ()))
    )
    assert constraints_of(skeleton) == ConstraintStore([teq("Z", 42)])


def test_constraints_of_incomplete_child(chain_program_text):
    program = parse_program(chain_program_text)
    goal = parse_goal("p(X,Y,Z).")
    skeleton = Skeleton(
        (
            SkelNode(0, -1, goal, None, None, (1,)),
            SkelNode(1, 0, program.clauses[0], 0, 1, (None, 2)),
            SkelNode(2, 2, program.clauses[2], 1, 3, ()),
        )
    )
    assert constraints_of(skeleton) == store_of("{X-Y=1}.").union([teq("Z", 42)])


def test_constraints_of_arity_mismatch():
    goal = parse_goal("r(Z).")
    fact = parse_program("r(1, 2).").clauses[0]
    skeleton = Skeleton(
        (SkelNode(0, -1, goal, None, None, (1,)), SkelNode(1, 0, fact, 0, 1, ()))
    )
    with pytest.raises(ValueError):
        constraints_of(skeleton)


def test_constraint_origins(chain_program_text):
    store = constraints_of(chain_skeleton(chain_program_text))
    by_text = {str(c): c for c in store}
    assert by_text["X-Y=1"].origin == frozenset({TreePosition(1, 1, ())})
    assert by_text["X=U"].origin == frozenset(
        {TreePosition(1, 2, (1,)), TreePosition(2, 0, (1,))}
    )


def test_derive_example_chain(chain_program_text):
    program = parse_program(chain_program_text)
    solutions = derive(program, parse_goal("p(X,Y,Z)."))
    assert len(solutions) == 1
    tree = solutions[0].tree
    assert tree.is_proof_tree
    assert tree.node_count() == 4
    assert strip_rename_tags(tree.store) == CHAIN_STORE
    values = ground_vars(satisfiable(tree.store))
    assert values["X"] == NumberLiteral(Fraction(2))
    assert values["Y"] == NumberLiteral(Fraction(1))
    assert values["Z"] == NumberLiteral(Fraction(42))


def test_derive_goal_groundness_log():
    program = parse_program("p(X,Y) :- r(X), q(X,Y).  r(3).  q(U,V) :- {U+V=5}.")
    solution = derive(program, parse_goal("p(X,Y)."))[0]
    call = solution.log.call_ground()
    success = solution.log.success_ground()
    u_head = TreePosition(3, 0, (1,))
    v_head = TreePosition(3, 0, (2,))
    assert u_head in call, "U is ground when q is called"
    assert v_head not in call and v_head in success, "V is ground only at success"


def test_derive_depth_limit():
    program = parse_program("p :- p.")
    with pytest.raises(NoSolution) as err:
        derive(program, parse_goal("p."), depth_limit=10)
    assert err.value.deepest is not None
    assert err.value.deepest.node_count() == 11


def test_derive_failure_keeps_deepest_satisfiable():
    program = parse_program("p(X) :- {X = 1}, q(X).  q(2).")
    with pytest.raises(NoSolution) as err:
        derive(program, parse_goal("p(X)."))
    deepest = err.value.deepest
    assert deepest is not None
    assert satisfiable(deepest.store).is_sat


def test_derive_backtracks_over_clause_order():
    program = parse_program("n(1).  n(2).  pick(X) :- n(X), {X >= 2}.")
    solution = derive(parse_program("n(1). n(2). pick(X) :- n(X), {X>=2}."),
                      parse_goal("pick(X)."))[0]
    values = ground_vars(satisfiable(solution.tree.store))
    assert values["X"] == NumberLiteral(Fraction(2))
    del program


def test_arities_name_distinct_predicates():
    program = parse_program("p(1).  p(1, 2).")
    assert derive(program, parse_goal("p(X)."))[0].tree.node_count() == 2
    assert derive(program, parse_goal("p(X, Y)."))[0].tree.node_count() == 2
    with pytest.raises(NoSolution):
        derive(program, parse_goal("p(X, Y, Z)."))


def test_derive_all_solutions():
    program = parse_program("n(1).  n(2).  n(3).")
    solutions = derive(program, parse_goal("n(X)."), max_solutions=None)
    assert len(solutions) == 3
    found = [ground_vars(satisfiable(s.tree.store))["X"] for s in solutions]
    assert found == [NumberLiteral(Fraction(i)) for i in (1, 2, 3)]
    capped = derive(program, parse_goal("n(X)."), max_solutions=2)
    assert len(capped) == 2


def test_derive_is_deterministic(chain_program_text):
    program = parse_program(chain_program_text)
    a = derive(program, parse_goal("p(X,Y,Z)."))[0]
    b = derive(program, parse_goal("p(X,Y,Z)."))[0]
    assert a.tree.skeleton == b.tree.skeleton
    assert a.tree.store == b.tree.store
    assert a.log == b.log


def test_phi_inverse(chain_program_text):
    program = parse_program(chain_program_text)
    tree = derive(program, parse_goal("p(X,Y,Z)."))[0].tree
    q_u = ProgramPosition(1, 0, (1,))
    assert phi_inverse(tree, q_u) == frozenset({TreePosition(2, 0, (1,))})
    # a clause used twice yields two instances
    rec = parse_program("n(0).  n(s(X)) :- n(X).")
    tree2 = derive(rec, parse_goal("n(s(s(0)))."))[0].tree
    twice = phi_inverse(tree2, ProgramPosition(1, 0, (1,)))
    assert len(twice) == 2
    # unused clause: empty set
    assert phi_inverse(tree, ProgramPosition(7, 0, (1,))) == frozenset()
    with pytest.raises(ValueError):
        phi_inverse(tree, ProgramPosition(1, 0, (9,)))


def test_positions_to_store(chain_program_text):
    program = parse_program(chain_program_text)
    tree = derive(program, parse_goal("p(X,Y,Z)."))[0].tree
    q_atom_positions = {
        TreePosition(1, 2, ()),
        TreePosition(1, 2, (1,)),
        TreePosition(1, 2, (2,)),
    }
    c_p = positions_to_store(tree, q_atom_positions)
    assert strip_rename_tags(c_p) == store_of("{X-Y=1}.").union([teq("X", "U"), teq("Y", "V")])
    from clpslice import ConstraintStore

    assert positions_to_store(tree, frozenset()) == ConstraintStore()
    assert positions_to_store(tree, frozenset(tree.pos_table)) == tree.store
    with pytest.raises(ValueError):
        positions_to_store(tree, {TreePosition(9, 0, (1,))})


def test_origin_constraints(chain_program_text):
    program = parse_program(chain_program_text)
    tree = derive(program, parse_goal("p(X,Y,Z)."))[0].tree
    picked = origin_constraints(tree, {TreePosition(1, 1, ())})
    assert strip_rename_tags(picked) == store_of("{X-Y=1}.")


def test_phi_naturality(chain_program_text):
    # the element at a tree position is a renamed copy of its phi image
    from clpslice.syntax import goal_positions, render_element, strip_tags_term
    from clpslice.syntax import Atom as AtomT, ConstraintExpr as ExprT

    program = parse_program(chain_program_text)
    goal = parse_goal("p(X,Y,Z).")
    tree = derive(program, goal)[0].tree
    goal_table = goal_positions(goal)

    def unrename(elem):
        if isinstance(elem, AtomT):
            return AtomT(elem.pred, tuple(strip_tags_term(a) for a in elem.args))
        if isinstance(elem, ExprT):
            return ExprT(elem.relation, strip_tags_term(elem.lhs), strip_tags_term(elem.rhs))
        return strip_tags_term(elem)

    for pos, elem in tree.pos_table.items():
        image = tree.phi[pos]
        source = goal_table[image] if image.clause == -1 else program.element_at(image)
        assert unrename(elem) == source, (pos.address, render_element(elem))


def test_node_equation_count_matches_arity(chain_program_text):
    # trivial equations are dropped, so count them from renamed labels
    program = parse_program(chain_program_text)
    tree = derive(program, parse_goal("p(X,Y,Z)."))[0].tree
    eq_count = sum(
        1 for c in tree.store if type(c).__name__ == "TermEquation"
    )
    assert eq_count == 3 + 2 + 1  # goal->p, p->q, p->r
