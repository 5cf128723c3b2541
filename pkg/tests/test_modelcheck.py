import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import clause
from strategies import formulas, structures
from xormodal.formula import BOT, TOP, Box, Dia, Prop, Xor
from xormodal.kripke import KripkeStructure, close
from xormodal.modelcheck import ModelCheckError, check, label_worlds, truth_vectors
from xormodal.reduction import translate_clause, translate_literal
from xormodal.solver import random_model

x = Prop("x")


def naive(m, w, f):
    rel = {i: set(p) for i, p in m.relations.items()}
    return oracles.naive_holds(m.worlds, rel, m.valuation, w, oracles.lower(f))


def test_examples(gadget_model):
    m = gadget_model
    assert not check(m, "w", Xor(TOP, TOP))
    phi_c = translate_clause(clause("x", "y", "z"))
    assert check(m, "w", phi_c)
    assert not check(m, "v", translate_literal(clause("x", "x", "x").literals[0]))


def test_label_worlds_examples(gadget_model):
    assert label_worlds(gadget_model, TOP) == {"w", "v"}
    assert label_worlds(gadget_model, translate_clause(clause("x", "y", "z"))) == {"w"}
    assert label_worlds(gadget_model, x) == {"w"}


def test_box_and_diamond_on_a_chain():
    m = KripkeStructure(["a", "b", "c"], {1: [("a", "b"), ("b", "c")]}, {"c": ["p"]})
    p = Prop("p")
    assert label_worlds(m, Dia(1, p)) == {"b"}
    # c has no successors, so every box holds there
    assert label_worlds(m, Box(1, p)) == {"b", "c"}
    assert label_worlds(m, Box(1, BOT)) == {"c"}


def test_errors(gadget_model):
    with pytest.raises(ModelCheckError):
        check(gadget_model, "nowhere", TOP)
    with pytest.raises(ModelCheckError):
        check(gadget_model, "w", Dia(3, TOP))


def test_undeclared_props_are_false(gadget_model):
    assert label_worlds(gadget_model, Prop("never")) == set()


def test_shared_subterms_evaluate_once():
    f = Box(1, x)
    for _ in range(60):
        f = Xor(Dia(1, f), Box(2, f))
    m = random_model(3, 5, ["x"], "s5")
    vec = truth_vectors(m, f)
    # x, [1]x, then one Dia, Box and Xor node per level; the tree has ~2^60 nodes
    assert len(vec) == 2 + 3 * 60


def test_xor_associativity_does_not_matter():
    lits = clause("x", "~y", "z").literals
    a, b, c = (translate_literal(l) for l in lits)
    left, right = Dia(1, Xor(Xor(a, b), c)), Dia(1, Xor(a, Xor(b, c)))
    for seed in range(200):
        m = random_model(seed, 4, ["x", "y", "z"], "s5")
        assert label_worlds(m, left) == label_worlds(m, right)


@settings(max_examples=300, deadline=None)
@given(formulas(), structures())
def test_agrees_with_naive_evaluator(f, m):
    for w in m.worlds:
        assert check(m, w, f) == naive(m, w, f)


@settings(max_examples=200, deadline=None)
@given(formulas(), structures())
def test_xor_algebra(f, m):
    vec = truth_vectors(m, Xor(Xor(f, f), Xor(Xor(f, BOT), Xor(f, TOP))))
    assert not vec[Xor(f, f)].any()
    assert (vec[Xor(f, BOT)] == vec[f]).all()
    assert (vec[Xor(f, TOP)] == ~vec[f]).all()


@settings(max_examples=200, deadline=None)
@given(formulas(), structures(), st.sampled_from(["t", "s4", "s5"]), st.sampled_from([1, 2]))
def test_reflexive_box_entails_body(f, m, frame, i):
    m = close(m, frame)
    vec = truth_vectors(m, Box(i, f))
    assert not (vec[Box(i, f)] & ~vec[f]).any()


@settings(max_examples=200, deadline=None)
@given(formulas(), st.integers(0, 10**6), st.integers(1, 5))
def test_reclosing_s5_changes_nothing(f, seed, n):
    m = random_model(seed, n, ["p", "q", "r"], "s5")
    again = close(KripkeStructure(m.worlds, m.relations, m.valuation, m.arity), "s5")
    assert label_worlds(m, f) == label_worlds(again, f)
