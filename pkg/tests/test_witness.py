import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import clause
from strategies import cnfs
from xormodal.cnf import And, Assignment, Cnf, Leaf, brute_force_sat, evaluate, needs_normalization
from xormodal.kripke import eq_class, in_frame_class, nice_model_problems
from xormodal.modelcheck import check, label_worlds, truth_vectors
from xormodal.reduction import reduce, translate_clause, translate_conj
from xormodal.solver import mutate_model, random_model
from xormodal.witness import (
    LOCAL_FACTS,
    UnsatisfiableError,
    WitnessError,
    build_base,
    build_nice,
    build_witness,
    extract_assignment,
    falsifying_assignment,
    gadget_assignment,
    world_count,
    write_certificate,
)

XYZ = frozenset({"x", "y", "z"})


def slot_parity(c, a, a2):
    return sum(l.holds(a.true_set) and not l.holds(a2.true_set) for l in c.literals)


def joint_count(t):
    # every And node builds its two children twice (main and falsified copy)
    if isinstance(t, Leaf):
        return 0
    return 2 * joint_count(t.left) + 2 * joint_count(t.right) + 1


def test_gadget_assignment_examples():
    c = clause("x", "y", "z")
    a = Assignment({"x"}, XYZ)
    a2 = gadget_assignment(c, a)
    assert a2.true_set == {"y", "z"} and slot_parity(c, a, a2) == 1
    c = clause("b", "b", "b")
    a2 = gadget_assignment(c, Assignment({"b"}, {"b"}))
    assert a2.true_set == set() and slot_parity(c, Assignment({"b"}, {"b"}), a2) == 3
    c = clause("a", "~a", "x")
    a = Assignment({"a", "x"}, {"a", "x"})
    a2 = gadget_assignment(c, a)
    assert a2.true_set == {"x"} and slot_parity(c, a, a2) == 1


def test_gadget_assignment_leaves_other_variables_alone():
    a = Assignment({"x", "q"}, XYZ | {"q", "r"})
    a2 = gadget_assignment(clause("x", "y", "z"), a)
    assert a2.true_set & {"q", "r"} == {"q"}
    with pytest.raises(ValueError):
        gadget_assignment(clause("x", "y", "z"), Assignment(set(), XYZ))


def test_every_satisfied_clause_has_an_odd_gadget():
    for c in oracles.literal_pool():
        for s in oracles.all_true_sets(["x1", "x2", "x3"]):
            a = Assignment(s, {"x1", "x2", "x3"})
            if c.holds(s) and not needs_normalization(c):
                assert slot_parity(c, a, gadget_assignment(c, a)) % 2 == 1


def test_build_base_examples():
    c = clause("x", "y", "z")
    nice = build_base(c, Assignment({"x"}, XYZ))
    m = nice.structure
    assert check(m, "w", translate_clause(c)) and not check(m, "v", translate_clause(c))
    assert eq_class(m, 1, "w") == {"w"} == set(nice.core)
    assert eq_class(m, 2, "w") == {"w", "v"}
    nice = build_base(clause("b", "b", "b"), Assignment({"b"}, {"b"}))
    assert nice.structure.valuation == {"w": {"b"}, "v": frozenset()}
    assert nice_model_problems(nice) == []


def test_falsifying_assignment_prefers_padding():
    c1, b1 = clause("x", "y", "z"), clause("_pad1", "_pad1", "_pad1")
    a = Assignment({"x", "_pad1"}, XYZ | {"_pad1"})
    bar = falsifying_assignment(a, Leaf(c1), Leaf(b1))
    assert bar.true_set == {"x"}
    g = And(Leaf(clause("u", "v", "v")), Leaf(clause("_pad2", "_pad2", "_pad2")))
    h = And(Leaf(clause("~u", "w", "w")), Leaf(clause("_pad3", "_pad3", "_pad3")))
    a = Assignment({"u", "w", "_pad2", "_pad3"}, {"u", "v", "w", "_pad2", "_pad3"})
    assert falsifying_assignment(a, g, h).true_set == {"u", "w", "_pad2"}


def test_falsifying_assignment_on_example(example_cnf):
    clauses = example_cnf.clauses
    g = Leaf(clauses[0])
    h = And(Leaf(clauses[1]), Leaf(clauses[2]))
    a = Assignment({"a", "f"}, set(example_cnf.variables))
    bar = falsifying_assignment(a, g, h)
    assert evaluate(g, bar) and not evaluate(h, bar)
    with pytest.raises(WitnessError):
        falsifying_assignment(a, h, Leaf(clause("a", "d", "d")))


def test_build_nice_two_leaves():
    t = And(Leaf(clause("x", "y", "z")), Leaf(clause("_pad1", "_pad1", "_pad1")))
    a = Assignment({"x", "_pad1"}, XYZ | {"_pad1"})
    nice = build_nice(t, a, debug=True)
    m = nice.structure
    assert len(m.worlds) == world_count(t) == 12
    assert set(nice.core) == {"wg", "wh", "L.w", "R.w"}
    assert label_worlds(m, translate_conj(t)) >= set(nice.core)
    assert in_frame_class(m, "s5")
    # relay edges are the only relation-2 links of the fresh worlds
    assert eq_class(m, 2, "wg") == {"wg", "vh"} and eq_class(m, 2, "wh") == {"wh", "vg"}
    (joint,) = nice.joints
    assert joint.facts == LOCAL_FACTS


def test_build_nice_rejects_non_models():
    t = And(Leaf(clause("x", "y", "z")), Leaf(clause("_pad1", "_pad1", "_pad1")))
    with pytest.raises(ValueError):
        build_nice(t, Assignment({"x"}, XYZ | {"_pad1"}))


def test_world_count_bound_by_depth():
    for l in range(1, 40):
        out = reduce(Cnf.from_clauses([clause(f"a{k}", f"b{k}", f"c{k}") for k in range(l)]))
        assert world_count(out.tree) <= 4 * 4 ** out.tree.depth
        assert world_count(out.tree) <= 16 * l * l


def test_extract_examples(gadget_model):
    cert = build_witness(Cnf.from_clauses([clause("x", "y", "z")]), {"x"})
    for w in cert.core:
        assert extract_assignment(cert.model, w, XYZ).true_set == {"x"}
    assert extract_assignment(gadget_model, "v", XYZ).true_set == {"y", "z"}
    assert extract_assignment(gadget_model, "v", set()).true_set == set()
    with pytest.raises(KeyError):
        extract_assignment(gadget_model, "nowhere", XYZ)


def test_build_witness_examples():
    cert = build_witness(Cnf.from_clauses([clause("x", "x", "x")]))
    assert cert.verified and in_frame_class(cert.model, "s5") and cert.start_world in cert.core
    assert cert.verified == check(cert.model, cert.start_world, cert.formula)
    with pytest.raises(UnsatisfiableError, match="unsatisfiable input"):
        build_witness(Cnf.from_clauses([clause("x", "x", "x"), clause("~x", "~x", "~x")]))
    f = Cnf.from_clauses([clause("x", "y", "z"), clause("~x", "~y", "z")])
    cert = build_witness(f, {"z"})
    a = extract_assignment(cert.model, cert.start_world, f.variables)
    assert evaluate(f, a) and a.true_set == {"z"}


def test_build_witness_checks_given_assignment():
    f = Cnf.from_clauses([clause("x", "y", "z")])
    with pytest.raises(UnsatisfiableError):
        build_witness(f, set())
    with pytest.raises(ValueError):
        build_witness(f, {"nope"})
    with pytest.raises(ValueError):
        build_witness(f, {"x"}, reduction=reduce(f, pad_clauses=False))


def test_tautological_and_repeated_clauses():
    f = Cnf.from_clauses([clause("x", "~x", "y"), clause("y", "y", "~x"), clause("~y", "~y", "~y")])
    cert = build_witness(f)
    assert cert.verified


def test_witness_is_deterministic(tmp_path):
    f = Cnf.from_clauses([clause("x", "~y", "z"), clause("y", "u", "~z")])
    one, two = build_witness(f), build_witness(f)
    assert one.model == two.model and one.core == two.core
    write_certificate(one, tmp_path / "a.json", "f.mf")
    write_certificate(two, tmp_path / "b.json", "f.mf")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    data = json.loads((tmp_path / "a.json").read_text())
    assert set(data) == {"start_world", "formula_file", "verified", "core", "stats"}
    assert data["stats"]["worlds"] == len(one.model.worlds)


@settings(max_examples=60, deadline=None)
@given(cnfs(max_clauses=3))
def test_completeness_with_debug_validator(f):
    sat = brute_force_sat(f)
    if sat is None:
        with pytest.raises(UnsatisfiableError):
            build_witness(f)
        return
    cert = build_witness(f, debug=True)
    assert cert.verified and in_frame_class(cert.model, "s5")
    red = cert.reduction
    assert len(cert.model.worlds) == world_count(red.tree)
    assert len(cert.joints) == joint_count(red.tree)
    assert all(j.facts == LOCAL_FACTS for j in cert.joints)
    for w in cert.core:
        a = extract_assignment(cert.model, w, red.variables)
        assert evaluate(red.tree, a)


def _sound_everywhere(m, red):
    vec = truth_vectors(m, red.formula)[red.formula]
    hits = 0
    for k, w in enumerate(m.worlds):
        if vec[k]:
            hits += 1
            assert evaluate(red.tree, extract_assignment(m, w, red.variables)), w
    return hits


@settings(max_examples=40, deadline=None)
@given(cnfs(variables=("a", "b", "c"), max_clauses=2), st.integers(0, 10**6))
def test_soundness_on_witnesses_and_mutations(f, seed):
    if brute_force_sat(f) is None:
        return
    cert = build_witness(f)
    red = cert.reduction
    assert _sound_everywhere(cert.model, red) >= len(cert.core)
    m = cert.model
    for k in range(15):
        m = mutate_model(m, seed + k)
        assert in_frame_class(m, "s5")
        _sound_everywhere(m, red)


def test_soundness_on_random_s5_models():
    f = Cnf.from_clauses([clause("a", "b", "~c")])
    red = reduce(f)
    props = list(red.variables)
    for seed in range(300):
        _sound_everywhere(random_model(seed, 1 + seed % 6, props, "s5"), red)
