import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codetrim import tree as T
from codetrim.errors import InternalReducerError
from codetrim.oracle import CallbackOracle
from codetrim.program import SourceProgram
from codetrim.reducer import ReductionConfig, ddmin, hdd_reduce, perses_reduce

from helpers import brute_force_min_subset, norm


# ---------------------------------------------------------------------------
# ddmin
# ---------------------------------------------------------------------------

def contains_3_and_6(items):
    return 3 in items and 6 in items


def test_ddmin_two_needles():
    result = ddmin(list(range(1, 9)), contains_3_and_6)
    assert result == [3, 6]


def test_ddmin_matches_brute_force_on_two_needles():
    items = list(range(1, 9))
    expected = brute_force_min_subset(items, contains_3_and_6)
    assert sorted(ddmin(items, contains_3_and_6)) == sorted(expected)


def test_ddmin_always_true_returns_empty():
    assert ddmin([1, 2, 3], lambda xs: True) == []


def test_ddmin_singleton_needle():
    assert ddmin(["a"], lambda xs: "a" in xs) == ["a"]


def test_ddmin_rejects_failing_input():
    with pytest.raises(ValueError):
        ddmin([1, 2], lambda xs: False)


def test_ddmin_propagates_test_exceptions():
    def boom(xs):
        if len(xs) == len([1, 2, 3, 4]):
            return True
        raise RuntimeError("oracle crashed")

    with pytest.raises(RuntimeError):
        ddmin([1, 2, 3, 4], boom)


def _monotone_predicate(needles):
    needle_set = set(needles)

    def test(items):
        return needle_set <= set(items)

    return test


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_ddmin_is_one_minimal_on_monotone_predicates(data):
    n = data.draw(st.integers(min_value=1, max_value=12))
    items = list(range(n))
    needles = data.draw(st.sets(st.sampled_from(items), max_size=n))
    test = _monotone_predicate(needles)
    result = ddmin(items, test)
    assert test(result)
    for i in range(len(result)):
        assert not test(result[:i] + result[i + 1:])
    # For monotone predicates the 1-minimal set is exactly the needle set.
    assert sorted(result) == sorted(needles)


def test_ddmin_is_deterministic():
    rng = random.Random(7)
    items = list(range(20))
    needles = set(rng.sample(items, 5))
    test = lambda xs: needles <= set(xs)
    runs = [ddmin(items, test) for _ in range(3)]
    assert runs[0] == runs[1] == runs[2]


# ---------------------------------------------------------------------------
# Tree reductions on the C grammar
# ---------------------------------------------------------------------------

def _reduce_text(text, predicate, grammar, **cfg_kwargs):
    oracle = CallbackOracle(predicate)
    tree = T.parse(text, grammar)
    outcome = perses_reduce(tree, oracle, ReductionConfig(**cfg_kwargs))
    return outcome


def test_hdd_keeps_only_needed_statement(c_grammar):
    oracle = CallbackOracle(lambda text: "bug" in text)
    tree = T.parse("a; b; bug; c; d;", c_grammar)
    reduced = hdd_reduce(tree, oracle)
    assert norm(T.serialize(reduced.root)) == "bug;"


def test_hdd_rejects_failing_initial_tree(c_grammar):
    tree = T.parse("a;", c_grammar)
    with pytest.raises(ValueError):
        hdd_reduce(tree, CallbackOracle(lambda text: False))


def test_perses_deletes_unneeded_statements(c_grammar):
    outcome = _reduce_text(
        "a; b; bug; c; d;", lambda text: "bug" in text, c_grammar)
    assert norm(outcome.program.text) == "bug;"
    assert outcome.size_after < outcome.size_before
    assert outcome.invalid_candidates == 0


def test_perses_replaces_expression_with_subexpression(c_grammar):
    # The whole sum is replaceable by the lone operand that carries "bug".
    outcome = _reduce_text(
        "x = bug + a + b + c;", lambda text: "bug" in text, c_grammar)
    assert "bug" in outcome.program.text
    assert outcome.size_after <= 4  # at most "bug ;" plus punctuation slack


def test_perses_without_replacement_keeps_more(c_grammar):
    with_repl = _reduce_text(
        "x = y + bug;", lambda text: "bug" in text, c_grammar)
    without = _reduce_text(
        "x = y + bug;", lambda text: "bug" in text, c_grammar,
        enable_subtree_replacement=False)
    assert with_repl.size_after <= without.size_after


def test_perses_never_produces_unparseable_candidates(c_grammar):
    # Every candidate is re-parsed inside the reducer; a violation raises.
    sources = [
        "int a; int b; a = a + b; b = 2; bug;",
        "for (i = 0; i < 3; i++) s = s + bug;",
        "if (x) { y = bug; } else { z = 1; }",
        "while (n) { n = n - 1; bug; }",
    ]
    for src in sources:
        outcome = _reduce_text(src, lambda text: "bug" in text, c_grammar)
        assert outcome.invalid_candidates == 0
        # And the final program still parses.
        T.parse(outcome.program.text, c_grammar)


def test_perses_counts_oracle_queries(c_grammar):
    oracle = CallbackOracle(lambda text: "bug" in text)
    tree = T.parse("a; bug; c;", c_grammar)
    outcome = perses_reduce(tree, oracle)
    assert outcome.oracle_queries == oracle.counters.queries_total
    assert outcome.oracle_queries >= 1


def test_perses_is_deterministic(c_grammar):
    texts = set()
    for _ in range(3):
        outcome = _reduce_text(
            "a; b; bug; c; d; e = f + g;", lambda text: "bug" in text,
            c_grammar)
        texts.add(outcome.program.text)
    assert len(texts) == 1


def test_perses_rejects_failing_initial_program(c_grammar):
    tree = T.parse("a;", c_grammar)
    with pytest.raises(ValueError):
        perses_reduce(tree, CallbackOracle(lambda text: False))


def test_perses_propagates_oracle_exceptions(c_grammar):
    calls = {"n": 0}

    def flaky(text):
        calls["n"] += 1
        if calls["n"] > 1:
            raise RuntimeError("oracle died")
        return True

    tree = T.parse("a; b;", c_grammar)
    with pytest.raises(RuntimeError):
        perses_reduce(tree, CallbackOracle(flaky))


def test_perses_max_passes_validation():
    with pytest.raises(ValueError):
        ReductionConfig(max_passes=0)


def test_perses_handles_js_grammar(js_grammar):
    oracle = CallbackOracle(lambda text: "bug" in text)
    tree = T.parse("var a = 1; var bug = 2; var c = 3;", js_grammar)
    outcome = perses_reduce(tree, oracle)
    assert "bug" in outcome.program.text
    assert outcome.size_after < outcome.size_before
    assert outcome.invalid_candidates == 0
