from hypothesis import given, strategies as st

from resfin.words import (FiniteQuotient, ball, ball_size, boundary_translate, inverse, is_reduced,
                          multiply, parse_word, reduce_word, same_clopen, sphere, translate_set,
                          word_key, word_str)

raw_words = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=8).map(tuple)


@given(raw_words)
def test_reduce_is_idempotent(w):
    r = reduce_word(w)
    assert is_reduced(r)
    assert reduce_word(r) == r


@given(raw_words, raw_words, raw_words)
def test_multiplication_is_associative(a, b, c):
    assert multiply(multiply(a, b), c) == multiply(a, multiply(b, c))


@given(raw_words)
def test_inverse_cancels(w):
    assert multiply(w, inverse(w)) == ()


@given(raw_words)
def test_word_string_round_trip(w):
    r = reduce_word(w)
    assert parse_word(word_str(r)) == r


def test_ball_sizes_of_free_group():
    assert [ball_size(2, n) for n in range(4)] == [1, 5, 17, 53]
    assert [len(ball(2, n)) for n in range(4)] == [1, 5, 17, 53]
    assert len(sphere(2, 2)) == 12


def test_balls_are_prefixes_in_shortlex_order():
    assert ball(2, 3)[:17] == ball(2, 2)
    keys = [word_key(w) for w in ball(2, 3)]
    assert keys == sorted(keys)


def test_boundary_translate_expands_cancelling_cylinder():
    # a . C(a') = every infinite word not starting with a
    assert boundary_translate(2, (1,), (-1,)) == frozenset({(-1,), (2,), (-2,)})


@given(raw_words, st.sampled_from(sphere(2, 2)))
def test_translation_then_inverse_is_identity(g, w):
    g = reduce_word(g)
    back = translate_set(2, inverse(g), boundary_translate(2, g, w))
    assert same_clopen(2, back, {w})


def test_ball_quotient_is_free_on_the_ball():
    q = FiniteQuotient.ball_quotient(2, 3)
    images = {q.act(w) for w in ball(2, 3)}
    assert len(images) == len(ball(2, 3))


def test_cyclic_quotient():
    q = FiniteQuotient.cyclic(5)
    assert q.order == 5
    assert q.act((1, 1, 1, 1, 1)) == 0
    assert q.act((-1,)) == 4
