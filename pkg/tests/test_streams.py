import random

import pytest
from hypothesis import given, strategies as st

from tagmon.errors import (
    ArityMismatch,
    BottomConstant,
    BottomEncountered,
    OutOfWindow,
    ShiftTooLarge,
    TraceFormatError,
    WindowMismatch,
)
from tagmon.streams import (
    BASE_SIGNATURE,
    Operation,
    Relation,
    Stream,
    Window,
    exists_before,
    forall_before,
    format_trace,
    insert,
    lift_const,
    lift_op,
    lift_test,
    merge,
    parse_trace,
    shift,
)
from tagmon.values import BOTTOM, Dec4

from oracles import random_int_stream

MAX_OP = BASE_SIGNATURE.operation("max")
ADD_OP = BASE_SIGNATURE.operation("add")
LT_TEST = BASE_SIGNATURE.test("lt")
EQ_TEST = BASE_SIGNATURE.test("eq")

int_streams = st.integers(0, 5).flatmap(
    lambda start: st.lists(st.integers(-9, 9), min_size=1, max_size=16).map(
        lambda vals: Stream.of(start, vals)))


def test_window_invariants():
    w = Window(2, 5)
    assert w.length == 3
    assert 2 in w and 4 in w and 5 not in w
    with pytest.raises(OutOfWindow):
        Window(3, 3)
    with pytest.raises(OutOfWindow):
        Window(-1, 4)


def test_eval_constant_stream():
    c = lift_const(5, Window(0, 10))
    assert c.at(3) == 5
    assert all(c.at(t) == 5 for t in c.window.ticks())


def test_eval_reads_back_constructed_trace():
    values = [Dec4(100)] * 121
    values[30] = Dec4.parse("0.0180")
    b = Stream.of(0, values)
    assert b.at(30) == Dec4.parse("0.0180")


def test_eval_missed_reading_is_bottom():
    b = Stream.of(0, [Dec4(10), BOTTOM, Dec4(12)])
    assert b.at(1) is BOTTOM


def test_eval_outside_window():
    a = Stream.of(5, [1, 2])
    with pytest.raises(OutOfWindow):
        a.at(4)
    with pytest.raises(OutOfWindow):
        a.at(7)


def test_lift_const_examples():
    assert lift_const(True, Window(0, 4)).values == (True,) * 4
    assert lift_const(Dec4.parse("0.02"), Window(0, 2)).values == (
        Dec4(200), Dec4(200))
    assert lift_const("green", Window(0, 1)).values == ("green",)
    with pytest.raises(BottomConstant):
        lift_const(BOTTOM, Window(0, 3))


def test_lift_op_elementwise_max():
    a = Stream.of(0, [1, 5, 2])
    b = Stream.of(0, [4, 0, 9])
    expected = tuple(max(x, y) for x, y in zip(a.values, b.values))
    assert lift_op(MAX_OP, [a, b]).values == expected == (4, 5, 9)


def test_lift_op_strict_bottom_propagation():
    a = Stream.of(0, [1, 1])
    b = Stream.of(0, [BOTTOM, 2])
    assert lift_op(ADD_OP, [a, b]).values == (BOTTOM, 3)


def test_lift_op_identity():
    ident = Operation("id", 1, lambda x: x)
    a = Stream.of(3, [7, BOTTOM, 9])
    assert lift_op(ident, [a]) == a


def test_lift_op_errors():
    a, b = Stream.of(0, [1, 2]), Stream.of(1, [1, 2])
    with pytest.raises(WindowMismatch):
        lift_op(ADD_OP, [a, b])
    with pytest.raises(ArityMismatch):
        lift_op(ADD_OP, [a])


def test_lift_test_pointwise():
    a = Stream.of(0, [1, 5])
    three = lift_const(3, a.window)
    assert lift_test(LT_TEST, [a, three]).values == (True, False)
    assert lift_test(EQ_TEST, [a, a]).values == (True, True)
    gappy = Stream.of(0, [1, BOTTOM])
    assert lift_test(EQ_TEST, [gappy, gappy]).values == (True, BOTTOM)


def test_shift_examples():
    a = Stream.of(0, [7, 8, 9])
    s = shift(a, 1)
    assert s.values == tuple(a.values[1:]) == (8, 9)
    assert s.window == Window(0, 2)
    assert shift(a, 0) == a
    assert shift(shift(a, 1), 1) == shift(a, 2)
    with pytest.raises(ShiftTooLarge):
        shift(a, 3)


def test_merge_interleaves():
    a, b = Stream.of(0, [1, 2]), Stream.of(0, [9, 8])
    interleaved = []
    for x, y in zip(a.values, b.values):
        interleaved += [x, y]
    m = merge(a, b)
    assert m.values == tuple(interleaved) == (1, 9, 2, 8)
    assert merge(Stream.of(0, ["x"]), Stream.of(0, ["y"])).values == ("x", "y")
    with pytest.raises(WindowMismatch):
        merge(a, Stream.of(0, [1, 2, 3]))


def test_insert_examples():
    a = Stream.of(0, [1, 2, 3])
    assert insert(a, 1, 9).values == (1, 9, 3)
    assert insert(a, 1, a.at(1)) == a
    gappy = Stream.of(0, [Dec4(10), BOTTOM])
    repaired = insert(gappy, 1, Dec4.parse("0.02"))
    assert repaired.at(1) == Dec4(200)
    with pytest.raises(OutOfWindow):
        insert(a, 3, 0)


def lt3():
    return Relation("lt3", 1, lambda x: x < 3)


def gt4():
    return Relation("gt4", 1, lambda x: x > 4)


def test_forall_before_loop_oracle():
    a = Stream.of(0, [1, 2, 5])
    for t in range(0, 4):
        expected = all(v < 3 for v in a.values[:t])
        assert forall_before(lt3(), t, [a]) == expected
    assert forall_before(lt3(), 2, [a]) is True
    assert forall_before(lt3(), 0, [a]) is True  # vacuous at window start
    assert forall_before(lt3(), 3, [a]) is False


def test_exists_before_loop_oracle():
    a = Stream.of(0, [1, 2, 5])
    for t in range(0, 4):
        expected = any(v > 4 for v in a.values[:t])
        assert exists_before(gt4(), t, [a]) == expected
    assert exists_before(gt4(), 3, [a]) is True
    assert exists_before(gt4(), 0, [a]) is False


def test_quantified_tests_reject_bottom_and_overflow():
    gappy = Stream.of(0, [1, BOTTOM, 2])
    with pytest.raises(BottomEncountered):
        forall_before(lt3(), 3, [gappy])
    with pytest.raises(BottomEncountered):
        exists_before(gt4(), 2, [gappy])
    with pytest.raises(OutOfWindow):
        forall_before(lt3(), 4, [gappy])


# -- algebraic laws -----------------------------------------------------------

@given(int_streams)
def test_totality(a):
    for t in a.window.ticks():
        a.at(t)


@given(int_streams, int_streams)
def test_pointwise_law(a, b):
    if a.window != b.window:
        b = Stream(a.window, tuple(
            b.values[i % len(b.values)] for i in range(a.window.length)))
    lifted = lift_op(ADD_OP, [a, b])
    for t in a.window.ticks():
        assert lifted.at(t) == a.at(t) + b.at(t)


@given(int_streams, st.integers(0, 30))
def test_shift_laws(a, k):
    if k >= a.window.length:
        k = k % a.window.length
    s = shift(a, k)
    for t in s.window.ticks():
        assert s.at(t) == a.at(t + k)
    j = k // 2
    if j + (k - j) < a.window.length:
        assert shift(shift(a, j), k - j) == shift(a, k)


@given(int_streams, int_streams)
def test_merge_laws(a, b):
    if a.window != b.window:
        b = Stream(a.window, tuple(
            b.values[i % len(b.values)] for i in range(a.window.length)))
    m = merge(a, b)
    assert m.window.length == 2 * a.window.length
    for t in a.window.ticks():
        assert m.at(2 * t) == a.at(t)
        assert m.at(2 * t + 1) == b.at(t)


@given(int_streams, st.data())
def test_insert_locality(a, data):
    t = data.draw(st.integers(a.window.start, a.window.horizon - 1))
    x = data.draw(st.integers(-99, 99))
    out = insert(a, t, x)
    for u in a.window.ticks():
        assert out.at(u) == (x if u == t else a.at(u))


@given(st.integers(0, 10**6))
def test_quantifier_duality(seed):
    rng = random.Random(seed)
    a = random_int_stream(rng, rng.randint(0, 3), rng.randint(1, 12))
    t = rng.randint(a.window.start, a.window.horizon)
    neg = Relation("ge3", 1, lambda x: not (x < 3))
    assert exists_before(lt3(), t, [a]) == (not forall_before(neg, t, [a]))


# -- trace files ----------------------------------------------------------------

def test_trace_round_trip_is_byte_stable():
    values = [Dec4(100), BOTTOM, Dec4(250)]
    b = Stream.of(5, values)
    text = format_trace(b, "b", "decimal")
    assert text == ("trace b decimal 5 8\n"
                    "5,0.0100\n"
                    "6,NA\n"
                    "7,0.0250\n")
    stream_id, kind, parsed = parse_trace(text)
    assert (stream_id, kind) == ("b", "decimal")
    assert parsed == b
    assert format_trace(parsed, stream_id, kind) == text


def test_trace_round_trip_other_kinds():
    for kind, values in [("boolean", (True, False, True)),
                         ("integer", (0, -3, 7)),
                         ("label", ("green", "amber", BOTTOM))]:
        s = Stream.of(0, values)
        text = format_trace(s, "x", kind)
        assert parse_trace(text)[2] == s


@pytest.mark.parametrize("mangle, message", [
    (lambda t: t.replace("trace b", "stream b"), "bad header"),
    (lambda t: t.replace("6,NA", "9,NA"), "out of order"),
    (lambda t: t.replace("7,0.0250", "7,0.025"), "4 fractional digits"),
    (lambda t: t + "8,0.0100\n", "value lines"),
    (lambda t: t.replace("6,NA\n", ""), "value lines"),
])
def test_trace_parse_errors(mangle, message):
    good = format_trace(Stream.of(5, [Dec4(100), BOTTOM, Dec4(250)]),
                        "b", "decimal")
    with pytest.raises(TraceFormatError) as err:
        parse_trace(mangle(good))
    assert message in str(err.value)
