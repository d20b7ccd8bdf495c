import pytest
from hypothesis import given, strategies as st

from swarmlab.schema import (COLUMNS, SchemaSpec, format_table, ratio_rows, schema_counts,
                             schema_growth, shape_rows, table_csv, table_row)

RATIO_TABLE = {
    "1.8": [5, 4, 2, 2, 1, 1, 1, 0, 0, 0, 0],
    "1.9": [5, 6, 7, 8, 9, 11, 13, 15, 18, 21, 24],
    "2": [5, 9, 18, 35, 69, 134, 263, None, None, None, None],
    "2.1": [5, 14, 45, 144, None, None, None, None, None, None, None],
    "2.2": [5, 22, 110, None, None, None, None, None, None, None, None],
}
SHAPE_TABLE = {
    "(10, 6)": [5, 11, 24, 55, 125, 285, None, None, None, None, None],
    "(10, 7)": [5, 9, 17, 33, 63, 120, 229, None, None, None, None],
    "(10, 8)": [5, 8, 12, 19, 31, 50, 79, 127, 203, None, None],
    "(11, 8)": [5, 4, 3, 3, 2, 2, 1, 1, 1, 1, 1],
    "(12, 8)": [5, 2, 1, 0, 0, 0, 0, 0, 0, 0, 0],
}


def _close(row, want, tol):
    return all((a is None and b is None) or (a is not None and b is not None and abs(a - b) <= tol)
               for a, b in zip(row, want))


@pytest.mark.parametrize("rounding,tol", [("nearest", 0), ("floor", 1)])
def test_ratio_table(rounding, tol):
    for name, spec in ratio_rows():
        assert _close(table_row(spec, rounding=rounding), RATIO_TABLE[name], tol), name


@pytest.mark.parametrize("rounding,tol", [("nearest", 0), ("floor", 1)])
def test_shape_table(rounding, tol):
    for name, spec in shape_rows():
        assert _close(table_row(spec, rounding=rounding), SHAPE_TABLE[name], tol), name


def test_generation_hundred_value():
    assert abs(schema_growth(SchemaSpec(), 99)[-1] - 24) <= 1


def test_extinction_by_generation_thirty():
    row = schema_growth(SchemaSpec(delta=12, order=8), 29)
    assert row[29] == 0


def test_survival_factor_hand_value():
    s = SchemaSpec()
    assert s.survival == pytest.approx(1 - 0.7 * 11 / 19 - 6 * 0.01)
    assert s.factor == pytest.approx(1.9 * s.survival)


def test_nonpositive_factor_decays_to_zero():
    spec = SchemaSpec(fitness_ratio=0.5, p_c=1.0, delta=19, order=0)
    assert spec.factor <= 0
    xs = schema_counts(spec, 5)
    assert xs[0] == 5 and all(x == 0 for x in xs[1:])


@given(st.floats(0.5, 3.0), st.integers(0, 19), st.integers(0, 20))
def test_takeover_marker_is_sticky(ratio, delta, order):
    row = schema_growth(SchemaSpec(fitness_ratio=ratio, delta=delta, order=order), 100)
    seen = False
    for v in row:
        seen = seen or v is None
        assert (v is None) == seen
        assert v is None or 0 <= v <= 500


def test_validation():
    with pytest.raises(ValueError):
        SchemaSpec(delta=20)
    with pytest.raises(ValueError):
        schema_growth(SchemaSpec(), 0)
    with pytest.raises(ValueError):
        table_row(SchemaSpec(), rounding="up")


def test_text_and_csv_layout():
    txt = format_table(ratio_rows(), rounding="nearest", label="ratio")
    lines = txt.splitlines()
    assert lines[0].split() == ["ratio"] + [str(c) for c in COLUMNS]
    assert lines[2].split()[-1] == "24"
    assert "--" in lines[-1]
    csv = table_csv(shape_rows(), rounding="nearest").splitlines()
    assert csv[0] == "row," + ",".join(f"g{c}" for c in COLUMNS)
    assert csv[-1] == '"(12, 8)",5,2,1,0,0,0,0,0,0,0,0'
