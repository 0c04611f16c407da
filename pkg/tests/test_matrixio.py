import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sparsecert.errors import MatrixFormatError
from sparsecert.matrixio import format_matrix, parse_matrix, read_matrix, write_matrix


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6).flatmap(lambda m: st.integers(1, 6).flatmap(
    lambda n: arrays(np.float64, (m, n), elements=st.floats(allow_nan=False, allow_infinity=False)))))
def test_roundtrip_bit_exact(a):
    back = parse_matrix(format_matrix(a))
    assert back.shape == a.shape
    assert back.tobytes() == a.tobytes()


def test_layout():
    text = format_matrix([[1.0, 0.1], [-2.5, 1e-300]])
    assert text == "2 2\n1 0.10000000000000001\n-2.5 1e-300\n"


def test_file_roundtrip(tmp_path):
    a = np.random.default_rng(0).normal(size=(3, 5))
    write_matrix(tmp_path / "a.txt", a)
    assert np.array_equal(read_matrix(tmp_path / "a.txt"), a)


@pytest.mark.parametrize("text,line", [
    ("", 1),
    ("2\n1 2\n", 1),
    ("2 x\n", 1),
    ("0 2\n", 1),
    ("2 2\n1 2\n", 3),
    ("1 2\n1 2\n3 4\n", 3),
    ("2 2\n1 2\n3\n", 3),
    ("2 2\n1 2\n3 abc\n", 3),
    ("1 1\nnan\n", 2),
])
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(MatrixFormatError) as info:
        parse_matrix(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_trailing_blank_lines_ok():
    assert parse_matrix("1 2\n1 2\n\n\n").tolist() == [[1.0, 2.0]]
