import json
from fractions import Fraction

import pytest

from cubiclab.report import emit_report, format_number, ordered_map, render


def test_format_number():
    assert format_number(1 / 3) == 0.333333333333
    assert format_number(Fraction(3, 4)) == "3/4"
    assert format_number(2 + 0.5j) == {"re": 2.0, "im": 0.5}
    assert format_number(float("inf")) == "inf"
    assert format_number([1, Fraction(1, 2)]) == [1, "1/2"]
    assert format_number(True) is True


def test_csv_header_and_first_seen_order():
    text = render([{"b": 1, "a": 2}, {"a": 3, "c": 0.5}])
    lines = text.splitlines()
    assert lines[0] == "b,a,c"
    assert lines[1] == "1,2,"
    assert lines[2] == ",3,0.5"


def test_json_sorted_and_parsable():
    text = render([{"z": 1, "a": Fraction(1, 3)}], "json")
    assert json.loads(text) == [{"a": "1/3", "z": 1}]
    assert text.index('"a"') < text.index('"z"')


def test_render_is_deterministic():
    rows = [{"x": i / 7, "y": Fraction(i, 3), "z": [i, i * 1.5]} for i in range(20)]
    assert render(rows) == render(list(rows))
    assert render(rows, "json") == render(list(rows), "json")


def test_render_errors():
    with pytest.raises(ValueError):
        render([])
    with pytest.raises(ValueError):
        render([{"a": 1}], "xml")


def test_emit_to_file_and_stdout(tmp_path, capsys):
    path = tmp_path / "out.csv"
    text = emit_report([{"a": 1}], "csv", str(path))
    assert path.read_text() == text == "a\n1\n"
    emit_report([{"a": 1}], "csv", "-")
    assert capsys.readouterr().out == "a\n1\n"


def test_ordered_map_keeps_order():
    items = list(range(50))
    assert ordered_map(lambda x: x * x, items, threads=4) == [x * x for x in items]
    assert ordered_map(str, [], threads=3) == []
