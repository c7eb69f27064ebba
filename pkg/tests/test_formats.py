import io

import pytest

from graphshift.formats import (FormatError, dumps_changes, parse_change, read_change_stream,
                                read_edge_list, schedule, write_edge_list)
from graphshift.graph import ChangeEvent, ChangeKind


def test_edge_list_round_trip(tmp_path):
    path = tmp_path / "g.txt"
    write_edge_list(path, [(0, 1), (1, 2)], vertices=[9], header="tiny\ngraph")
    text = path.read_text()
    assert text.startswith("# tiny\n# graph\n")
    assert read_edge_list(path) == ([9], [(0, 1), (1, 2)])


@pytest.mark.parametrize("line", ["0 x", "1 2 3", "-1 2"])
def test_edge_list_rejects_bad_lines(line):
    with pytest.raises(FormatError):
        read_edge_list(io.StringIO(line + "\n"))


def test_parse_change_with_schedule_prefix():
    when, ev = parse_change("@12 AE 3 4")
    assert when == 12
    assert ev == ChangeEvent(ChangeKind.ADD_EDGE, 3, 4)
    assert parse_change("RV 7") == (None, ChangeEvent(ChangeKind.REMOVE_VERTEX, 7))


@pytest.mark.parametrize("line", ["XX 1", "AE 1", "AV 1 2", "@x AV 1", "@3"])
def test_parse_change_errors(line):
    with pytest.raises(FormatError):
        parse_change(line)


def test_change_stream_round_trip_and_schedule():
    events = [ChangeEvent.add_vertex(1), ChangeEvent.add_edge(1, 2),
              ChangeEvent.remove_edge(1, 2), ChangeEvent.remove_vertex(1)]
    text = dumps_changes(events)
    assert text == "AV 1\nAE 1 2\nRE 1 2\nRV 1\n"
    parsed = read_change_stream(io.StringIO("# c\n" + text + "@5 AV 9\n"))
    assert [e for _, e in parsed[:4]] == events
    plan = schedule(parsed, default_iteration=2)
    assert len(plan[2]) == 4 and plan[5] == [ChangeEvent.add_vertex(9)]
