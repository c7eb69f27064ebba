"""Plain-text edge-list and change-stream files.

Edge list: one ``u v`` pair per line; ``#`` lines are comments. A line
holding a single id declares an isolated vertex.

Change stream: one event per line, ``AV u`` | ``RV u`` | ``AE u v`` |
``RE u v``, optionally prefixed by ``@i`` to schedule it for iteration i.
"""
from __future__ import annotations

import io
import os
from collections import defaultdict

from .graph import ChangeEvent, ChangeKind

_ARITY = {ChangeKind.ADD_VERTEX: 1, ChangeKind.REMOVE_VERTEX: 1,
          ChangeKind.ADD_EDGE: 2, ChangeKind.REMOVE_EDGE: 2}


class FormatError(ValueError):
    pass


def _lines(source):
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            yield from enumerate(fh, 1)
    else:
        yield from enumerate(source, 1)


def _uint(token, lineno):
    if not token.isdigit():
        raise FormatError(f"line {lineno}: expected unsigned integer, got {token!r}")
    return int(token)


def read_edge_list(source):
    """Return ``(vertices, edges)``; vertices lists isolated declarations too."""
    vertices, edges = [], []
    for lineno, line in _lines(source):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) == 1:
            vertices.append(_uint(parts[0], lineno))
        elif len(parts) == 2:
            edges.append((_uint(parts[0], lineno), _uint(parts[1], lineno)))
        else:
            raise FormatError(f"line {lineno}: expected 'u v'")
    return vertices, edges


def write_edge_list(path_or_file, edges, vertices=(), header=None):
    own = isinstance(path_or_file, (str, os.PathLike))
    fh = open(path_or_file, "w", encoding="utf-8") if own else path_or_file
    try:
        if header:
            for h in header.splitlines():
                fh.write(f"# {h}\n")
        for v in vertices:
            fh.write(f"{v}\n")
        for u, v in edges:
            fh.write(f"{u} {v}\n")
    finally:
        if own:
            fh.close()


def parse_change(line: str, lineno: int = 0):
    """Parse one change-stream line into ``(iteration or None, ChangeEvent)``."""
    parts = line.split()
    when = None
    if parts and parts[0].startswith("@"):
        when = _uint(parts[0][1:], lineno)
        parts = parts[1:]
    if not parts:
        raise FormatError(f"line {lineno}: missing event")
    try:
        kind = ChangeKind(parts[0])
    except ValueError:
        raise FormatError(f"line {lineno}: unknown event kind {parts[0]!r}") from None
    args = [_uint(p, lineno) for p in parts[1:]]
    if len(args) != _ARITY[kind]:
        raise FormatError(f"line {lineno}: {kind.value} takes {_ARITY[kind]} ids")
    return when, ChangeEvent(kind, args[0], args[1] if len(args) > 1 else None)


def read_change_stream(source):
    """Return a list of ``(iteration or None, ChangeEvent)`` in file order."""
    out = []
    for lineno, line in _lines(source):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        out.append(parse_change(line, lineno))
    return out


def format_change(event: ChangeEvent, when=None) -> str:
    body = f"{event.kind.value} {event.u}" + ("" if event.v is None else f" {event.v}")
    return body if when is None else f"@{when} {body}"


def write_change_stream(path_or_file, events, when=None):
    """Write events; ``when`` is a single iteration or None for unscheduled."""
    own = isinstance(path_or_file, (str, os.PathLike))
    fh = open(path_or_file, "w", encoding="utf-8") if own else path_or_file
    try:
        for ev in events:
            fh.write(format_change(ev, when) + "\n")
    finally:
        if own:
            fh.close()


def schedule(entries, default_iteration):
    """Group parsed change-stream entries by iteration."""
    plan = defaultdict(list)
    for when, ev in entries:
        plan[default_iteration if when is None else when].append(ev)
    return dict(plan)


def dumps_changes(events) -> str:
    buf = io.StringIO()
    write_change_stream(buf, events)
    return buf.getvalue()
