"""CSV readers and writers.

Numbers are written with 17 significant digits, which round-trips every
IEEE double.  Metadata goes in ``#``-prefixed lines ahead of the header.
A path of ``-`` means standard input/output.
"""
from __future__ import annotations

import contextlib
import math
import sys

import numpy as np

from . import __version__
from .deconv import Curve
from .errors import ParseError
from .kde import Sample

__all__ = ["fmt", "read_sample", "write_sample", "write_curve", "read_curve",
           "write_report", "write_rows"]

VERSION_STRING = f"unidecon {__version__}"


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


@contextlib.contextmanager
def _open_out(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _header_lines(meta: dict) -> list[str]:
    lines = [f"# version: {VERSION_STRING}"]
    for key, val in meta.items():
        lines.append(f"# {key}: {fmt(val)}")
    return lines


def read_sample(path) -> Sample:
    """Read one decimal per line; ``#`` lines and a leading ``x`` header are skipped."""
    if path == "-":
        lines = sys.stdin.read().splitlines()
    else:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    values = []
    seen_data = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not seen_data and line == "x":
            seen_data = True
            continue
        seen_data = True
        try:
            v = float(line)
        except ValueError:
            raise ParseError(f"not a number: {line!r}", lineno) from None
        if not math.isfinite(v):
            raise ParseError(f"non-finite value {line!r}", lineno)
        values.append(v)
    if not values:
        raise ParseError(f"no observations in {path}")
    return Sample(np.array(values))


def write_sample(path, values, meta: dict | None = None) -> None:
    with _open_out(path) as fh:
        for line in _header_lines(meta or {}):
            fh.write(line + "\n")
        fh.write("x\n")
        for v in np.asarray(values, dtype=float).tolist():
            fh.write(fmt(v) + "\n")


def write_curve(path, curve: Curve, extra: dict | None = None) -> None:
    meta = dict(curve.meta)
    meta.update(extra or {})
    with _open_out(path) as fh:
        for line in _header_lines(meta):
            fh.write(line + "\n")
        fh.write("x,value\n")
        for x, v in zip(curve.x.tolist(), curve.values.tolist()):
            fh.write(f"{fmt(x)},{fmt(v)}\n")


def read_curve(path) -> Curve:
    """Read a curve written by :func:`write_curve`; the grid is re-derived from x."""
    xs, vs, meta = [], [], {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                meta[key.strip()] = val.strip()
                continue
            if line == "x,value":
                continue
            try:
                x, v = (float(p) for p in line.split(","))
            except ValueError:
                raise ParseError(f"expected 'x,value', got {line!r}", lineno) from None
            xs.append(x)
            vs.append(v)
    if len(xs) < 2:
        raise ParseError(f"curve in {path} has fewer than 2 points")
    dx = (xs[-1] - xs[0]) / (len(xs) - 1)
    return Curve(xs[0], dx, np.array(vs), meta)


def write_rows(path, rows: list[dict], meta: dict | None = None, columns=None) -> None:
    """Write dict rows as CSV under a ``#`` metadata block."""
    columns = columns or (list(rows[0]) if rows else [])
    with _open_out(path) as fh:
        for line in _header_lines(meta or {}):
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(fmt(row[c]) for c in columns) + "\n")


def write_report(path, report, meta: dict | None = None) -> None:
    """Serialize a Monte Carlo report: config echo, summary, one row per point."""
    head = {"report": report.kind}
    head.update({f"config.{k}": v for k, v in report.config.echo().items()})
    head.update({f"summary.{k}": v for k, v in report.summary.items()})
    head.update(meta or {})
    write_rows(path, report.rows, head)
