"""CSV and SVG writers for experiment tables."""

from __future__ import annotations

import csv
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

from .errors import ArgumentError
from .experiments import EFFICIENCY_HEADER, INFO_HEADER, Table

__all__ = ["emit_csv", "emit_svg", "format_cell"]

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2",
            "#7f7f7f", "#bcbd22", "#17becf")
_W, _H = 420, 300
_PAD = 48


def format_cell(v) -> str:
    if isinstance(v, float):
        return "" if math.isnan(v) else format(v, ".12g")
    return str(v)


def _check(table: Table) -> None:
    if table is None or len(table) == 0:
        raise ArgumentError("cannot write an empty table")


def emit_csv(table: Table, path) -> Path:
    """Write ``table`` with its fixed header; floats to 12 significant digits."""
    _check(table)
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.header)
        for row in table.rows:
            w.writerow([format_cell(v) for v in row])
    return path


def _series(table: Table):
    """Panels of named (x, y) series, plus axis labels, for the known table shapes."""
    h = tuple(table.header)
    panels: dict = {}
    if h == EFFICIENCY_HEADER:
        for d, est, n, _, _, _, eff in table.rows:
            if eff == "" or eff is None:
                continue
            panels.setdefault(d, {}).setdefault(est, []).append((float(n), float(eff)))
        return panels, "n", "efficiency"
    if h == INFO_HEADER:
        for d, eta, _, ratio in table.rows:
            panels.setdefault("information ratio", {}).setdefault(d, []).append(
                (math.log10(float(eta)), float(ratio)))
        return panels, "log10 eta", "I(eta) / I"
    if h == ("t", "h"):
        panels["h"] = {"h": [(float(t), float(v)) for t, v in table.rows]}
        return panels, "t", "h(t)"
    raise ArgumentError(f"no chart layout for header {h}")


def _ticks(lo: float, hi: float, k: int = 5) -> np.ndarray:
    return np.linspace(lo, hi, k)


def _panel(root, ox: float, title: str, series: dict, xlab: str, ylab: str) -> None:
    pts = [p for s in series.values() for p in s]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(min(ys), 0.0), max(ys)
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y1 = y0 + 1
    sx = lambda x: ox + _PAD + (x - x0) / (x1 - x0) * (_W - 2 * _PAD)  # noqa: E731
    sy = lambda y: _H - _PAD - (y - y0) / (y1 - y0) * (_H - 2 * _PAD)  # noqa: E731
    g = ET.SubElement(root, "g")
    ET.SubElement(g, "text", x=f"{ox + _W / 2:.1f}", y="20", attrib={"text-anchor": "middle"}
                  ).text = title
    ET.SubElement(g, "line", x1=f"{sx(x0):.2f}", y1=f"{sy(y0):.2f}", x2=f"{sx(x1):.2f}",
                  y2=f"{sy(y0):.2f}", stroke="black")
    ET.SubElement(g, "line", x1=f"{sx(x0):.2f}", y1=f"{sy(y0):.2f}", x2=f"{sx(x0):.2f}",
                  y2=f"{sy(y1):.2f}", stroke="black")
    for t in _ticks(x0, x1):
        ET.SubElement(g, "text", x=f"{sx(t):.2f}", y=f"{_H - _PAD + 14:.2f}",
                      attrib={"text-anchor": "middle", "font-size": "9"}).text = f"{t:.3g}"
    for t in _ticks(y0, y1):
        ET.SubElement(g, "text", x=f"{ox + _PAD - 4:.2f}", y=f"{sy(t) + 3:.2f}",
                      attrib={"text-anchor": "end", "font-size": "9"}).text = f"{t:.3g}"
    ET.SubElement(g, "text", x=f"{ox + _W / 2:.1f}", y=f"{_H - 8}",
                  attrib={"text-anchor": "middle", "font-size": "10"}).text = xlab
    ET.SubElement(g, "text", x=f"{ox + 12}", y=f"{_H / 2:.1f}",
                  attrib={"font-size": "10",
                          "transform": f"rotate(-90 {ox + 12} {_H / 2:.1f})"}).text = ylab
    for i, (name, s) in enumerate(series.items()):
        color = _PALETTE[i % len(_PALETTE)]
        s = sorted(s)
        ET.SubElement(g, "polyline", fill="none", stroke=color,
                      points=" ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in s))
        ET.SubElement(g, "text", x=f"{ox + _W - _PAD + 2:.1f}", y=f"{_PAD + 11 * i:.1f}",
                      fill=color, attrib={"font-size": "8"}).text = name


def emit_svg(table: Table, path) -> Path:
    """Line charts, one panel per density (efficiency) or a single panel (curves)."""
    _check(table)
    panels, xlab, ylab = _series(table)
    if not panels:
        raise ArgumentError("table has no plottable values")
    width = _W * len(panels) + 80
    root = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(width),
                      height=str(_H), viewBox=f"0 0 {width} {_H}")
    ET.SubElement(root, "rect", width=str(width), height=str(_H), fill="white")
    for i, (title, series) in enumerate(panels.items()):
        _panel(root, i * _W, title, series, xlab, ylab)
    path = Path(path)
    ET.ElementTree(root).write(path, encoding="utf-8", xml_declaration=True)
    return path
