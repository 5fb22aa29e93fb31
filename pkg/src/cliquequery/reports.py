"""Output layer: atomic CSV/JSON/SVG writers with embedded run configs.

Every artifact this package emits carries the full configuration that
produced it (CSV/SVG as comment or description lines, JSON as a "config"
object) so a rerun can be checked byte-for-byte.  Writers never emit
timestamps or durations for the same reason.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence
from xml.sax.saxutils import escape

from . import __version__
from .errors import DomainError

ARTIFACT = f"cliquequery {__version__}"


@dataclass
class RunConfig:
    """Command name plus the resolved parameter set for one CLI invocation."""

    command: str
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if not self.command or not isinstance(self.command, str):
            raise DomainError("config needs a non-empty command name")
        for key in self.params:
            if not isinstance(key, str) or not key:
                raise DomainError(f"bad config key {key!r}")

    def lines(self) -> list[str]:
        out = [f"artifact={ARTIFACT}", f"command={self.command}"]
        for key in sorted(self.params):
            out.append(f"{key}={_fmt(self.params[key])}")
        return out

    def as_dict(self) -> dict:
        d = {"artifact": ARTIFACT, "command": self.command}
        for key in sorted(self.params):
            d[key] = self.params[key]
        return d


def _fmt(value) -> str:
    # repr for floats: shortest round-trip form, stable across runs.
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ";".join(_fmt(v) for v in value)
    if value is None:
        return ""
    return str(value)


def atomic_write(path: str, data: str) -> None:
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def render_csv(header: Sequence[str], rows: Iterable[Sequence], config: RunConfig,
               summary: Sequence[str] = ()) -> str:
    lines = [f"# {line}" for line in config.lines()]
    lines.append(",".join(header))
    width = len(header)
    for row in rows:
        cells = [_fmt(v) for v in row]
        if len(cells) != width:
            raise DomainError(f"row width {len(cells)} != header width {width}")
        lines.append(",".join(cells))
    for line in summary:
        lines.append(f"# {line}")
    return "\n".join(lines) + "\n"


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence],
              config: RunConfig, summary: Sequence[str] = ()) -> None:
    atomic_write(path, render_csv(header, rows, config, summary))


def read_csv(path: str) -> tuple[list[str], list[list[str]], list[str]]:
    """Parse a package CSV back into (header, rows, comment lines)."""
    comments, rows, header = [], [], None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line[1:].strip())
            elif header is None:
                header = line.split(",")
            else:
                rows.append(line.split(","))
    if header is None:
        raise DomainError(f"{path}: no header line")
    return header, rows, comments


def write_json(path: str, payload: Mapping[str, object], config: RunConfig) -> None:
    doc = {"config": config.as_dict()}
    for key in payload:
        if key == "config":
            raise DomainError("payload key 'config' is reserved")
        doc[key] = payload[key]
    atomic_write(path, json.dumps(doc, indent=2, sort_keys=True,
                                  allow_nan=False) + "\n")


_PALETTE = ("#1f6fb4", "#d62728", "#2ca02c", "#9467bd",
            "#ff7f0e", "#8c564b", "#e377c2", "#17becf")

_W, _H = 880, 560
_ML, _MR, _MT, _MB = 72, 190, 42, 56  # right margin holds the legend


def _ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def svg_line_chart(series: Mapping[str, Sequence[tuple[float, float]]],
                   config: RunConfig, title: str,
                   xlabel: str = "delta", ylabel: str = "alpha") -> str:
    """Render line series to a small standalone SVG string.

    Series are drawn in sorted label order with a fixed palette; singleton
    series become a marker instead of a path.  The run config is embedded
    in the <desc> element.
    """
    pts = [p for s in series.values() for p in s]
    if not pts:
        raise DomainError("nothing to plot")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    xlo, xhi = min(xs), max(xs)
    ylo, yhi = min(ys), max(ys)
    if xhi == xlo:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    pad = 0.04 * (yhi - ylo) or 0.5
    ylo, yhi = ylo - pad, yhi + pad
    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB

    def px(x: float) -> float:
        return _ML + (x - xlo) / (xhi - xlo) * plot_w

    def py(y: float) -> float:
        return _MT + (yhi - y) / (yhi - ylo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="13">',
        f"<title>{escape(title)}</title>",
        "<desc>" + escape("\n".join(config.lines())) + "</desc>",
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" '
        f'font-size="16">{escape(title)}</text>',
    ]
    axis = (f'<line x1="{_ML}" y1="{_MT + plot_h}" x2="{_ML + plot_w}" '
            f'y2="{_MT + plot_h}" stroke="black"/>'
            f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_MT + plot_h}" '
            f'stroke="black"/>')
    out.append(axis)
    for tx in _ticks(xlo, xhi):
        x = px(tx)
        out.append(f'<line x1="{x:.2f}" y1="{_MT + plot_h}" x2="{x:.2f}" '
                   f'y2="{_MT + plot_h + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{_MT + plot_h + 20}" '
                   f'text-anchor="middle">{tx:.4g}</text>')
    for ty in _ticks(ylo, yhi):
        y = py(ty)
        out.append(f'<line x1="{_ML - 5}" y1="{y:.2f}" x2="{_ML}" '
                   f'y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{_ML - 9}" y="{y + 4:.2f}" '
                   f'text-anchor="end">{ty:.4g}</text>')
    out.append(f'<text x="{_ML + plot_w / 2:.1f}" y="{_H - 12}" '
               f'text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="20" y="{_MT + plot_h / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 20 {_MT + plot_h / 2:.1f})">'
               f'{escape(ylabel)}</text>')

    legend_y = _MT + 10
    for i, label in enumerate(sorted(series)):
        color = _PALETTE[i % len(_PALETTE)]
        data = sorted(series[label])
        if len(data) == 1:
            x, y = data[0]
            out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="4" '
                       f'fill="{color}"/>')
        else:
            path = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in data)
            out.append(f'<polyline points="{path}" fill="none" '
                       f'stroke="{color}" stroke-width="1.6"/>')
        out.append(f'<rect x="{_ML + plot_w + 14}" y="{legend_y - 9}" '
                   f'width="12" height="12" fill="{color}"/>')
        out.append(f'<text x="{_ML + plot_w + 31}" y="{legend_y + 2}">'
                   f'{escape(label)}</text>')
        legend_y += 20
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path: str, series, config: RunConfig, title: str,
              xlabel: str = "delta", ylabel: str = "alpha") -> None:
    atomic_write(path, svg_line_chart(series, config, title, xlabel, ylabel))
