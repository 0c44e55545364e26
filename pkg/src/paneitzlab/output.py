"""Run configuration and result serialisation.

Floats are written with 17 significant digits so that every value read back
is bit-identical to the one written; non-finite floats become the strings
``"inf"``, ``"-inf"`` and ``"nan"`` so the JSON stays standard.  CSV follows
RFC 4180 with ``\\n`` line endings.  SVG charts are emitted by hand.
"""
import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

FORMATS = ("csv", "json", "svg")


class ConfigError(ValueError):
    """Invalid configuration; the CLI maps it to exit status 2."""


@dataclass
class RunConfig:
    """Settings shared by all commands.

    Attributes
    ----------
    n : int
        Sphere dimension, at least 5.
    K : int
        Spectral truncation degree for expansions, at least 8.
    lmax : int
        Largest harmonic sector scanned by eigenvalue solves, at least 2.
    basis : int
        Radial basis size per sector.
    tol_identity : float
        Relative tolerance of the round-sphere identities.
    tol_covariance : float
        Tolerance of the Moebius covariance residual.
    tol_eigen : float
        Tolerance of eigenvalue identities.
    tol_transfer : float
        Tolerance of the rescaling transfer identity.
    out : str
        Output directory.
    formats : tuple of str
        Subset of ``("csv", "json", "svg")``.
    perturb_b : float
        Test hook: added to ``b_n`` inside ``verify``; zero in normal runs.
    """

    n: int = 5
    K: int = 128
    lmax: int = 8
    basis: int = 64
    tol_identity: float = 1e-12
    tol_covariance: float = 1e-8
    tol_eigen: float = 1e-8
    tol_transfer: float = 1e-8
    out: str = "paneitzlab-out"
    formats: tuple = ("json",)
    perturb_b: float = 0.0

    def validate(self):
        if self.n < 5:
            raise ConfigError("n must be at least 5")
        if self.K < 8:
            raise ConfigError("K must be at least 8")
        if self.K > 4096:
            raise ConfigError("K must be at most 4096")
        if self.lmax < 2:
            raise ConfigError("lmax must be at least 2")
        if not 8 <= self.basis <= 512:
            raise ConfigError("basis must lie in [8, 512]")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad or not self.formats:
            raise ConfigError(f"formats must be a non-empty subset of {FORMATS}")
        for name in ("tol_identity", "tol_covariance", "tol_eigen", "tol_transfer"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        return self

    def snapshot(self):
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out


def _convert(name, raw):
    types = {f.name: f.type for f in fields(RunConfig)}
    if name not in types:
        raise ConfigError(f"unknown configuration key {name!r}")
    kind = types[name]
    try:
        if kind in (int, "int"):
            return int(raw)
        if kind in (float, "float"):
            return float(raw)
        if kind in (tuple, "tuple"):
            parts = raw if isinstance(raw, (list, tuple)) else str(raw).split(",")
            return tuple(p.strip() for p in parts if p.strip())
        return str(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def parse_config_text(text):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = _convert(key, value)
    return values


def load_config(path=None, overrides=None):
    """Defaults, then the file at ``path``, then ``overrides``; validated."""
    cfg = RunConfig()
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        for k, v in parse_config_text(text).items():
            setattr(cfg, k, v)
    for k, v in (overrides or {}).items():
        if v is not None:
            setattr(cfg, k, _convert(k, v))
    return cfg.validate()


# -- values --------------------------------------------------------------------------

def plain(value):
    """Convert results to JSON-native values (dicts, lists, str, int, float, bool, None)."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: plain(getattr(value, f.name)) for f in fields(value) if f.repr}
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if value is None or isinstance(value, str):
        return value
    if hasattr(value, "__array__"):
        return plain(np.asarray(value, dtype=float))
    return str(value)


def format_float(x):
    return "%.17g" % x


def _emit(value, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_emit(v, indent, level + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in value):
            return "[" + ", ".join(_emit(v, indent, level + 1) for v in value) + "]"
        return "[\n" + ",\n".join(pad + _emit(v, indent, level + 1) for v in value) + "\n" + end + "]"
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, int):
        return str(value)
    return json.dumps(value)


def dumps(value, indent=2):
    """Serialise JSON-native ``value`` with 17-digit floats."""
    return _emit(plain(value), indent, 0) + "\n"


def loads(text):
    return json.loads(text)


@dataclass
class ResultEnvelope:
    """One command run: configuration, rows and provenance.

    ``timestamp`` holds wall-clock data and is the only field that differs
    between repeated runs with the same configuration.
    """

    command: str
    config: dict
    rows: list
    version: str
    provenance: list
    summary: dict = field(default_factory=dict)
    timestamp: dict = field(default_factory=dict)

    def to_dict(self):
        return {"command": self.command, "config": plain(self.config), "rows": plain(self.rows),
                "summary": plain(self.summary), "version": self.version,
                "provenance": list(self.provenance), "timestamp": plain(self.timestamp)}

    @classmethod
    def from_dict(cls, d):
        return cls(command=d["command"], config=d["config"], rows=d["rows"],
                   version=d["version"], provenance=d["provenance"],
                   summary=d.get("summary", {}), timestamp=d.get("timestamp", {}))

    def to_json(self):
        return dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(loads(text))


def stamp(start_time, end_time):
    wall = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return {"wall": wall, "elapsed_s": round(end_time - start_time, 6)}


# -- CSV -----------------------------------------------------------------------------

def _cell(v):
    v = plain(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    if v is None:
        return ""
    if isinstance(v, (list, dict)):
        return json.dumps(v)
    return str(v)


def to_csv(rows, columns, units, provenance):
    """Render rows as CSV.

    The header names every column with its unit in brackets, and the first
    column records the operation that produced each row.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["operation"] + [f"{c} [{units.get(c, '1')}]" for c in columns])
    for row, op in zip(rows, provenance):
        row = plain(row)
        writer.writerow([op] + [_cell(row.get(c)) for c in columns])
    return buf.getvalue()


# -- SVG -----------------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _ticks(lo, hi, count=5):
    if hi == lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def svg_line_chart(x, series, title="", xlabel="", ylabel="", logy=False,
                   width=640, height=400):
    """Minimal SVG line chart.

    Parameters
    ----------
    x : sequence of float
    series : dict
        Name to y-values (same length as ``x``).  Non-finite points are
        dropped; with ``logy`` non-positive points are dropped too.
    """
    x = np.asarray(x, dtype=float)
    left, right, top, bottom = 70, 20, 40, 50
    pw, ph = width - left - right, height - top - bottom
    ys = {}
    for name, y in series.items():
        y = np.asarray(y, dtype=float)
        ok = np.isfinite(y) & np.isfinite(x)
        if logy:
            ok &= y > 0
            y = np.where(ok, np.log10(np.where(ok, y, 1.0)), np.nan)
        ys[name] = (x[ok], y[ok])
    allx = np.concatenate([v[0] for v in ys.values()]) if ys else np.zeros(1)
    ally = np.concatenate([v[1] for v in ys.values()]) if ys else np.zeros(1)
    if allx.size == 0:
        allx, ally = np.zeros(1), np.zeros(1)
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1

    def px(v):
        return left + (v - x0) / (x1 - x0) * pw

    def py(v):
        return top + (1 - (v - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="15" '
           f'font-family="sans-serif">{_esc(title)}</text>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for v in _ticks(x0, x1):
        out.append(f'<text x="{px(v):.1f}" y="{top + ph + 18}" text-anchor="middle" '
                   f'font-size="11" font-family="sans-serif">{v:.4g}</text>')
    for v in _ticks(y0, y1):
        label = f"1e{v:.2g}" if logy else f"{v:.4g}"
        out.append(f'<text x="{left - 6}" y="{py(v) + 4:.1f}" text-anchor="end" '
                   f'font-size="11" font-family="sans-serif">{label}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" '
               f'font-size="12" font-family="sans-serif">{_esc(xlabel)}</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" font-size="12" '
               f'font-family="sans-serif" transform="rotate(-90 16 {top + ph / 2:.1f})">'
               f'{_esc(ylabel)}</text>')
    for i, (name, (xs, yv)) in enumerate(ys.items()):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(xs, yv))
        if pts:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{left + pw - 4}" y="{top + 16 + 14 * i}" text-anchor="end" '
                   f'font-size="11" fill="{color}" font-family="sans-serif">{_esc(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(text):
    return (str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;"))
