"""System spec files, point-cloud CSV files and run manifests."""
from __future__ import annotations

import ast
import csv
import hashlib
import io as _io
import json
import math
import operator
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import ConfigurationError, SpecError
from .multiset import (RATIONAL, Multiset, MultisetFamily,
                       RationalMode, mode_from_name)
from .system import InflationSystem

SPEC_FIELDS = {"dimension", "colors", "matrix", "digits", "arithmetic", "epsilon"}
DIGIT_FIELDS = {"i", "j", "points"}

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub,
           ast.Mult: operator.mul, ast.Div: operator.truediv}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}


# Scalars --------------------------------------------------------------------------

def _uses_pi(value) -> bool:
    return isinstance(value, str) and "pi" in value


def parse_scalar(value, mode, where: str = ""):
    """Scalar from a JSON number or string.

    Strings may be ``"p/q"``, decimals, the token ``"pi"`` or small
    arithmetic expressions of these (``"pi+3"``, ``"-3/8"``).  ``pi`` is
    only accepted in float mode.
    """
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise SpecError(f"malformed scalar {value!r}", field=where)
    if not isinstance(value, str):
        if isinstance(value, float) and not math.isfinite(value):
            raise SpecError(f"non-finite scalar {value!r}", field=where)
        return value if isinstance(mode, RationalMode) else float(value)
    text = value.strip()
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError:
        raise SpecError(f"malformed scalar {value!r}", field=where) from None
    exact = isinstance(mode, RationalMode)

    def ev(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return Fraction(repr(node.value)) if exact else float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            if exact:
                raise SpecError("'pi' is irrational; use \"arithmetic\": \"float\"", field=where)
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            left, right = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Div) and right == 0:
                raise SpecError(f"division by zero in {value!r}", field=where)
            return _BINOPS[type(node.op)](left, right)
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](ev(node.operand))
        raise SpecError(f"malformed scalar {value!r}", field=where)

    return ev(tree.body)


def format_scalar(c, mode):
    """JSON-ready scalar for a coordinate key."""
    if isinstance(mode, RationalMode):
        c = Fraction(c)
        return int(c) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return mode.to_float(c)


# Spec files ------------------------------------------------------------------------

def _contains_pi(raw) -> bool:
    if isinstance(raw, str):
        return _uses_pi(raw)
    if isinstance(raw, list):
        return any(_contains_pi(v) for v in raw)
    if isinstance(raw, dict):
        return any(_contains_pi(v) for v in raw.values())
    return False


def parse_spec(data: dict) -> InflationSystem:
    """Validate a decoded spec document and build the system."""
    if not isinstance(data, dict):
        raise SpecError("spec must be a JSON object")
    unknown = sorted(set(data) - SPEC_FIELDS)
    if unknown:
        raise SpecError(f"unknown field(s) {unknown}", field=unknown[0])
    for key in ("dimension", "colors", "matrix", "digits"):
        if key not in data:
            raise SpecError(f"missing field {key!r}", field=key)
    d, n = data["dimension"], data["colors"]
    for key, v in (("dimension", d), ("colors", n)):
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise SpecError(f"{key} must be a positive integer", field=key)
    arith = data.get("arithmetic")
    if arith is None:
        arith = "float" if _contains_pi(data) else "rational"
    if arith not in ("rational", "float"):
        raise SpecError(f"arithmetic must be 'rational' or 'float', got {arith!r}", field="arithmetic")
    eps = data.get("epsilon")
    if eps is not None:
        if arith != "float":
            raise SpecError("epsilon only applies to float arithmetic", field="epsilon")
        if isinstance(eps, bool) or not isinstance(eps, (int, float)) or not eps > 0:
            raise SpecError("epsilon must be a positive number", field="epsilon")
    mode = mode_from_name(arith, eps)
    M = data["matrix"]
    if not isinstance(M, list) or len(M) != d or any(not isinstance(r, list) or len(r) != d for r in M):
        raise SpecError(f"matrix must be a {d}x{d} list of rows", field="matrix")
    A = [[parse_scalar(v, mode, f"matrix[{r}][{c}]") for c, v in enumerate(row)]
         for r, row in enumerate(M)]
    cells = {}
    if not isinstance(data["digits"], list):
        raise SpecError("digits must be a list", field="digits")
    for k, entry in enumerate(data["digits"]):
        where = f"digits[{k}]"
        if not isinstance(entry, dict):
            raise SpecError("digit entry must be an object", field=where)
        extra = sorted(set(entry) - DIGIT_FIELDS)
        if extra:
            raise SpecError(f"unknown field(s) {extra}", field=f"{where}.{extra[0]}")
        for key in ("i", "j", "points"):
            if key not in entry:
                raise SpecError(f"missing field {key!r}", field=f"{where}.{key}")
        i, j = entry["i"], entry["j"]
        for key, v in (("i", i), ("j", j)):
            if isinstance(v, bool) or not isinstance(v, int) or not 1 <= v <= n:
                raise SpecError(f"{key} must be an integer in 1..{n}", field=f"{where}.{key}")
        pts = entry["points"]
        if not isinstance(pts, list):
            raise SpecError("points must be a list", field=f"{where}.points")
        parsed = []
        for t, p in enumerate(pts):
            pw = f"{where}.points[{t}]"
            if not isinstance(p, list):
                if d == 1:
                    p = [p]
                else:
                    raise SpecError(f"point must be a list of {d} coordinates", field=pw)
            if len(p) != d:
                raise SpecError(f"point must have {d} coordinates", field=pw)
            parsed.append([parse_scalar(v, mode, f"{pw}[{c}]") for c, v in enumerate(p)])
        cells.setdefault((i - 1, j - 1), []).extend(parsed)
    digits = [[cells.get((i, j), []) for j in range(n)] for i in range(n)]
    if d == 1:
        A = A[0][0]
    return InflationSystem.create(A, digits, mode)


def _line_of(text: str, needle: str):
    for k, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return k
    return None


def load_spec(path) -> InflationSystem:
    """Read and validate a JSON system spec; errors carry the line or field."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise SpecError(f"cannot read {path}: {e.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError(f"{path}: {e.msg}", line=e.lineno) from None
    try:
        return parse_spec(data)
    except SpecError as e:
        if e.field and e.line is None:
            key = e.field.split(".")[-1].split("[")[0]
            raise SpecError(e.message, e.field, _line_of(text, f'"{key}"')) from None
        raise


def dump_spec(sys: InflationSystem) -> dict:
    """Spec document for ``sys``; :func:`parse_spec` inverts it exactly."""
    mode = sys.mode
    out = {"dimension": sys.d, "colors": sys.n}
    if isinstance(mode, RationalMode):
        out["matrix"] = [[format_scalar(a, mode) for a in row] for row in sys.A]
        out["arithmetic"] = "rational"
    else:
        out["matrix"] = [[float(a) for a in row] for row in sys.A]
        out["arithmetic"] = "float"
        out["epsilon"] = mode.epsilon
    digits = []
    for i in range(sys.n):
        for j in range(sys.n):
            D = sys.digits[i][j]
            if not D:
                continue
            pts = []
            for p, m in D.sorted_items():
                pts.extend([[format_scalar(c, mode) for c in p]] * m)
            digits.append({"i": i + 1, "j": j + 1, "points": pts})
    out["digits"] = digits
    return out


def spec_hash(sys: InflationSystem) -> str:
    text = json.dumps(dump_spec(sys), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


# Point clouds ----------------------------------------------------------------------------

def points_to_csv(family: MultisetFamily, mode=None) -> str:
    """CSV text with columns ``x1..xd, multiplicity, color`` (colors 1-based)."""
    mode = mode or family.mode
    d = family.dim or 1
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{k + 1}" for k in range(d)] + ["multiplicity", "color"])
    for i, X in enumerate(family):
        for p, m in X.sorted_items():
            w.writerow([mode.format(c) for c in p] + [m, i + 1])
    return buf.getvalue()


def write_points(path, family: MultisetFamily) -> None:
    Path(path).write_text(points_to_csv(family))


def points_from_csv(text: str, mode=RATIONAL, n: int | None = None) -> MultisetFamily:
    rows = list(csv.reader(_io.StringIO(text)))
    if not rows:
        raise SpecError("empty points file", line=1)
    header = [h.strip() for h in rows[0]]
    d = len(header) - 2
    expected = [f"x{k + 1}" for k in range(d)] + ["multiplicity", "color"]
    if d < 1 or header != expected:
        raise SpecError(f"header must be {','.join(expected) if d >= 1 else 'x1,...,multiplicity,color'}",
                        line=1)
    entries = []
    for ln, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != d + 2:
            raise SpecError(f"expected {d + 2} columns, got {len(row)}", line=ln)
        try:
            p = tuple(mode.parse(c) for c in row[:d])
            m = int(row[d])
            c = int(row[d + 1])
        except (ValueError, ConfigurationError) as e:
            raise SpecError(f"bad value: {e}", line=ln) from None
        if m < 1 or c < 1:
            raise SpecError("multiplicity and color must be positive", line=ln)
        entries.append((p, m, c - 1))
    ncol = max([c for _, _, c in entries], default=-1) + 1
    if n is None:
        n = max(ncol, 1)
    elif ncol > n:
        raise SpecError(f"color {ncol} exceeds the system's {n} colors")
    members = [dict() for _ in range(n)]
    for p, m, c in entries:
        members[c][p] = members[c].get(p, 0) + m
    return MultisetFamily(Multiset._wrap(mm, mode, d) for mm in members)


def read_points(path, mode=RATIONAL, n: int | None = None) -> MultisetFamily:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise SpecError(f"cannot read {path}: {e.strerror}") from None
    return points_from_csv(text, mode, n)


# Manifests ------------------------------------------------------------------------------

def file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    spec_hash: str | None
    command: str
    parameters: dict
    version: str
    outputs: list = field(default_factory=list)
    wall_time: float = 0.0
    started: float = field(default_factory=time.perf_counter, repr=False)

    def add_output(self, path) -> None:
        self.outputs.append({"path": str(path), "sha256": file_hash(path)})

    def finish(self) -> None:
        self.wall_time = time.perf_counter() - self.started

    def as_dict(self) -> dict:
        out = asdict(self)
        out.pop("started")
        return out

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n")


__all__ = ["parse_scalar", "format_scalar", "parse_spec", "load_spec", "dump_spec", "spec_hash",
           "points_to_csv", "points_from_csv", "write_points", "read_points", "RunManifest"]
