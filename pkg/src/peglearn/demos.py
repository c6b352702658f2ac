"""Demonstrations, specification sets, and rating matrices.

A rating matrix holds one row per demonstration and one column per
specification; entry (i, j) is the (optionally tanh-squashed) robustness of
spec j on demo i at time 0, or an externally supplied score such as a
rescaled Likert rating.
"""

import csv
import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .stl import Formula, MonitorError, Trace, normalize_robustness, parse_formula, robustness


class RatingError(ValueError):
    """Problem building or loading a rating matrix."""


class PartialOrder(enum.Enum):
    LEQ = "leq"
    GEQ = "geq"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


@dataclass
class Demonstration:
    """One demonstrated behavior: an id, its trace, and free-form metadata."""

    id: str
    trace: Trace
    metadata: dict = field(default_factory=dict)


class SpecSet:
    """Ordered, uniquely named specifications.

    A formula may be None for externally rated criteria (e.g. expert Likert
    scores loaded from CSV); such specs cannot be evaluated on traces.
    """

    def __init__(self, entries):
        entries = list(entries)
        if not entries:
            raise ValueError("a spec set needs at least one specification")
        names = [name for name, _ in entries]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate spec names: {dupes}")
        self.names = tuple(names)
        self.formulas = tuple(f for _, f in entries)

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(zip(self.names, self.formulas))

    @classmethod
    def parse_file(cls, path) -> "SpecSet":
        """Read `name: formula` lines; blank lines and # comments ignored."""
        entries = []
        for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            name, sep, body = line.partition(":")
            if not sep or not name.strip() or not body.strip():
                raise ValueError(f"{path}:{lineno}: expected 'name: formula', got {raw!r}")
            entries.append((name.strip(), parse_formula(body)))
        return cls(entries)


@dataclass
class RatingMatrix:
    """m x n matrix of ratings plus row/column labels."""

    values: np.ndarray
    demo_ids: tuple
    spec_names: tuple
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise RatingError(f"rating matrix must be 2-d, got shape {values.shape}")
        m, n = values.shape
        if m < 1 or n < 1:
            raise RatingError(f"rating matrix must be at least 1x1, got {m}x{n}")
        if len(self.demo_ids) != m:
            raise RatingError(f"{len(self.demo_ids)} demo ids for {m} rows")
        if len(self.spec_names) != n:
            raise RatingError(f"{len(self.spec_names)} spec names for {n} columns")
        if not np.isfinite(values).all():
            raise RatingError("rating matrix contains non-finite entries")
        self.values = values
        self.demo_ids = tuple(self.demo_ids)
        self.spec_names = tuple(self.spec_names)

    @property
    def shape(self):
        return self.values.shape


def load_trajectory(path) -> Demonstration:
    """Load a demonstration from a trace JSON file.

    Schema: {"id": optional string, "signals": {name: [numbers...]}}.
    The id defaults to the file stem.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "signals" not in doc:
        raise ValueError(f"{path}: expected an object with a 'signals' key")
    signals = doc["signals"]
    if not isinstance(signals, dict) or not signals:
        raise ValueError(f"{path}: 'signals' must be a non-empty object")
    for name, values in signals.items():
        if not isinstance(values, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
        ):
            raise ValueError(f"{path}: signal {name!r} must be a list of numbers")
    try:
        trace = Trace(signals)
    except MonitorError as exc:
        raise ValueError(f"{path}: {exc}") from None
    demo_id = doc.get("id") or path.stem
    metadata = doc.get("metadata") or {}
    return Demonstration(id=str(demo_id), trace=trace, metadata=dict(metadata))


def save_trajectory(demo: Demonstration, path, header=()) -> None:
    """Write a demonstration as trace JSON (deterministic byte layout)."""
    doc = {
        "id": demo.id,
        "signals": {name: demo.trace.signal(name).tolist() for name in sorted(demo.trace.signal_names)},
    }
    if demo.metadata:
        doc["metadata"] = {k: demo.metadata[k] for k in sorted(demo.metadata)}
    if header:
        doc["provenance"] = list(header)
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")


def build_rating_matrix(demos, specs: SpecSet, normalize=None) -> RatingMatrix:
    """Evaluate every spec on every demo at time 0.

    normalize: None for raw robustness, a positive scale for tanh(v/scale),
    or a {spec_name: scale} mapping for per-spec scales. Evaluation order is
    fixed (row-major), so results are deterministic.
    """
    demos = list(demos)
    if not demos:
        raise RatingError("need at least one demonstration")
    scales = _resolve_scales(specs, normalize)
    values = np.empty((len(demos), len(specs)))
    for i, demo in enumerate(demos):
        for j, (name, formula) in enumerate(specs):
            if formula is None:
                raise RatingError(
                    f"spec {name!r} has no formula (externally rated); load its scores from CSV instead"
                )
            try:
                rho = robustness(formula, demo.trace, 0)
            except MonitorError as exc:
                raise RatingError(f"demo {demo.id!r}, spec {name!r}: {exc}") from None
            values[i, j] = rho if scales is None else normalize_robustness(rho, scales[j])
    metadata = {}
    if scales is not None:
        metadata["normalize"] = ",".join(repr(s) for s in scales)
    return RatingMatrix(values, tuple(d.id for d in demos), specs.names, metadata)


def _resolve_scales(specs, normalize):
    if normalize is None:
        return None
    if isinstance(normalize, dict):
        missing = [n for n in specs.names if n not in normalize]
        if missing:
            raise RatingError(f"no normalization scale for specs: {missing}")
        return [float(normalize[n]) for n in specs.names]
    return [float(normalize)] * len(specs)


def demo_partial_order(row_a, row_b) -> PartialOrder:
    """Compare two rating rows elementwise."""
    a = np.asarray(row_a, dtype=float)
    b = np.asarray(row_b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"rows must be 1-d and equally long, got {a.shape} and {b.shape}")
    leq = bool((a <= b).all())
    geq = bool((a >= b).all())
    if leq and geq:
        return PartialOrder.EQUAL
    if leq:
        return PartialOrder.LEQ
    if geq:
        return PartialOrder.GEQ
    return PartialOrder.INCOMPARABLE


_SCALE_DIRECTIVE = "#scale,"


def load_rating_matrix_csv(path) -> RatingMatrix:
    """Load a rating matrix CSV: header `demo_id,<spec>,...`, one row per demo.

    Lines starting with # are comments, except a `#scale,<min>,<max>`
    directive, which declares the raw rating scale (e.g. Likert 1..5); values
    are then affinely rescaled to [-1, 1] and the original bounds recorded in
    the matrix metadata.
    """
    path = Path(path)
    scale = None
    rows = []
    header = None
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.lower().startswith(_SCALE_DIRECTIVE):
                parts = line.split(",")
                if len(parts) != 3:
                    raise RatingError(f"{path}:{lineno}: malformed scale directive {raw!r}")
                try:
                    scale = (float(parts[1]), float(parts[2]))
                except ValueError:
                    raise RatingError(f"{path}:{lineno}: malformed scale directive {raw!r}") from None
                if not scale[1] > scale[0]:
                    raise RatingError(f"{path}:{lineno}: scale max must exceed min, got {scale}")
            continue
        cells = next(csv.reader([line]))
        if header is None:
            header = [c.strip() for c in cells]
            if len(header) < 2 or header[0] != "demo_id":
                raise RatingError(f"{path}:{lineno}: header must be 'demo_id,<spec>,...', got {raw!r}")
            continue
        rows.append((lineno, [c.strip() for c in cells]))
    if header is None or not rows:
        raise RatingError(f"{path}: no data rows")
    spec_names = tuple(header[1:])
    demo_ids = []
    values = np.empty((len(rows), len(spec_names)))
    seen = set()
    for i, (lineno, cells) in enumerate(rows):
        if len(cells) != len(header):
            raise RatingError(
                f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}"
            )
        demo_id = cells[0]
        if demo_id in seen:
            raise RatingError(f"{path}:{lineno}: duplicate demo id {demo_id!r}")
        seen.add(demo_id)
        demo_ids.append(demo_id)
        for j, cell in enumerate(cells[1:]):
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise RatingError(
                    f"{path}:{lineno}: non-numeric value {cell!r} in column {spec_names[j]!r}"
                ) from None
    metadata = {}
    if scale is not None:
        lo, hi = scale
        values = 2.0 * (values - lo) / (hi - lo) - 1.0
        metadata["scale_min"] = repr(lo)
        metadata["scale_max"] = repr(hi)
    return RatingMatrix(values, tuple(demo_ids), spec_names, metadata)


def save_rating_matrix_csv(matrix: RatingMatrix, path, header=()) -> None:
    """Write a rating matrix CSV; floats use repr so a reload is bit-exact."""
    lines = [f"# {h}" for h in header]
    lines.append(",".join(["demo_id", *matrix.spec_names]))
    for demo_id, row in zip(matrix.demo_ids, matrix.values):
        lines.append(",".join([demo_id, *(repr(float(v)) for v in row)]))
    Path(path).write_text("\n".join(lines) + "\n")
