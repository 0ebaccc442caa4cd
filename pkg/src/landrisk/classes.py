"""Class taxonomy and the class -> risk-level mapping.

Label maps and risk maps are plain 2-D ``uint8`` arrays of shape
``(height, width)``; probability maps are ``(height, width, n_classes)``
float arrays.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

N_RISK_LEVELS = 6
MAX_RISK = N_RISK_LEVELS - 1


class ClassTableError(ValueError):
    pass


class LabelError(ValueError):
    pass


@dataclass(frozen=True)
class ClassEntry:
    id: int
    label: str
    color: tuple[int, int, int]
    risk: int


@dataclass(frozen=True)
class ClassTable:
    """Ordered class entries, ids contiguous from 0."""

    entries: tuple[ClassEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, class_id: int) -> ClassEntry:
        return self.entries[class_id]

    @property
    def labels(self) -> list[str]:
        return [e.label for e in self.entries]

    @property
    def risk_lut(self) -> np.ndarray:
        """Lookup array: ``risk_lut[class_id] -> risk level``."""
        return np.array([e.risk for e in self.entries], dtype=np.uint8)

    @property
    def palette(self) -> np.ndarray:
        """``(n, 3)`` uint8 array of class colors, row = class id."""
        return np.array([e.color for e in self.entries], dtype=np.uint8)

    def grouping(self) -> dict[int, int]:
        return {e.id: e.risk for e in self.entries}

    def by_label(self, label: str) -> ClassEntry:
        for e in self.entries:
            if e.label == label:
                return e
        raise KeyError(label)


def _check_int(value, what: str, entry_desc: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ClassTableError(f"{entry_desc}: {what} must be an integer, got {value!r}")
    return value


def build_class_table(document) -> ClassTable:
    """Validate a parsed class-table document and build a :class:`ClassTable`.

    ``document`` is a list of mappings with keys ``id``, ``label``,
    ``color`` (``[r, g, b]``) and ``risk``. Entries may appear in any order;
    the table is sorted by id.
    """
    if not isinstance(document, list) or not document:
        raise ClassTableError("class table must be a non-empty list of entries")

    entries = []
    seen_ids: dict[int, int] = {}
    seen_colors: dict[tuple, int] = {}
    for pos, raw in enumerate(document):
        desc = f"entry #{pos}"
        if not isinstance(raw, dict):
            raise ClassTableError(f"{desc}: expected an object, got {type(raw).__name__}")
        missing = {"id", "label", "color", "risk"} - raw.keys()
        if missing:
            raise ClassTableError(f"{desc}: missing keys {sorted(missing)}")
        cid = _check_int(raw["id"], "id", desc)
        desc = f"entry #{pos} (id={cid}, label={raw['label']!r})"
        if not isinstance(raw["label"], str):
            raise ClassTableError(f"{desc}: label must be a string")
        risk = _check_int(raw["risk"], "risk", desc)
        if not 0 <= risk <= MAX_RISK:
            raise ClassTableError(f"{desc}: risk {risk} outside [0, {MAX_RISK}]")
        color = raw["color"]
        if not isinstance(color, (list, tuple)) or len(color) != 3:
            raise ClassTableError(f"{desc}: color must be an [r, g, b] triple")
        color = tuple(_check_int(c, "color channel", desc) for c in color)
        if any(not 0 <= c <= 255 for c in color):
            raise ClassTableError(f"{desc}: color {list(color)} has channel outside 0-255")
        if cid in seen_ids:
            raise ClassTableError(f"{desc}: duplicate id {cid} (also entry #{seen_ids[cid]})")
        if color in seen_colors:
            raise ClassTableError(
                f"{desc}: duplicate color {list(color)} (also entry #{seen_colors[color]})"
            )
        seen_ids[cid] = pos
        seen_colors[color] = pos
        entries.append(ClassEntry(cid, raw["label"], color, risk))

    entries.sort(key=lambda e: e.id)
    for expected, e in enumerate(entries):
        if e.id != expected:
            raise ClassTableError(
                f"non-contiguous ids: expected id {expected}, found id {e.id} ({e.label!r})"
            )
    return ClassTable(tuple(entries))


def load_class_table(path: str | Path | None = None) -> ClassTable:
    """Load a class table from a JSON file; ``None`` loads the shipped default."""
    if path is None:
        text = resources.files("landrisk.data").joinpath("classes_sdd.json").read_text()
    else:
        text = Path(path).read_text()
    return build_class_table(json.loads(text))


def default_class_table() -> ClassTable:
    return load_class_table(None)


def validate_labels(labels: np.ndarray, n_classes: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim != 2 or labels.shape[0] == 0 or labels.shape[1] == 0:
        raise LabelError(f"label map must be a non-empty 2-D array, got shape {labels.shape}")
    if not np.issubdtype(labels.dtype, np.integer):
        raise LabelError(f"label map must hold integers, got dtype {labels.dtype}")
    if np.issubdtype(labels.dtype, np.unsignedinteger):
        if int(labels.max()) < n_classes:
            return labels
    bad = (labels < 0) | (labels >= n_classes)
    if bad.any():
        y, x = np.argwhere(bad)[0]
        raise LabelError(
            f"invalid class id {int(labels[y, x])} at pixel (x={x}, y={y}); "
            f"table has {n_classes} classes"
        )
    return labels


def validate_risk(risk: np.ndarray) -> np.ndarray:
    try:
        return validate_labels(risk, N_RISK_LEVELS)
    except LabelError as exc:
        raise LabelError(str(exc).replace("class id", "risk level")) from None


def map_class_to_risk(labels: np.ndarray, table: ClassTable) -> np.ndarray:
    """Apply the table's class -> risk column pointwise.

    Raises :class:`LabelError` with the pixel coordinates of the first
    out-of-range id.
    """
    labels = validate_labels(labels, len(table))
    return np.take(table.risk_lut, labels)


def argmax_labels(probs: np.ndarray, table: ClassTable | None = None) -> np.ndarray:
    """Decode per-pixel class scores into a label map.

    Ties go to the lowest class id. If ``table`` is given, the channel count
    must match its size.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 3:
        raise LabelError(f"probability map must be (height, width, channels), got {probs.shape}")
    if table is not None and probs.shape[2] != len(table):
        raise LabelError(
            f"probability map has {probs.shape[2]} channels but the class table has {len(table)}"
        )
    if not np.isfinite(probs).all():
        raise LabelError("probability map contains non-finite scores")
    # np.argmax returns the first maximal index
    out_dtype = np.uint8 if probs.shape[2] <= 256 else np.int32
    return np.argmax(probs, axis=2).astype(out_dtype)
