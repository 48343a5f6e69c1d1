"""Parsers for the entflow external interfaces (curves CSV, moment-curve
CSV, and the JSON tables written by the `collapse`/`fss`/`hist`
subcommands).  Schema mismatches are reported with the offending column or
key."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np

CURVE_SCHEMA = "# entflow-curves v1"
CURVE_COLUMNS = ("label", "x", "y", "yerr", "count")


class FiguresError(RuntimeError):
    pass


@dataclass
class Curve:
    label: str
    x: np.ndarray
    y: np.ndarray
    yerr: np.ndarray
    counts: np.ndarray


def _check_header(path: str, first_line: str) -> None:
    if not first_line.startswith(CURVE_SCHEMA):
        raise FiguresError(
            f"{path}: missing schema header {CURVE_SCHEMA!r} "
            f"(got {first_line.strip()[:60]!r})")


def read_curves(path: str) -> list[Curve]:
    """Curves CSV: schema header, column header, then label,x,y,yerr,count."""
    if not os.path.exists(path):
        raise FiguresError(f"{path}: no such file")
    rows: dict[str, list] = {}
    with open(path) as fh:
        _check_header(path, fh.readline())
        header = fh.readline().strip()
        if tuple(header.split(",")) != CURVE_COLUMNS:
            raise FiguresError(
                f"{path}: expected columns {','.join(CURVE_COLUMNS)}, "
                f"got {header!r}")
        for ln, line in enumerate(fh, start=3):
            parts = line.rstrip("\n").rsplit(",", 4)
            if len(parts) != 5:
                raise FiguresError(f"{path}:{ln}: expected 5 columns")
            label = parts[0]
            vals = []
            for col, raw in zip(CURVE_COLUMNS[1:], parts[1:]):
                try:
                    vals.append(int(raw) if col == "count" else float(raw))
                except ValueError:
                    raise FiguresError(
                        f"{path}:{ln}: column {col!r}: "
                        f"cannot parse {raw!r}") from None
            rows.setdefault(label, []).append(vals)
    if not rows:
        raise FiguresError(f"{path}: no curve rows")
    curves = []
    for label, data in rows.items():
        arr = np.array(data, dtype=float)
        curves.append(Curve(label, arr[:, 0], arr[:, 1], arr[:, 2],
                            arr[:, 3].astype(int)))
    return curves


def read_moments(path: str, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    """Moment-curve CSV (one column block per moment, schema header first)."""
    if not os.path.exists(path):
        raise FiguresError(f"{path}: no such file")
    with open(path) as fh:
        _check_header(path, fh.readline())
        cols = fh.readline().strip().split(",")
        for name in required:
            if name not in cols:
                raise FiguresError(f"{path}: missing column {name!r} "
                                   f"(have {cols})")
        data = []
        for ln, line in enumerate(fh, start=3):
            parts = line.strip().split(",")
            if len(parts) != len(cols):
                raise FiguresError(
                    f"{path}:{ln}: expected {len(cols)} columns")
            try:
                data.append([float(v) for v in parts])
            except ValueError as exc:
                raise FiguresError(f"{path}:{ln}: {exc}") from None
    if not data:
        raise FiguresError(f"{path}: no data rows")
    arr = np.array(data)
    return {name: arr[:, i] for i, name in enumerate(cols)}


def read_json_table(path: str, required: tuple[str, ...]) -> dict:
    if not os.path.exists(path):
        raise FiguresError(f"{path}: no such file")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FiguresError(f"{path}: invalid JSON: {exc}") from None
    for key in required:
        if key not in doc:
            raise FiguresError(f"{path}: missing key {key!r}")
    return doc


def input_checksum(paths: list[str]) -> str:
    """sha256 over the concatenated bytes of all input files, in order."""
    h = hashlib.sha256()
    for p in sorted(paths):
        if not os.path.exists(p):
            raise FiguresError(f"{p}: no such file")
        with open(p, "rb") as fh:
            h.update(fh.read())
    return h.hexdigest()
