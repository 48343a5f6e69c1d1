"""Render the four figure kinds from entflow outputs.

`render` returns a structural-metadata dict (kinds, series counts, axis
scales and ranges, inset presence, input checksum); the same dict is
embedded as JSON in the PNG metadata, so golden tests can compare structure
without comparing pixels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .io import (FiguresError, input_checksum, read_curves,  # noqa: E402
                 read_json_table, read_moments)

KINDS = ("collapse", "histogram", "covariance", "fss")
_RC = {"font.family": "DejaVu Sans", "font.size": 9, "figure.dpi": 100,
       "savefig.dpi": 100}


@dataclass
class FigureSpec:
    kind: str
    inputs: dict[str, str]
    out: str
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FiguresError(
                f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.out:
            raise FiguresError("spec is missing the output image path")


def load_spec(path: str) -> FigureSpec:
    doc = read_json_table(path, required=("kind", "inputs"))
    style = dict(doc.get("style", {}))
    out = doc.get("out") or style.pop("out", None)
    if out is None:
        raise FiguresError(f"{path}: missing output image path "
                           "('out' at top level or in style)")
    return FigureSpec(kind=doc["kind"], inputs=dict(doc["inputs"]),
                      out=out, style=style)


def _require(spec: FigureSpec, *names: str) -> list[str]:
    missing = [n for n in names if n not in spec.inputs]
    if missing:
        raise FiguresError(
            f"{spec.kind} figure requires inputs {names}; missing {missing}")
    return [spec.inputs[n] for n in names]


def _axis_meta(ax) -> dict:
    # one series per container (errorbar), free line, or step patch; artists
    # owned by a container are not double-counted
    owned = set()
    for cont in ax.containers:
        for art in cont.get_children():
            owned.add(art)
    n_series = (len(ax.containers)
                + sum(1 for l in ax.get_lines() if l not in owned)
                + sum(1 for p in ax.patches if p not in owned))
    return {
        "xscale": ax.get_xscale(),
        "yscale": ax.get_yscale(),
        "x_range": [float(v) for v in ax.get_xlim()],
        "y_range": [float(v) for v in ax.get_ylim()],
        "n_series": n_series,
        "xlabel": ax.get_xlabel(),
        "ylabel": ax.get_ylabel(),
    }


def _maybe_normalize(curves, style):
    if not style.get("normalize", False):
        return curves
    peak = max(abs(c.y).max() for c in curves)
    if peak == 0:
        return curves
    for c in curves:
        c.y = c.y / peak
        c.yerr = c.yerr / peak
    return curves


def _render_collapse(spec: FigureSpec, fig):
    (curves_path,) = _require(spec, "curves")
    curves = _maybe_normalize(read_curves(curves_path), spec.style)
    ax = fig.add_subplot(111)
    for c in curves:
        ax.errorbar(c.x, c.y, yerr=c.yerr, label=c.label, marker="o",
                    markersize=3, linewidth=1)
    if spec.style.get("log_x", True):
        ax.set_xscale("log")
    ax.set_xlabel(spec.style.get("xlabel", "N Lambda"))
    ax.set_ylabel(spec.style.get("ylabel", "<R1>"))
    ax.legend(fontsize=7)
    axes = {"main": ax}
    if "raw_curves" in spec.inputs:
        raw = _maybe_normalize(read_curves(spec.inputs["raw_curves"]),
                               spec.style)
        ins = ax.inset_axes([0.55, 0.12, 0.4, 0.35])
        for c in raw:
            ins.plot(c.x, c.y, linewidth=1)
        if spec.style.get("log_x", True):
            ins.set_xscale("log")
        ins.set_xlabel(spec.style.get("inset_xlabel", "raw parameter"),
                       fontsize=7)
        ins.tick_params(labelsize=6)
        axes["inset"] = ins
    return axes


def _render_histogram(spec: FigureSpec, fig):
    (hist_path,) = _require(spec, "hist")
    doc = read_json_table(hist_path, required=("edges", "histograms"))
    edges = doc["edges"]
    combos = sorted(doc["histograms"])
    if not combos:
        raise FiguresError(f"{hist_path}: empty histogram table")
    axes = {}
    for i, combo in enumerate(combos):
        ax = fig.add_subplot(1, len(combos), i + 1)
        counts = doc["histograms"][combo]
        if len(counts) != len(edges) - 1:
            raise FiguresError(
                f"{hist_path}: histogram {combo!r} has {len(counts)} bins "
                f"for {len(edges)} edges")
        ax.stairs(counts, edges, fill=True)
        ax.set_title(str(combo), fontsize=8)
        ax.set_xlabel(spec.style.get("xlabel", "R1"))
        if i == 0:
            ax.set_ylabel(spec.style.get("ylabel", "density"))
        axes[f"panel{i}"] = ax
    return axes


def _render_covariance(spec: FigureSpec, fig):
    (moments_path,) = _require(spec, "moments")
    cols = read_moments(moments_path,
                        required=("N_Lambda", "cov_R0_R1", "q_minus_r1sq"))
    ax = fig.add_subplot(111)
    m = cols["N_Lambda"] > 0
    ax.plot(cols["N_Lambda"][m], abs(cols["cov_R0_R1"][m]),
            marker="o", markersize=3, label="|cov(R0, R1)|")
    ax.plot(cols["N_Lambda"][m], cols["q_minus_r1sq"][m],
            marker="s", markersize=3, label="Q - <R1^2>")
    ax.set_xscale("log")
    ax.set_xlabel("N Lambda")
    ax.legend(fontsize=7)
    return {"main": ax}


def _curve_system_size(label: str) -> float:
    """Aggregate labels are '|'-joined fields with the size second
    (model|L|...)."""
    parts = label.split("|")
    if len(parts) < 2:
        raise FiguresError(
            f"fss figure needs 'model|L|...' curve labels; got {label!r}")
    try:
        return float(parts[1])
    except ValueError:
        raise FiguresError(
            f"curve label {label!r}: second field {parts[1]!r} is not a "
            "system size") from None


def _render_fss(spec: FigureSpec, fig):
    curves_path, fit_path = _require(spec, "curves", "fit")
    curves = read_curves(curves_path)
    fit = read_json_table(fit_path, required=("h_c", "nu"))
    ax = fig.add_subplot(111)
    ins = ax.inset_axes([0.55, 0.55, 0.4, 0.4])
    for c in curves:
        L = _curve_system_size(c.label)
        ax.plot(c.x, c.y, marker="o", markersize=3, label=c.label)
        ins.plot((c.x - fit["h_c"]) * L ** (1.0 / fit["nu"]), c.y,
                 linewidth=1)
    ax.axvline(fit["h_c"], color="0.5", linestyle="--", linewidth=0.8)
    ax.set_xlabel(spec.style.get("xlabel", "h"))
    ax.set_ylabel(spec.style.get("ylabel", "N Lambda"))
    if spec.style.get("log_y", False):
        ax.set_yscale("log")
        ins.set_yscale("log")
    ax.legend(fontsize=7)
    ins.set_xlabel("(h - h_c) L^(1/nu)", fontsize=7)
    ins.tick_params(labelsize=6)
    return {"main": ax, "inset": ins}


_RENDERERS = {
    "collapse": _render_collapse,
    "histogram": _render_histogram,
    "covariance": _render_covariance,
    "fss": _render_fss,
}


def render(spec: FigureSpec) -> dict:
    """Render the figure to ``spec.out`` and return its structural metadata."""
    checksum = input_checksum(
        [p for p in spec.inputs.values()])
    with plt.rc_context(_RC):
        fig = plt.figure(figsize=tuple(spec.style.get("figsize", (5, 3.5))))
        try:
            axes = _RENDERERS[spec.kind](spec, fig)
            meta = {
                "kind": spec.kind,
                "axes": {name: _axis_meta(ax) for name, ax in axes.items()},
                "inset": "inset" in axes,
                "panels": sum(k.startswith("panel") for k in axes),
                "input_sha256": checksum,
            }
            fig.savefig(spec.out, format="png",
                        metadata={"entflow-figure-meta": json.dumps(
                            meta, sort_keys=True)})
        finally:
            plt.close(fig)
    return meta
