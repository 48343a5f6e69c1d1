"""Parameter sweeps, record persistence and the curve-level analyses:
NLambda aggregation, collapse scoring, finite-size scaling and fixed-NLambda
histograms.

Records are appended to JSONL (first line is a schema header); curves are
written as CSV with a schema comment.  A fixed config reproduces the same
records byte for byte.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy import optimize
from scipy.stats import ks_2samp

from . import complexity, entangle, models, spectral

RECORD_SCHEMA = {"schema": "entflow-records", "version": 1}
CURVE_SCHEMA = "# entflow-curves v1"
Y_PREFACTOR = "closed_form_Np1"   # QREM closed form uses 1/(2 (N+1) gamma)
DESK_L_LIMIT = 12


class ConfigError(ValueError):
    pass


class AnalysisError(RuntimeError):
    pass


@dataclass
class Curve:
    x: np.ndarray
    y: np.ndarray
    yerr: np.ndarray
    label: str
    counts: np.ndarray = field(default_factory=lambda: np.array([]))


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


def validate_config(config: dict) -> dict:
    cfg = dict(config)
    try:
        model = models.Model(cfg["model"])
        cfg["L"] = int(cfg["L"])
        cfg.setdefault("gamma", 0.5 if model is models.Model.QREM else 1.0)
        cfg.setdefault("E_targets", [0.0])
        cfg.setdefault("realizations", 50)
        cfg.setdefault("window_fraction", 0.01)
        cfg.setdefault("omega_estimator", "cross_abs")
        cfg.setdefault("log_base", 2)
        cfg.setdefault("master_seed", 0)
        cfg.setdefault("chi0_recipe",
                       "QREM_mean" if model is models.Model.QREM else "RFHM_both")
        if model is models.Model.RFHM:
            cfg.setdefault("h0", 10.0)
            cfg.setdefault("D0", 1.0)
        params = cfg["params"]
        if model is models.Model.QREM:
            cfg["_cells"] = [{"b": b} for b in _as_list(params["b"])]
        else:
            cfg["_cells"] = [{"J": params.get("J", 1.0), "D": D, "h": h}
                             for D in _as_list(params["D"])
                             for h in _as_list(params["h"])]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config: {exc}") from exc
    if cfg["L"] > DESK_L_LIMIT and not cfg.get("allow_large", False):
        raise ConfigError(
            f"L = {cfg['L']} beyond desk scale (limit {DESK_L_LIMIT}); "
            "set allow_large to override")
    return cfg


def _cell_key(cell_params: dict, E: float) -> str:
    return json.dumps({"params": cell_params, "E": E}, sort_keys=True)


def _completed_cells(out_path: str) -> set[str]:
    done = set()
    if os.path.exists(out_path):
        with open(out_path) as fh:
            for line in fh:
                rec = json.loads(line)
                if "schema" in rec:
                    continue
                done.add(_cell_key(rec["params"], rec["E_target"]))
    return done


def run(config: dict, out_path: str, progress=None) -> int:
    """Execute the sweep and append one JSONL record per selected eigenstate.

    Completed (cell, E) groups found in ``out_path`` are skipped, making
    reruns resumable.  Returns the number of records written.
    """
    cfg = validate_config(config)
    model = models.Model(cfg["model"])
    done = _completed_cells(out_path)
    new_file = not os.path.exists(out_path)
    written = 0

    with open(out_path, "a") as fh:
        if new_file:
            header = dict(RECORD_SCHEMA)
            header["config"] = {k: v for k, v in cfg.items()
                                if not k.startswith("_")}
            fh.write(json.dumps(header, sort_keys=True) + "\n")

        for cell in cfg["_cells"]:
            pending = [E for E in cfg["E_targets"]
                       if _cell_key(cell, E) not in done]
            if not pending:
                continue
            for rec in _run_cell(cfg, model, cell, pending, progress):
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
                written += 1
            fh.flush()
    return written


def _run_cell(cfg, model, cell, e_targets, progress):
    """All records for one parameter cell: diagonalize every realization once,
    window per target energy, then attach the cell-level complexity point."""
    spec = models.build_spec(model, cfg["L"], cell, cfg["gamma"],
                             cfg["master_seed"])
    sampler = (models.sample_qrem if model is models.Model.QREM
               else models.sample_rfhm)
    if model is models.Model.QREM:
        y = complexity.y_qrem(cell["b"], cfg["L"], cfg["gamma"])
    else:
        y = complexity.y_rfhm(cell["h"], cell["D"], cfg["h0"], cfg["D0"],
                              cfg["gamma"])

    per_E = {E: {"windows": [], "states": []} for E in e_targets}
    for r in range(cfg["realizations"]):
        try:
            sample = sampler(spec, r)
            evals, evecs = spectral.diagonalize(sample)
        except spectral.SpectralError as exc:
            if progress:
                progress(f"realization {r} skipped: {exc}")
            continue
        for E in e_targets:
            win = spectral.select_window(
                evals, evecs, E, count=cfg.get("window_count"),
                fraction=None if cfg.get("window_count")
                else cfg["window_fraction"])
            per_E[E]["windows"].append(win)
            for s in range(win.N_f):
                vec = win.eigenvectors[:, s]
                L_half = cfg["L"] // 2
                sm = entangle.state_matrix(
                    vec, 2 ** L_half, 2 ** (cfg["L"] - L_half),
                    basis=sample.basis if sample.basis.sector is not None
                    else None)
                meas = entangle.measures(
                    entangle.schmidt_spectrum(sm),
                    log_base=_base(cfg["log_base"]), alphas=(2.0,),
                    energy=float(win.eigenvalues[s]))
                ip, ips = spectral.ipr(vec)
                per_E[E]["states"].append(
                    (r, s, meas, ip, ips, sample.seed_used))
        if progress:
            progress(f"cell {cell} realization {r} done")

    for E in e_targets:
        windows = per_E[E]["windows"]
        if len(windows) < 2:
            continue
        omega = spectral.omega_e(windows, cfg["omega_estimator"])
        delta_e = float(np.mean([w.delta_e for w in windows]))
        ipr_mean = float(np.mean([w.ipr_norm for w in windows]))
        point = complexity.lambda_psi(
            y, delta_e, omega, ipr_mean, spec.N,
            recipe=cfg["chi0_recipe"], model=model.value)
        for r, s, meas, ip, ips, seed_used in per_E[E]["states"]:
            yield {
                "model": model.value, "L": cfg["L"], "params": cell,
                "gamma": cfg["gamma"], "E_target": E,
                "realization_index": r, "state_index": s,
                "energy": meas.energy,
                "R1": meas.R1, "R0": meas.R0, "Q": meas.Q,
                "renyi2": meas.renyi.get(2.0),
                "delta_e": delta_e, "ipr_norm": ip, "ipr_std": ips,
                "omega_e": omega, "estimator_name": cfg["omega_estimator"],
                "y_minus_y0": y, "y_prefactor": Y_PREFACTOR,
                "lambda": point.lam, "n_lambda": point.n_lambda,
                "chi0_recipe": point.chi0_recipe,
                "log_base": cfg["log_base"], "seed_used": seed_used,
            }


def _base(log_base) -> float:
    return math.e if log_base in ("e", None) else float(log_base)


# ---------------------------------------------------------------------------
# record / curve IO
# ---------------------------------------------------------------------------

def read_records(path: str) -> list[dict]:
    recs = []
    with open(path) as fh:
        for line in fh:
            doc = json.loads(line)
            if "schema" not in doc:
                recs.append(doc)
    return recs


def write_curves_csv(curves: list[Curve], path: str) -> None:
    with open(path, "w") as fh:
        fh.write(CURVE_SCHEMA + "\n")
        fh.write("label,x,y,yerr,count\n")
        for c in curves:
            counts = (c.counts if len(c.counts) else np.ones_like(c.x))
            for x, y, e, n in zip(c.x, c.y, c.yerr, counts):
                fh.write(f"{c.label},{float(x)!r},{float(y)!r},"
                         f"{float(e)!r},{int(n)}\n")


def read_curves_csv(path: str) -> list[Curve]:
    rows: dict[str, list] = {}
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith(CURVE_SCHEMA):
            raise AnalysisError(f"{path}: not an entflow curves file")
        fh.readline()  # column header
        for line in fh:
            label, x, y, e, n = line.rstrip("\n").rsplit(",", 4)
            rows.setdefault(label, []).append(
                (float(x), float(y), float(e), int(n)))
    curves = []
    for label, pts in rows.items():
        arr = np.array(pts)
        curves.append(Curve(arr[:, 0], arr[:, 1], arr[:, 2], label,
                            arr[:, 3]))
    return curves


# ---------------------------------------------------------------------------
# aggregation and collapse
# ---------------------------------------------------------------------------

def _r1_nats(rec: dict) -> float:
    return rec["R1"] * math.log(_base(rec.get("log_base", "e")))


def aggregate(records: list[dict], measure: str = "mean_R1",
              x_field: str = "n_lambda", n_bins: int = 40,
              label_fields: tuple[str, ...] = ("model", "L", "E_target"),
              normalize: bool = False) -> list[Curve]:
    """Bin records in log-spaced x bins per label; y is the per-bin mean R1
    (``mean_R1``) or unbiased variance (``var_R1``), with standard errors."""
    if not records:
        raise AnalysisError("no records")
    groups: dict[str, list[dict]] = {}
    for rec in sorted(records, key=lambda r: json.dumps(r, sort_keys=True)):
        label = "|".join(str(_field(rec, f)) for f in label_fields)
        groups.setdefault(label, []).append(rec)

    xs = np.array([_field(r, x_field) for r in records], dtype=float)
    xs = xs[xs > 0]
    if xs.size == 0 or xs.min() == xs.max():
        edges = np.array([0.0, np.inf])
    else:
        edges = np.geomspace(xs.min() * 0.999, xs.max() * 1.001, n_bins + 1)

    curves = []
    for label, recs in groups.items():
        x = np.array([_field(r, x_field) for r in recs], dtype=float)
        y = np.array([_r1_nats(r) for r in recs])
        bx, by, be, bn = [], [], [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            m = (x >= lo) & (x < hi)
            n = int(m.sum())
            if n == 0:
                continue
            if measure == "mean_R1":
                val = float(y[m].mean())
                err = float(y[m].std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
            elif measure == "var_R1":
                if n < 2:
                    continue
                val = float(y[m].var(ddof=1))
                err = val * math.sqrt(2.0 / (n - 1))
            else:
                raise AnalysisError(f"unknown measure {measure!r}")
            bx.append(float(np.exp(np.mean(np.log(x[m])))) if x[m].min() > 0
                      else float(x[m].mean()))
            by.append(val)
            be.append(err)
            bn.append(n)
        if not bx:
            continue
        by, be = np.array(by), np.array(be)
        if normalize and np.max(np.abs(by)) > 0:
            scale = float(np.max(np.abs(by)))
            by, be = by / scale, be / scale
        curves.append(Curve(np.array(bx), by, be, label, np.array(bn)))
    return curves


def _field(rec: dict, name: str):
    if name in rec:
        return rec[name]
    if name in rec.get("params", {}):
        return rec["params"][name]
    raise AnalysisError(f"record has no field {name!r}")


def collapse_quality(curves: list[Curve], n_bins: int = 20,
                     log_x: bool = True) -> float:
    """Deviation of the curve family from its pooled master curve.

    quality = sqrt( sum over curves of mean((y - master)^2) ) normalized by
    the master's dynamic range; points outside the common x support are
    ignored.  0 for identical curves; lower is better.
    """
    if len(curves) < 2:
        raise AnalysisError("need >= 2 curves")
    lo = max(c.x.min() for c in curves)
    hi = min(c.x.max() for c in curves)
    if not (hi >= lo):
        raise AnalysisError("curves have no overlapping support")

    def keep(c):
        m = (c.x >= lo) & (c.x <= hi)
        return c.x[m], c.y[m]

    pts = [keep(c) for c in curves]
    if any(x.size == 0 for x, _ in pts):
        raise AnalysisError("curves have no overlapping support")
    allx = np.concatenate([x for x, _ in pts])
    if log_x and allx.min() > 0:
        t = np.log(allx)
        edges = np.linspace(t.min(), t.max() + 1e-12, n_bins + 1)
        coord = [np.log(x) for x, _ in pts]
    else:
        edges = np.linspace(allx.min(), allx.max() + 1e-12, n_bins + 1)
        coord = [x for x, _ in pts]

    bins = [np.clip(np.digitize(c, edges) - 1, 0, n_bins - 1) for c in coord]
    # per-curve bin means, compared against the pooled (master) bin means, so
    # that identical curves score exactly 0 regardless of the bin width
    curve_means = np.full((len(pts), n_bins), np.nan)
    for i, ((_, y), b) in enumerate(zip(pts, bins)):
        for k in np.unique(b):
            curve_means[i, k] = y[b == k].mean()
    valid = ~np.isnan(curve_means)
    occ = valid.sum(axis=0)
    master = np.where(valid, curve_means, 0.0).sum(axis=0)
    master = np.where(occ > 0, master / np.maximum(occ, 1), np.nan)
    mvals = master[~np.isnan(master)]
    rng_ = float(mvals.max() - mvals.min())
    dev = curve_means - master[None, :]
    if rng_ == 0:
        # all curves flat at the same level: perfect, or degenerate input
        return 0.0 if np.nanmax(np.abs(dev), initial=0.0) == 0 else float("inf")
    total = sum(float(np.nanmean(row ** 2)) for row in dev
                if np.any(~np.isnan(row)))
    return math.sqrt(total) / rng_


# ---------------------------------------------------------------------------
# finite-size scaling
# ---------------------------------------------------------------------------

@dataclass
class FssResult:
    h_c: float
    nu: float
    quality: float
    degenerate: bool = False


def fss_fit(table: dict[int, tuple[np.ndarray, np.ndarray]],
            h_c_range: tuple[float, float] | None = None,
            nu_range: tuple[float, float] = (0.3, 3.0),
            normalize: bool = True) -> FssResult:
    """Fit (h_c, nu) so that curves y_L(h) collapse against (h - h_c) L^(1/nu).

    ``table`` maps system size L to (h grid, y values).  Coarse grid search
    followed by alternating golden-section refinement of each coordinate.
    """
    if len(table) < 3:
        raise AnalysisError("need >= 3 system sizes")
    for L, (h, y) in table.items():
        if len(h) < 8:
            raise AnalysisError(f"need >= 8 h-points per size, L={L} has {len(h)}")

    curves = {L: (np.asarray(h, float), np.asarray(y, float))
              for L, (h, y) in table.items()}
    # one shared scale: per-curve normalization would distort the collapse
    scale = max(float(np.max(np.abs(y))) for _, y in curves.values())
    if normalize and scale > 0:
        curves = {L: (h, y / scale) for L, (h, y) in curves.items()}

    spread = max(float(np.ptp(y)) for _, y in curves.values())
    if spread < 1e-12:
        return FssResult(float("nan"), float("nan"), 0.0, degenerate=True)

    all_h = np.concatenate([h for h, _ in curves.values()])

    yrange = max(float(np.ptp(y)) for _, y in curves.values())

    def objective(h_c, nu):
        # pairwise interpolation residual on the overlapping support; smooth
        # in (h_c, nu) and exactly zero for a perfect collapse
        resc = [((h - h_c) * L ** (1.0 / nu), y)
                for L, (h, y) in curves.items()]
        total = 0.0
        pairs = 0
        for i in range(len(resc)):
            xi, yi = resc[i]
            for j in range(i + 1, len(resc)):
                xj, yj = resc[j]
                lo = max(xi.min(), xj.min())
                hi = min(xi.max(), xj.max())
                m = (xi >= lo) & (xi <= hi)
                if not m.any():
                    continue
                total += float(np.mean(
                    (yi[m] - np.interp(xi[m], xj, yj)) ** 2))
                pairs += 1
        if pairs == 0:
            return float("inf")
        return math.sqrt(total / pairs) / yrange

    if h_c_range is None:
        h_c_range = (float(all_h.min()), float(all_h.max()))
    hc_grid = np.linspace(*h_c_range, 25)
    nu_grid = np.geomspace(*nu_range, 15)
    best = (float("inf"), hc_grid[0], nu_grid[0])
    for hc in hc_grid:
        for nu in nu_grid:
            q = objective(hc, nu)
            if q < best[0]:
                best = (q, hc, nu)
    q, hc, nu = best

    res = optimize.minimize(
        lambda p: objective(p[0], p[1]), x0=[hc, nu],
        method="Nelder-Mead",
        bounds=[h_c_range, (nu_range[0] / 2, nu_range[1] * 2)],
        options={"xatol": 1e-5, "fatol": 1e-10, "maxiter": 400})
    if res.fun <= q:
        hc, nu, q = float(res.x[0]), float(res.x[1]), float(res.fun)
    return FssResult(float(hc), float(nu), float(q))




# ---------------------------------------------------------------------------
# fixed-NLambda histograms
# ---------------------------------------------------------------------------

def histogram(records: list[dict], n_lambda_window: tuple[float, float],
              bins: int = 30) -> dict:
    """Normalized R1 histograms per parameter combination inside the NLambda
    window, plus pairwise Kolmogorov-Smirnov distances."""
    lo, hi = n_lambda_window
    sel = [r for r in records if lo <= r["n_lambda"] <= hi]
    combos: dict[str, list[float]] = {}
    for r in sel:
        key = json.dumps({"params": r["params"], "E": r["E_target"]},
                         sort_keys=True)
        combos.setdefault(key, []).append(_r1_nats(r))
    if len(combos) < 2:
        raise AnalysisError(
            f"NLambda window [{lo}, {hi}] covers {len(combos)} parameter "
            "combination(s); need >= 2")

    all_r1 = np.concatenate([np.asarray(v) for v in combos.values()])
    edges = np.histogram_bin_edges(all_r1, bins=bins)
    hists = {k: np.histogram(v, bins=edges, density=True)[0]
             for k, v in combos.items()}
    keys = sorted(combos)
    ks = {}
    for i, a in enumerate(keys):
        for b in keys[i + 1:]:
            ks[(a, b)] = float(ks_2samp(combos[a], combos[b]).statistic)
    return {"edges": edges, "histograms": hists, "ks": ks,
            "counts": {k: len(v) for k, v in combos.items()}}
