"""Plot data and figures from comparison reports.

Every figure is drawn from a CSV written first, so the numbers behind a
plot are always on disk next to it.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Sequence

import numpy as np

TRADEOFF_FIELDS = ("bdr_psnr", "bdr_xpsnr", "bdr_vmaf", "bd_psnr", "bd_xpsnr", "bd_vmaf",
                   "bdde", "delta_t_d")
RUNG_FIELDS = ("target_kbps", "achieved_kbps", "resolution", "qp", "quality",
               "decode_time_s", "carried")


def method_label(method: dict) -> str:
    params = method.get("params") or {}
    extras = [f"{k}={params[k]:g}" if isinstance(params[k], (int, float)) else f"{k}={params[k]}"
              for k in sorted(params) if params[k] is not None]
    name = method["strategy"]
    if name in ("dynres", "timecap"):
        name = f"{name}-{method.get('metric', '')}"
    return " ".join([name] + extras)


def sweep_value(method: dict) -> float | None:
    params = method.get("params") or {}
    for k in ("alpha_j", "alpha_m", "tau_limit"):
        if params.get(k) is not None:
            return float(params[k])
    return None


def _order(reports: Sequence[dict]) -> list[dict]:
    def key(r):
        v = sweep_value(r["method"])
        return (r["method"]["strategy"], v is None, v if v is not None else 0.0,
                method_label(r["method"]))
    return sorted(reports, key=key)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def _csv(header, rows, comments=()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def tradeoff_table(reports: Sequence[dict]) -> str:
    """One row per report: mean BD metrics against the reference and mean decode-time delta."""
    rows = []
    for r in _order(reports):
        agg = r["aggregate"]
        rows.append([method_label(r["method"]), r["method"]["strategy"], sweep_value(r["method"])]
                    + [agg[f]["mean"] for f in TRADEOFF_FIELDS]
                    + [agg["delta_t_d"]["count"], method_label(r["reference"])])
    return _csv(("label", "strategy", "sweep_value") + TRADEOFF_FIELDS
                + ("sequences", "reference"), rows)


def ladder_table(reports: Sequence[dict]) -> str:
    rows = []
    for r in _order(reports):
        label = method_label(r["method"])
        for rung in r.get("method_rungs", ()):
            rows.append([label, rung["sequence_id"], rung["rung"]]
                        + [rung.get(f) for f in RUNG_FIELDS])
    return _csv(("label", "sequence_id", "rung") + RUNG_FIELDS, rows)


def _values(report: dict, field: str) -> list[float]:
    return [float(rung[field]) for rung in report.get("method_rungs", ())]


def bin_edges(reports: Sequence[dict], field: str, bins: int) -> np.ndarray:
    """Shared edges across all reports so the distributions are comparable."""
    allv = [v for r in reports for v in _values(r, field)]
    if not allv:
        return np.linspace(0.0, 1.0, bins + 1)
    return np.histogram_bin_edges(allv, bins=bins)


def histogram_table(reports: Sequence[dict], field: str, edges: np.ndarray) -> str:
    rows = []
    widths = np.diff(edges)
    for r in _order(reports):
        vals = _values(r, field)
        counts, _ = np.histogram(vals, bins=edges)
        n = len(vals)
        for i, c in enumerate(counts):
            density = float(c) / (n * widths[i]) if n and widths[i] > 0 else 0.0
            rows.append([method_label(r["method"]), i, float(edges[i]), float(edges[i + 1]),
                         int(c), density])
    comment = "bin_edges: " + ",".join(repr(float(e)) for e in edges)
    return _csv(("label", "bin", "lower", "upper", "count", "density"), rows,
                comments=(f"field: {field}", comment))


def resolution_table(reports: Sequence[dict]) -> str:
    levels = sorted({int(rung["resolution"]) for r in reports
                     for rung in r.get("method_rungs", ())})
    rows = []
    for r in _order(reports):
        res = [int(rung["resolution"]) for rung in r.get("method_rungs", ())]
        for level in levels:
            c = res.count(level)
            rows.append([method_label(r["method"]), level, c, c / len(res) if res else 0.0])
    return _csv(("label", "resolution", "count", "fraction"), rows,
                comments=("levels: " + ",".join(str(x) for x in levels),))


# -- figures ---------------------------------------------------------------

def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({"font.size": 9, "axes.grid": True, "grid.alpha": 0.3,
                         "svg.hashsalt": "rqtladder", "figure.dpi": 100})
    return plt


def _save(fig, path: Path) -> None:
    fig.savefig(path, dpi=120, metadata={"Software": None}, bbox_inches="tight")


def plot_tradeoff(reports: Sequence[dict], path: Path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.5, 4))
    by_strategy: dict[str, list[tuple]] = {}
    for r in _order(reports):
        agg = r["aggregate"]
        x, y = agg["bdr_xpsnr"]["mean"], agg["delta_t_d"]["mean"]
        if x is None or y is None:
            continue
        by_strategy.setdefault(r["method"]["strategy"], []).append(
            (x, y, method_label(r["method"])))
    for strategy, pts in by_strategy.items():
        xs, ys = [p[0] for p in pts], [p[1] for p in pts]
        ax.plot(xs, ys, marker="o", linestyle="-" if len(pts) > 1 else "none", label=strategy)
        for x, y, lab in pts:
            ax.annotate(lab.split(" ", 1)[-1] if " " in lab else "", (x, y), fontsize=6,
                        xytext=(3, 3), textcoords="offset points")
    ax.axhline(0.0, color="0.4", lw=0.8)
    ax.axvline(0.0, color="0.4", lw=0.8)
    ax.set_xlabel("BD-rate (XPSNR) [%]")
    ax.set_ylabel("decoding time difference [%]")
    ax.legend(fontsize=7)
    _save(fig, path)
    plt.close(fig)


def plot_histograms(reports: Sequence[dict], field: str, edges: np.ndarray, xlabel: str,
                    path: Path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    for r in _order(reports):
        vals = _values(r, field)
        if vals:
            ax.hist(vals, bins=edges, density=True, histtype="step",
                    label=method_label(r["method"]))
    ax.set_xlabel(xlabel)
    ax.set_ylabel("density")
    ax.legend(fontsize=6)
    _save(fig, path)
    plt.close(fig)


def write_report(reports: Sequence[dict], out_dir: Path, bins: int = 10,
                 figures: bool = True) -> list[Path]:
    """Write plot-data CSVs (and PNG figures) for ``reports``; return the written paths."""
    if not reports:
        raise ValueError("no comparison reports given")
    if bins < 1:
        raise ValueError("bins must be at least 1")
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def put(name: str, text: str):
        p = out_dir / name
        p.write_text(text)
        written.append(p)

    time_edges = bin_edges(reports, "decode_time_s", bins)
    quality_edges = bin_edges(reports, "quality", bins)
    put("tradeoff.csv", tradeoff_table(reports))
    put("ladder_rungs.csv", ladder_table(reports))
    put("hist_decode_time.csv", histogram_table(reports, "decode_time_s", time_edges))
    put("hist_quality.csv", histogram_table(reports, "quality", quality_edges))
    put("hist_resolution.csv", resolution_table(reports))
    if figures:
        plot_tradeoff(reports, out_dir / "tradeoff.png")
        plot_histograms(reports, "decode_time_s", time_edges, "decoding time [s]",
                        out_dir / "hist_decode_time.png")
        plot_histograms(reports, "quality", quality_edges, "quality",
                        out_dir / "hist_quality.png")
        written += [out_dir / n for n in ("tradeoff.png", "hist_decode_time.png",
                                          "hist_quality.png")]
    return written
