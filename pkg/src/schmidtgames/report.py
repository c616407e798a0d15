"""Render run artifacts into human-readable reports and figures.

A run directory (as written by the command-line entry points) holds JSON
artifacts: ``run.json`` (game kind, config echo, constants), the game
``transcript.json``, ``certificates.json``, and optionally ``verify.json``
plus delimited tables.  This module folds whatever is present into a single
``report.txt`` / ``report.json`` pair and renders PNG figures next to them.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be fixed first)

_FIG_DPI = 120


def write_csv(path: Path, rows: Sequence[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


def read_csv(path: Path) -> list[list[str]]:
    with open(path, newline="") as fh:
        return [row for row in csv.reader(fh)]


def format_table(headers: Sequence[str], rows: Sequence[Sequence]) -> str:
    """Fixed-width text table: headers, rule, then one line per row."""
    cells = [[str(h) for h in headers]] + [[str(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = []
    for idx, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _load_json(path: Path) -> Optional[dict]:
    if not path.exists():
        return None
    with open(path) as fh:
        return json.load(fh)


def _bob_radii(transcript: dict) -> list[float]:
    return [
        float(t["ball"]["radius"])
        for t in transcript.get("turns", [])
        if t["player"] == "bob" and t["verdict"] == "legal"
    ]


def _fig_radius_decay(transcript: dict, out: Path) -> Optional[Path]:
    radii = _bob_radii(transcript)
    if len(radii) < 2:
        return None
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(range(len(radii)), radii, marker="o", markersize=3, linewidth=1)
    ax.set_xlabel("round")
    ax.set_ylabel("ball radius")
    ax.set_title("radius decay")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out, dpi=_FIG_DPI)
    plt.close(fig)
    return out


def _fig_windows(verify: dict, out: Path) -> Optional[Path]:
    windows = (verify.get("badness") or {}).get("windows") or []
    if not windows:
        return None
    exps = [w["exponent"] for w in windows]
    mins = [w["minimum"] for w in windows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(exps, mins, width=0.8)
    if any(m > 0 for m in mins):
        ax.set_yscale("log")
    cross = verify.get("crosscheck") or {}
    if cross.get("bound"):
        ax.axhline(cross["bound"], color="crimson", linewidth=1, label="certified floor")
        ax.legend()
    ax.set_xlabel("dyadic window exponent")
    ax.set_ylabel("minimum weighted distance")
    ax.set_title("per-window minima")
    fig.tight_layout()
    fig.savefig(out, dpi=_FIG_DPI)
    plt.close(fig)
    return out


def _fig_escape(verify: dict, out: Path) -> Optional[Path]:
    rows = verify.get("certified_rows") or []
    if not rows:
        return None
    ks = [r["k"] for r in rows]
    dists = [float(r["distance"]) for r in rows]
    bounds = [float(r["bound"]) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(ks, dists, "o", label="measured distance")
    ax.semilogy(ks, bounds, "x--", label="certified bound", color="crimson")
    ax.set_xlabel("matrix index k")
    ax.set_ylabel("distance to target set")
    ax.set_title("protected distances")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=_FIG_DPI)
    plt.close(fig)
    return out


def _fig_points(points_csv: Path, out: Path) -> Optional[Path]:
    rows = read_csv(points_csv)
    if len(rows) < 2:
        return None
    data = [[float(v) for v in row] for row in rows[1:]]
    fig, ax = plt.subplots(figsize=(5, 5))
    if len(data[0]) == 1:
        xs = [d[0] for d in data]
        ax.plot(xs, [0.0] * len(xs), ".", markersize=1)
        ax.set_yticks([])
    else:
        ax.plot([d[0] for d in data], [d[1] for d in data], ".", markersize=1)
        ax.set_aspect("equal")
    ax.set_title("sampled limit set")
    fig.tight_layout()
    fig.savefig(out, dpi=_FIG_DPI)
    plt.close(fig)
    return out


def _constants_rows(run: dict) -> list[list]:
    return [[k, v] for k, v in sorted((run.get("constants") or {}).items())]


def _transcript_summary(transcript: dict) -> dict:
    radii = _bob_radii(transcript)
    return {
        "rounds": len(radii),
        "outcome": transcript.get("outcome"),
        "opening_radius": radii[0] if radii else None,
        "final_radius": radii[-1] if radii else None,
    }


def render_report(run_dir: Path) -> list[Path]:
    """Fold the artifacts in ``run_dir`` into report.txt/report.json + PNGs."""
    run_dir = Path(run_dir)
    run = _load_json(run_dir / "run.json")
    transcript = _load_json(run_dir / "transcript.json")
    certificates = _load_json(run_dir / "certificates.json")
    verify = _load_json(run_dir / "verify.json")
    fractal = _load_json(run_dir / "fractal.json")
    if not any((run, transcript, certificates, verify, fractal)):
        raise FileNotFoundError(f"no artifacts found in {run_dir}")

    written: list[Path] = []
    sections: list[str] = []
    summary: dict = {}

    if run is not None:
        summary["run"] = run
        sections.append(f"game: {run.get('game', '?')}  seed: {run.get('seed', '?')}")
        const_rows = _constants_rows(run)
        if const_rows:
            sections.append("constants\n" + format_table(["name", "value"], const_rows))

    if transcript is not None:
        ts = _transcript_summary(transcript)
        summary["transcript"] = ts
        sections.append(
            "transcript\n"
            + format_table(
                ["rounds", "opening radius", "final radius", "outcome"],
                [[ts["rounds"], ts["opening_radius"], ts["final_radius"],
                  (ts["outcome"] or {}).get("kind")]],
            )
        )
        fig = _fig_radius_decay(transcript, run_dir / "radius_decay.png")
        if fig:
            written.append(fig)

    if certificates is not None:
        summary["certificate_count"] = len(certificates)
        rows = []
        for c in certificates[:40]:
            if "witness_vector" in c:
                rows.append(["witness", f"{c['phase']}@{c['index']}",
                             str(c["witness_vector"])])
            elif "ks" in c:
                rows.append(["stage", c.get("stage"), f"ks={c['ks']}"])
            else:
                rows.append(["no-solution", f"{c['phase']}@{c['index']}",
                             f"checked={c.get('checked_count')}"])
        sections.append("certificates\n" + format_table(["kind", "where", "detail"], rows))

    if verify is not None:
        summary["verify"] = verify
        if verify.get("badness"):
            b = verify["badness"]
            sections.append(
                "verified infimum\n"
                + format_table(
                    ["q_max", "infimum", "argmin"],
                    [[b["q_max"], b["infimum"], b["argmin"]]],
                )
            )
            wrows = [
                [w["exponent"], w["norm_range"][0], w["norm_range"][1],
                 w["minimum"], w["argmin"]]
                for w in b.get("windows", [])
            ]
            if wrows:
                sections.append(
                    "per-window minima\n"
                    + format_table(
                        ["exponent", "norm lo", "norm hi", "minimum", "argmin"], wrows
                    )
                )
            fig = _fig_windows(verify, run_dir / "windows.png")
            if fig:
                written.append(fig)
        if verify.get("crosscheck"):
            c = verify["crosscheck"]
            sections.append(
                "certified-badness crosscheck\n"
                + format_table(
                    ["passed", "floor", "slack", "measured min"],
                    [[c["passed"], c["bound"], c["slack"], c["min_value"]]],
                )
            )
        if verify.get("certified_rows"):
            rows = [
                [r["stage"], r["k"], r["distance"], r["bound"], r["ok"]]
                for r in verify["certified_rows"]
            ]
            sections.append(
                "protected distances\n"
                + format_table(["stage", "k", "distance", "bound", "ok"], rows)
            )
            fig = _fig_escape(verify, run_dir / "escape_bounds.png")
            if fig:
                written.append(fig)

    if fractal is not None:
        summary["fractal"] = fractal
        rows = [[k, v] for k, v in sorted(fractal.items()) if not isinstance(v, dict)]
        sections.append("fractal\n" + format_table(["name", "value"], rows))
        pts = run_dir / "points.csv"
        if pts.exists():
            fig = _fig_points(pts, run_dir / "points.png")
            if fig:
                written.append(fig)

    text = "\n\n".join(sections) + "\n"
    report_txt = run_dir / "report.txt"
    report_txt.write_text(text)
    written.append(report_txt)
    report_json = run_dir / "report.json"
    with open(report_json, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(report_json)
    return written
