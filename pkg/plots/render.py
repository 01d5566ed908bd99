#!/usr/bin/env python3
"""Render the figure layouts from the CSV output of an experiment run.

Usage:
    python plots/render.py --out DIR --fig N [--format png|svg]

Reads ``figN_plot{1,2,3}.csv`` (and ``figN_meta.txt`` when present) from
DIR and writes ``figN.png`` or ``figN.svg`` next to them: three stacked
log-scale panels with the iteration count on the x axis.  Output bytes are
deterministic for identical input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

Y_FLOOR, Y_CEIL = 1e-17, 1.0

# column -> legend label, grouped per panel; curves drawn in this order
PANEL1_SIM = [
    ("d_xh_wq", "distance to top-h eigenspace"),
    ("witness_h_wq", "witness distance (class h)"),
    ("sum_bound_wq", "two-sided sine bound"),
    ("bound_amd3_wq", "residual/gap bound (trial space)"),
    ("witness_r_wq", "witness distance (class r)"),
]
PANEL1_KRYLOV = [
    ("d_xh_kq", "distance to top-h eigenspace"),
    ("d_xk_kq", "distance to top-k eigenspace"),
    ("witness_h_kq", "witness distance (class h)"),
    ("sum_bound_kq", "two-sided sine bound"),
    ("bound_amd3_wq", "residual/gap bound (trial space)"),
    ("witness_r_wq", "witness distance (class r)"),
]
PANEL2 = [
    ("d_xh_vq", "distance to top-h eigenspace"),
    ("witness_h_vq", "witness distance"),
    ("bound_amd1_vq", "residual/gap bound"),
    ("bound_nakatsukasa_vq", "single-space comparison bound"),
]
PANEL3 = [
    ("step_len", "step length"),
    ("paso1_lhs", "eigen-distance decrease"),
    ("paso3_lower", "class-distance decrease lower bound"),
]


class MissingColumn(RuntimeError):
    pass


def read_csv(path: Path) -> dict[str, np.ndarray]:
    lines = path.read_text().strip().splitlines()
    columns = lines[0].split(",")
    rows = [[float(v) for v in line.split(",")] for line in lines[1:]]
    data = np.array(rows) if rows else np.zeros((0, len(columns)))
    return {c: data[:, i] for i, c in enumerate(columns)}


def read_meta(path: Path) -> dict[str, str]:
    meta = {}
    if path.exists():
        for line in path.read_text().splitlines():
            if "=" in line:
                key, value = line.split("=", 1)
                meta[key.strip()] = value.strip()
    return meta


def filter_columns(table: dict[str, np.ndarray]) -> list[tuple[str, str]]:
    return sorted(
        (c, f"filtered bound p=({c.split('_p')[1].replace('_', ',')})")
        for c in table if c.startswith("bound_filter_")
    )


def draw_panel(ax, table: dict[str, np.ndarray], spec: list[tuple[str, str]],
               csv_name: str, title: str):
    q = table["q"]
    for column, label in spec:
        if column not in table:
            raise MissingColumn(f"{csv_name}: column {column!r} is missing")
        values = np.clip(np.abs(table[column]), Y_FLOOR, Y_CEIL)
        ax.semilogy(q, values, label=label, linewidth=1.2)
    ax.set_ylim(Y_FLOOR / 2, 3.0)
    ax.set_title(title, fontsize=9)
    ax.legend(fontsize=6, loc="lower left", framealpha=0.8)
    ax.grid(True, which="major", alpha=0.3)


def render(out_dir: Path, figure: int, fmt: str = "png") -> Path:
    plot_paths = [out_dir / f"fig{figure}_plot{m}.csv" for m in (1, 2, 3)]
    for p in plot_paths:
        if not p.exists():
            raise MissingColumn(f"missing CSV {p}")
    tables = [read_csv(p) for p in plot_paths]
    meta = read_meta(out_dir / f"fig{figure}_meta.txt")
    krylov = "d_xh_kq" in tables[0]
    panel1 = (PANEL1_KRYLOV if krylov else PANEL1_SIM) + filter_columns(tables[0])

    fig, axes = plt.subplots(3, 1, figsize=(7.5, 9.0), sharex=True)
    method = "block Krylov" if krylov else "subspace iteration"
    head = f"figure {figure}: {method}"
    if meta:
        head += f" (n={meta.get('n', '?')}, delta={float(meta.get('delta', 'nan')):.1e}, " \
                f"gamma={float(meta.get('gamma', 'nan')):.2g})"
    fig.suptitle(head, fontsize=10)
    draw_panel(axes[0], tables[0], panel1, plot_paths[0].name,
               "trial space vs class and bounds")
    draw_panel(axes[1], tables[1], PANEL2, plot_paths[1].name,
               "extracted top-h space vs class and bounds")
    draw_panel(axes[2], tables[2], PANEL3, plot_paths[2].name,
               "step lengths along the extraction walk")
    axes[2].set_xlabel("iteration")

    if meta:
        delta = float(meta.get("delta", "nan"))
        gamma = float(meta.get("gamma", "nan"))
        for ax, refs in (
            (axes[0], [(np.sin(1.0), "sin(1)")]),
            (axes[1], [(delta / gamma, "delta/gamma")]),
            (axes[2], [(delta, "delta")]),
        ):
            for value, label in refs:
                if np.isfinite(value) and Y_FLOOR < value <= Y_CEIL:
                    ax.axhline(value, color="gray", linestyle=":", linewidth=0.8)
                    ax.annotate(label, (0.99, value), xycoords=("axes fraction", "data"),
                                fontsize=6, color="gray", ha="right", va="bottom")

    target = out_dir / f"fig{figure}.{fmt}"
    fig.tight_layout(rect=(0, 0, 1, 0.97))
    if fmt == "svg":
        plt.rcParams["svg.hashsalt"] = "ladm"
        fig.savefig(target, format="svg", metadata={"Date": None})
    else:
        fig.savefig(target, format="png", dpi=130)
    plt.close(fig)
    return target


def main(argv=None) -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", required=True, help="directory with figN_plot*.csv files")
    parser.add_argument("--fig", required=True, type=int, choices=range(1, 6))
    parser.add_argument("--format", default="png", choices=["png", "svg"])
    args = parser.parse_args(argv)
    try:
        target = render(Path(args.out), args.fig, args.format)
    except MissingColumn as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {target}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
