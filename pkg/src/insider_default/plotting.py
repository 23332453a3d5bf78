"""SVG line plots drawn straight from the CSV files (needs matplotlib)."""

from __future__ import annotations

import csv
from pathlib import Path

LABELS = {"insider": "insider", "investor": "investor", "merton": "Merton"}


def _read(path: Path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = {h: [float(r[i]) for r in body] for i, h in enumerate(header)}
    return header, cols


def plot_csv(path: Path, *, kind: str, xlabel: str = "t") -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    header, cols = _read(path)
    x = cols[header[0]]
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in ("insider", "investor", "merton"):
        if name in cols:
            ax.plot(x, cols[name], label=LABELS[name], marker="o" if kind == "sweep" else None)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("wealth" if kind == "wealth" else "value")
    ax.legend()
    fig.tight_layout()
    out = Path(path).with_suffix(".svg")
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out
