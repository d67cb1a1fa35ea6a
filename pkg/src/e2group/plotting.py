"""Figures for command-line reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def plot_scan(spins, values, triangle: str, path: str) -> None:
    """Plot a 10j spin scan and save it as PNG without timestamp metadata."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(spins, values, "o-")
    ax.axhline(0.0, color="grey", lw=0.5)
    ax.set_xlabel(f"spin on triangle {triangle}")
    ax.set_ylabel("10j value")
    fig.tight_layout()
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)
