"""Figure rendering for sweep results.

SVG output is byte-deterministic for fixed input: the clip-path hash salt
is pinned and the creation date is stripped, so golden-file comparisons
work across runs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

SVG_HASH_SALT = "dressedsim"


def render_sweep_figure(rows, path: str):
    """One fidelity-vs-coupling polyline per mode frequency, written as SVG.

    ``rows`` is any iterable with omega_b / alpha_abs / fidelity attributes;
    failed rows (non-finite fidelity) are skipped.
    """
    curves: dict[float, list[tuple[float, float]]] = {}
    for row in rows:
        if row.fidelity == row.fidelity:  # skip NaN (failed) rows
            curves.setdefault(row.omega_b, []).append((row.alpha_abs, row.fidelity))
    if not curves:
        raise ValueError("no successful rows to plot")

    with plt.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for omega_b in sorted(curves):
            pts = sorted(curves[omega_b])
            ax.plot(
                [p[0] for p in pts],
                [p[1] for p in pts],
                marker="o",
                markersize=3,
                label=f"mode frequency {omega_b:g}",
            )
        ax.set_xlabel(r"$|\alpha|$")
        ax.set_ylabel("F")
        ax.set_title("Fidelity vs coupling magnitude")
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
