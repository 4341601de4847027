"""Figure rendering for the CLI report path.

Each renderer takes the same records a CSV writer gets and drops PNG
files next to the delimited output (same stem, suffixed by figure name).
Rendering is optional; nothing here is needed to produce or consume the
CSVs.
"""

from __future__ import annotations

import os
from typing import List, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .harness import AuditRow, MetricsRecord, SweepRow

__all__ = ["render_run_figures", "render_sweep_figures", "render_audit_figures"]

FIGSIZE = (6.0, 3.6)


def _stem(csv_path: str) -> str:
    base, _ = os.path.splitext(csv_path)
    return base


def _save(fig, path: str, created: List[str]) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    created.append(path)


def render_run_figures(records: Sequence[MetricsRecord], csv_path: str) -> List[str]:
    """Backlog and activity over time; interference audit series if present."""
    created: List[str] = []
    stem = _stem(csv_path)
    slots = [r.slot for r in records]

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(FIGSIZE[0], FIGSIZE[1] * 1.6), sharex=True)
    ax1.plot(slots, [r.total_backlog for r in records], lw=0.9)
    ax1.set_ylabel("total backlog (packets)")
    ax1.grid(alpha=0.3)
    ax2.plot(slots, [r.active_links for r in records], lw=0.9, color="tab:orange")
    ax2.set_ylabel("active links")
    ax2.set_xlabel("slot")
    ax2.grid(alpha=0.3)
    _save(fig, f"{stem}_backlog.png", created)

    audited = [r for r in records if r.mean_I_out is not None]
    if audited:
        fig, (ax1, ax2) = plt.subplots(
            2, 1, figsize=(FIGSIZE[0], FIGSIZE[1] * 1.6), sharex=True
        )
        ax1.plot(
            [r.slot for r in audited], [r.mean_I_out for r in audited], lw=0.9
        )
        ax1.set_ylabel("mean outside interference")
        ax1.grid(alpha=0.3)
        ax2.plot(
            [r.slot for r in audited],
            [r.max_inside_affectness for r in audited],
            lw=0.9,
            label="max inside affectness",
        )
        ax2.plot(
            [r.slot for r in audited],
            [r.max_total_affectness for r in audited],
            lw=0.9,
            label="max total affectness",
        )
        ax2.axhline(1.0, color="tab:red", ls="--", lw=0.8, label="feasibility bound")
        ax2.set_xlabel("slot")
        ax2.legend(fontsize=8)
        ax2.grid(alpha=0.3)
        _save(fig, f"{stem}_audit.png", created)
    return created


def render_sweep_figures(rows: Sequence[SweepRow], csv_path: str) -> List[str]:
    """Final backlog against arrival rate, stable points marked."""
    created: List[str] = []
    stem = _stem(csv_path)
    fig, ax = plt.subplots(figsize=FIGSIZE)
    stable = [r for r in rows if r.stable]
    unstable = [r for r in rows if not r.stable]
    if stable:
        ax.plot(
            [r.rate for r in stable],
            [r.final_backlog for r in stable],
            "o",
            ms=4,
            label="stable",
        )
    if unstable:
        ax.plot(
            [r.rate for r in unstable],
            [r.final_backlog for r in unstable],
            "x",
            ms=5,
            color="tab:red",
            label="unstable",
        )
    ax.set_xlabel("average arrival rate (packets/slot/link)")
    ax.set_ylabel("final total backlog (packets)")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    _save(fig, f"{stem}_backlog_vs_rate.png", created)
    return created


def render_audit_figures(rows: Sequence[AuditRow], csv_path: str) -> List[str]:
    """Per-link outside interference versus its budget, and affectness."""
    created: List[str] = []
    if not rows:
        return created
    stem = _stem(csv_path)
    xs = range(len(rows))

    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(xs, [r.I_out for r in rows], ".", ms=3, label="outside interference")
    ax.axhline(rows[0].eps_Imax, color="tab:red", ls="--", lw=0.9, label="eps * I_max")
    ax.set_xlabel("active link-slot")
    ax.set_ylabel("interference power")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    _save(fig, f"{stem}_interference.png", created)

    fig, ax = plt.subplots(figsize=FIGSIZE)
    ax.plot(xs, [r.inside_affectness for r in rows], ".", ms=3, label="inside affectness")
    ax.plot(xs, [r.total_affectness for r in rows], ".", ms=3, label="total affectness")
    ax.axhline(1.0, color="tab:red", ls="--", lw=0.9, label="feasibility bound")
    ax.set_xlabel("active link-slot")
    ax.set_ylabel("affectness")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    _save(fig, f"{stem}_affectness.png", created)
    return created
