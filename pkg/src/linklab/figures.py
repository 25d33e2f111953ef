"""Report figures rendered to files (headless matplotlib)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .catalog import Link, bump_membrane
from .suite import Report

_STATUS_COLORS = {"pass": "#2e7d32", "fail": "#c62828", "skip": "#9e9e9e",
                  "error": "#6a1b9a"}


def _loop_xyz(sphere, m=256):
    ang = 2.0 * np.pi * np.arange(m + 1) / m
    U = np.column_stack([np.cos(ang), np.sin(ang)])
    return sphere.points(U)


def render_link_figure(link: Link, path: str, with_membrane: bool = True) -> str:
    """3-d picture of an n = 3 link with its crossing membrane."""
    if link.ambient_dim != 3:
        raise ValueError("link figures are drawn for ambient dimension 3")
    fig = plt.figure(figsize=(7.2, 6.0), dpi=120)
    ax = fig.add_subplot(111, projection="3d")
    labels = ("component 1", "component 2", "component 3 (ellipsoid)")
    colors = ("#1565c0", "#2e7d32", "#c62828")
    for m, (label, color) in enumerate(zip(labels, colors), start=1):
        xyz = _loop_xyz(link.component(m))
        ax.plot(xyz[:, 0], xyz[:, 1], xyz[:, 2], color=color, lw=2.2,
                label=label)
    if with_membrane:
        mem = bump_membrane(link)
        rr = np.linspace(0.0, 1.0, 28)
        th = np.linspace(0.0, 2.0 * np.pi, 60)
        R, T = np.meshgrid(rr, th)
        V = np.column_stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()])
        P = mem.points(V)
        shape = R.shape
        ax.plot_surface(
            P[:, 0].reshape(shape), P[:, 1].reshape(shape),
            P[:, 2].reshape(shape), alpha=0.25, color="#8d6e63",
            linewidth=0,
        )
    ax.set_box_aspect((1, 1, 1))
    ax.set_xlim(-4.2, 4.2)
    ax.set_ylim(-4.2, 4.2)
    ax.set_zlim(-4.2, 4.2)
    ax.view_init(elev=18, azim=-55)
    ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": "linklab"})
    plt.close(fig)
    return path


def render_checks_figure(report: Report, path: str) -> str:
    """Status dashboard: one bar per check plus headline metrics."""
    checks = report.checks
    fig, ax = plt.subplots(figsize=(7.2, 0.6 * max(len(checks), 4) + 1.2),
                           dpi=120)
    names = [c.check for c in checks]
    ypos = np.arange(len(checks))[::-1]
    for y, rec in zip(ypos, checks):
        color = _STATUS_COLORS.get(rec.status, "#607d8b")
        ax.barh(y, 1.0, color=color, height=0.6)
        note = rec.status
        if rec.check == "linking" and rec.status == "pass":
            note += f"  lk={rec.detail['rounded']:+d} (se={rec.detail['std_error']:.3g})"
        if rec.check == "word" and rec.status == "pass":
            note += f"  word={rec.detail['ellipse']['word']}"
        if rec.check == "split" and rec.status == "pass":
            dists = [round(v["distance"], 3) for v in rec.detail.values()]
            note += f"  distances={dists}"
        ax.text(0.02, y, f"{rec.check}: {note}", va="center", fontsize=9,
                color="white", fontweight="bold")
    ax.set_yticks(ypos)
    ax.set_yticklabels(names, fontsize=9)
    ax.set_xticks([])
    ax.set_xlim(0, 1)
    fam = report.config["family"]
    ax.set_title(
        f"verdict: {report.verdict}   family i={fam['i']} j={fam['j']} "
        f"n={fam['n']}", fontsize=11,
    )
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": "linklab"})
    plt.close(fig)
    return path


def render_report_figures(report: Report, link: Link, out_dir: str) -> list:
    """Figures written alongside the report; the 3-d view needs n = 3."""
    os.makedirs(out_dir, exist_ok=True)
    written = [render_checks_figure(report, os.path.join(out_dir, "fig_checks.png"))]
    if link.ambient_dim == 3 and link.i == 1 and link.j == 0:
        written.append(
            render_link_figure(link, os.path.join(out_dir, "fig_link.png"))
        )
    return written
