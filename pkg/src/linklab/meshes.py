"""Plain-text mesh export of the n = 3 catalog for external viewers.

Writes Wavefront-style OBJ files: closed curves as polylines (`l` records),
surfaces as triangle meshes (`f` records).  Every vertex is produced by the
exact parametrization of its surface, so implicit residuals stay at
round-off; identical inputs yield byte-identical files.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .catalog import Link, Membrane, bounding_balls, bump_membrane, cap_upper_half
from .geometry import DomainError, FlatBall


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_obj(path, vertices, faces=(), polylines=(), comment=""):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        for v in vertices:
            fh.write("v " + " ".join(_fmt(c) for c in v) + "\n")
        for tri in faces:
            fh.write("f " + " ".join(str(idx + 1) for idx in tri) + "\n")
        for line in polylines:
            fh.write("l " + " ".join(str(idx + 1) for idx in line) + "\n")


def _closed_polyline(points) -> tuple:
    n = len(points)
    return points, [list(range(n)) + [0]]


def _circle_vertices(sphere, resolution):
    ts = np.arange(resolution) / resolution
    ang = 2.0 * math.pi * ts
    U = np.column_stack([np.cos(ang), np.sin(ang)])
    return sphere.points(U)


def _disk_mesh(ball: FlatBall, resolution: int):
    """Polar triangulation of a flat 2-ball; center fan plus quad rings."""
    rings = max(resolution // 8, 2)
    verts = [ball.points(np.zeros((1, 2)))[0]]
    for r_idx in range(1, rings + 1):
        radius = r_idx / rings
        ang = 2.0 * math.pi * np.arange(resolution) / resolution
        V = radius * np.column_stack([np.cos(ang), np.sin(ang)])
        verts.extend(ball.points(V))
    faces = []
    for k in range(resolution):
        faces.append([0, 1 + k, 1 + (k + 1) % resolution])
    for r_idx in range(1, rings):
        base_in = 1 + (r_idx - 1) * resolution
        base_out = 1 + r_idx * resolution
        for k in range(resolution):
            k2 = (k + 1) % resolution
            faces.append([base_in + k, base_out + k, base_out + k2])
            faces.append([base_in + k, base_out + k2, base_in + k2])
    return np.array(verts), faces


def _membrane_mesh(mem: Membrane, resolution: int):
    rings = max(resolution // 8, 2)
    params = [np.zeros((1, 2))]
    for r_idx in range(1, rings + 1):
        radius = r_idx / rings
        ang = 2.0 * math.pi * np.arange(resolution) / resolution
        params.append(radius * np.column_stack([np.cos(ang), np.sin(ang)]))
    V = np.vstack(params)
    verts = mem.points(V)
    # same parameter layout as the disk triangulation
    faces = []
    for k in range(resolution):
        faces.append([0, 1 + k, 1 + (k + 1) % resolution])
    for r_idx in range(1, rings):
        base_in = 1 + (r_idx - 1) * resolution
        base_out = 1 + r_idx * resolution
        for k in range(resolution):
            k2 = (k + 1) % resolution
            faces.append([base_in + k, base_out + k, base_out + k2])
            faces.append([base_in + k, base_out + k2, base_in + k2])
    return verts, faces


def _capped_polyline(link: Link, resolution: int):
    """Upper half of the ellipse closed by the equatorial segment."""
    c3, c4 = link.coeffs[2], link.coeffs[3]
    thetas = np.linspace(0.0, math.pi, resolution + 1)
    arc = np.zeros((resolution + 1, 3))
    arc[:, 0] = c3 * np.cos(thetas)
    arc[:, 2] = c4 * np.sin(thetas)
    xs = np.linspace(-c3, c3, resolution + 1)[1:-1]
    seg = np.zeros((len(xs), 3))
    seg[:, 0] = xs
    pts = np.vstack([arc, seg])
    return _closed_polyline(pts)


def export_meshes(link: Link, resolution: int, out_dir,
                  membrane: Membrane | None = None) -> list:
    """Write component polylines and auxiliary surface meshes; n = 3 only.

    Returns the list of files written (component curves, both flat balls,
    the capped sphere, and the crossing membrane).
    """
    if link.ambient_dim != 3:
        raise DomainError("mesh export supports ambient dimension 3 only")
    if resolution < 8:
        raise DomainError("resolution must be at least 8")
    os.makedirs(out_dir, exist_ok=True)
    balls = bounding_balls(link)
    if membrane is None:
        membrane = bump_membrane(link)
    written = []

    for m in (1, 2, 3):
        pts, lines = _closed_polyline(_circle_vertices(link.component(m), resolution))
        path = os.path.join(out_dir, f"component_{m}.obj")
        _write_obj(path, pts, polylines=lines, comment=f"link component {m}")
        written.append(path)

    for idx in (0, 1):
        verts, faces = _disk_mesh(balls[idx], resolution)
        path = os.path.join(out_dir, f"ball_{idx + 1}.obj")
        _write_obj(path, verts, faces=faces, comment=f"flat ball {idx + 1}")
        written.append(path)

    pts, lines = _capped_polyline(link, resolution)
    path = os.path.join(out_dir, "capped_sphere.obj")
    _write_obj(path, pts, polylines=lines, comment="capped upper half")
    written.append(path)

    verts, faces = _membrane_mesh(membrane, resolution)
    path = os.path.join(out_dir, "membrane.obj")
    _write_obj(path, verts, faces=faces, comment="crossing membrane")
    written.append(path)
    return written


def audit_mesh_residuals(link: Link, out_dir) -> float:
    """Max implicit residual of exported component vertices (regression aid)."""
    worst = 0.0
    for m in (1, 2, 3):
        path = os.path.join(out_dir, f"component_{m}.obj")
        pts = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.startswith("v "):
                    pts.append([float(tok) for tok in line.split()[1:]])
        res = float(np.max(link.component(m).implicit_residual(np.array(pts))))
        worst = max(worst, res)
    return worst
