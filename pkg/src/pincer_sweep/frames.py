"""SVG snapshots of a running simulation.

Colours: red for contaminated cells, green for cells that have been swept
and are still clean, translucent blue for sensor footprints and dark dots
for sweeper centres.  Contamination rows are run-length encoded so a
600x600 raster stays a few hundred kilobytes per frame.
"""

from __future__ import annotations

import json
import math
import os
from typing import List

import numpy as np

from .geometry import SensorGeometry

MANIFEST_NAME = "manifest.json"


def _runs(row: np.ndarray):
    """(start, stop) index pairs of the True runs in a boolean row."""
    padded = np.concatenate(([False], row, [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    return edges.reshape(-1, 2)


def _cell_rects(mask: np.ndarray, world, colour: str) -> List[str]:
    cs = world.cell_size
    h = world.half_extent
    out = []
    for i in np.flatnonzero(mask.any(axis=1)):
        # SVG y grows downward, so row i (y ascending) maps to a flipped y
        y = h - (i + 1) * cs
        for a, b in _runs(mask[i]):
            out.append(f'<rect x="{-h + a * cs:.3f}" y="{y:.3f}" '
                       f'width="{(b - a) * cs:.3f}" height="{cs:.3f}" fill="{colour}"/>')
    return out


def _fan_path(pose, sensor: SensorGeometry) -> str:
    th = pose.polar_angle
    apex = pose.radial_distance - sensor.r
    ax, ay = apex * math.cos(th), apex * math.sin(th)
    reach = 2.0 * sensor.r
    x1 = ax + reach * math.cos(th - sensor.alpha)
    y1 = ay + reach * math.sin(th - sensor.alpha)
    x2 = ax + reach * math.cos(th + sensor.alpha)
    y2 = ay + reach * math.sin(th + sensor.alpha)
    # flip y for SVG; the arc then runs clockwise on screen
    return (f'<path d="M {ax:.3f} {-ay:.3f} L {x1:.3f} {-y1:.3f} '
            f'A {reach:.3f} {reach:.3f} 0 0 0 {x2:.3f} {-y2:.3f} Z" '
            f'fill="#3060ff" fill-opacity="0.35" stroke="#2040a0" stroke-width="1"/>')


def render_svg(world, poses, sensor: SensorGeometry, sim_time: float) -> str:
    h = world.half_extent
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{-h:.3f} {-h:.3f} '
        f'{2 * h:.3f} {2 * h:.3f}" width="800" height="800">',
        f'<rect x="{-h:.3f}" y="{-h:.3f}" width="{2 * h:.3f}" height="{2 * h:.3f}" fill="white"/>',
    ]
    swept = world.ever_cleared & ~world.contamination
    parts += _cell_rects(swept, world, "#4caf50")
    parts += _cell_rects(world.contamination, world, "#e53935")
    for p in poses:
        parts.append(_fan_path(p, sensor))
    dot = max(world.cell_size, 0.01 * h)
    for p in poses:
        x, y = p.xy
        parts.append(f'<circle cx="{x:.3f}" cy="{-y:.3f}" r="{dot:.3f}" fill="#202020"/>')
    parts.append(f'<text x="{-h + 0.02 * h:.3f}" y="{-h + 0.06 * h:.3f}" '
                 f'font-size="{0.04 * h:.3f}">t = {sim_time:.6g}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


class FrameWriter:
    """Callable frame sink for :func:`pincer_sweep.sim.run`.

    Writes ``frame_%06d.svg`` files into ``out_dir`` and, on :meth:`close`,
    a JSON manifest listing each frame's file name and simulation time.
    """

    def __init__(self, out_dir: str, sensor: SensorGeometry):
        self.out_dir = out_dir
        self.sensor = sensor
        self.entries = []
        os.makedirs(out_dir, exist_ok=True)

    def __call__(self, world, poses, sim_time, index):
        name = f"frame_{index:06d}.svg"
        with open(os.path.join(self.out_dir, name), "w", encoding="utf-8") as fh:
            fh.write(render_svg(world, poses, self.sensor, sim_time))
        self.entries.append({"index": index, "file": name, "sim_time": float(f"{sim_time:.12g}")})

    def close(self) -> str:
        path = os.path.join(self.out_dir, MANIFEST_NAME)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"frames": self.entries}, fh, indent=1)
            fh.write("\n")
        return path
