#!/usr/bin/env python3
"""Generate the bundled occupancy-grid track assets.

Each track is described by a closed centerline built from straight and
circular-arc pieces (turtle style, counter-clockwise). A cell is free when
its center lies within half the track width of the densely sampled
centerline. The script writes `<name>.grid` files in the `RLGRID 1` format
and `tracks.meta`, which records for every track the design centerline
length and the number of free cells, counted here independently of the
Rust loader.

Usage: python3 scripts/gen_tracks.py [out_dir]
"""
import math
import os
import sys

import numpy as np

RESOLUTION = 0.05
MARGIN = 1.0  # occupied border around the drivable area, meters

# (kind, length_or_radius, turn_degrees)
TRACKS = {
    # stadium: two 10 m straights joined by 3 m radius half circles
    "oval": {
        "width": 2.0,
        "pieces": [("S", 10.0), ("A", 3.0, 180.0), ("S", 10.0), ("A", 3.0, 180.0)],
    },
    # two long straights, four corners of different radii
    "porto": {
        "width": 2.0,
        "pieces": [
            ("S", 12.0),
            ("A", 2.5, 90.0),
            ("S", 3.0),
            ("A", 2.0, 90.0),
            ("S", 12.0),
            ("A", 3.5, 90.0),
            ("S", 1.0),
            ("A", 3.0, 90.0),
        ],
    },
}


def sample_centerline(pieces, step=0.005):
    x, y, h = 0.0, 0.0, 0.0
    pts = [(x, y)]
    length = 0.0
    for piece in pieces:
        if piece[0] == "S":
            n = max(1, int(round(piece[1] / step)))
            ds = piece[1] / n
            for _ in range(n):
                x += ds * math.cos(h)
                y += ds * math.sin(h)
                pts.append((x, y))
            length += piece[1]
        else:
            radius, turn = piece[1], math.radians(piece[2])
            cx, cy = x - radius * math.sin(h), y + radius * math.cos(h)
            n = max(1, int(round(radius * turn / step)))
            h0 = h
            for k in range(1, n + 1):
                h = h0 + turn * k / n
                x = cx + radius * math.sin(h)
                y = cy - radius * math.cos(h)
                pts.append((x, y))
            length += radius * turn
    closure = math.hypot(pts[-1][0] - pts[0][0], pts[-1][1] - pts[0][1])
    assert closure < 1e-6, "track pieces do not close: %g" % closure
    return np.array(pts[:-1]), length


def build(name, spec, out_dir):
    pts, length = sample_centerline(spec["pieces"])
    half = spec["width"] / 2.0
    lo = pts.min(axis=0) - half - MARGIN
    hi = pts.max(axis=0) + half + MARGIN
    width = int(math.ceil((hi[0] - lo[0]) / RESOLUTION))
    height = int(math.ceil((hi[1] - lo[1]) / RESOLUTION))
    origin = (float(round(lo[0], 3)), float(round(lo[1], 3)))

    xs = origin[0] + (np.arange(width) + 0.5) * RESOLUTION
    ys = origin[1] + (np.arange(height) + 0.5) * RESOLUTION
    best = np.full((height, width), np.inf)
    for chunk in np.array_split(pts, max(1, len(pts) // 200)):
        dx = xs[None, None, :] - chunk[:, 0, None, None]
        dy = ys[None, :, None] - chunk[:, 1, None, None]
        best = np.minimum(best, np.sqrt(dx * dx + dy * dy).min(axis=0))
    free = best <= half

    lines = [
        "RLGRID 1",
        "width %d" % width,
        "height %d" % height,
        "resolution %s" % repr(RESOLUTION),
        "origin_x %s" % repr(origin[0]),
        "origin_y %s" % repr(origin[1]),
    ]
    # first text row is grid row 0, i.e. the lowest y
    for r in range(height):
        lines.append("".join("." if f else "#" for f in free[r]))
    with open(os.path.join(out_dir, name + ".grid"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return length, int(free.sum())


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "crates", "core", "assets")
    meta = []
    for name, spec in TRACKS.items():
        length, free_cells = build(name, spec, out_dir)
        meta.append("%s design_length=%.6f free_cells=%d width=%.3f" % (
            name, length, free_cells, spec["width"]))
        print(meta[-1])
    with open(os.path.join(out_dir, "tracks.meta"), "w") as fh:
        fh.write("# generated by scripts/gen_tracks.py\n")
        fh.write("\n".join(meta) + "\n")


if __name__ == "__main__":
    main()
