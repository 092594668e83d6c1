#!/usr/bin/env python3
"""Regenerate the scene fixtures under fixtures/.

Walls are the outline of the free space (union of the corridor bands plus
joint wedges) thickened outward, then chopped into hole-free pieces.
Obstacle layouts come from a seeded RNG so the output is reproducible.
"""

import argparse
import json
import math
import random
from pathlib import Path

from shapely.geometry import MultiPoint, Polygon, box
from shapely.geometry.polygon import orient
from shapely.ops import unary_union

WALL_GAP = 0.05
WALL_THICKNESS = 0.2
TILE = 6.0
OLD_SEED = 16
SIDE_BIAS = 0.6


def r3(v):
    return round(v + 0.0, 3)


def pt(p):
    return [r3(p[0]), r3(p[1])]


def edge_rect(a, b, width):
    dx, dy = b[0] - a[0], b[1] - a[1]
    n = math.hypot(dx, dy)
    ox, oy = -dy / n * width / 2, dx / n * width / 2
    return Polygon([(a[0] + ox, a[1] + oy), (a[0] - ox, a[1] - oy), (b[0] - ox, b[1] - oy), (b[0] + ox, b[1] + oy)])


def free_space(vertices, widths):
    rects = [edge_rect(vertices[i], vertices[i + 1], widths[i]) for i in range(len(widths))]
    parts = list(rects)
    for i in range(1, len(vertices) - 1):
        # fill the outer wedge between consecutive bands at a turn
        corners = [vertices[i]]
        for j in (i - 1, i):
            a, b = vertices[j], vertices[j + 1]
            n = math.dist(a, b)
            ox, oy = -(b[1] - a[1]) / n * widths[j] / 2, (b[0] - a[0]) / n * widths[j] / 2
            corners += [(vertices[i][0] + ox, vertices[i][1] + oy), (vertices[i][0] - ox, vertices[i][1] - oy)]
        parts.append(MultiPoint(corners).convex_hull)
    return unary_union(parts)


def wall_pieces(space):
    inner = space.buffer(WALL_GAP, join_style=2, mitre_limit=10)
    outer = space.buffer(WALL_GAP + WALL_THICKNESS, join_style=2, mitre_limit=10)
    ring = outer.difference(inner)
    minx, miny, maxx, maxy = ring.bounds
    pieces = []
    x = math.floor(minx / TILE) * TILE
    while x < maxx:
        y = math.floor(miny / TILE) * TILE
        while y < maxy:
            cell = ring.intersection(box(x, y, x + TILE, y + TILE))
            geoms = cell.geoms if hasattr(cell, "geoms") else [cell]
            for g in geoms:
                if isinstance(g, Polygon) and g.area > 1e-4:
                    g = orient(g.simplify(1e-6), 1.0)
                    if g.interiors:
                        raise RuntimeError("wall piece with a hole; shrink TILE")
                    pieces.append(g)
            y += TILE
        x += TILE
    return pieces


def polygon_points(poly):
    coords = list(poly.exterior.coords)[:-1]
    return [pt(c) for c in coords]


def scene(vertices, widths, heights, obstacles=(), name="main", margin=2.0):
    space = free_space(vertices, widths)
    walls = wall_pieces(space)
    all_geom = unary_union([space.buffer(WALL_GAP + WALL_THICKNESS + 0.01, join_style=2, mitre_limit=10)])
    minx, miny, maxx, maxy = all_geom.bounds
    doc = {
        "format_version": "1",
        "units": "meters",
        "bounds": {"min": pt((math.floor(minx - margin), math.floor(miny - margin))),
                   "max": pt((math.ceil(maxx + margin), math.ceil(maxy + margin)))},
        "walls": [{"id": f"w{i:03d}", "ring": polygon_points(w), "movable": True} for i, w in enumerate(walls)],
        "obstacles": list(obstacles),
        "corridors": [
            {"id": f"c{i}", "axis": [pt(vertices[i]), pt(vertices[i + 1])], "width": widths[i], "height": heights[i]}
            for i in range(len(widths))
        ],
        "paths": [{"name": name, "vertices": [pt(v) for v in vertices]}],
    }
    return doc


def rect_obstacle(oid, cx, cy, w, d, angle, tag="furniture", height=1.0, movable=True):
    ca, sa = math.cos(angle), math.sin(angle)
    corners = []
    for sx, sy in ((-1, -1), (1, -1), (1, 1), (-1, 1)):
        lx, ly = sx * w / 2, sy * d / 2
        corners.append(pt((cx + lx * ca - ly * sa, cy + lx * sa + ly * ca)))
    return {"id": oid, "footprint": corners, "height": height, "tag": tag, "movable": movable}


def empty_corridor():
    return scene([(2.0, 5.0), (22.0, 5.0)], [3.0], [3.0])


def l_corridor():
    return scene([(2.0, 2.0), (12.0, 2.0), (12.0, 12.0)], [2.0, 2.0], [2.7, 2.7])


def zigzag():
    return scene([(2.0, 2.0), (7.0, 2.0), (7.0, 7.0), (12.0, 7.0), (12.0, 12.0)], [2.0] * 4, [2.7] * 4)


def along(a, b, t, offset):
    dx, dy = b[0] - a[0], b[1] - a[1]
    n = math.hypot(dx, dy)
    ux, uy = dx / n, dy / n
    return a[0] + ux * t - uy * offset, a[1] + uy * t + ux * offset, math.atan2(uy, ux), n


def old_parkland():
    # long narrow corridor with four right-angle turns and cluttered,
    # irregular furniture leaning to one side
    vertices = [(5.0, 10.0), (35.0, 10.0), (35.0, 38.0), (60.0, 38.0), (60.0, 20.0), (74.0, 20.0)]
    width = 1.4
    rng = random.Random(OLD_SEED)
    obstacles = []
    for leg in range(len(vertices) - 1):
        a, b = vertices[leg], vertices[leg + 1]
        n = math.dist(a, b)
        t = 1.2
        while t < n - 1.2:
            length = rng.uniform(0.6, 1.4)
            depth = rng.uniform(0.45, 0.75)
            if t + length > n - 1.0:
                break
            side = 1.0 if rng.random() < SIDE_BIAS else -1.0
            across = rng.random() < 0.3
            if across:
                # turned to stick out into the corridor
                length, depth = depth, min(length, 0.95)
            offset = side * (width / 2 - depth / 2 - rng.uniform(0.0, 0.5 if not across else 0.2))
            cx, cy, ang, _ = along(a, b, t + length / 2, offset)
            ang += rng.uniform(-0.3, 0.3)
            tag = "column" if rng.random() < 0.06 else "furniture"
            obstacles.append(rect_obstacle(f"o{len(obstacles):03d}", cx, cy, length, depth, ang,
                                           tag=tag, movable=tag != "column"))
            t += length + rng.uniform(0.05, 0.25)
    return scene(vertices, [width] * 5, [2.4] * 5, obstacles)


def new_parkland():
    # entrance corridor, wide lobby with ordered mirror-symmetric seating,
    # then a long straight corridor; gentle 30 and 60 degree turns
    a = (5.0, 20.0)
    b = (20.0, 20.0)
    c = (b[0] + 20.0 * math.cos(math.radians(30)), b[1] + 20.0 * math.sin(math.radians(30)))
    d = (c[0], c[1] + 25.0)
    vertices = [a, b, c, d]
    widths = [3.0, 8.0, 3.0]
    obstacles = []
    spacing = 1.5
    for row in range(11):
        for side in (-1.0, 1.0):
            for col in range(2):
                offset = side * (spacing + col * spacing)
                cx, cy, ang, _ = along(b, c, 2.5 + row * spacing, offset)
                obstacles.append(rect_obstacle(f"s{len(obstacles):03d}", cx, cy, 1.2, 0.6, ang, tag="seat"))
    # a few planters and displays along the corridors, placed by hand
    extras = [(0, 3.0, 0.9), (0, 7.5, -0.8), (0, 11.0, 1.0), (0, 13.2, -0.7),
              (2, 4.0, -0.9), (2, 9.5, 0.8), (2, 13.0, -1.0), (2, 18.5, 0.7), (2, 22.0, -0.95)]
    for leg, t, offset in extras:
        cx, cy, ang, _ = along(vertices[leg], vertices[leg + 1], t, offset)
        obstacles.append(rect_obstacle(f"p{len(obstacles):03d}", cx, cy, 0.7, 0.7, ang + 0.4, tag="planter"))
    return scene(vertices, widths, [3.0, 4.5, 3.0], obstacles)


FIXTURES = {
    "empty_corridor": empty_corridor,
    "l_corridor": l_corridor,
    "zigzag": zigzag,
    "old_parkland": old_parkland,
    "new_parkland": new_parkland,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parents[2] / "fixtures")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, make in FIXTURES.items():
        doc = make()
        (args.out / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n")
        print(f"{name}: {len(doc['walls'])} walls, {len(doc['obstacles'])} obstacles")


if __name__ == "__main__":
    main()
