"""Writes the procedural silhouette polylines in data/ (x y per line, counter-clockwise)."""

import math
from pathlib import Path

N = 500
OUT = Path(__file__).resolve().parent.parent / "data"


def bump(theta, at, width, height):
    d = math.atan2(math.sin(theta - at), math.cos(theta - at))
    return height * math.exp(-0.5 * (d / width) ** 2)


def radial(center, radius):
    pts = []
    for k in range(N):
        t = 2.0 * math.pi * k / N
        r = radius(t)
        pts.append((center[0] + r * math.cos(t), center[1] + r * math.sin(t)))
    return pts


def turtle(t):
    r = 0.2 + 0.025 * math.cos(2.0 * t)
    r += bump(t, math.pi / 2, 0.22, 0.09)  # head
    r += bump(t, -math.pi / 2, 0.12, 0.05)  # tail
    for a in (math.pi / 5, 4 * math.pi / 5, -math.pi / 4, -3 * math.pi / 4):
        r += bump(t, a, 0.16, 0.07)  # limbs
    return r + 0.004 * math.sin(11.0 * t)


def rodent(t):
    r = 0.3 + 0.02 * math.cos(2.0 * t)
    r += bump(t, math.radians(62), 0.09, 0.13)  # ears
    r += bump(t, math.radians(118), 0.09, 0.13)
    r += bump(t, math.radians(-20), 0.25, 0.03)  # cheeks
    r += bump(t, math.radians(200), 0.25, 0.03)
    return r


def heart(center, scale):
    pts = []
    for k in range(N):
        t = 2.0 * math.pi * k / N
        x = 16.0 * math.sin(t) ** 3
        y = 13.0 * math.cos(t) - 5.0 * math.cos(2 * t) - 2.0 * math.cos(3 * t) - math.cos(4 * t)
        pts.append((center[0] + scale * x, center[1] + scale * y))
    area = sum(a[0] * b[1] - b[0] * a[1] for a, b in zip(pts, pts[1:] + pts[:1]))
    return pts if area > 0 else pts[::-1]


def write(name, pts):
    with open(OUT / name, "w") as f:
        f.write(f"# {name}: {len(pts)} vertices\n")
        for x, y in pts:
            assert 0.0 < x < 1.0 and 0.0 < y < 1.0
            f.write(f"{x:.12f} {y:.12f}\n")


if __name__ == "__main__":
    OUT.mkdir(exist_ok=True)
    write("turtle.xy", radial((0.5, 0.47), turtle))
    write("rodent.xy", radial((0.5, 0.44), rodent))
    write("heart.xy", heart((0.5, 0.42), 0.0065))
