"""Exact 2D shape geometry: circles, oriented boxes, and box compounds.

The scalar helpers at the top are plain float math (numba-compiled when
available) and are shared verbatim by the physics kernel, the action
validator, and the rasterizer, so every subsystem agrees on what
"touching" means.

Sign convention: a *gap* is the signed separation between two shapes.
Positive means disjoint by that distance, negative means overlapping by
that depth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

# Overlap tolerance: shapes count as overlapping only when the penetration
# exceeds this, so exact touch is not an overlap.
OVERLAP_EPS = 1e-6


# --------- scalar kernels ---------

@njit(cache=True)
def point_segment_distance(px, py, x1, y1, x2, y2):
    ex = x2 - x1
    ey = y2 - y1
    dx = px - x1
    dy = py - y1
    ee = ex * ex + ey * ey
    if ee <= 0.0:
        return math.hypot(dx, dy)
    t = (dx * ex + dy * ey) / ee
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return math.hypot(dx - t * ex, dy - t * ey)


@njit(cache=True)
def circle_circle_gap(ax, ay, ra, bx, by, rb):
    return math.hypot(bx - ax, by - ay) - (ra + rb)


@njit(cache=True)
def box_local_coords(px, py, bx, by, c, s, _hw, _hh):
    """World point -> box-local coordinates (box axes from cos/sin of its angle)."""
    dx = px - bx
    dy = py - by
    return dx * c + dy * s, -dx * s + dy * c


@njit(cache=True)
def circle_box_gap(px, py, r, bx, by, c, s, hw, hh):
    lx, ly = box_local_coords(px, py, bx, by, c, s, hw, hh)
    qx = min(max(lx, -hw), hw)
    qy = min(max(ly, -hh), hh)
    if lx == qx and ly == qy:
        # center inside the box: depth to the nearest face plus the radius
        depth = min(hw - abs(lx), hh - abs(ly))
        return -(r + depth)
    return math.hypot(lx - qx, ly - qy) - r


@njit(cache=True)
def box_corners(bx, by, c, s, hw, hh):
    """Corner coordinates, counter-clockwise from (+hw, +hh) in local space."""
    xs = (bx + hw * c - hh * s, bx - hw * c - hh * s,
          bx - hw * c + hh * s, bx + hw * c + hh * s)
    ys = (by + hw * s + hh * c, by - hw * s + hh * c,
          by - hw * s - hh * c, by + hw * s - hh * c)
    return xs, ys


@njit(cache=True)
def box_box_penetration(ax, ay, ca, sa, hwa, hha, bx, by, cb, sb, hwb, hhb):
    """Minimum translation depth along the four face axes.

    Positive: boxes overlap by that depth. Negative: separated, and the
    value is the largest face-axis separation (a lower bound on the true
    gap; see box_box_gap for the exact disjoint distance).
    """
    dx = bx - ax
    dy = by - ay
    best = math.inf
    for k in range(4):
        if k == 0:
            nx, ny = ca, sa
        elif k == 1:
            nx, ny = -sa, ca
        elif k == 2:
            nx, ny = cb, sb
        else:
            nx, ny = -sb, cb
        ra = hwa * abs(nx * ca + ny * sa) + hha * abs(-nx * sa + ny * ca)
        rb = hwb * abs(nx * cb + ny * sb) + hhb * abs(-nx * sb + ny * cb)
        overlap = ra + rb - abs(dx * nx + dy * ny)
        if overlap < best:
            best = overlap
    return best


@njit(cache=True)
def box_box_gap(ax, ay, ca, sa, hwa, hha, bx, by, cb, sb, hwb, hhb):
    pen = box_box_penetration(ax, ay, ca, sa, hwa, hha, bx, by, cb, sb, hwb, hhb)
    if pen >= 0.0:
        return -pen
    # Disjoint convex polygons: the distance is attained at a vertex-edge
    # (or vertex-vertex) pair, both directions.
    axs, ays = box_corners(ax, ay, ca, sa, hwa, hha)
    bxs, bys = box_corners(bx, by, cb, sb, hwb, hhb)
    best = math.inf
    for i in range(4):
        j = (i + 1) % 4
        for k in range(4):
            d = point_segment_distance(bxs[k], bys[k], axs[i], ays[i], axs[j], ays[j])
            if d < best:
                best = d
            d = point_segment_distance(axs[k], ays[k], bxs[i], bys[i], bxs[j], bys[j])
            if d < best:
                best = d
    return best


@njit(cache=True)
def point_in_circle(px, py, cx, cy, r):
    dx = px - cx
    dy = py - cy
    return dx * dx + dy * dy <= r * r


@njit(cache=True)
def point_in_box(px, py, bx, by, c, s, hw, hh):
    lx, ly = box_local_coords(px, py, bx, by, c, s, hw, hh)
    return abs(lx) <= hw and abs(ly) <= hh


# --------- shape types ---------

@dataclass(frozen=True)
class Circle:
    radius: float

    def __post_init__(self):
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ValueError(f"circle radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class Box:
    half_width: float
    half_height: float

    def __post_init__(self):
        if not (self.half_width > 0.0 and math.isfinite(self.half_width)):
            raise ValueError(f"box half_width must be positive, got {self.half_width}")
        if not (self.half_height > 0.0 and math.isfinite(self.half_height)):
            raise ValueError(f"box half_height must be positive, got {self.half_height}")


@dataclass(frozen=True)
class CompoundPart:
    box: Box
    offset: tuple[float, float]

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.offset):
            raise ValueError(f"part offset must be finite, got {self.offset}")


@dataclass(frozen=True)
class Compound:
    """Rigid union of boxes; parts rotate with the body, offsets are local."""

    parts: tuple[CompoundPart, ...]

    def __post_init__(self):
        if len(self.parts) < 1:
            raise ValueError("compound needs at least one part")


Shape = Circle | Box | Compound


# --------- world-space part views ---------

def world_parts(shape: Shape, x: float, y: float, angle: float):
    """Flatten a posed shape into world-space primitives.

    Yields ("circle", (cx, cy, r)) or ("box", (bx, by, cos, sin, hw, hh)).
    """
    c = math.cos(angle)
    s = math.sin(angle)
    if isinstance(shape, Circle):
        yield ("circle", (x, y, shape.radius))
    elif isinstance(shape, Box):
        yield ("box", (x, y, c, s, shape.half_width, shape.half_height))
    else:
        for part in shape.parts:
            ox, oy = part.offset
            yield ("box", (x + c * ox - s * oy, y + s * ox + c * oy, c, s,
                           part.box.half_width, part.box.half_height))


def _part_gap(pa, pb) -> float:
    ka, va = pa
    kb, vb = pb
    if ka == "circle" and kb == "circle":
        return circle_circle_gap(va[0], va[1], va[2], vb[0], vb[1], vb[2])
    if ka == "circle":
        return circle_box_gap(va[0], va[1], va[2], *vb)
    if kb == "circle":
        return circle_box_gap(vb[0], vb[1], vb[2], *va)
    return box_box_gap(*va, *vb)


def shape_gap(shape_a: Shape, pose_a, shape_b: Shape, pose_b) -> float:
    """Signed separation between two posed shapes (min over part pairs)."""
    parts_a = list(world_parts(shape_a, *pose_a))
    parts_b = list(world_parts(shape_b, *pose_b))
    return min(_part_gap(pa, pb) for pa in parts_a for pb in parts_b)


def shapes_overlap(shape_a: Shape, pose_a, shape_b: Shape, pose_b) -> bool:
    """True iff penetration exceeds the touch tolerance OVERLAP_EPS."""
    return shape_gap(shape_a, pose_a, shape_b, pose_b) < -OVERLAP_EPS


def point_in_shape(shape: Shape, pose, px: float, py: float) -> bool:
    for kind, v in world_parts(shape, *pose):
        if kind == "circle":
            if point_in_circle(px, py, v[0], v[1], v[2]):
                return True
        elif point_in_box(px, py, *v):
            return True
    return False


def shape_aabb(shape: Shape, pose) -> tuple[float, float, float, float]:
    """(min_x, min_y, max_x, max_y) of the posed shape."""
    lo_x = lo_y = math.inf
    hi_x = hi_y = -math.inf
    for kind, v in world_parts(shape, *pose):
        if kind == "circle":
            cx, cy, r = v
            lo_x = min(lo_x, cx - r)
            hi_x = max(hi_x, cx + r)
            lo_y = min(lo_y, cy - r)
            hi_y = max(hi_y, cy + r)
        else:
            bx, by, c, s, hw, hh = v
            ex = hw * abs(c) + hh * abs(s)
            ey = hw * abs(s) + hh * abs(c)
            lo_x = min(lo_x, bx - ex)
            hi_x = max(hi_x, bx + ex)
            lo_y = min(lo_y, by - ey)
            hi_y = max(hi_y, by + ey)
    return lo_x, lo_y, hi_x, hi_y


# --------- mass properties (unit density) ---------

def mass_properties(shape: Shape) -> tuple[float, tuple[float, float], float]:
    """(area, local center of mass, moment of inertia per unit density about the COM)."""
    if isinstance(shape, Circle):
        r = shape.radius
        area = math.pi * r * r
        return area, (0.0, 0.0), area * r * r / 2.0
    if isinstance(shape, Box):
        hw, hh = shape.half_width, shape.half_height
        area = 4.0 * hw * hh
        return area, (0.0, 0.0), area * (hw * hw + hh * hh) / 3.0
    area = 0.0
    cx = cy = 0.0
    for part in shape.parts:
        a = 4.0 * part.box.half_width * part.box.half_height
        area += a
        cx += a * part.offset[0]
        cy += a * part.offset[1]
    cx /= area
    cy /= area
    inertia = 0.0
    for part in shape.parts:
        hw, hh = part.box.half_width, part.box.half_height
        a = 4.0 * hw * hh
        d2 = (part.offset[0] - cx) ** 2 + (part.offset[1] - cy) ** 2
        inertia += a * (hw * hw + hh * hh) / 3.0 + a * d2
    return area, (cx, cy), inertia


def recentered(shape: Compound) -> Compound:
    """Shift compound part offsets so the center of mass sits at the origin."""
    _, (cx, cy), _ = mass_properties(shape)
    return Compound(tuple(
        CompoundPart(p.box, (p.offset[0] - cx, p.offset[1] - cy))
        for p in shape.parts
    ))
