"""Deterministic fixed-timestep 2D rigid-body engine.

Semi-implicit Euler integration (velocity then position) with a
sequential-impulse contact solver: restitution combines by min, friction by
geometric mean, positional overlap is relaxed by a 20% push-out beyond a
0.01 px slop, 8 solver iterations. Bodies advance in sorted-id order and
contact pairs in lexicographic order, so a simulation is a pure function of
its scene on a given platform.

Shapes reduce to three collision primitives: circles, oriented boxes and
capsules (thick segments); compounds are collections of oriented boxes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import NumericalBlowup
from .scene import (
    BodySpec,
    Box,
    Circle,
    Compound,
    SceneSpec,
    Segment,
    frame_count,
    segment_local_endpoints,
)

SOLVER_ITERATIONS = 8
BAUMGARTE = 0.2
SLOP = 0.01
RESTITUTION_VELOCITY_THRESHOLD = 5.0  # px/s; below this, contacts are inelastic
BLOWUP_LIMIT = 1.0e6

# axis-selection tolerances for the box-box separating-axis test
_REL_TOL = 0.95
_ABS_TOL = 0.01


@dataclass(frozen=True, slots=True)
class BodyState:
    x: float
    y: float
    vx: float
    vy: float
    angle: float
    angular_velocity: float


class RigidBody:
    """Runtime body: mass properties plus mutable center-of-mass state."""

    __slots__ = (
        "spec", "index", "is_static", "mass", "inv_mass", "inertia", "inv_inertia",
        "restitution", "friction", "com_local", "x", "y", "vx", "vy",
        "angle", "omega",
    )

    def __init__(self, spec: BodySpec, index: int):
        self.spec = spec
        self.index = index
        self.is_static = spec.is_static
        area, inertia_per_mass, com_local = _mass_properties(spec)
        self.mass = spec.material.density * area
        self.inertia = self.mass * inertia_per_mass
        self.inv_mass = 0.0 if spec.is_static else 1.0 / self.mass
        self.inv_inertia = 0.0 if spec.is_static else 1.0 / self.inertia
        self.restitution = spec.material.restitution
        self.friction = spec.material.friction
        self.com_local = com_local
        ax, ay = spec.position
        self.x = ax + com_local[0]
        self.y = ay + com_local[1]
        self.vx, self.vy = spec.velocity
        self.angle = 0.0
        self.omega = spec.angular_velocity

    def anchor(self) -> tuple[float, float]:
        lx, ly = self.com_local
        if lx == 0.0 and ly == 0.0:
            return self.x, self.y
        c, s = math.cos(self.angle), math.sin(self.angle)
        return self.x - (lx * c - ly * s), self.y - (lx * s + ly * c)

    def state(self) -> BodyState:
        ax, ay = self.anchor()
        return BodyState(ax, ay, self.vx, self.vy, self.angle, self.omega)


def _mass_properties(spec: BodySpec) -> tuple[float, float, tuple[float, float]]:
    """Returns (area, inertia per unit mass about the COM, local COM offset)."""
    s = spec.shape
    if isinstance(s, Circle):
        return math.pi * s.radius**2, 0.5 * s.radius**2, (0.0, 0.0)
    if isinstance(s, Box):
        area = 4.0 * s.half_w * s.half_h
        return area, (s.half_w**2 + s.half_h**2) / 3.0, (0.0, 0.0)
    if isinstance(s, Segment):
        (x1, y1), (x2, y2) = segment_local_endpoints(s)
        length = math.hypot(x2 - x1, y2 - y1)
        rho = s.thickness / 2.0
        area = length * s.thickness + math.pi * rho**2
        inertia = ((length + 2 * rho) ** 2 + s.thickness**2) / 12.0
        return area, inertia, (0.0, 0.0)
    assert isinstance(s, Compound)
    areas = [4.0 * p.half_w * p.half_h for p in s.parts]
    total = sum(areas)
    cx = sum(a * p.offset_x for a, p in zip(areas, s.parts)) / total
    cy = sum(a * p.offset_y for a, p in zip(areas, s.parts)) / total
    inertia = 0.0
    for a, p in zip(areas, s.parts):
        d2 = (p.offset_x - cx) ** 2 + (p.offset_y - cy) ** 2
        inertia += a * ((p.half_w**2 + p.half_h**2) / 3.0 + d2)
    return total, inertia / total, (cx, cy)


# ---------------------------------------------------------------------------
# collision primitives at the current pose

_CIRCLE, _OBB, _CAPSULE = 0, 1, 2


def _primitives(body: RigidBody):
    ax, ay = body.anchor()
    s = body.spec.shape
    if isinstance(s, Circle):
        return ((_CIRCLE, ax, ay, s.radius),)
    if isinstance(s, Box):
        return ((_OBB, ax, ay, s.half_w, s.half_h, s.angle + body.angle),)
    if isinstance(s, Segment):
        (lx1, ly1), (lx2, ly2) = segment_local_endpoints(s)
        c, sn = math.cos(body.angle), math.sin(body.angle)
        p1 = (ax + lx1 * c - ly1 * sn, ay + lx1 * sn + ly1 * c)
        p2 = (ax + lx2 * c - ly2 * sn, ay + lx2 * sn + ly2 * c)
        return ((_CAPSULE, p1[0], p1[1], p2[0], p2[1], s.thickness / 2.0),)
    assert isinstance(s, Compound)
    c, sn = math.cos(body.angle), math.sin(body.angle)
    prims = []
    for p in s.parts:
        ox = ax + p.offset_x * c - p.offset_y * sn
        oy = ay + p.offset_x * sn + p.offset_y * c
        prims.append((_OBB, ox, oy, p.half_w, p.half_h, p.angle + body.angle))
    return tuple(prims)


def _prim_aabb(prim):
    kind = prim[0]
    if kind == _CIRCLE:
        _, x, y, r = prim
        return x - r, y - r, x + r, y + r
    if kind == _OBB:
        _, x, y, hw, hh, angle = prim
        c, s = abs(math.cos(angle)), abs(math.sin(angle))
        ex = hw * c + hh * s
        ey = hw * s + hh * c
        return x - ex, y - ey, x + ex, y + ey
    _, x1, y1, x2, y2, rho = prim
    return min(x1, x2) - rho, min(y1, y2) - rho, max(x1, x2) + rho, max(y1, y2) + rho


def _aabb_union(boxes):
    x0 = min(b[0] for b in boxes)
    y0 = min(b[1] for b in boxes)
    x1 = max(b[2] for b in boxes)
    y1 = max(b[3] for b in boxes)
    return x0, y0, x1, y1


def _coll_circle_circle(a, b):
    _, x1, y1, r1 = a
    _, x2, y2, r2 = b
    dx, dy = x2 - x1, y2 - y1
    dist2 = dx * dx + dy * dy
    rsum = r1 + r2
    if dist2 >= rsum * rsum:
        return []
    dist = math.sqrt(dist2)
    if dist > 1e-12:
        nx, ny = dx / dist, dy / dist
    else:
        nx, ny = 0.0, 1.0
    pen = rsum - dist
    px = x1 + nx * (r1 - 0.5 * pen)
    py = y1 + ny * (r1 - 0.5 * pen)
    return [(px, py, nx, ny, pen)]


def _coll_circle_obb(circ, obb):
    """Normal points from the circle into the box."""
    _, cx, cy, r = circ
    _, bx, by, hw, hh, angle = obb
    cos_a, sin_a = math.cos(angle), math.sin(angle)
    dx, dy = cx - bx, cy - by
    lx = dx * cos_a + dy * sin_a
    ly = dy * cos_a - dx * sin_a
    qx = min(max(lx, -hw), hw)
    qy = min(max(ly, -hh), hh)
    if qx == lx and qy == ly:
        # center inside the box: push out along the shallowest face
        depth_x = hw - abs(lx)
        depth_y = hh - abs(ly)
        if depth_x < depth_y:
            local_n = (-1.0, 0.0) if lx > 0 else (1.0, 0.0)
            pen = r + depth_x
        else:
            local_n = (0.0, -1.0) if ly > 0 else (0.0, 1.0)
            pen = r + depth_y
        nx = local_n[0] * cos_a - local_n[1] * sin_a
        ny = local_n[0] * sin_a + local_n[1] * cos_a
        return [(cx, cy, nx, ny, pen)]
    ddx, ddy = lx - qx, ly - qy
    dist2 = ddx * ddx + ddy * ddy
    if dist2 >= r * r:
        return []
    dist = math.sqrt(dist2)
    lnx, lny = -ddx / dist, -ddy / dist  # from circle toward the box surface
    nx = lnx * cos_a - lny * sin_a
    ny = lnx * sin_a + lny * cos_a
    wx = bx + (qx * cos_a - qy * sin_a)
    wy = by + (qx * sin_a + qy * cos_a)
    return [(wx, wy, nx, ny, r - dist)]


def _closest_on_segment(px, py, x1, y1, x2, y2):
    ex, ey = x2 - x1, y2 - y1
    len2 = ex * ex + ey * ey
    if len2 <= 0.0:
        return x1, y1
    t = ((px - x1) * ex + (py - y1) * ey) / len2
    t = min(max(t, 0.0), 1.0)
    return x1 + t * ex, y1 + t * ey


def _coll_circle_capsule(circ, cap):
    _, cx, cy, r = circ
    _, x1, y1, x2, y2, rho = cap
    qx, qy = _closest_on_segment(cx, cy, x1, y1, x2, y2)
    dx, dy = qx - cx, qy - cy
    dist2 = dx * dx + dy * dy
    rsum = r + rho
    if dist2 >= rsum * rsum:
        return []
    dist = math.sqrt(dist2)
    if dist > 1e-12:
        nx, ny = dx / dist, dy / dist
    else:
        nx, ny = 0.0, 1.0
    pen = rsum - dist
    px = cx + nx * (r - 0.5 * pen)
    py = cy + ny * (r - 0.5 * pen)
    return [(px, py, nx, ny, pen)]


def _clip_segment_to_line(points, nx, ny, offset):
    """Keep the part of a 2-point polyline on the negative side of a plane."""
    out = []
    d0 = nx * points[0][0] + ny * points[0][1] - offset
    d1 = nx * points[1][0] + ny * points[1][1] - offset
    if d0 <= 0.0:
        out.append(points[0])
    if d1 <= 0.0:
        out.append(points[1])
    if d0 * d1 < 0.0:
        t = d0 / (d0 - d1)
        x = points[0][0] + t * (points[1][0] - points[0][0])
        y = points[0][1] + t * (points[1][1] - points[0][1])
        out.append((x, y))
    return out


def _incident_edge(nx_local, ny_local, hw, hh, bx, by, cos_b, sin_b):
    """Vertices of the incident box edge whose outward normal matches the
    given direction (in the incident box's local frame)."""
    if abs(nx_local) > abs(ny_local):
        if nx_local > 0.0:
            v1, v2 = (hw, -hh), (hw, hh)
        else:
            v1, v2 = (-hw, hh), (-hw, -hh)
    else:
        if ny_local > 0.0:
            v1, v2 = (hw, hh), (-hw, hh)
        else:
            v1, v2 = (-hw, -hh), (hw, -hh)
    pts = []
    for lx, ly in (v1, v2):
        pts.append((bx + lx * cos_b - ly * sin_b, by + lx * sin_b + ly * cos_b))
    return pts


def _coll_obb_obb(a, b):
    """Separating-axis test with reference-face clipping; up to 2 points."""
    _, ax, ay, ahw, ahh, aang = a
    _, bx, by, bhw, bhh, bang = b
    ca, sa = math.cos(aang), math.sin(aang)
    cb, sb = math.cos(bang), math.sin(bang)
    dx, dy = bx - ax, by - ay
    # center offset in each box's local frame
    dax = dx * ca + dy * sa
    day = dy * ca - dx * sa
    dbx = dx * cb + dy * sb
    dby = dy * cb - dx * sb
    # |R_a^T R_b| entries
    c00 = ca * cb + sa * sb   # cos(bang - aang)
    c01 = sa * cb - ca * sb   # sin(aang - bang)
    a00, a01 = abs(c00), abs(c01)
    face_a_x = abs(dax) - ahw - (a00 * bhw + a01 * bhh)
    face_a_y = abs(day) - ahh - (a01 * bhw + a00 * bhh)
    if face_a_x > 0.0 or face_a_y > 0.0:
        return []
    face_b_x = abs(dbx) - bhw - (a00 * ahw + a01 * ahh)
    face_b_y = abs(dby) - bhh - (a01 * ahw + a00 * ahh)
    if face_b_x > 0.0 or face_b_y > 0.0:
        return []

    # pick the reference face (least penetration, with stickiness)
    axis = 0
    separation = face_a_x
    normal = (ca, sa) if dax > 0.0 else (-ca, -sa)
    if face_a_y > _REL_TOL * separation + _ABS_TOL * ahh:
        axis = 1
        separation = face_a_y
        normal = (-sa, ca) if day > 0.0 else (sa, -ca)
    if face_b_x > _REL_TOL * separation + _ABS_TOL * bhw:
        axis = 2
        separation = face_b_x
        normal = (cb, sb) if dbx > 0.0 else (-cb, -sb)
    if face_b_y > _REL_TOL * separation + _ABS_TOL * bhh:
        axis = 3
        separation = face_b_y
        normal = (-sb, cb) if dby > 0.0 else (sb, -cb)

    nx, ny = normal  # always from A toward B
    if axis <= 1:  # reference face on A, incident box is B
        front_n = (nx, ny)
        ref_c, ref_s, ref_x, ref_y = ca, sa, ax, ay
        ref_half = ahw if axis == 0 else ahh
        side_n = (-sa, ca) if axis == 0 else (ca, sa)
        side_half = ahh if axis == 0 else ahw
        inc_c, inc_s, inc_x, inc_y, inc_hw, inc_hh = cb, sb, bx, by, bhw, bhh
    else:  # reference face on B, incident box is A
        front_n = (-nx, -ny)
        ref_c, ref_s, ref_x, ref_y = cb, sb, bx, by
        ref_half = bhw if axis == 2 else bhh
        side_n = (-sb, cb) if axis == 2 else (cb, sb)
        side_half = bhh if axis == 2 else bhw
        inc_c, inc_s, inc_x, inc_y, inc_hw, inc_hh = ca, sa, ax, ay, ahw, ahh

    front = front_n[0] * ref_x + front_n[1] * ref_y + ref_half
    side = side_n[0] * ref_x + side_n[1] * ref_y
    # incident-frame normal
    lnx = -(front_n[0] * inc_c + front_n[1] * inc_s)
    lny = -(front_n[1] * inc_c - front_n[0] * inc_s)
    edge = _incident_edge(lnx, lny, inc_hw, inc_hh, inc_x, inc_y, inc_c, inc_s)
    edge = _clip_segment_to_line(edge, -side_n[0], -side_n[1], -side + side_half)
    if len(edge) < 2:
        return []
    edge = _clip_segment_to_line(edge[:2], side_n[0], side_n[1], side + side_half)
    if len(edge) < 2:
        return []

    contacts = []
    for px, py in edge[:2]:
        sep = front_n[0] * px + front_n[1] * py - front
        if sep <= 0.0:
            contacts.append(
                (px - sep * front_n[0], py - sep * front_n[1], nx, ny, -sep)
            )
    return contacts


def _capsule_rect(cap):
    _, x1, y1, x2, y2, rho = cap
    mx, my = (x1 + x2) / 2.0, (y1 + y2) / 2.0
    length = math.hypot(x2 - x1, y2 - y1)
    angle = math.atan2(y2 - y1, x2 - x1)
    return (_OBB, mx, my, length / 2.0, rho, angle)


def _coll_obb_capsule(obb, cap):
    contacts = list(_coll_obb_obb(obb, _capsule_rect(cap)))
    _, x1, y1, x2, y2, rho = cap
    for ex, ey in ((x1, y1), (x2, y2)):
        for px, py, nx, ny, pen in _coll_circle_obb((_CIRCLE, ex, ey, rho), obb):
            # flip: normal must point obb -> capsule
            cand = (px, py, -nx, -ny, pen)
            if all((cand[0] - c[0]) ** 2 + (cand[1] - c[1]) ** 2 > 0.25 for c in contacts):
                contacts.append(cand)
    return contacts


def _coll_capsule_capsule(a, b):
    _, ax1, ay1, ax2, ay2, ra = a
    _, bx1, by1, bx2, by2, rb = b
    # closest pair of points between the two core segments (sampled projections)
    best = None
    for px, py in ((ax1, ay1), (ax2, ay2)):
        qx, qy = _closest_on_segment(px, py, bx1, by1, bx2, by2)
        d2 = (qx - px) ** 2 + (qy - py) ** 2
        if best is None or d2 < best[0]:
            best = (d2, px, py, qx, qy)
    for qx, qy in ((bx1, by1), (bx2, by2)):
        px, py = _closest_on_segment(qx, qy, ax1, ay1, ax2, ay2)
        d2 = (qx - px) ** 2 + (qy - py) ** 2
        if best is None or d2 < best[0]:
            best = (d2, px, py, qx, qy)
    d2, px, py, qx, qy = best
    rsum = ra + rb
    if d2 >= rsum * rsum:
        return []
    dist = math.sqrt(d2)
    if dist > 1e-12:
        nx, ny = (qx - px) / dist, (qy - py) / dist
    else:
        nx, ny = 0.0, 1.0
    pen = rsum - dist
    return [(px + nx * (ra - 0.5 * pen), py + ny * (ra - 0.5 * pen), nx, ny, pen)]


def _collide_prims(pa, pb):
    """Contact points between two primitives, normal from pa toward pb."""
    ka, kb = pa[0], pb[0]
    if ka == _CIRCLE and kb == _CIRCLE:
        return _coll_circle_circle(pa, pb)
    if ka == _CIRCLE and kb == _OBB:
        return _coll_circle_obb(pa, pb)
    if ka == _OBB and kb == _CIRCLE:
        return _flip(_coll_circle_obb(pb, pa))
    if ka == _CIRCLE and kb == _CAPSULE:
        return _coll_circle_capsule(pa, pb)
    if ka == _CAPSULE and kb == _CIRCLE:
        return _flip(_coll_circle_capsule(pb, pa))
    if ka == _OBB and kb == _OBB:
        return _coll_obb_obb(pa, pb)
    if ka == _OBB and kb == _CAPSULE:
        return _coll_obb_capsule(pa, pb)
    if ka == _CAPSULE and kb == _OBB:
        return _flip(_coll_obb_capsule(pb, pa))
    return _coll_capsule_capsule(pa, pb)


def _flip(contacts):
    return [(px, py, -nx, -ny, pen) for px, py, nx, ny, pen in contacts]


class Contact:
    __slots__ = (
        "a", "b", "px", "py", "nx", "ny", "pen", "rax", "ray", "rbx", "rby",
        "mass_n", "mass_t", "bias_v", "friction", "pn", "pt",
    )

    def __init__(self, a: RigidBody, b: RigidBody, px, py, nx, ny, pen):
        self.a = a
        self.b = b
        self.px, self.py = px, py
        self.nx, self.ny = nx, ny
        self.pen = pen
        self.pn = 0.0
        self.pt = 0.0

    def prestep(self):
        a, b = self.a, self.b
        self.rax, self.ray = self.px - a.x, self.py - a.y
        self.rbx, self.rby = self.px - b.x, self.py - b.y
        rna = self.rax * self.ny - self.ray * self.nx
        rnb = self.rbx * self.ny - self.rby * self.nx
        kn = a.inv_mass + b.inv_mass + a.inv_inertia * rna * rna + b.inv_inertia * rnb * rnb
        self.mass_n = 1.0 / kn
        tx, ty = -self.ny, self.nx
        rta = self.rax * ty - self.ray * tx
        rtb = self.rbx * ty - self.rby * tx
        kt = a.inv_mass + b.inv_mass + a.inv_inertia * rta * rta + b.inv_inertia * rtb * rtb
        self.mass_t = 1.0 / kt
        self.friction = math.sqrt(a.friction * b.friction)
        vn = self._rel_normal_velocity()
        e = min(a.restitution, b.restitution)
        self.bias_v = -e * vn if vn < -RESTITUTION_VELOCITY_THRESHOLD else 0.0

    def _rel_velocity(self):
        a, b = self.a, self.b
        rvx = (b.vx - b.omega * self.rby) - (a.vx - a.omega * self.ray)
        rvy = (b.vy + b.omega * self.rbx) - (a.vy + a.omega * self.rax)
        return rvx, rvy

    def _rel_normal_velocity(self):
        rvx, rvy = self._rel_velocity()
        return rvx * self.nx + rvy * self.ny

    def _apply(self, ix, iy):
        a, b = self.a, self.b
        if not a.is_static:
            a.vx -= ix * a.inv_mass
            a.vy -= iy * a.inv_mass
            a.omega -= a.inv_inertia * (self.rax * iy - self.ray * ix)
        if not b.is_static:
            b.vx += ix * b.inv_mass
            b.vy += iy * b.inv_mass
            b.omega += b.inv_inertia * (self.rbx * iy - self.rby * ix)

    def solve(self):
        vn = self._rel_normal_velocity()
        dpn = self.mass_n * (self.bias_v - vn)
        pn0 = self.pn
        self.pn = max(pn0 + dpn, 0.0)
        dpn = self.pn - pn0
        self._apply(dpn * self.nx, dpn * self.ny)

        rvx, rvy = self._rel_velocity()
        tx, ty = -self.ny, self.nx
        vt = rvx * tx + rvy * ty
        dpt = self.mass_t * (-vt)
        max_pt = self.friction * self.pn
        pt0 = self.pt
        self.pt = min(max(pt0 + dpt, -max_pt), max_pt)
        dpt = self.pt - pt0
        self._apply(dpt * tx, dpt * ty)


def make_bodies(scene: SceneSpec) -> list[RigidBody]:
    ordered = sorted(scene.bodies, key=lambda b: b.id)
    return [RigidBody(spec, i) for i, spec in enumerate(ordered)]


def detect_contacts(bodies: list[RigidBody]) -> list[Contact]:
    """Narrow phase over lexicographically ordered body pairs."""
    contacts: list[Contact] = []
    prims = [_primitives(b) for b in bodies]
    aabbs = [_aabb_union([_prim_aabb(p) for p in ps]) for ps in prims]
    n = len(bodies)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = bodies[i], bodies[j]
            if a.is_static and b.is_static:
                continue
            ax0, ay0, ax1, ay1 = aabbs[i]
            bx0, by0, bx1, by1 = aabbs[j]
            if ax1 < bx0 or bx1 < ax0 or ay1 < by0 or by1 < ay0:
                continue
            for pa in prims[i]:
                for pb in prims[j]:
                    for px, py, nx, ny, pen in _collide_prims(pa, pb):
                        contacts.append(Contact(a, b, px, py, nx, ny, pen))
    return contacts


def resolve_contacts(bodies: list[RigidBody], contacts: list[Contact] | None = None):
    """Run the velocity solver; returns contacts with accumulated impulses.

    Exposed for direct testing of collision response; simulate() calls the
    same code path.
    """
    if contacts is None:
        contacts = detect_contacts(bodies)
    for c in contacts:
        c.prestep()
    for _ in range(SOLVER_ITERATIONS):
        for c in contacts:
            c.solve()
    return contacts


def _positional_correction(bodies: list[RigidBody]):
    for c in detect_contacts(bodies):
        a, b = c.a, c.b
        inv_sum = a.inv_mass + b.inv_mass
        if inv_sum == 0.0:
            continue
        corr = BAUMGARTE * max(c.pen - SLOP, 0.0) / inv_sum
        if not a.is_static:
            a.x -= c.nx * corr * a.inv_mass
            a.y -= c.ny * corr * a.inv_mass
        if not b.is_static:
            b.x += c.nx * corr * b.inv_mass
            b.y += c.ny * corr * b.inv_mass


@dataclass
class Trajectory:
    """Substep-resolution state history plus fps-sampled frame states.

    ``states[k]`` is the state of every body after substep k+1; ``initial``
    is the state before any stepping. Frame t (0-based) samples the state
    after t*substeps substeps, so frame 0 is the initial pose.
    """

    body_ids: tuple[str, ...]
    fps: int
    substeps: int
    initial: list[BodyState]
    states: list[list[BodyState]]
    contacts: list[list[tuple[str, str, float]]] | None = None

    @property
    def n_frames(self) -> int:
        return len(self.states) // self.substeps

    def frame_states(self, t: int) -> list[BodyState]:
        if t == 0:
            return self.initial
        return self.states[t * self.substeps - 1]

    def frames(self):
        return [self.frame_states(t) for t in range(self.n_frames)]


def _check_blowup(bodies: list[RigidBody], step: int):
    for b in bodies:
        values = (b.x, b.y, b.vx, b.vy)
        for v in values:
            if not math.isfinite(v) or abs(v) > BLOWUP_LIMIT:
                raise NumericalBlowup(
                    f"body {b.spec.id!r} exceeded state limits at substep {step}"
                )
        if not math.isfinite(b.angle) or not math.isfinite(b.omega):
            raise NumericalBlowup(
                f"body {b.spec.id!r} has a non-finite angular state at substep {step}"
            )


def simulate(scene: SceneSpec, record_contacts: bool = False) -> Trajectory:
    """Advance a validated scene to a full trajectory.

    Same scene in, bitwise-same trajectory out: stepping is single-threaded
    and iteration order is fixed by body id.
    """
    w = scene.world
    bodies = make_bodies(scene)
    n_frames = frame_count(w)
    substeps = w.timestep_substeps
    dt = 1.0 / (w.fps * substeps)
    gx, gy = w.gravity
    total = n_frames * substeps

    traj = Trajectory(
        body_ids=tuple(b.spec.id for b in bodies),
        fps=w.fps,
        substeps=substeps,
        initial=[b.state() for b in bodies],
        states=[],
        contacts=[] if record_contacts else None,
    )
    _check_blowup(bodies, 0)
    for step in range(1, total + 1):
        for b in bodies:
            if not b.is_static:
                b.vx += gx * dt
                b.vy += gy * dt
        contacts = resolve_contacts(bodies)
        for b in bodies:
            if not b.is_static:
                b.x += b.vx * dt
                b.y += b.vy * dt
                b.angle += b.omega * dt
        _positional_correction(bodies)
        _check_blowup(bodies, step)
        traj.states.append([b.state() for b in bodies])
        if record_contacts:
            traj.contacts.append(
                [(c.a.spec.id, c.b.spec.id, c.pn) for c in contacts if c.pn != 0.0]
            )
    return traj


def dump_trajectory(traj: Trajectory, scene_id: str, fp) -> None:
    """One NDJSON record per frame per body, for debugging."""
    for t, states in enumerate(traj.frames()):
        for body_id, st in zip(traj.body_ids, states):
            fp.write(
                json.dumps(
                    {
                        "scene_id": scene_id,
                        "frame": t,
                        "body_id": body_id,
                        "x": st.x,
                        "y": st.y,
                        "angle": st.angle,
                    }
                )
                + "\n"
            )
