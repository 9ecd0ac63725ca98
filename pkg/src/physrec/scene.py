"""Scene-hypothesis DSL: typed scene documents, parsing, validation,
canonicalization, the guaranteed-valid fallback scene, and a deterministic
plain-English scene description.

A scene document is UTF-8 JSON with a ``world`` block, an ordered ``bodies``
list, and a free-form string ``meta`` map. Coordinates are pixels with the
origin at the top-left, x rightward, y downward; +y gravity points down.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace

from .errors import MalformedDocument, NonFiniteValue, SchemaViolation, Uncanonicalizable

CATEGORIES = ("circle", "line", "rectangle", "u_shape", "triangle", "composite_shape")

DEFAULT_GRAVITY = (0.0, 300.0)
DEFAULT_RESOLUTION = (512, 512)
DEFAULT_FPS = 30
DEFAULT_DURATION_S = 3.0
DEFAULT_SUBSTEPS = 4
DEFAULT_BACKGROUND = (255, 255, 255)
DEFAULT_RESTITUTION = 0.5
DEFAULT_FRICTION = 0.4
DEFAULT_DENSITY = 1.0
MAX_DURATION_S = 10.0

_FENCE_RE = re.compile(r"```[A-Za-z0-9_+-]*[ \t]*\r?\n(.*?)```", re.DOTALL)


@dataclass(frozen=True)
class Material:
    restitution: float = DEFAULT_RESTITUTION
    friction: float = DEFAULT_FRICTION
    density: float = DEFAULT_DENSITY


@dataclass(frozen=True)
class Circle:
    radius: float


@dataclass(frozen=True)
class Box:
    half_w: float
    half_h: float
    angle: float = 0.0


@dataclass(frozen=True)
class Segment:
    x1: float
    y1: float
    x2: float
    y2: float
    thickness: float


@dataclass(frozen=True)
class BoxPart:
    offset_x: float
    offset_y: float
    half_w: float
    half_h: float
    angle: float = 0.0


@dataclass(frozen=True)
class Compound:
    parts: tuple[BoxPart, ...]
    kind: str = "composite_shape"  # one of u_shape / triangle / composite_shape


Shape = Circle | Box | Segment | Compound


@dataclass(frozen=True)
class BodySpec:
    id: str
    shape: Shape
    color: tuple[int, int, int] = (128, 128, 128)
    is_static: bool = False
    position: tuple[float, float] = (0.0, 0.0)
    velocity: tuple[float, float] = (0.0, 0.0)
    angular_velocity: float = 0.0
    material: Material = Material()


@dataclass(frozen=True)
class WorldParams:
    gravity: tuple[float, float] = DEFAULT_GRAVITY
    resolution: tuple[int, int] = DEFAULT_RESOLUTION
    fps: int = DEFAULT_FPS
    duration_s: float = DEFAULT_DURATION_S
    timestep_substeps: int = DEFAULT_SUBSTEPS
    background: tuple[int, int, int] = DEFAULT_BACKGROUND
    restitution_default: float = DEFAULT_RESTITUTION
    friction_default: float = DEFAULT_FRICTION


@dataclass(frozen=True)
class SceneSpec:
    world: WorldParams = WorldParams()
    bodies: tuple[BodySpec, ...] = ()
    meta: dict[str, str] = field(default_factory=dict)


@dataclass
class ModelOutput:
    """Analysis text plus the extracted scene, with the verbatim response."""

    analysis: str
    scene: SceneSpec
    raw: str


@dataclass(frozen=True)
class Violation:
    body_id: str  # "" for world-level rules
    rule: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        return "; ".join(f"[{v.body_id or 'world'}] {v.rule}: {v.message}" for v in self.violations)


# Violations canonicalize_scene is allowed to repair; anything else is hard.
_CLAMPABLE_RULES = frozenset(
    {"duration-range", "fps-range", "static-zero-velocity", "color-range", "substeps-range"}
)


def frame_count(world: WorldParams) -> int:
    return int(round(world.duration_s * world.fps))


# ---------------------------------------------------------------------------
# geometry helpers shared with the engine / renderer / annotator


def shape_max_extent(shape: Shape) -> float:
    if isinstance(shape, Circle):
        return shape.radius
    if isinstance(shape, Box):
        return math.hypot(shape.half_w, shape.half_h)
    if isinstance(shape, Segment):
        mx = (shape.x1 + shape.x2) / 2.0
        my = (shape.y1 + shape.y2) / 2.0
        half = math.hypot(shape.x1 - mx, shape.y1 - my)
        return half + shape.thickness / 2.0
    if isinstance(shape, Compound):
        return max(
            math.hypot(p.offset_x, p.offset_y) + math.hypot(p.half_w, p.half_h)
            for p in shape.parts
        )
    raise TypeError(f"unknown shape {type(shape)!r}")


def _rot(x: float, y: float, angle: float) -> tuple[float, float]:
    c, s = math.cos(angle), math.sin(angle)
    return x * c - y * s, x * s + y * c


def obb_corners(cx, cy, hw, hh, angle):
    c, s = math.cos(angle), math.sin(angle)
    ux, uy = c * hw, s * hw
    vx, vy = -s * hh, c * hh
    return [
        (cx + ux + vx, cy + uy + vy),
        (cx + ux - vx, cy + uy - vy),
        (cx - ux + vx, cy - uy + vy),
        (cx - ux - vx, cy - uy - vy),
    ]


def segment_local_endpoints(shape: Segment) -> tuple[tuple[float, float], tuple[float, float]]:
    mx = (shape.x1 + shape.x2) / 2.0
    my = (shape.y1 + shape.y2) / 2.0
    return (shape.x1 - mx, shape.y1 - my), (shape.x2 - mx, shape.y2 - my)


def body_aabb(body: BodySpec, x: float | None = None, y: float | None = None, angle: float = 0.0):
    """Axis-aligned world bounds of a body at the given pose (default: initial)."""
    if x is None:
        x, y = body.position
    shape = body.shape
    if isinstance(shape, Circle):
        return x - shape.radius, y - shape.radius, x + shape.radius, y + shape.radius
    if isinstance(shape, Box):
        pts = obb_corners(x, y, shape.half_w, shape.half_h, shape.angle + angle)
    elif isinstance(shape, Segment):
        (lx1, ly1), (lx2, ly2) = segment_local_endpoints(shape)
        p1 = _rot(lx1, ly1, angle)
        p2 = _rot(lx2, ly2, angle)
        rho = shape.thickness / 2.0
        xs = (x + p1[0], x + p2[0])
        ys = (y + p1[1], y + p2[1])
        return min(xs) - rho, min(ys) - rho, max(xs) + rho, max(ys) + rho
    elif isinstance(shape, Compound):
        pts = []
        for part in shape.parts:
            ox, oy = _rot(part.offset_x, part.offset_y, angle)
            pts.extend(
                obb_corners(x + ox, y + oy, part.half_w, part.half_h, part.angle + angle)
            )
    else:
        raise TypeError(f"unknown shape {type(shape)!r}")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return min(xs), min(ys), max(xs), max(ys)


def shape_category(shape: Shape) -> str:
    if isinstance(shape, Circle):
        return "circle"
    if isinstance(shape, Box):
        return "rectangle"
    if isinstance(shape, Segment):
        return "line"
    return shape.kind


# ---------------------------------------------------------------------------
# strict document <-> dataclass conversion


def _check_keys(obj: dict, allowed: set[str], required: set[str], path: str) -> None:
    for key in obj:
        if key not in allowed:
            raise SchemaViolation(f"unknown field {key!r}", path)
    for key in required:
        if key not in obj:
            raise SchemaViolation(f"missing field {key!r}", path)


def _num(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolation(f"expected number, got {type(value).__name__}", path)
    value = float(value)
    if not math.isfinite(value):
        raise NonFiniteValue(f"{path}: non-finite value")
    return value


def _int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaViolation(f"expected integer, got {type(value).__name__}", path)
    return value


def _pair(value, path: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise SchemaViolation("expected a [x, y] pair", path)
    return _num(value[0], f"{path}[0]"), _num(value[1], f"{path}[1]")


def _rgb(value, path: str) -> tuple[int, int, int]:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise SchemaViolation("expected an [r, g, b] triple", path)
    return tuple(_int(v, f"{path}[{i}]") for i, v in enumerate(value))  # type: ignore[return-value]


def _shape_from_dict(obj, path: str) -> Shape:
    if not isinstance(obj, dict):
        raise SchemaViolation("shape must be an object", path)
    kind = obj.get("type")
    if kind == "circle":
        _check_keys(obj, {"type", "radius"}, {"radius"}, path)
        return Circle(radius=_num(obj["radius"], f"{path}.radius"))
    if kind == "box":
        _check_keys(obj, {"type", "half_w", "half_h", "angle"}, {"half_w", "half_h"}, path)
        return Box(
            half_w=_num(obj["half_w"], f"{path}.half_w"),
            half_h=_num(obj["half_h"], f"{path}.half_h"),
            angle=_num(obj.get("angle", 0.0), f"{path}.angle"),
        )
    if kind == "segment":
        _check_keys(
            obj, {"type", "x1", "y1", "x2", "y2", "thickness"},
            {"x1", "y1", "x2", "y2", "thickness"}, path,
        )
        return Segment(
            x1=_num(obj["x1"], f"{path}.x1"),
            y1=_num(obj["y1"], f"{path}.y1"),
            x2=_num(obj["x2"], f"{path}.x2"),
            y2=_num(obj["y2"], f"{path}.y2"),
            thickness=_num(obj["thickness"], f"{path}.thickness"),
        )
    if kind == "compound":
        _check_keys(obj, {"type", "kind", "parts"}, {"parts"}, path)
        ckind = obj.get("kind", "composite_shape")
        if ckind not in ("u_shape", "triangle", "composite_shape"):
            raise SchemaViolation(f"unknown compound kind {ckind!r}", f"{path}.kind")
        parts_obj = obj["parts"]
        if not isinstance(parts_obj, list) or not parts_obj:
            raise SchemaViolation("parts must be a nonempty list", f"{path}.parts")
        parts = []
        for i, p in enumerate(parts_obj):
            ppath = f"{path}.parts[{i}]"
            if not isinstance(p, dict):
                raise SchemaViolation("part must be an object", ppath)
            _check_keys(
                p, {"offset_x", "offset_y", "half_w", "half_h", "angle"},
                {"offset_x", "offset_y", "half_w", "half_h"}, ppath,
            )
            parts.append(
                BoxPart(
                    offset_x=_num(p["offset_x"], f"{ppath}.offset_x"),
                    offset_y=_num(p["offset_y"], f"{ppath}.offset_y"),
                    half_w=_num(p["half_w"], f"{ppath}.half_w"),
                    half_h=_num(p["half_h"], f"{ppath}.half_h"),
                    angle=_num(p.get("angle", 0.0), f"{ppath}.angle"),
                )
            )
        return Compound(parts=tuple(parts), kind=ckind)
    raise SchemaViolation(f"unknown shape type {kind!r}", f"{path}.type")


def _world_from_dict(obj, path: str) -> WorldParams:
    if not isinstance(obj, dict):
        raise SchemaViolation("world must be an object", path)
    allowed = {
        "gravity", "resolution", "fps", "duration_s", "timestep_substeps",
        "background", "restitution_default", "friction_default",
    }
    _check_keys(obj, allowed, set(), path)
    res = obj.get("resolution", list(DEFAULT_RESOLUTION))
    if not isinstance(res, (list, tuple)) or len(res) != 2:
        raise SchemaViolation("expected [width, height]", f"{path}.resolution")
    fps = obj.get("fps", DEFAULT_FPS)
    return WorldParams(
        gravity=_pair(obj.get("gravity", list(DEFAULT_GRAVITY)), f"{path}.gravity"),
        resolution=(_int(res[0], f"{path}.resolution[0]"), _int(res[1], f"{path}.resolution[1]")),
        fps=_int(fps, f"{path}.fps"),
        duration_s=_num(obj.get("duration_s", DEFAULT_DURATION_S), f"{path}.duration_s"),
        timestep_substeps=_int(obj.get("timestep_substeps", DEFAULT_SUBSTEPS), f"{path}.timestep_substeps"),
        background=_rgb(obj.get("background", list(DEFAULT_BACKGROUND)), f"{path}.background"),
        restitution_default=_num(obj.get("restitution_default", DEFAULT_RESTITUTION), f"{path}.restitution_default"),
        friction_default=_num(obj.get("friction_default", DEFAULT_FRICTION), f"{path}.friction_default"),
    )


def _material_from_dict(obj, world: WorldParams, path: str) -> Material:
    if not isinstance(obj, dict):
        raise SchemaViolation("material must be an object", path)
    _check_keys(obj, {"restitution", "friction", "density"}, set(), path)
    return Material(
        restitution=_num(obj.get("restitution", world.restitution_default), f"{path}.restitution"),
        friction=_num(obj.get("friction", world.friction_default), f"{path}.friction"),
        density=_num(obj.get("density", DEFAULT_DENSITY), f"{path}.density"),
    )


def _body_from_dict(obj, world: WorldParams, path: str) -> BodySpec:
    if not isinstance(obj, dict):
        raise SchemaViolation("body must be an object", path)
    allowed = {
        "id", "shape", "color", "is_static", "position", "velocity",
        "angular_velocity", "material",
    }
    _check_keys(obj, allowed, {"id", "shape"}, path)
    body_id = obj["id"]
    if not isinstance(body_id, str):
        raise SchemaViolation("id must be a string", f"{path}.id")
    shape = _shape_from_dict(obj["shape"], f"{path}.shape")
    if isinstance(shape, Segment):
        position = ((shape.x1 + shape.x2) / 2.0, (shape.y1 + shape.y2) / 2.0)
    else:
        if "position" not in obj:
            raise SchemaViolation("missing field 'position'", path)
        position = _pair(obj["position"], f"{path}.position")
    is_static = obj.get("is_static", False)
    if not isinstance(is_static, bool):
        raise SchemaViolation("is_static must be a boolean", f"{path}.is_static")
    return BodySpec(
        id=body_id,
        shape=shape,
        color=_rgb(obj.get("color", [128, 128, 128]), f"{path}.color"),
        is_static=is_static,
        position=position,
        velocity=_pair(obj.get("velocity", [0.0, 0.0]), f"{path}.velocity"),
        angular_velocity=_num(obj.get("angular_velocity", 0.0), f"{path}.angular_velocity"),
        material=_material_from_dict(obj.get("material", {}), world, f"{path}.material"),
    )


def scene_from_dict(doc) -> SceneSpec:
    if not isinstance(doc, dict):
        raise SchemaViolation("scene document must be an object")
    _check_keys(doc, {"world", "bodies", "meta"}, {"bodies"}, "$")
    world = _world_from_dict(doc.get("world", {}), "$.world")
    bodies_obj = doc["bodies"]
    if not isinstance(bodies_obj, list):
        raise SchemaViolation("bodies must be a list", "$.bodies")
    bodies = tuple(
        _body_from_dict(b, world, f"$.bodies[{i}]") for i, b in enumerate(bodies_obj)
    )
    meta_obj = doc.get("meta", {})
    if not isinstance(meta_obj, dict):
        raise SchemaViolation("meta must be an object", "$.meta")
    meta = {}
    for k, v in meta_obj.items():
        if not isinstance(k, str) or not isinstance(v, str):
            raise SchemaViolation("meta entries must be string -> string", "$.meta")
        meta[k] = v
    return SceneSpec(world=world, bodies=bodies, meta=meta)


def _shape_to_dict(shape: Shape) -> dict:
    if isinstance(shape, Circle):
        return {"type": "circle", "radius": float(shape.radius)}
    if isinstance(shape, Box):
        return {
            "type": "box",
            "half_w": float(shape.half_w),
            "half_h": float(shape.half_h),
            "angle": float(shape.angle),
        }
    if isinstance(shape, Segment):
        return {
            "type": "segment",
            "x1": float(shape.x1), "y1": float(shape.y1),
            "x2": float(shape.x2), "y2": float(shape.y2),
            "thickness": float(shape.thickness),
        }
    return {
        "type": "compound",
        "kind": shape.kind,
        "parts": [
            {
                "offset_x": float(p.offset_x), "offset_y": float(p.offset_y),
                "half_w": float(p.half_w), "half_h": float(p.half_h),
                "angle": float(p.angle),
            }
            for p in shape.parts
        ],
    }


def scene_to_dict(scene: SceneSpec) -> dict:
    w = scene.world
    doc: dict = {
        "world": {
            "gravity": [float(w.gravity[0]), float(w.gravity[1])],
            "resolution": [int(w.resolution[0]), int(w.resolution[1])],
            "fps": int(w.fps),
            "duration_s": float(w.duration_s),
            "timestep_substeps": int(w.timestep_substeps),
            "background": [int(c) for c in w.background],
            "restitution_default": float(w.restitution_default),
            "friction_default": float(w.friction_default),
        },
        "bodies": [],
    }
    for b in scene.bodies:
        entry: dict = {
            "id": b.id,
            "shape": _shape_to_dict(b.shape),
            "color": [int(c) for c in b.color],
            "is_static": bool(b.is_static),
        }
        if not isinstance(b.shape, Segment):
            entry["position"] = [float(b.position[0]), float(b.position[1])]
        entry["velocity"] = [float(b.velocity[0]), float(b.velocity[1])]
        entry["angular_velocity"] = float(b.angular_velocity)
        entry["material"] = {
            "restitution": float(b.material.restitution),
            "friction": float(b.material.friction),
            "density": float(b.material.density),
        }
        doc["bodies"].append(entry)
    doc["meta"] = {k: scene.meta[k] for k in sorted(scene.meta)}
    return doc


def serialize_scene(scene: SceneSpec) -> str:
    """Canonical document text: fixed key order, shortest float round-trip."""
    return json.dumps(scene_to_dict(scene), indent=2)


# ---------------------------------------------------------------------------
# parse / validate / canonicalize / fallback


def _reject_nonfinite(token: str):
    raise NonFiniteValue(f"non-finite literal {token!r} in scene document")


def _find_object_literal(text: str) -> tuple[int, str] | None:
    start = text.find("{")
    if start < 0:
        return None
    depth = 0
    in_str = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_str:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_str = False
            continue
        if ch == '"':
            in_str = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return start, text[start : i + 1]
    return None


def parse_scene(text: str) -> ModelOutput:
    """Split a raw model response into analysis prose and a SceneSpec.

    The scene document is the last fenced code block when any exists,
    otherwise the outermost top-level JSON object literal. Raises
    MalformedDocument / SchemaViolation / NonFiniteValue; all carry enough
    position context for the repair loop.
    """
    if not text:
        raise MalformedDocument("empty response; expected a fenced scene block")
    fences = list(_FENCE_RE.finditer(text))
    if fences:
        chosen = fences[-1]
        payload = chosen.group(1)
        prefix = text[: chosen.start()]
    else:
        found = _find_object_literal(text)
        if found is None:
            raise MalformedDocument(
                "no fenced code block or JSON object literal found in response"
            )
        start, payload = found
        prefix = text[:start]
    try:
        doc = json.loads(payload, parse_constant=_reject_nonfinite)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"scene block is not valid JSON: {exc.msg}", exc.pos) from exc
    scene = scene_from_dict(doc)
    for b in scene.bodies:
        _assert_finite_body(b)
    analysis = _FENCE_RE.sub("", prefix).strip()
    return ModelOutput(analysis=analysis, scene=scene, raw=text)


def _assert_finite_body(body: BodySpec) -> None:
    for v in _numeric_fields(body):
        if not math.isfinite(v):
            raise NonFiniteValue(f"body {body.id!r} has a non-finite numeric field")


def _numeric_fields(body: BodySpec):
    yield from body.position
    yield from body.velocity
    yield body.angular_velocity
    yield body.material.restitution
    yield body.material.friction
    yield body.material.density
    s = body.shape
    if isinstance(s, Circle):
        yield s.radius
    elif isinstance(s, Box):
        yield from (s.half_w, s.half_h, s.angle)
    elif isinstance(s, Segment):
        yield from (s.x1, s.y1, s.x2, s.y2, s.thickness)
    else:
        for p in s.parts:
            yield from (p.offset_x, p.offset_y, p.half_w, p.half_h, p.angle)


def _shape_extent_violations(body: BodySpec) -> list[str]:
    s = body.shape
    problems = []
    if isinstance(s, Circle):
        if s.radius <= 0:
            problems.append("radius must be > 0")
    elif isinstance(s, Box):
        if s.half_w <= 0 or s.half_h <= 0:
            problems.append("half extents must be > 0")
    elif isinstance(s, Segment):
        if s.thickness <= 0:
            problems.append("thickness must be > 0")
        if s.x1 == s.x2 and s.y1 == s.y2:
            problems.append("segment endpoints must differ")
    else:
        for i, p in enumerate(s.parts):
            if p.half_w <= 0 or p.half_h <= 0:
                problems.append(f"part {i} half extents must be > 0")
    return problems


def validate_scene(scene: SceneSpec, max_duration_s: float = MAX_DURATION_S) -> ValidationReport:
    """Check every type invariant; violations are data, not exceptions."""
    out: list[Violation] = []
    w = scene.world

    def world_rule(rule, msg):
        out.append(Violation("", rule, msg))

    for v in (*w.gravity, w.duration_s, w.restitution_default, w.friction_default):
        if not math.isfinite(v):
            world_rule("finite-numeric", "world contains a non-finite value")
            break
    if not (0 < w.duration_s <= max_duration_s):
        world_rule("duration-range", f"duration_s must be in (0, {max_duration_s}]")
    if not (1 <= w.fps <= 120):
        world_rule("fps-range", "fps must be in [1, 120]")
    if not (16 <= w.resolution[0] <= 4096 and 16 <= w.resolution[1] <= 4096):
        world_rule("resolution-range", "resolution components must be in [16, 4096]")
    if not (1 <= w.timestep_substeps <= 16):
        world_rule("substeps-range", "timestep_substeps must be in [1, 16]")

    if not scene.bodies:
        world_rule("body-count", "scene must contain at least one body")
    if scene.bodies and all(b.is_static for b in scene.bodies):
        if scene.meta.get("static_only") != "true":
            world_rule("nonstatic-required", "all bodies are static (set meta.static_only to allow)")

    seen: set[str] = set()
    for b in scene.bodies:
        if not b.id:
            out.append(Violation(b.id, "nonempty-id", "body id must be nonempty"))
        elif b.id in seen:
            out.append(Violation(b.id, "unique-id", "duplicate body id"))
        seen.add(b.id)

        if any(not math.isfinite(v) for v in _numeric_fields(b)):
            out.append(Violation(b.id, "finite-numeric", "non-finite numeric field"))
            continue
        for msg in _shape_extent_violations(b):
            out.append(Violation(b.id, "positive-extent", msg))
        if not all(0 <= c <= 255 for c in b.color):
            out.append(Violation(b.id, "color-range", "color components must be in [0, 255]"))
        m = b.material
        if not (0 <= m.restitution <= 1):
            out.append(Violation(b.id, "material-range", "restitution must be in [0, 1]"))
        if m.friction < 0:
            out.append(Violation(b.id, "material-range", "friction must be >= 0"))
        if m.density <= 0:
            out.append(Violation(b.id, "material-range", "density must be > 0"))
        if b.is_static and (b.velocity != (0.0, 0.0) or b.angular_velocity != 0.0):
            out.append(Violation(b.id, "static-zero-velocity", "static body must not move"))
        if not _shape_extent_violations(b):
            ext = 2.0 * shape_max_extent(b.shape)
            x, y = b.position
            if not (-ext <= x <= w.resolution[0] + ext and -ext <= y <= w.resolution[1] + ext):
                out.append(Violation(b.id, "position-bounds", "position outside inflated frame"))
    return ValidationReport(out)


def canonicalize_scene(scene: SceneSpec, max_duration_s: float = MAX_DURATION_S) -> SceneSpec:
    """Normal form: defaults filled, bodies sorted by id, clampable violations
    repaired. Idempotent; the result always validates, else Uncanonicalizable.
    """
    w = scene.world
    duration = min(max(w.duration_s, 0.0), max_duration_s) if math.isfinite(w.duration_s) else DEFAULT_DURATION_S
    if duration <= 0:
        duration = DEFAULT_DURATION_S
    fps = min(max(int(w.fps), 1), 120)
    # snap duration so duration * fps is an exact frame count
    frames = max(1, int(round(duration * fps)))
    duration = frames / fps
    substeps = min(max(int(w.timestep_substeps), 1), 16)
    world = replace(
        w,
        fps=fps,
        duration_s=duration,
        timestep_substeps=substeps,
        background=tuple(min(max(int(c), 0), 255) for c in w.background),
    )

    bodies = []
    for b in sorted(scene.bodies, key=lambda b: b.id):
        color = tuple(min(max(int(c), 0), 255) for c in b.color)
        velocity = (0.0, 0.0) if b.is_static else (float(b.velocity[0]), float(b.velocity[1]))
        ang_vel = 0.0 if b.is_static else float(b.angular_velocity)
        position = b.position
        if isinstance(b.shape, Segment):
            position = ((b.shape.x1 + b.shape.x2) / 2.0, (b.shape.y1 + b.shape.y2) / 2.0)
        bodies.append(
            replace(b, color=color, velocity=velocity, angular_velocity=ang_vel, position=position)
        )
    out = SceneSpec(world=world, bodies=tuple(bodies), meta=dict(scene.meta))
    report = validate_scene(out, max_duration_s=max_duration_s)
    hard = [v for v in report.violations if v.rule not in _CLAMPABLE_RULES]
    if hard:
        raise Uncanonicalizable(hard)
    return out


def fallback_scene(world_defaults: WorldParams | None = None) -> SceneSpec:
    """Minimal guaranteed-valid scene: a full-width static ground line at 90%
    of the frame height and one resting ball (radius 5% of the smaller
    dimension) at the frame center.
    """
    w = world_defaults or WorldParams()
    width, height = w.resolution
    ground_y = 0.9 * height
    radius = 0.05 * min(width, height)
    bodies = (
        BodySpec(
            id="ball",
            shape=Circle(radius=radius),
            color=(200, 60, 60),
            position=(width / 2.0, height / 2.0),
        ),
        BodySpec(
            id="ground",
            shape=Segment(x1=0.0, y1=ground_y, x2=float(width), y2=ground_y, thickness=4.0),
            color=(40, 40, 40),
            is_static=True,
            position=(width / 2.0, ground_y),
        ),
    )
    return canonicalize_scene(SceneSpec(world=w, bodies=bodies, meta={"source": "fallback"}))


# ---------------------------------------------------------------------------
# deterministic scene description (reference text for analysis metrics)

_COLOR_NAMES = (
    ("red", (220, 60, 50)),
    ("orange", (235, 140, 40)),
    ("yellow", (240, 200, 40)),
    ("green", (60, 160, 70)),
    ("teal", (40, 160, 160)),
    ("blue", (50, 90, 200)),
    ("purple", (140, 70, 190)),
    ("pink", (230, 120, 160)),
    ("brown", (130, 90, 50)),
    ("black", (20, 20, 20)),
    ("dark gray", (80, 80, 80)),
    ("gray", (128, 128, 128)),
    ("white", (245, 245, 245)),
)


def color_name(rgb: tuple[int, int, int]) -> str:
    best, best_d = "gray", float("inf")
    for name, ref in _COLOR_NAMES:
        d = sum((a - b) ** 2 for a, b in zip(rgb, ref))
        if d < best_d:
            best, best_d = name, d
    return best


def _describe_body(b: BodySpec) -> str:
    cname = color_name(b.color)
    s = b.shape
    x, y = b.position
    if isinstance(s, Circle):
        what = f"a {cname} circle of radius {s.radius:.0f} pixels at ({x:.0f}, {y:.0f})"
    elif isinstance(s, Box):
        what = f"a {cname} rectangle {2 * s.half_w:.0f} by {2 * s.half_h:.0f} pixels at ({x:.0f}, {y:.0f})"
    elif isinstance(s, Segment):
        what = f"a {cname} line from ({s.x1:.0f}, {s.y1:.0f}) to ({s.x2:.0f}, {s.y2:.0f})"
    else:
        kind = s.kind.replace("_", " ")
        what = f"a {cname} {kind} at ({x:.0f}, {y:.0f})"
    if b.is_static:
        what += ", which stays fixed"
    return what


def describe_scene(scene: SceneSpec) -> str:
    """Deterministic English description of layout and expected motion."""
    parts = [f"The scene shows {len(scene.bodies)} objects on a white background."]
    for b in scene.bodies:
        parts.append("There is " + _describe_body(b) + ".")
    movers = [b for b in scene.bodies if not b.is_static]
    for b in movers:
        vx, vy = b.velocity
        speed = math.hypot(vx, vy)
        if speed > 1.0:
            hor = "right" if vx > 0 else "left"
            ver = "down" if vy > 0 else "up"
            if abs(vx) >= 2 * abs(vy):
                direction = hor
            elif abs(vy) >= 2 * abs(vx):
                direction = ver
            else:
                direction = f"{ver} and to the {hor}"
            parts.append(
                f"The {color_name(b.color)} {shape_category(b.shape).replace('_', ' ')} "
                f"starts moving {direction} at about {speed:.0f} pixels per second."
            )
    if movers and scene.world.gravity[1] > 0:
        parts.append(
            "Gravity pulls the moving objects down; they fall, collide with "
            "other objects, and bounce or slide until the clip ends."
        )
    return " ".join(parts)


SCHEMA_EXCERPT = """\
Scene document schema (JSON):
{
  "world": {
    "gravity": [gx, gy],            // px/s^2, +y points down (default [0, 300])
    "resolution": [W, H],           // px (default [512, 512])
    "fps": 30,                      // integer, 1..120
    "duration_s": 3.0,              // seconds, at most 10
    "timestep_substeps": 4,         // physics substeps per frame, 1..16
    "background": [255, 255, 255],
    "restitution_default": 0.5,
    "friction_default": 0.4
  },
  "bodies": [
    {
      "id": "unique_name",
      "shape": {"type": "circle", "radius": R}
            // or {"type": "box", "half_w": W, "half_h": H, "angle": rad}
            // or {"type": "segment", "x1":..,"y1":..,"x2":..,"y2":..,"thickness": T}
            // or {"type": "compound", "kind": "u_shape|triangle|composite_shape",
            //     "parts": [{"offset_x":..,"offset_y":..,"half_w":..,"half_h":..,"angle":..}]}
      "color": [r, g, b],
      "is_static": false,
      "position": [x, y],           // omit for segments (derived from endpoints)
      "velocity": [vx, vy],         // px/s
      "angular_velocity": 0.0,      // rad/s
      "material": {"restitution": 0..1, "friction": >=0, "density": >0}
    }
  ],
  "meta": {"any": "string map"}
}
All coordinates are pixels, origin top-left, x rightward, y downward.
Static bodies must have zero velocity. Every numeric value must be finite."""
