"""Seeded template library and benchmark builder.

Each template is a parametric scene builder; instantiating (template_id,
seed) draws parameters from a counter-based generator keyed by that pair, so
the whole benchmark regenerates bitwise from its manifest. Templates cover
drops, bounces, slides, ramps, collisions, stacks that topple, containers
and deflectors, and every instance keeps visible motion through the full
clip (temporal alignment depends on it).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .clipio import save_clip
from .detection import (
    BBox,
    DetectedObject,
    DetectionContext,
    serialize_detection,
)
from .engine import simulate
from .errors import RatingOutOfRange, SchemaViolation, UnknownTemplate
from .render import rasterize
from .scene import (
    BodySpec,
    Box,
    Circle,
    Compound,
    BoxPart,
    Material,
    SceneSpec,
    Segment,
    WorldParams,
    body_aabb,
    canonicalize_scene,
    describe_scene,
    serialize_scene,
    shape_category,
    validate_scene,
)

PALETTE = (
    (220, 60, 50),    # red
    (50, 90, 200),    # blue
    (60, 160, 70),    # green
    (235, 140, 40),   # orange
    (140, 70, 190),   # purple
    (40, 160, 160),   # teal
    (200, 60, 140),   # pink
    (150, 110, 40),   # brown
)
STATIC_COLOR = (60, 60, 60)

GROUND_Y_FRAC = 0.92
SEGMENT_THICKNESS = 4.0


@dataclass(frozen=True)
class TemplateSpec:
    template_id: str
    difficulty: str
    builder: object
    summary: str


_REGISTRY: dict[str, TemplateSpec] = {}


def register_template(template_id: str, difficulty: str, summary: str):
    def wrap(fn):
        _REGISTRY[template_id] = TemplateSpec(template_id, difficulty, fn, summary)
        return fn

    return wrap


def template_ids() -> list[str]:
    return sorted(_REGISTRY)


def _rng_for(template_id: str, seed: int) -> np.random.Generator:
    digest = hashlib.sha256(f"{template_id}:{seed}".encode()).digest()
    key = np.frombuffer(digest[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _pick_colors(rng: np.random.Generator, n: int) -> list[tuple[int, int, int]]:
    idx = rng.permutation(len(PALETTE))[:n]
    return [PALETTE[int(i)] for i in idx]


def _ground(world: WorldParams, y: float | None = None) -> BodySpec:
    w = world.resolution[0]
    gy = GROUND_Y_FRAC * world.resolution[1] if y is None else y
    return BodySpec(
        id="ground",
        shape=Segment(x1=0.0, y1=gy, x2=float(w), y2=gy, thickness=SEGMENT_THICKNESS),
        color=STATIC_COLOR,
        is_static=True,
        position=(w / 2.0, gy),
        material=Material(restitution=0.5, friction=0.4),
    )


def _wall(world: WorldParams, body_id: str, x: float) -> BodySpec:
    h = world.resolution[1]
    return BodySpec(
        id=body_id,
        shape=Segment(x1=x, y1=0.0, x2=x, y2=float(h), thickness=SEGMENT_THICKNESS),
        color=STATIC_COLOR,
        is_static=True,
        position=(x, h / 2.0),
        material=Material(restitution=0.7, friction=0.2),
    )


def _ground_top(world: WorldParams) -> float:
    return GROUND_Y_FRAC * world.resolution[1] - SEGMENT_THICKNESS / 2.0


@register_template("ball_bounce", "easy", "one ball bouncing on the ground")
def _t_ball_bounce(rng, world):
    r = rng.uniform(14, 26)
    color, = _pick_colors(rng, 1)
    ball = BodySpec(
        id="ball",
        shape=Circle(radius=r),
        color=color,
        position=(rng.uniform(120, 392), rng.uniform(70, 170)),
        velocity=(rng.uniform(-60, 60), 0.0),
        material=Material(restitution=rng.uniform(0.68, 0.8), friction=0.3),
    )
    return [ball, _ground(world), _wall(world, "wall_l", 2.0), _wall(world, "wall_r", 510.0)]


@register_template("ball_drop_box", "easy", "ball bounces on a platform, rolls off")
def _t_ball_drop_box(rng, world):
    cb, cp = _pick_colors(rng, 2)
    px = rng.uniform(180, 330)
    py = rng.uniform(300, 360)
    hw = rng.uniform(60, 100)
    platform = BodySpec(
        id="platform",
        shape=Box(half_w=hw, half_h=10.0),
        color=cp,
        is_static=True,
        position=(px, py),
        material=Material(restitution=0.55, friction=0.25),
    )
    r = rng.uniform(12, 20)
    edge = rng.uniform(0.45, 0.8) * hw * (1 if rng.uniform() < 0.5 else -1)
    ball = BodySpec(
        id="ball",
        shape=Circle(radius=r),
        color=cb,
        position=(px + edge, rng.uniform(60, 140)),
        velocity=(rng.uniform(-30, 30), 0.0),
        material=Material(restitution=rng.uniform(0.55, 0.7), friction=0.3),
    )
    return [ball, platform, _ground(world), _wall(world, "wall_l", 2.0), _wall(world, "wall_r", 510.0)]


@register_template("box_slide", "medium", "box slides on the floor and rebounds off a wall")
def _t_box_slide(rng, world):
    color, = _pick_colors(rng, 1)
    hw = rng.uniform(18, 30)
    hh = rng.uniform(12, 22)
    going_right = rng.uniform() < 0.5
    speed = rng.uniform(190, 290)
    box = BodySpec(
        id="crate",
        shape=Box(half_w=hw, half_h=hh),
        color=color,
        position=(rng.uniform(140, 370), _ground_top(world) - hh),
        velocity=(speed if going_right else -speed, 0.0),
        material=Material(restitution=0.55, friction=rng.uniform(0.04, 0.1)),
    )
    return [box, _ground(world), _wall(world, "wall_l", 2.0), _wall(world, "wall_r", 510.0)]


@register_template("funnel_drop", "medium", "ball funnels through a gap and bounces")
def _t_funnel_drop(rng, world):
    cb, = _pick_colors(rng, 1)
    cx = world.resolution[0] / 2.0
    gap = rng.uniform(40, 64)
    top_y = rng.uniform(130, 170)
    bottom_y = top_y + rng.uniform(110, 150)
    spread = rng.uniform(150, 200)
    left = BodySpec(
        id="chute_l",
        shape=Segment(x1=cx - spread, y1=top_y, x2=cx - gap / 2.0, y2=bottom_y,
                      thickness=SEGMENT_THICKNESS),
        color=STATIC_COLOR, is_static=True,
        position=(0.0, 0.0),
        material=Material(restitution=0.4, friction=0.1),
    )
    right = BodySpec(
        id="chute_r",
        shape=Segment(x1=cx + gap / 2.0, y1=bottom_y, x2=cx + spread, y2=top_y,
                      thickness=SEGMENT_THICKNESS),
        color=STATIC_COLOR, is_static=True,
        position=(0.0, 0.0),
        material=Material(restitution=0.4, friction=0.1),
    )
    r = min(rng.uniform(12, 18), gap / 2.0 - 5.0)
    ball = BodySpec(
        id="ball",
        shape=Circle(radius=r),
        color=cb,
        position=(cx + rng.uniform(-spread * 0.5, spread * 0.5), rng.uniform(40, 80)),
        velocity=(0.0, 0.0),
        material=Material(restitution=rng.uniform(0.6, 0.72), friction=0.2),
    )
    return [ball, left, right, _ground(world), _wall(world, "wall_l", 2.0), _wall(world, "wall_r", 510.0)]


@register_template("plank_tip", "hard", "ball lands on a balanced plank and tips it")
def _t_plank_tip(rng, world):
    cb, cp, cf = _pick_colors(rng, 3)
    cx = rng.uniform(220, 300)
    fulcrum_h = rng.uniform(30, 50)
    gt = _ground_top(world)
    fulcrum = BodySpec(
        id="fulcrum",
        shape=Box(half_w=12.0, half_h=fulcrum_h),
        color=cf, is_static=True,
        position=(cx, gt - fulcrum_h),
        material=Material(restitution=0.2, friction=0.6),
    )
    plank_hw = rng.uniform(85, 120)
    plank = BodySpec(
        id="plank",
        shape=Box(half_w=plank_hw, half_h=6.0),
        color=cp,
        position=(cx + rng.uniform(-15, 15), gt - 2 * fulcrum_h - 6.0),
        material=Material(restitution=0.3, friction=0.5, density=0.6),
    )
    r = rng.uniform(13, 19)
    side = 1 if rng.uniform() < 0.5 else -1
    ball = BodySpec(
        id="ball",
        shape=Circle(radius=r),
        color=cb,
        position=(cx + side * plank_hw * rng.uniform(0.55, 0.85), rng.uniform(60, 130)),
        velocity=(0.0, 0.0),
        material=Material(restitution=rng.uniform(0.45, 0.6), friction=0.3),
    )
    return [ball, plank, fulcrum, _ground(world), _wall(world, "wall_l", 2.0), _wall(world, "wall_r", 510.0)]


@register_template("ramp_roll", "medium", "ball rolls down a ramp and launches off")
def _t_ramp_roll(rng, world):
    cb, = _pick_colors(rng, 1)
    leftward = rng.uniform() < 0.5
    x0 = rng.uniform(30, 70)
    y0 = rng.uniform(150, 210)
    run = rng.uniform(260, 340)
    drop = run * math.tan(math.radians(rng.uniform(16, 26)))
    if leftward:
        x0 = world.resolution[0] - x0
        run = -run
    ramp = BodySpec(
        id="ramp",
        shape=Segment(x1=x0, y1=y0, x2=x0 + run, y2=y0 + drop, thickness=SEGMENT_THICKNESS),
        color=STATIC_COLOR, is_static=True,
        position=(0.0, 0.0),
        material=Material(restitution=0.1, friction=rng.uniform(0.05, 0.2)),
    )
    r = rng.uniform(12, 18)
    t = rng.uniform(0.08, 0.2)
    sx = x0 + run * t
    sy = y0 + drop * t
    length = math.hypot(run, drop)
    sgn = 1.0 if run > 0 else -1.0
    nx = sgn * drop / length
    ny = -sgn * run / length  # surface normal pointing away from the ramp, upward
    offset = r + SEGMENT_THICKNESS / 2.0 + 0.5
    ball = BodySpec(
        id="ball",
        shape=Circle(radius=r),
        color=cb,
        position=(sx + nx * offset, sy + ny * offset),
        velocity=(0.0, 0.0),
        material=Material(restitution=rng.uniform(0.5, 0.65), friction=0.25),
    )
    return [ball, ramp, _ground(world), _wall(world, "wall_l", 2.0), _wall(world, "wall_r", 510.0)]


@register_template("stack_topple", "hard", "ball knocks over a stack of boxes")
def _t_stack_topple(rng, world):
    cb, c1, c2, c3 = _pick_colors(rng, 4)
    gt = _ground_top(world)
    sx = rng.uniform(300, 380)
    hw = rng.uniform(16, 24)
    hh = rng.uniform(14, 20)
    boxes = []
    for k, color in enumerate((c1, c2, c3)):
        boxes.append(
            BodySpec(
                id=f"box{k}",
                shape=Box(half_w=hw, half_h=hh),
                color=color,
                position=(sx, gt - (2 * k + 1) * hh),
                material=Material(restitution=0.25, friction=0.45, density=0.8),
            )
        )
    r = rng.uniform(14, 20)
    ball = BodySpec(
        id="ball",
        shape=Circle(radius=r),
        color=cb,
        position=(rng.uniform(40, 110), gt - 2 * hh * rng.uniform(1.6, 2.6)),
        velocity=(rng.uniform(240, 330), 0.0),
        material=Material(restitution=0.5, friction=0.3, density=2.0),
    )
    return [ball, *boxes, _ground(world), _wall(world, "wall_l", 2.0), _wall(world, "wall_r", 510.0)]


@register_template("tower_hit", "hard", "lobbed ball smashes a two-box tower on a plinth")
def _t_tower_hit(rng, world):
    cb, c1, c2, cp = _pick_colors(rng, 4)
    gt = _ground_top(world)
    tx = rng.uniform(310, 390)
    plinth_hh = rng.uniform(20, 34)
    plinth = BodySpec(
        id="plinth",
        shape=Box(half_w=rng.uniform(40, 55), half_h=plinth_hh),
        color=cp, is_static=True,
        position=(tx, gt - plinth_hh),
        material=Material(restitution=0.3, friction=0.5),
    )
    hw = rng.uniform(14, 20)
    hh = rng.uniform(16, 24)
    top_of_plinth = gt - 2 * plinth_hh
    boxes = [
        BodySpec(
            id=f"block{k}",
            shape=Box(half_w=hw, half_h=hh),
            color=color,
            position=(tx, top_of_plinth - (2 * k + 1) * hh),
            material=Material(restitution=0.3, friction=0.4, density=0.8),
        )
        for k, color in enumerate((c1, c2))
    ]
    r = rng.uniform(13, 18)
    ball = BodySpec(
        id="ball",
        shape=Circle(radius=r),
        color=cb,
        position=(rng.uniform(40, 90), rng.uniform(250, 330)),
        velocity=(rng.uniform(250, 330), rng.uniform(-220, -120)),
        material=Material(restitution=0.5, friction=0.3, density=2.0),
    )
    return [ball, plinth, *boxes, _ground(world), _wall(world, "wall_l", 2.0), _wall(world, "wall_r", 510.0)]


@register_template("two_ball_collision", "easy", "two balls collide mid-air")
def _t_two_ball_collision(rng, world):
    ca, cb = _pick_colors(rng, 2)
    y = rng.uniform(210, 280)
    speed_a = rng.uniform(130, 200)
    speed_b = rng.uniform(130, 200)
    vy = rng.uniform(-170, -90)
    ball_a = BodySpec(
        id="ball_a",
        shape=Circle(radius=rng.uniform(13, 20)),
        color=ca,
        position=(rng.uniform(70, 140), y + rng.uniform(-15, 15)),
        velocity=(speed_a, vy),
        material=Material(restitution=rng.uniform(0.72, 0.85), friction=0.2),
    )
    ball_b = BodySpec(
        id="ball_b",
        shape=Circle(radius=rng.uniform(13, 20)),
        color=cb,
        position=(rng.uniform(370, 440), y + rng.uniform(-15, 15)),
        velocity=(-speed_b, vy),
        material=Material(restitution=rng.uniform(0.72, 0.85), friction=0.2),
    )
    return [ball_a, ball_b, _ground(world), _wall(world, "wall_l", 2.0), _wall(world, "wall_r", 510.0)]


@register_template("u_catch", "medium", "ball rattles inside a U-shaped container")
def _t_u_catch(rng, world):
    cb, cu = _pick_colors(rng, 2)
    gt = _ground_top(world)
    inner = rng.uniform(70, 100)
    wall_h = rng.uniform(55, 80)
    t = 8.0
    cup = BodySpec(
        id="cup",
        shape=Compound(
            kind="u_shape",
            parts=(
                BoxPart(offset_x=0.0, offset_y=0.0, half_w=inner / 2 + t, half_h=t / 2),
                BoxPart(offset_x=-(inner / 2 + t / 2), offset_y=-wall_h / 2, half_w=t / 2, half_h=wall_h / 2),
                BoxPart(offset_x=inner / 2 + t / 2, offset_y=-wall_h / 2, half_w=t / 2, half_h=wall_h / 2),
            ),
        ),
        color=cu, is_static=True,
        position=(rng.uniform(180, 330), gt - t / 2),
        material=Material(restitution=0.78, friction=0.1),
    )
    r = min(rng.uniform(11, 16), inner / 2 - 8.0)
    ball = BodySpec(
        id="ball",
        shape=Circle(radius=r),
        color=cb,
        position=(cup.position[0] + rng.uniform(-inner / 4, inner / 4), rng.uniform(60, 140)),
        velocity=(rng.uniform(-50, 50), 0.0),
        material=Material(restitution=rng.uniform(0.7, 0.8), friction=0.15),
    )
    return [ball, cup, _ground(world)]


@register_template("wall_bounce", "easy", "ball ricochets around a closed arena")
def _t_wall_bounce(rng, world):
    cb, = _pick_colors(rng, 1)
    angle = rng.uniform(0.3, 1.2)
    speed = rng.uniform(260, 380)
    sgn = 1 if rng.uniform() < 0.5 else -1
    lid_y = 6.0
    w = world.resolution[0]
    lid = BodySpec(
        id="lid",
        shape=Segment(x1=0.0, y1=lid_y, x2=float(w), y2=lid_y, thickness=SEGMENT_THICKNESS),
        color=STATIC_COLOR, is_static=True,
        position=(w / 2.0, lid_y),
        material=Material(restitution=0.85, friction=0.05),
    )
    ball = BodySpec(
        id="ball",
        shape=Circle(radius=rng.uniform(14, 22)),
        color=cb,
        position=(rng.uniform(120, 390), rng.uniform(150, 330)),
        velocity=(sgn * speed * math.cos(angle), -speed * math.sin(angle)),
        material=Material(restitution=rng.uniform(0.82, 0.9), friction=0.05),
    )
    ground = _ground(world)
    ground = BodySpec(
        id="ground", shape=ground.shape, color=ground.color, is_static=True,
        position=ground.position, material=Material(restitution=0.85, friction=0.05),
    )
    return [ball, ground, lid, _wall(world, "wall_l", 2.0), _wall(world, "wall_r", 510.0)]


@register_template("wedge_deflect", "medium", "ball deflects off a triangular wedge")
def _t_wedge_deflect(rng, world):
    cb, cw = _pick_colors(rng, 2)
    gt = _ground_top(world)
    base = rng.uniform(70, 100)
    height = rng.uniform(60, 90)
    t = 5.0
    face_len = math.hypot(base, height)
    face_angle = math.atan2(height, base)
    wedge = BodySpec(
        id="wedge",
        shape=Compound(
            kind="triangle",
            parts=(
                BoxPart(offset_x=-base / 2, offset_y=-height / 2, half_w=face_len / 2,
                        half_h=t / 2, angle=-face_angle),
                BoxPart(offset_x=base / 2, offset_y=-height / 2, half_w=face_len / 2,
                        half_h=t / 2, angle=face_angle),
            ),
        ),
        color=cw, is_static=True,
        position=(rng.uniform(200, 310), gt - t / 2),
        material=Material(restitution=0.5, friction=0.1),
    )
    r = rng.uniform(12, 17)
    ball = BodySpec(
        id="ball",
        shape=Circle(radius=r),
        color=cb,
        position=(wedge.position[0] + rng.uniform(-base * 0.45, base * 0.45), rng.uniform(50, 120)),
        velocity=(0.0, 0.0),
        material=Material(restitution=rng.uniform(0.6, 0.72), friction=0.15),
    )
    return [ball, wedge, _ground(world), _wall(world, "wall_l", 2.0), _wall(world, "wall_r", 510.0)]


def instantiate_template(
    template_id: str,
    seed: int,
    duration_s: float = 3.0,
    fps: int = 30,
    resolution: tuple[int, int] = (512, 512),
) -> SceneSpec:
    """Deterministic draw from the template's parameter ranges."""
    if template_id not in _REGISTRY:
        raise UnknownTemplate(f"unknown template {template_id!r}")
    spec = _REGISTRY[template_id]
    rng = _rng_for(template_id, seed)
    world = WorldParams(resolution=resolution, fps=fps, duration_s=duration_s)
    bodies = spec.builder(rng, world)
    scene = SceneSpec(
        world=world,
        bodies=tuple(bodies),
        meta={
            "template_id": template_id,
            "seed": str(seed),
            "difficulty": spec.difficulty,
        },
    )
    return canonicalize_scene(scene)


# ---------------------------------------------------------------------------
# exact first-frame annotation


def _int_bbox(x0, y0, x1, y1, width, height) -> BBox:
    xa = max(0, int(math.floor(x0)))
    ya = max(0, int(math.floor(y0)))
    xb = min(width, int(math.ceil(x1)))
    yb = min(height, int(math.ceil(y1)))
    return BBox(
        x_min=xa, y_min=ya, x_max=xb, y_max=yb, width=xb - xa, height=yb - ya
    )


def annotate_first_frame(scene: SceneSpec) -> DetectionContext:
    """Exact projection of the initial pose into the detection schema."""
    width, height = scene.world.resolution
    objects = []
    for b in scene.bodies:
        shape = b.shape
        category = shape_category(shape)
        bbox = _int_bbox(*body_aabb(b), width, height)
        size: dict
        angle_deg = None
        if isinstance(shape, Circle):
            size = {"radius_pixels": shape.radius}
        elif isinstance(shape, Segment):
            length = math.hypot(shape.x2 - shape.x1, shape.y2 - shape.y1)
            size = {"length_pixels": length, "thickness_pixels": shape.thickness}
            angle_deg = math.degrees(math.atan2(shape.y2 - shape.y1, shape.x2 - shape.x1))
        elif isinstance(shape, Box):
            size = {"width": 2.0 * shape.half_w, "height": 2.0 * shape.half_h}
            angle_deg = math.degrees(shape.angle)
        else:
            x0, y0, x1, y1 = body_aabb(b)
            size = {"width": x1 - x0, "height": y1 - y0}
        cx = min(max(b.position[0], float(bbox.x_min)), float(bbox.x_max))
        cy = min(max(b.position[1], float(bbox.y_min)), float(bbox.y_max))
        objects.append(
            DetectedObject(
                id=b.id,
                category=category,
                color_rgb=b.color,
                bbox=bbox,
                center_x=cx,
                center_y=cy,
                size=size,
                angle_deg=angle_deg,
            )
        )
    return DetectionContext(width=width, height=height, objects=objects)


# ---------------------------------------------------------------------------
# benchmark assembly


@dataclass
class SceneEntry:
    scene_id: str
    template_id: str
    seed: int
    difficulty: str
    scene_path: str
    detection_path: str
    description_path: str
    clip_dir: str
    t_start: int
    t_later: int


@dataclass
class BenchmarkManifest:
    split: str
    config_digest: str
    scenes: list[SceneEntry] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "split": self.split,
            "config_digest": self.config_digest,
            "scenes": [vars(e) for e in self.scenes],
        }

    @staticmethod
    def from_dict(doc: dict) -> "BenchmarkManifest":
        return BenchmarkManifest(
            split=doc["split"],
            config_digest=doc["config_digest"],
            scenes=[SceneEntry(**e) for e in doc["scenes"]],
        )


def manifest_path(benchmark_dir: str | Path) -> Path:
    return Path(benchmark_dir) / "manifest.json"


def load_manifest(benchmark_dir: str | Path) -> BenchmarkManifest:
    return BenchmarkManifest.from_dict(json.loads(manifest_path(benchmark_dir).read_text()))


def benchmark_config_digest(cfg) -> str:
    doc = {
        "templates": list(cfg.templates),
        "seeds_per_template": cfg.seeds_per_template,
        "duration_s": cfg.duration_s,
        "fps": cfg.fps,
        "resolution": list(cfg.resolution),
        "t_start": cfg.t_start,
        "t_later": cfg.t_later,
        "split": cfg.split,
    }
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def build_benchmark(cfg, out_dir: str | Path) -> BenchmarkManifest:
    """Simulate and rasterize every (template, seed) instance; write clips,
    annotations, descriptions, ground-truth scenes, and the manifest.
    """
    out_dir = Path(out_dir)
    ids = list(cfg.templates)
    for tid in ids:
        if tid not in _REGISTRY:
            raise UnknownTemplate(f"unknown template {tid!r}")
    manifest = BenchmarkManifest(split=cfg.split, config_digest=benchmark_config_digest(cfg))
    for template_id in sorted(ids):
        for seed in range(cfg.seeds_per_template):
            scene = instantiate_template(
                template_id, seed,
                duration_s=cfg.duration_s, fps=cfg.fps, resolution=tuple(cfg.resolution),
            )
            report = validate_scene(scene)
            if not report.ok:
                raise SchemaViolation(
                    f"template {template_id!r} seed {seed} produced an invalid scene: "
                    + report.summary()
                )
            scene_id = f"{template_id}-s{seed:03d}"
            scene_dir = out_dir / "scenes" / scene_id
            scene_dir.mkdir(parents=True, exist_ok=True)

            traj = simulate(scene)
            clip = rasterize(scene, traj, source="reference")
            n_frames = clip.n_frames
            if not (1 <= cfg.t_start < cfg.t_later <= n_frames):
                raise SchemaViolation(
                    f"keyframes ({cfg.t_start}, {cfg.t_later}) out of range for {n_frames} frames"
                )
            save_clip(clip, scene_dir / "clip")
            (scene_dir / "scene.json").write_text(serialize_scene(scene))
            (scene_dir / "detection.json").write_text(
                serialize_detection(annotate_first_frame(scene))
            )
            (scene_dir / "description.txt").write_text(describe_scene(scene))
            manifest.scenes.append(
                SceneEntry(
                    scene_id=scene_id,
                    template_id=template_id,
                    seed=seed,
                    difficulty=scene.meta["difficulty"],
                    scene_path=f"scenes/{scene_id}/scene.json",
                    detection_path=f"scenes/{scene_id}/detection.json",
                    description_path=f"scenes/{scene_id}/description.txt",
                    clip_dir=f"scenes/{scene_id}/clip",
                    t_start=cfg.t_start,
                    t_later=cfg.t_later,
                )
            )
    manifest.scenes.sort(key=lambda e: e.scene_id)
    manifest_path(out_dir).write_text(json.dumps(manifest.to_dict(), indent=2))
    return manifest


def stratify(manifest: BenchmarkManifest, ratings: dict[str, float]) -> BenchmarkManifest:
    """Relabel difficulty from mean ratings on the 1-5 scale: mean < 2.5 is
    easy, < 3.5 medium, else hard (integer anchors 1-2 / 3 / 4-5 preserved).
    """
    out = BenchmarkManifest(split=manifest.split, config_digest=manifest.config_digest)
    for entry in manifest.scenes:
        if entry.scene_id not in ratings:
            raise RatingOutOfRange(f"no rating for scene {entry.scene_id!r}")
        mean = float(ratings[entry.scene_id])
        if not (1.0 <= mean <= 5.0):
            raise RatingOutOfRange(f"rating {mean} for {entry.scene_id!r} outside [1, 5]")
        if mean < 2.5:
            label = "easy"
        elif mean < 3.5:
            label = "medium"
        else:
            label = "hard"
        out.scenes.append(SceneEntry(**{**vars(entry), "difficulty": label}))
    return out
