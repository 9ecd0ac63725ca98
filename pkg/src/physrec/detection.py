"""First-frame detection context: a structured object list with categories,
tight bounding boxes, colors, and coarse size descriptors.

All coordinates are pixels with the origin at the image top-left, x
increasing rightward and y increasing downward. Unknown fields anywhere in
the document are preserved in ``extra`` passthrough maps so round-trips are
lossless.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import SchemaViolation
from .scene import CATEGORIES

DEFAULT_COORDINATE_SYSTEM = {
    "origin": "top_left",
    "x_axis": "to_right",
    "y_axis": "to_bottom",
}


@dataclass
class BBox:
    x_min: float
    y_min: float
    x_max: float
    y_max: float
    width: float
    height: float
    extra: dict = field(default_factory=dict)


@dataclass
class DetectedObject:
    id: str
    category: str
    color_rgb: tuple[int, int, int]
    bbox: BBox
    center_x: float
    center_y: float
    size: dict
    angle_deg: float | None = None
    extra: dict = field(default_factory=dict)


@dataclass
class DetectionContext:
    width: int
    height: int
    objects: list[DetectedObject]
    coordinate_system: dict = field(default_factory=lambda: dict(DEFAULT_COORDINATE_SYSTEM))
    extra: dict = field(default_factory=dict)


def _req(obj: dict, key: str, path: str):
    if key not in obj:
        raise SchemaViolation(f"missing field {key!r}", path)
    return obj[key]


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolation("expected a number", path)
    value = float(value)
    if not math.isfinite(value):
        raise SchemaViolation("value must be finite", path)
    return value


def _parse_bbox(obj, image_w, image_h, path: str) -> BBox:
    if not isinstance(obj, dict):
        raise SchemaViolation("bbox must be an object", path)
    known = {"x_min", "y_min", "x_max", "y_max", "width", "height"}
    vals = {k: _number(_req(obj, k, path), f"{path}.{k}") for k in known}
    if vals["width"] != vals["x_max"] - vals["x_min"]:
        raise SchemaViolation("width must equal x_max - x_min exactly", path)
    if vals["height"] != vals["y_max"] - vals["y_min"]:
        raise SchemaViolation("height must equal y_max - y_min exactly", path)
    if vals["x_min"] > vals["x_max"] or vals["y_min"] > vals["y_max"]:
        raise SchemaViolation("bbox min corner must not exceed max corner", path)
    for k in ("x_min", "x_max"):
        if not (0 <= vals[k] <= image_w):
            raise SchemaViolation(f"{k} outside image bounds", f"{path}.{k}")
    for k in ("y_min", "y_max"):
        if not (0 <= vals[k] <= image_h):
            raise SchemaViolation(f"{k} outside image bounds", f"{path}.{k}")
    extra = {k: v for k, v in obj.items() if k not in known}
    return BBox(extra=extra, **vals)


def _parse_object(obj, image_w, image_h, path: str) -> DetectedObject:
    if not isinstance(obj, dict):
        raise SchemaViolation("object entry must be an object", path)
    oid = _req(obj, "id", path)
    if not isinstance(oid, str) or not oid:
        raise SchemaViolation("id must be a nonempty string", f"{path}.id")
    category = _req(obj, "category", path)
    if category not in CATEGORIES:
        raise SchemaViolation(
            f"unknown category {category!r} (expected one of {', '.join(CATEGORIES)})",
            f"{path}.category",
        )
    color = _req(obj, "color_rgb", path)
    if not isinstance(color, list) or len(color) != 3:
        raise SchemaViolation("color_rgb must be an [r, g, b] list", f"{path}.color_rgb")
    rgb = []
    for i, c in enumerate(color):
        cv = _number(c, f"{path}.color_rgb[{i}]")
        if not (0 <= cv <= 255):
            raise SchemaViolation("color component outside [0, 255]", f"{path}.color_rgb[{i}]")
        rgb.append(int(cv))

    pos = _req(obj, "position", path)
    if not isinstance(pos, dict):
        raise SchemaViolation("position must be an object", f"{path}.position")
    cx = _number(_req(pos, "center_x", f"{path}.position"), f"{path}.position.center_x")
    cy = _number(_req(pos, "center_y", f"{path}.position"), f"{path}.position.center_y")

    bbox = _parse_bbox(_req(obj, "bbox", path), image_w, image_h, f"{path}.bbox")
    if not (bbox.x_min <= cx <= bbox.x_max and bbox.y_min <= cy <= bbox.y_max):
        raise SchemaViolation("center must lie inside the bbox", f"{path}.position")

    size = _req(obj, "size", path)
    if not isinstance(size, dict):
        raise SchemaViolation("size must be an object", f"{path}.size")
    for k, v in size.items():
        _number(v, f"{path}.size.{k}")

    angle_deg = None
    if "orientation" in obj:
        orient = obj["orientation"]
        if not isinstance(orient, dict):
            raise SchemaViolation("orientation must be an object", f"{path}.orientation")
        angle_deg = _number(
            _req(orient, "angle_deg", f"{path}.orientation"), f"{path}.orientation.angle_deg"
        )

    known = {"id", "category", "color_rgb", "position", "bbox", "size", "orientation"}
    extra = {k: v for k, v in obj.items() if k not in known}
    return DetectedObject(
        id=oid,
        category=category,
        color_rgb=(rgb[0], rgb[1], rgb[2]),
        bbox=bbox,
        center_x=cx,
        center_y=cy,
        size=dict(size),
        angle_deg=angle_deg,
        extra=extra,
    )


def parse_detection(text: str) -> DetectionContext:
    """Parse a detection-context JSON document, enforcing bbox arithmetic
    exactly. Failures are always SchemaViolation with a JSON path; the parser
    never raises anything else on string input.
    """
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SchemaViolation(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaViolation("document root must be an object")
    image_size = _req(doc, "image_size", "$")
    if not isinstance(image_size, dict):
        raise SchemaViolation("image_size must be an object", "$.image_size")
    width = _number(_req(image_size, "width", "$.image_size"), "$.image_size.width")
    height = _number(_req(image_size, "height", "$.image_size"), "$.image_size.height")
    if width <= 0 or height <= 0 or width != int(width) or height != int(height):
        raise SchemaViolation("image dimensions must be positive integers", "$.image_size")

    coord = doc.get("coordinate_system", dict(DEFAULT_COORDINATE_SYSTEM))
    if not isinstance(coord, dict):
        raise SchemaViolation("coordinate_system must be an object", "$.coordinate_system")

    objects_obj = _req(doc, "objects", "$")
    if not isinstance(objects_obj, list):
        raise SchemaViolation("objects must be a list", "$.objects")
    objects = [
        _parse_object(o, width, height, f"$.objects[{i}]") for i, o in enumerate(objects_obj)
    ]
    known = {"image_size", "coordinate_system", "objects"}
    extra = {k: v for k, v in doc.items() if k not in known}
    return DetectionContext(
        width=int(width),
        height=int(height),
        objects=objects,
        coordinate_system=dict(coord),
        extra=extra,
    )


def detection_to_dict(ctx: DetectionContext) -> dict:
    doc: dict = {
        "image_size": {"width": ctx.width, "height": ctx.height},
        "coordinate_system": dict(ctx.coordinate_system),
        "objects": [],
    }
    for o in ctx.objects:
        entry: dict = {
            "id": o.id,
            "category": o.category,
            "color_rgb": [int(c) for c in o.color_rgb],
            "position": {"center_x": o.center_x, "center_y": o.center_y},
            "bbox": {
                "x_min": o.bbox.x_min,
                "y_min": o.bbox.y_min,
                "x_max": o.bbox.x_max,
                "y_max": o.bbox.y_max,
                "width": o.bbox.width,
                "height": o.bbox.height,
                **o.bbox.extra,
            },
            "size": dict(o.size),
        }
        if o.angle_deg is not None:
            entry["orientation"] = {"angle_deg": o.angle_deg}
        entry.update(o.extra)
        doc["objects"].append(entry)
    doc.update(ctx.extra)
    return doc


def serialize_detection(ctx: DetectionContext) -> str:
    return json.dumps(detection_to_dict(ctx), indent=2)
