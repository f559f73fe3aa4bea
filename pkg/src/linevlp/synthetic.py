"""Procedural stand-ins for UAV patrol imagery.

Instance-level images (one component per image) feed pretraining; full
scenes with ground-truth boxes feed the transition and detection stages.
Every component type draws from a distinct shape family and the defect
status visibly perturbs the shape, so the vision task is learnable
without being trivial:

* grading ring      -> ring           (damage: missing arc + detached bit)
* shielded ring     -> double ring    (corrosion: rust hue + patches)
* shockproof hammer -> dumbbell       (intersection: two touching dumbbells)
* insulator         -> stacked discs  (bunch drop: missing disc)
* bird nest         -> twig cluster   (external interference)
* foreign body      -> wavy streamer  (external interference)
"""

from __future__ import annotations

import math
import os
import zlib
from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw

from .curation import AltTextPool, Manifest, Split, assign_alt_texts
from .errors import PlacementError, TaxonomyError
from .taxonomy import Category, Status, Taxonomy

_FAMILIES = ("ring", "double_ring", "dumbbell", "disc_stack", "blob_cluster", "streamer")

_FAMILY_BY_TYPE = {
    "grading_ring": "ring",
    "shielded_ring": "double_ring",
    "shockproof_hammer": "dumbbell",
    "insulator": "disc_stack",
    "bird_nest": "blob_cluster",
    "foreign_body": "streamer",
}


@dataclass
class SceneSpec:
    """Parameters for procedural scene generation."""

    taxonomy: Taxonomy
    image_size: tuple[int, int] = (256, 256)  # (H, W)
    objects_per_scene: tuple[int, int] = (2, 4)  # inclusive range
    background: str = "plain"  # "plain" or "clutter"
    clutter_density: float = 0.3
    object_size_range: tuple[float, float] = (0.15, 0.35)  # fraction of min dim
    seed: int = 0

    def __post_init__(self):
        h, w = self.image_size
        if h < 64 or w < 64:
            raise ValueError(f"image_size must be at least 64x64, got {self.image_size}")
        lo, hi = self.objects_per_scene
        if lo > hi or lo < 0:
            raise ValueError(f"empty objects_per_scene range: {self.objects_per_scene}")
        if self.background not in ("plain", "clutter"):
            raise ValueError(f"unknown background kind: {self.background!r}")
        if not 0.0 <= self.clutter_density <= 1.0:
            raise ValueError("clutter_density must lie in [0, 1]")


@dataclass
class DetectionScene:
    """Rendered scene with tight ground-truth boxes."""

    image: np.ndarray  # H x W x 3 uint8
    boxes: list[tuple[int, int, int, int]]  # (x_min, y_min, x_max, y_max)
    labels: list[Category]
    image_ref: str | None = None


def _family_for(category: Category) -> str:
    name = category.component_type.name
    if name in _FAMILY_BY_TYPE:
        return _FAMILY_BY_TYPE[name]
    return _FAMILIES[zlib.crc32(name.encode()) % len(_FAMILIES)]


def _metal_color(rng) -> tuple[int, int, int]:
    v = int(rng.integers(140, 215))
    return (v, v, min(255, v + int(rng.integers(0, 25))))


def _rust_color(rng) -> tuple[int, int, int]:
    return (int(rng.integers(150, 195)), int(rng.integers(70, 110)), int(rng.integers(25, 60)))


def _draw_ring(draw, w, h, rng, defect):
    color = _metal_color(rng) + (255,)
    r = 0.5 * min(w, h) * rng.uniform(0.62, 0.92)
    cx = w / 2 + rng.uniform(-0.05, 0.05) * w
    cy = h / 2 + rng.uniform(-0.05, 0.05) * h
    box = [cx - r, cy - r, cx + r, cy + r]
    width = max(2, int(r * 0.24))
    if not defect:
        draw.arc(box, 0, 360, fill=color, width=width)
        return
    gap_start = rng.uniform(0, 360)
    gap = rng.uniform(55, 110)
    draw.arc(box, gap_start + gap, gap_start + 360, fill=color, width=width)
    # detached fragment drifting away from the gap
    frag_r = r * rng.uniform(1.02, 1.12)
    fbox = [cx - frag_r, cy - frag_r, cx + frag_r, cy + frag_r]
    mid = gap_start + gap * 0.5
    draw.arc(fbox, mid - 9, mid + 9, fill=color, width=width)


def _draw_double_ring(draw, w, h, rng, defect):
    color = (_rust_color(rng) if defect else _metal_color(rng)) + (255,)
    r = 0.5 * min(w, h) * rng.uniform(0.65, 0.92)
    cx = w / 2 + rng.uniform(-0.04, 0.04) * w
    cy = h / 2 + rng.uniform(-0.04, 0.04) * h
    width = max(2, int(r * 0.14))
    for radius in (r, r * 0.62):
        box = [cx - radius, cy - radius, cx + radius, cy + radius]
        draw.arc(box, 0, 360, fill=color, width=width)
    if defect:
        for _ in range(int(rng.integers(4, 9))):
            ang = rng.uniform(0, 2 * math.pi)
            radius = r * rng.choice([1.0, 0.62])
            px, py = cx + radius * math.cos(ang), cy + radius * math.sin(ang)
            pr = r * rng.uniform(0.08, 0.16)
            patch = tuple(int(c * rng.uniform(0.6, 0.9)) for c in _rust_color(rng)) + (255,)
            draw.ellipse([px - pr, py - pr, px + pr, py + pr], fill=patch)


def _one_dumbbell(draw, cx, cy, length, angle, head_r, bar_t, color):
    dx, dy = math.cos(angle), math.sin(angle)
    x0, y0 = cx - dx * length / 2, cy - dy * length / 2
    x1, y1 = cx + dx * length / 2, cy + dy * length / 2
    draw.line([x0, y0, x1, y1], fill=color, width=int(bar_t))
    for px, py in ((x0, y0), (x1, y1)):
        draw.ellipse([px - head_r, py - head_r, px + head_r, py + head_r], fill=color)


def _draw_dumbbell(draw, w, h, rng, defect):
    color = _metal_color(rng) + (255,)
    m = min(w, h)
    # conductor the hammer hangs from
    cable_y = h * rng.uniform(0.35, 0.65)
    draw.line([0, cable_y, w, cable_y], fill=(90, 90, 100, 255), width=max(1, m // 40))
    length = m * rng.uniform(0.5, 0.72)
    head_r = m * rng.uniform(0.1, 0.14)
    bar_t = max(2, int(m * 0.07))
    if not defect:
        _one_dumbbell(draw, w / 2, cable_y, length, rng.uniform(-0.25, 0.25), head_r, bar_t, color)
        return
    # two hammers with touching heads
    a1 = rng.uniform(-0.3, 0.3)
    a2 = a1 + rng.uniform(0.5, 1.1) * rng.choice([-1.0, 1.0])
    off = head_r * rng.uniform(0.4, 1.2)
    _one_dumbbell(draw, w / 2 - off, cable_y - off * 0.4, length, a1, head_r, bar_t, color)
    color2 = _metal_color(rng) + (255,)
    _one_dumbbell(draw, w / 2 + off, cable_y + off * 0.4, length, a2, head_r, bar_t, color2)


def _draw_disc_stack(draw, w, h, rng, defect):
    color = _metal_color(rng) + (255,)
    n = int(rng.integers(5, 8))
    cx = w / 2 + rng.uniform(-0.04, 0.04) * w
    top, bottom = h * 0.08, h * 0.92
    draw.line([cx, top, cx, bottom], fill=(70, 70, 80, 255), width=max(2, min(w, h) // 28))
    step = (bottom - top) / n
    disc_w = w * rng.uniform(0.45, 0.62)
    disc_h = step * rng.uniform(0.55, 0.72)
    missing = int(rng.integers(1, n - 1)) if defect else -1
    for i in range(n):
        if i == missing:
            continue
        cy = top + step * (i + 0.5)
        draw.ellipse([cx - disc_w / 2, cy - disc_h / 2, cx + disc_w / 2, cy + disc_h / 2], fill=color)


def _draw_blob_cluster(draw, w, h, rng, defect):
    del defect  # external interference: defect-only category
    cx, cy = w / 2, h / 2
    rx, ry = w * rng.uniform(0.3, 0.42), h * rng.uniform(0.3, 0.42)
    for _ in range(int(rng.integers(26, 44))):
        ang = rng.uniform(0, 2 * math.pi)
        rad = rng.uniform(0, 1.0)
        x = cx + rx * rad * math.cos(ang)
        y = cy + ry * rad * math.sin(ang)
        twig_len = min(w, h) * rng.uniform(0.12, 0.3)
        twig_ang = rng.uniform(0, 2 * math.pi)
        brown = (int(rng.integers(90, 145)), int(rng.integers(55, 95)), int(rng.integers(15, 55)), 255)
        draw.line(
            [x, y, x + twig_len * math.cos(twig_ang), y + twig_len * math.sin(twig_ang)],
            fill=brown,
            width=max(1, min(w, h) // 42),
        )


def _draw_streamer(draw, w, h, rng, defect):
    del defect
    bright = [(220, 40, 40), (40, 170, 60), (50, 90, 220), (230, 200, 40)]
    color = tuple(int(c * rng.uniform(0.85, 1.0)) for c in bright[int(rng.integers(len(bright)))]) + (255,)
    amp = h * rng.uniform(0.15, 0.28)
    phase = rng.uniform(0, 2 * math.pi)
    freq = rng.uniform(1.5, 3.0)
    cy = h / 2 + rng.uniform(-0.1, 0.1) * h
    xs = np.linspace(w * 0.06, w * 0.94, 16)
    pts = [(x, cy + amp * math.sin(phase + freq * 2 * math.pi * x / w)) for x in xs]
    draw.line(pts, fill=color, width=max(2, int(min(w, h) * 0.08)), joint="curve")


_DRAWERS = {
    "ring": _draw_ring,
    "double_ring": _draw_double_ring,
    "dumbbell": _draw_dumbbell,
    "disc_stack": _draw_disc_stack,
    "blob_cluster": _draw_blob_cluster,
    "streamer": _draw_streamer,
}

_ROTATION_RANGE = {
    "ring": 0.0,
    "double_ring": 0.0,
    "dumbbell": 35.0,
    "disc_stack": 12.0,
    "blob_cluster": 0.0,
    "streamer": 90.0,
}


def _render_sprite(category: Category, size: tuple[int, int], rng) -> Image.Image:
    """Draw a component on a transparent canvas and crop to its content."""
    h, w = size
    sprite = Image.new("RGBA", (w, h), (0, 0, 0, 0))
    draw = ImageDraw.Draw(sprite)
    family = _family_for(category)
    _DRAWERS[family](draw, w, h, rng, category.status is Status.DEFECT)
    max_rot = _ROTATION_RANGE[family]
    if max_rot > 0:
        angle = float(rng.uniform(-max_rot, max_rot))
        sprite = sprite.rotate(angle, expand=True, resample=Image.BILINEAR)
    bbox = sprite.getbbox()
    if bbox is not None:
        sprite = sprite.crop(bbox)
    return sprite


def _plain_background(size: tuple[int, int], rng) -> np.ndarray:
    h, w = size
    base = rng.integers(150, 205)
    img = np.full((h, w, 3), base, dtype=np.float32)
    img += rng.normal(0, 7, size=(h, w, 1))
    img += rng.normal(0, 4, size=(h, w, 3))
    return np.clip(img, 0, 255).astype(np.uint8)


def _clutter_background(size: tuple[int, int], rng, density: float) -> np.ndarray:
    img = Image.fromarray(_plain_background(size, rng))
    draw = ImageDraw.Draw(img)
    h, w = size
    n_lines = int(3 + density * 14)
    for _ in range(n_lines):
        x0, y0 = rng.uniform(0, w), rng.uniform(0, h)
        ang, ln = rng.uniform(0, math.pi), rng.uniform(0.3, 1.2) * max(w, h)
        shade = int(rng.integers(70, 150))
        draw.line(
            [x0, y0, x0 + ln * math.cos(ang), y0 + ln * math.sin(ang)],
            fill=(shade, shade, shade),
            width=int(rng.integers(1, 3)),
        )
    n_blobs = int(density * 10)
    for _ in range(n_blobs):
        x, y = rng.uniform(0, w), rng.uniform(0, h)
        r = rng.uniform(0.02, 0.06) * min(w, h)
        shade = int(rng.integers(100, 180))
        draw.ellipse([x - r, y - r, x + r, y + r], fill=(shade, shade, shade))
    return np.array(img)


def render_instance(
    category: Category, size: tuple[int, int], rng: np.random.Generator, taxonomy: Taxonomy | None = None
) -> np.ndarray:
    """Render one instance-level image (H x W x 3 uint8) of a category.

    Deterministic given the generator state. Position, scale, rotation and
    colors are jittered so raw pixels are not trivially separable.
    """
    h, w = size
    if h < 16 or w < 16:
        raise ValueError(f"instance size must be at least 16x16, got {size}")
    if taxonomy is not None and category.name not in taxonomy:
        raise TaxonomyError(f"unknown category: {category.name!r}")
    canvas = Image.fromarray(_plain_background(size, rng)).convert("RGBA")
    target = int(min(w, h) * rng.uniform(0.7, 0.98))
    sprite = _render_sprite(category, (target, target), rng)
    max_x, max_y = max(0, w - sprite.width), max(0, h - sprite.height)
    px = int(rng.integers(0, max_x + 1))
    py = int(rng.integers(0, max_y + 1))
    canvas.alpha_composite(sprite, (px, py))
    return np.array(canvas.convert("RGB"))


def _box_iou(a, b) -> float:
    ix = max(0, min(a[2], b[2]) - max(a[0], b[0]))
    iy = max(0, min(a[3], b[3]) - max(a[1], b[1]))
    inter = ix * iy
    if inter == 0:
        return 0.0
    area = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    return inter / area


def generate_scene(spec: SceneSpec, rng: np.random.Generator, max_attempts: int = 60) -> DetectionScene:
    """Place sprites on a background; boxes stay in bounds, pairwise IoU <= 0.3."""
    h, w = spec.image_size
    if spec.background == "clutter":
        bg = _clutter_background(spec.image_size, rng, spec.clutter_density)
    else:
        bg = _plain_background(spec.image_size, rng)
    canvas = Image.fromarray(bg).convert("RGBA")
    lo, hi = spec.objects_per_scene
    n_objects = int(rng.integers(lo, hi + 1))
    cats = spec.taxonomy.categories
    boxes: list[tuple[int, int, int, int]] = []
    labels: list[Category] = []
    for _ in range(n_objects):
        placed = False
        for _attempt in range(max_attempts):
            category = cats[int(rng.integers(len(cats)))]
            frac = rng.uniform(*spec.object_size_range)
            target = max(18, int(min(w, h) * frac))
            sprite = _render_sprite(category, (target, target), rng)
            if sprite.width >= w or sprite.height >= h:
                continue
            px = int(rng.integers(0, w - sprite.width + 1))
            py = int(rng.integers(0, h - sprite.height + 1))
            box = (px, py, px + sprite.width, py + sprite.height)
            if any(_box_iou(box, other) > 0.3 for other in boxes):
                continue
            canvas.alpha_composite(sprite, (px, py))
            boxes.append(box)
            labels.append(category)
            placed = True
            break
        if not placed:
            raise PlacementError(
                f"could not place object {len(boxes) + 1}/{n_objects} after {max_attempts} attempts"
            )
    return DetectionScene(np.array(canvas.convert("RGB")), boxes, labels)


def generate_scene_dataset(spec: SceneSpec, n_scenes: int) -> list[DetectionScene]:
    rng = np.random.default_rng(spec.seed)
    return [generate_scene(spec, rng) for _ in range(n_scenes)]


def render_instance_images(
    taxonomy: Taxonomy,
    n_per_category: int,
    rng: np.random.Generator,
    out_dir: str,
    size_range: tuple[int, int] = (72, 128),
) -> list[tuple[str, Category]]:
    """Render and save a balanced set of instance PNGs, one dir per category."""
    if n_per_category < 1:
        raise ValueError("n_per_category must be >= 1")
    listing: list[tuple[str, Category]] = []
    for cat in taxonomy.categories:
        cat_dir = os.path.join(out_dir, cat.name)
        os.makedirs(cat_dir, exist_ok=True)
        for i in range(n_per_category):
            side = int(rng.integers(size_range[0], size_range[1] + 1))
            img = render_instance(cat, (side, side), rng)
            path = os.path.join(cat_dir, f"{i:05d}.png")
            Image.fromarray(img).save(path)
            listing.append((path, cat))
    return listing


def list_instance_images(taxonomy: Taxonomy, images_dir: str) -> list[tuple[str, Category]]:
    """Recover the (path, category) listing from a rendered instance dir."""
    listing: list[tuple[str, Category]] = []
    for cat in taxonomy.categories:
        cat_dir = os.path.join(images_dir, cat.name)
        if not os.path.isdir(cat_dir):
            continue
        for fname in sorted(os.listdir(cat_dir)):
            if fname.endswith(".png"):
                listing.append((os.path.join(cat_dir, fname), cat))
    return listing


def generate_instance_dataset(
    taxonomy: Taxonomy,
    n_per_category: int,
    pool: AltTextPool,
    rng: np.random.Generator,
    out_dir: str,
    size_range: tuple[int, int] = (72, 128),
) -> Manifest:
    """Balanced instance dataset with alt-texts assigned, as a manifest."""
    listing = render_instance_images(taxonomy, n_per_category, rng, out_dir, size_range)
    samples = assign_alt_texts(listing, pool, rng, split=Split.PRETRAIN)
    return Manifest(taxonomy, samples)


def save_scenes(scenes: list[DetectionScene], out_dir: str) -> None:
    """Persist scenes as a PNG directory plus a tab-delimited boxes file."""
    img_dir = os.path.join(out_dir, "images")
    os.makedirs(img_dir, exist_ok=True)
    rows = []
    for i, scene in enumerate(scenes):
        name = f"scene_{i:05d}.png"
        Image.fromarray(scene.image).save(os.path.join(img_dir, name))
        scene.image_ref = os.path.join("images", name)
        for (x0, y0, x1, y1), cat in zip(scene.boxes, scene.labels):
            rows.append(f"{scene.image_ref}\t{x0}\t{y0}\t{x1}\t{y1}\t{cat.name}")
    with open(os.path.join(out_dir, "boxes.tsv"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows) + ("\n" if rows else ""))


def load_scenes(scene_dir: str, taxonomy: Taxonomy) -> list[DetectionScene]:
    """Load a persisted scene dataset; scenes with no boxes are kept."""
    boxes_path = os.path.join(scene_dir, "boxes.tsv")
    by_image: dict[str, tuple[list, list]] = {}
    img_dir = os.path.join(scene_dir, "images")
    for fname in sorted(os.listdir(img_dir)):
        if fname.endswith(".png"):
            by_image[os.path.join("images", fname)] = ([], [])
    if os.path.isfile(boxes_path):
        with open(boxes_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                ref, x0, y0, x1, y1, cat_name = line.split("\t")
                if ref not in by_image:
                    by_image[ref] = ([], [])
                by_image[ref][0].append((int(x0), int(y0), int(x1), int(y1)))
                by_image[ref][1].append(taxonomy.category(cat_name))
    scenes = []
    for ref, (boxes, labels) in by_image.items():
        img = np.array(Image.open(os.path.join(scene_dir, ref)).convert("RGB"))
        scenes.append(DetectionScene(img, boxes, labels, image_ref=ref))
    return scenes
