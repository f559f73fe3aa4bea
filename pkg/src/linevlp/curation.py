"""Image-text pair curation: alt-text pools, sample assignment, manifests.

The manifest file is UTF-8, line-delimited JSON. Record 0 carries the
format version and the embedded taxonomy; records 1..n are samples with
fields {image_ref, category, alt_text, split}. Image refs are stored
relative to the manifest location when possible and resolved to absolute
paths on load.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import CurationError, ManifestError
from .taxonomy import Category, Taxonomy

MANIFEST_VERSION = "1"

# Neutral templates; "{}" is replaced by the category's display phrase.
DEFAULT_TEMPLATES = [
    "There is a {} in the image.",
    "A photo of a {}.",
    "An aerial inspection image showing a {}.",
    "A {} on the transmission line.",
    "A close-up view of a {}.",
]

# Hand-written refinements for the default taxonomy's defect categories,
# standing in for inspectors' free-text descriptions.
DEFAULT_REFINED_DESCRIPTIONS = {
    "grading_ring_damage": [
        "A grading ring with a broken segment detached from the ring body.",
    ],
    "shielded_ring_corrosion": [
        "A corroded shielded ring covered with rust-colored patches.",
    ],
    "shockproof_hammer_intersection": [
        "Two shockproof hammers touching each other on the conductor.",
    ],
    "insulator_bunch_drop": [
        "An insulator string with a disc missing from the stack.",
    ],
    "bird_nest": [
        "A bird nest of tangled twigs built on the tower structure.",
    ],
    "foreign_body": [
        "A foreign object entangled on the power line.",
    ],
}


class Split(str, Enum):
    PRETRAIN = "pretrain"
    TRANSITION = "transition"


@dataclass(frozen=True)
class InstanceSample:
    """An instance-level image, its reserved category, and its alt-text."""

    image_ref: str
    category: Category
    alt_text: str
    split: Split = Split.PRETRAIN


@dataclass
class AltTextPool:
    """Per-category descriptions, keyed by category name."""

    entries: dict[str, list[str]]

    def for_category(self, category: Category | str) -> list[str]:
        name = category.name if isinstance(category, Category) else category
        texts = self.entries.get(name, [])
        if not texts:
            raise CurationError(f"alt-text pool has no entries for category {name!r}")
        return texts


@dataclass
class Manifest:
    taxonomy: Taxonomy
    samples: list[InstanceSample] = field(default_factory=list)
    version: str = MANIFEST_VERSION


def build_alt_text_pool(
    taxonomy: Taxonomy,
    templates: list[str] | None = None,
    refined_descriptions: dict[str, list[str]] | None = None,
) -> AltTextPool:
    """Instantiate every template per category and union in refinements.

    Each template must contain exactly one "{}" placeholder. Entries are
    deduplicated preserving order; every category must end up with at
    least one entry.
    """
    templates = DEFAULT_TEMPLATES if templates is None else templates
    refined = refined_descriptions or {}
    for t in templates:
        if t.count("{}") != 1:
            raise ValueError(f"template must contain exactly one {{}} placeholder: {t!r}")
    entries: dict[str, list[str]] = {}
    for cat in taxonomy.categories:
        texts = [t.format(cat.display_name) for t in templates]
        texts.extend(refined.get(cat.name, []))
        texts = list(dict.fromkeys(texts))
        if not texts:
            raise CurationError(f"no alt-texts available for category {cat.name!r}")
        entries[cat.name] = texts
    return AltTextPool(entries)


def assign_alt_texts(
    images: list[tuple[str, Category]],
    pool: AltTextPool,
    rng: np.random.Generator,
    split: Split = Split.PRETRAIN,
) -> list[InstanceSample]:
    """Pair each image with an alt-text drawn uniformly from its category's pool."""
    samples = []
    for image_ref, category in images:
        texts = pool.for_category(category)
        alt_text = texts[int(rng.integers(len(texts)))]
        samples.append(InstanceSample(image_ref, category, alt_text, split))
    return samples


def crop_instances(scene) -> list[tuple[np.ndarray, Category]]:
    """Crop every annotated box out of a detection scene.

    `scene` needs .image (H x W x 3 uint8), .boxes (x_min, y_min, x_max,
    y_max) and .labels. Crops are exactly the box extent.
    """
    crops = []
    h, w = scene.image.shape[:2]
    for i, ((x0, y0, x1, y1), cat) in enumerate(zip(scene.boxes, scene.labels)):
        x0, y0, x1, y1 = int(x0), int(y0), int(x1), int(y1)
        if x1 <= x0 or y1 <= y0:
            raise CurationError(f"degenerate box at index {i}: {(x0, y0, x1, y1)}")
        if x0 < 0 or y0 < 0 or x1 > w or y1 > h:
            raise CurationError(f"box at index {i} outside image bounds: {(x0, y0, x1, y1)}")
        crops.append((scene.image[y0:y1, x0:x1].copy(), cat))
    return crops


def _dump(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def save_manifest(manifest: Manifest, path: str, config_hash: str | None = None) -> None:
    """Write the manifest as line-delimited JSON with a header record."""
    base = os.path.dirname(os.path.abspath(path))
    header: dict = {"version": manifest.version, "taxonomy": manifest.taxonomy.to_dict()}
    if config_hash is not None:
        header["config_hash"] = config_hash
    lines = [_dump(header)]
    for s in manifest.samples:
        ref = os.path.abspath(s.image_ref)
        if os.path.commonpath([ref, base]) == base:
            ref = os.path.relpath(ref, base)
        lines.append(
            _dump(
                {
                    "image_ref": ref,
                    "category": s.category.name,
                    "alt_text": s.alt_text,
                    "split": s.split.value,
                }
            )
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_manifest(path: str, check_images: bool = True) -> Manifest:
    """Read a manifest back; errors name the offending record index."""
    base = os.path.dirname(os.path.abspath(path))
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ManifestError(f"{path}: empty manifest file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: record 0 is not valid JSON: {exc}") from exc
    version = header.get("version")
    if version != MANIFEST_VERSION:
        raise ManifestError(
            f"{path}: version mismatch: file has {version!r}, expected {MANIFEST_VERSION!r}"
        )
    taxonomy = Taxonomy.from_dict(header.get("taxonomy", {}))
    samples = []
    for i, line in enumerate(lines[1:], start=1):
        try:
            rec = json.loads(line)
            name = rec["category"]
            alt_text = rec["alt_text"]
            split = Split(rec["split"])
            ref = rec["image_ref"]
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ManifestError(f"{path}: malformed record {i}: {exc}") from exc
        if name not in taxonomy:
            raise ManifestError(f"{path}: record {i} references unknown category {name!r}")
        if not alt_text:
            raise ManifestError(f"{path}: record {i} has an empty alt_text")
        if not os.path.isabs(ref):
            ref = os.path.normpath(os.path.join(base, ref))
        if check_images and not os.path.isfile(ref):
            raise ManifestError(f"{path}: record {i} references missing image file {ref!r}")
        samples.append(InstanceSample(ref, taxonomy.category(name), alt_text, split))
    return Manifest(taxonomy, samples, version)


def merge_manifests(base: Manifest, extra: list[InstanceSample]) -> Manifest:
    """Union of an existing manifest with additional samples."""
    return replace(base, samples=list(base.samples) + list(extra))
