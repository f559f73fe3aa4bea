"""Category taxonomy and the three-way sample relation.

A taxonomy is a flat set of categories, each tied to a component type
(grading ring, insulator, ...) and a status (normal or defect).
External-interference types (bird nest, foreign body) have no normal
counterpart and therefore exactly one category.

Two samples stand in one of three relations:

* STSS: same category name (same type and same status),
* STDS: different categories sharing a component type,
* DT:   different component types.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum

from .errors import TaxonomyError


class Status(str, Enum):
    NORMAL = "normal"
    DEFECT = "defect"


class Relation(IntEnum):
    """Sample relation, with integer codes fixed for cross-entropy targets."""

    STSS = 0  # same type, same status
    STDS = 1  # same type, different status
    DT = 2  # different type


@dataclass(frozen=True)
class ComponentType:
    name: str
    is_external_interference: bool = False


@dataclass(frozen=True)
class Category:
    name: str
    component_type: ComponentType
    status: Status

    @property
    def display_name(self) -> str:
        """Human-readable phrase used to fill alt-text templates."""
        return self.name.replace("_", " ")


def relate(a: Category, b: Category) -> Relation:
    """Relation between two categories of the same taxonomy.

    Symmetric and total. External-interference categories can never yield
    STDS because their component type has no second category.
    """
    if a.name == b.name:
        return Relation.STSS
    if a.component_type == b.component_type:
        return Relation.STDS
    return Relation.DT


class Taxonomy:
    """Validated, immutable collection of categories.

    Raises TaxonomyError on duplicate names, duplicate (type, status)
    pairs, or external-interference types that are not a single
    defect-only category.
    """

    def __init__(self, categories: list[Category]):
        self._by_name: dict[str, Category] = {}
        types: dict[str, ComponentType] = {}
        pair_seen: set[tuple[str, Status]] = set()
        for cat in categories:
            if cat.name in self._by_name:
                raise TaxonomyError(f"duplicate category name: {cat.name!r}")
            ct = cat.component_type
            if ct.name in types and types[ct.name] != ct:
                raise TaxonomyError(f"conflicting definitions of component type {ct.name!r}")
            types[ct.name] = ct
            key = (ct.name, cat.status)
            if key in pair_seen:
                raise TaxonomyError(f"duplicate (component_type, status) pair: {key}")
            pair_seen.add(key)
            if ct.is_external_interference and cat.status is not Status.DEFECT:
                raise TaxonomyError(f"external-interference category {cat.name!r} must be a defect")
            self._by_name[cat.name] = cat
        for ct in types.values():
            n = sum(1 for c in self._by_name.values() if c.component_type == ct)
            if ct.is_external_interference and n != 1:
                raise TaxonomyError(
                    f"external-interference type {ct.name!r} must have exactly one category, got {n}"
                )

    @property
    def categories(self) -> list[Category]:
        return list(self._by_name.values())

    @property
    def component_types(self) -> list[ComponentType]:
        seen: dict[str, ComponentType] = {}
        for cat in self._by_name.values():
            seen.setdefault(cat.component_type.name, cat.component_type)
        return list(seen.values())

    @property
    def defect_categories(self) -> list[Category]:
        return [c for c in self._by_name.values() if c.status is Status.DEFECT]

    def __len__(self) -> int:
        return len(self._by_name)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def category(self, name: str) -> Category:
        try:
            return self._by_name[name]
        except KeyError:
            raise TaxonomyError(f"unknown category: {name!r}") from None

    def relate(self, a: str | Category, b: str | Category) -> Relation:
        """Name-resolving variant of :func:`relate`."""
        return relate(self._resolve(a), self._resolve(b))

    def _resolve(self, c: str | Category) -> Category:
        if isinstance(c, Category):
            if c.name not in self._by_name or self._by_name[c.name] != c:
                raise TaxonomyError(f"category {c.name!r} does not belong to this taxonomy")
            return c
        return self.category(c)

    def to_dict(self) -> dict:
        return {
            "component_types": [
                {"name": ct.name, "is_external_interference": ct.is_external_interference}
                for ct in self.component_types
            ],
            "categories": [
                {"name": c.name, "component_type": c.component_type.name, "status": c.status.value}
                for c in self.categories
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Taxonomy":
        try:
            types = {
                t["name"]: ComponentType(t["name"], bool(t["is_external_interference"]))
                for t in d["component_types"]
            }
            cats = []
            for c in d["categories"]:
                if c["component_type"] not in types:
                    raise TaxonomyError(f"category {c['name']!r} references unknown component type")
                cats.append(Category(c["name"], types[c["component_type"]], Status(c["status"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise TaxonomyError(f"malformed taxonomy dict: {exc}") from exc
        return cls(cats)

    def __eq__(self, other) -> bool:
        return isinstance(other, Taxonomy) and self.to_dict() == other.to_dict()


def default_taxonomy() -> Taxonomy:
    """Desk-scale taxonomy: 6 component types, 10 categories.

    Four paired types (normal + defect) plus two external-interference
    defect-only types.
    """
    grading_ring = ComponentType("grading_ring")
    shielded_ring = ComponentType("shielded_ring")
    shockproof_hammer = ComponentType("shockproof_hammer")
    insulator = ComponentType("insulator")
    bird_nest = ComponentType("bird_nest", is_external_interference=True)
    foreign_body = ComponentType("foreign_body", is_external_interference=True)
    return Taxonomy(
        [
            Category("normal_grading_ring", grading_ring, Status.NORMAL),
            Category("grading_ring_damage", grading_ring, Status.DEFECT),
            Category("normal_shielded_ring", shielded_ring, Status.NORMAL),
            Category("shielded_ring_corrosion", shielded_ring, Status.DEFECT),
            Category("normal_shockproof_hammer", shockproof_hammer, Status.NORMAL),
            Category("shockproof_hammer_intersection", shockproof_hammer, Status.DEFECT),
            Category("normal_insulator", insulator, Status.NORMAL),
            Category("insulator_bunch_drop", insulator, Status.DEFECT),
            Category("bird_nest", bird_nest, Status.DEFECT),
            Category("foreign_body", foreign_body, Status.DEFECT),
        ]
    )
