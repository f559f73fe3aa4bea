"""Vision-language pretraining and progressive transfer for power-line defect detection."""

__version__ = "0.1.0"

from .taxonomy import Category, ComponentType, Relation, Status, Taxonomy, default_taxonomy, relate

__all__ = [
    "Category",
    "ComponentType",
    "Relation",
    "Status",
    "Taxonomy",
    "default_taxonomy",
    "relate",
]
