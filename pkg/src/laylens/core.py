"""Shared domain types: boxes, label taxonomies, documents and JSON formats.

Everything here is immutable value data. The JSON writers emit a canonical
field order so that save -> load -> save is byte-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

__all__ = [
    "DataError",
    "BBox",
    "LabelTaxonomy",
    "LabeledRegion",
    "AnnotatedDoc",
    "Manifest",
    "FOREGROUND",
    "SOURCE8",
    "INVOICE5",
    "RESUME6",
    "TAXONOMIES",
    "iou",
    "load_manifest",
    "save_manifest",
    "load_detections",
    "save_detections",
    "load_transcripts",
]


class DataError(ValueError):
    """Malformed or invariant-violating input data."""


FOREGROUND = "foreground"  # reserved label for class-agnostic detections


@dataclass(frozen=True)
class BBox:
    """Axis-aligned pixel rectangle: (x, y) top-left corner, w x h extent."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise DataError(f"bbox needs w,h >= 1, got {self.w}x{self.h}")
        if self.x < 0 or self.y < 0:
            raise DataError(f"bbox needs x,y >= 0, got ({self.x},{self.y})")

    @property
    def x2(self) -> int:
        """Exclusive right edge."""
        return self.x + self.w

    @property
    def y2(self) -> int:
        """Exclusive bottom edge."""
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    def union(self, other: "BBox") -> "BBox":
        x = min(self.x, other.x)
        y = min(self.y, other.y)
        return BBox(x, y, max(self.x2, other.x2) - x, max(self.y2, other.y2) - y)

    def as_list(self) -> list[int]:
        return [self.x, self.y, self.w, self.h]


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union with inclusive pixel areas w*h.

    Boxes are half-open intervals [x, x+w) x [y, y+h); disjoint boxes
    score 0. Total function, symmetric, in [0, 1].
    """
    iw = min(a.x2, b.x2) - max(a.x, b.x)
    ih = min(a.y2, b.y2) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / float(a.area + b.area - inter)


@dataclass(frozen=True)
class LabelTaxonomy:
    """Ordered label set; a label's class index is its list position."""

    name: str
    labels: tuple[str, ...]

    def __post_init__(self):
        if not self.labels:
            raise DataError(f"taxonomy {self.name!r} has no labels")
        if len(set(self.labels)) != len(self.labels):
            raise DataError(f"taxonomy {self.name!r} has duplicate labels")

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DataError(f"label {label!r} not in taxonomy {self.name!r}") from None

    def __contains__(self, label: str) -> bool:
        return label in self.labels

    def __len__(self) -> int:
        return len(self.labels)


SOURCE8 = LabelTaxonomy(
    "source8",
    (
        "Title",
        "Heading",
        "Sub-Heading",
        "Text Block",
        "List",
        "Table",
        "Image Content",
        "Image/Table Caption",
    ),
)

INVOICE5 = LabelTaxonomy(
    "invoice5",
    (
        "Logo",
        "Address",
        "Bill/Invoice Information",
        "Tables",
        "(Total) Amount Information",
    ),
)

RESUME6 = LabelTaxonomy(
    "resume6",
    ("Education", "Experience", "Bio", "Skills", "Summary", "Other"),
)

TAXONOMIES = {t.name: t for t in (SOURCE8, INVOICE5, RESUME6)}


@dataclass(frozen=True)
class LabeledRegion:
    """A labeled rectangle, optionally with a transcript and a score.

    Ground-truth regions carry no score; detections must carry one.
    """

    bbox: BBox
    label: str
    text: str | None = None
    score: float | None = None

    def __post_init__(self):
        if self.score is not None and not (0.0 <= self.score <= 1.0):
            raise DataError(f"region score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class AnnotatedDoc:
    """One page: image reference, pixel dimensions and its regions."""

    doc_id: str
    image_path: str
    page_w: int
    page_h: int
    regions: tuple[LabeledRegion, ...] = ()

    def validate(self):
        if self.page_w < 1 or self.page_h < 1:
            raise DataError(f"doc {self.doc_id!r}: bad page size")
        for i, r in enumerate(self.regions):
            b = r.bbox
            if b.x2 > self.page_w or b.y2 > self.page_h:
                raise DataError(
                    f"doc {self.doc_id!r}: region {i} bbox {b.as_list()} "
                    f"outside page {self.page_w}x{self.page_h}"
                )


@dataclass(frozen=True)
class Manifest:
    """A corpus: taxonomy, documents, and an optional train/test split."""

    taxonomy: LabelTaxonomy
    docs: tuple[AnnotatedDoc, ...] = ()
    split: dict[str, str] | None = None

    def validate(self):
        ids = [d.doc_id for d in self.docs]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise DataError(f"duplicate doc_id(s): {dup}")
        for d in self.docs:
            d.validate()
            for i, r in enumerate(d.regions):
                if r.label != FOREGROUND and r.label not in self.taxonomy:
                    raise DataError(
                        f"doc {d.doc_id!r}: region {i} label {r.label!r} "
                        f"not in taxonomy {self.taxonomy.name!r}"
                    )
                if r.score is not None:
                    raise DataError(
                        f"doc {d.doc_id!r}: region {i} carries a score; "
                        "ground truth must not"
                    )
        if self.split is not None:
            if set(self.split) != set(ids):
                raise DataError("split does not cover every doc_id exactly once")
            bad = {v for v in self.split.values()} - {"train", "test"}
            if bad:
                raise DataError(f"split values must be train/test, got {sorted(bad)}")

    def docs_by_id(self) -> dict[str, AnnotatedDoc]:
        return {d.doc_id: d for d in self.docs}

    def split_ids(self, part: str) -> list[str]:
        if self.split is None:
            raise DataError("manifest has no train/test split")
        return [d.doc_id for d in self.docs if self.split[d.doc_id] == part]


# ---------------------------------------------------------------------------
# JSON formats (canonical field order; null for absent optionals)


def _region_to_json(r: LabeledRegion) -> dict:
    return {
        "bbox": r.bbox.as_list(),
        "label": r.label,
        "text": r.text,
        "score": r.score,
    }


def _region_from_json(obj, where: str) -> LabeledRegion:
    if not isinstance(obj, dict):
        raise DataError(f"{where}: region is not an object")
    try:
        bbox = obj["bbox"]
        label = obj["label"]
    except KeyError as e:
        raise DataError(f"{where}: region missing field {e.args[0]!r}") from None
    if not (isinstance(bbox, list) and len(bbox) == 4):
        raise DataError(f"{where}: bbox must be [x, y, w, h]")
    try:
        box = BBox(*(int(v) for v in bbox))
    except (TypeError, ValueError, DataError) as e:
        raise DataError(f"{where}: bad bbox {bbox}: {e}") from None
    text = obj.get("text")
    score = obj.get("score")
    if score is not None:
        score = float(score)
    try:
        return LabeledRegion(box, str(label), text, score)
    except DataError as e:
        raise DataError(f"{where}: {e}") from None


def _load_json(path) -> object:
    try:
        with open(path, "rb") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise DataError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from None
    except OSError as e:
        raise DataError(f"{path}: {e}") from None


def _dump_json(obj, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2)
        f.write("\n")


def manifest_to_json(m: Manifest) -> dict:
    return {
        "taxonomy": {"name": m.taxonomy.name, "labels": list(m.taxonomy.labels)},
        "docs": [
            {
                "doc_id": d.doc_id,
                "image": d.image_path,
                "page_w": d.page_w,
                "page_h": d.page_h,
                "regions": [_region_to_json(r) for r in d.regions],
            }
            for d in m.docs
        ],
        "split": m.split,
    }


def manifest_from_json(obj) -> Manifest:
    if not isinstance(obj, dict):
        raise DataError("manifest: top level is not an object")
    try:
        tax_obj = obj["taxonomy"]
        docs_obj = obj["docs"]
    except KeyError as e:
        raise DataError(f"manifest: missing field {e.args[0]!r}") from None
    name = tax_obj.get("name", "")
    labels = tax_obj.get("labels")
    if not isinstance(labels, list):
        raise DataError("manifest: taxonomy.labels must be a list")
    taxonomy = LabelTaxonomy(str(name), tuple(str(x) for x in labels))
    docs = []
    for d in docs_obj:
        try:
            doc_id = str(d["doc_id"])
        except (TypeError, KeyError):
            raise DataError("manifest: doc missing doc_id") from None
        where = f"doc {doc_id!r}"
        try:
            doc = AnnotatedDoc(
                doc_id=doc_id,
                image_path=str(d["image"]),
                page_w=int(d["page_w"]),
                page_h=int(d["page_h"]),
                regions=tuple(
                    _region_from_json(r, where) for r in d.get("regions", [])
                ),
            )
        except KeyError as e:
            raise DataError(f"{where}: missing field {e.args[0]!r}") from None
        docs.append(doc)
    split = obj.get("split")
    if split is not None:
        split = {str(k): str(v) for k, v in split.items()}
    m = Manifest(taxonomy, tuple(docs), split)
    m.validate()
    return m


def save_manifest(m: Manifest, path):
    m.validate()
    _dump_json(manifest_to_json(m), path)


def load_manifest(path) -> Manifest:
    return manifest_from_json(_load_json(path))


def save_detections(dets: dict[str, list[LabeledRegion]], path):
    """Write a detection file: per-doc region lists, score required."""
    for doc_id, regions in dets.items():
        for i, r in enumerate(regions):
            if r.score is None:
                raise DataError(f"doc {doc_id!r}: detection {i} has no score")
    obj = {
        "docs": [
            {"doc_id": doc_id, "regions": [_region_to_json(r) for r in regions]}
            for doc_id, regions in dets.items()
        ]
    }
    _dump_json(obj, path)


def load_detections(path) -> dict[str, list[LabeledRegion]]:
    obj = _load_json(path)
    if not isinstance(obj, dict) or "docs" not in obj:
        raise DataError(f"{path}: detection file must have a 'docs' list")
    out: dict[str, list[LabeledRegion]] = {}
    for d in obj["docs"]:
        try:
            doc_id = str(d["doc_id"])
        except (TypeError, KeyError):
            raise DataError(f"{path}: detection doc missing doc_id") from None
        if doc_id in out:
            raise DataError(f"{path}: duplicate detections for doc {doc_id!r}")
        regions = []
        for i, r in enumerate(d.get("regions", [])):
            reg = _region_from_json(r, f"doc {doc_id!r} detection {i}")
            if reg.score is None:
                raise DataError(f"doc {doc_id!r}: detection {i} has no score")
            regions.append(reg)
        out[doc_id] = regions
    return out


def validate_detections(dets: dict[str, list[LabeledRegion]], manifest: Manifest):
    """Check detections against a manifest: known docs, in-bounds boxes."""
    by_id = manifest.docs_by_id()
    for doc_id, regions in dets.items():
        if doc_id not in by_id:
            raise DataError(f"detections reference unknown doc_id {doc_id!r}")
        doc = by_id[doc_id]
        for i, r in enumerate(regions):
            if r.bbox.x2 > doc.page_w or r.bbox.y2 > doc.page_h:
                raise DataError(
                    f"doc {doc_id!r}: detection {i} bbox {r.bbox.as_list()} "
                    f"outside page {doc.page_w}x{doc.page_h}"
                )


def load_transcripts(path) -> dict[str, str]:
    """Region transcripts keyed by 'doc_id#region_idx'."""
    obj = _load_json(path)
    if not isinstance(obj, dict):
        raise DataError(f"{path}: transcript file must be an object")
    return {str(k): str(v) for k, v in obj.items()}


def attach_transcripts(
    dets: dict[str, list[LabeledRegion]], transcripts: dict[str, str]
) -> dict[str, list[LabeledRegion]]:
    """Return detections with text filled in from a transcript map."""
    out = {}
    for doc_id, regions in dets.items():
        out[doc_id] = [
            replace(r, text=transcripts.get(f"{doc_id}#{i}", r.text))
            for i, r in enumerate(regions)
        ]
    return out
