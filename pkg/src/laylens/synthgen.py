"""Deterministic synthetic document pages with exact ground truth.

Pages are rasterized natively: text is greeked, each character a filled
rectangle, so region boxes are tight by construction and the whole corpus
is a pure function of the config seed. Per-class word lexicons are pairwise
disjoint, which gives classifier tests a controllable separability dial.

Layout presets:
  source8            mixed-element pages over the 8 generic layout classes
  synthetic-invoice  logo / address / billing info / table / amount pages
  synthetic-resume   stacked section bands over the 6 resume classes
"""

from __future__ import annotations

import concurrent.futures
import os
from dataclasses import dataclass, field

import numpy as np

from .core import (
    INVOICE5,
    RESUME6,
    SOURCE8,
    AnnotatedDoc,
    BBox,
    DataError,
    LabeledRegion,
    LabelTaxonomy,
    Manifest,
    save_manifest,
)
from .raster import GrayImage, write_pgm
from .rng import RngStream

INK = 0

# ---------------------------------------------------------------------------
# Class lexicons. Pairwise disjoint across every class of every taxonomy;
# at least 20 words per class. Region text is drawn from these, so a
# bag-of-words classifier can in principle separate classes perfectly.

_LEXICONS: dict[tuple[str, str], tuple[str, ...]] = {
    ("source8", "Title"): (
        "prospectus", "almanac", "gazette", "compendium", "chronicle",
        "treatise", "yearbook", "digest", "anthology", "codex", "omnibus",
        "herald", "monograph", "quarterly", "gazetteer", "handbook",
        "primer", "opus", "volume", "edition",
    ),
    ("source8", "Heading"): (
        "chapter", "foreword", "preface", "prologue", "introduction",
        "background", "motivation", "scope", "rationale", "objectives",
        "findings", "methods", "discussion", "conclusion", "epilogue",
        "afterword", "appendix", "glossary", "overview", "synopsis",
    ),
    ("source8", "Sub-Heading"): (
        "subsection", "subtopic", "subpart", "addendum", "annex", "exhibit",
        "rider", "corollary", "lemma", "remark", "aside", "digression",
        "excursus", "tangent", "vignette", "interlude", "segue", "codicil",
        "proviso", "stipulation",
    ),
    ("source8", "Text Block"): (
        "lorem", "ipsum", "dolor", "amet", "consectetur", "adipiscing",
        "elit", "tempor", "incididunt", "labore", "dolore", "magna",
        "aliqua", "veniam", "nostrud", "ullamco", "laboris", "aliquip",
        "commodo", "duis",
    ),
    ("source8", "List"): (
        "firstly", "secondly", "thirdly", "fourthly", "fifthly", "sixthly",
        "seventhly", "eighthly", "ninthly", "tenthly", "itemized",
        "enumerated", "checklist", "roster", "agenda", "lineup", "sequence",
        "ordering", "ranked", "tiered",
    ),
    ("source8", "Table"): (
        "rowspan", "colspan", "gridline", "tabular", "matrix", "pivot",
        "quartile", "decile", "percentile", "median", "sigma", "kurtosis",
        "variance", "covariance", "quantile", "ordinal", "cardinal",
        "tally", "crosstab", "subcell",
    ),
    ("source8", "Image Content"): (
        "bitmap", "pixelmap", "halftone", "rasterized", "grayscale",
        "gradient", "contour", "silhouette", "montage", "collage",
        "panorama", "thumbnail", "snapshot", "exposure", "aperture",
        "focal", "framing", "composite", "overlay", "texture",
    ),
    ("source8", "Image/Table Caption"): (
        "figure", "plate", "illustration", "depicted", "shown", "pictured",
        "courtesy", "adapted", "reproduced", "annotated", "enlarged",
        "cropped", "scaled", "rendered", "drawn", "sketched", "plotted",
        "graphed", "labeled", "excerpted",
    ),
    ("invoice5", "Logo"): (
        "brandmark", "logotype", "emblem", "insignia", "crest", "monogram",
        "wordmark", "trademark", "seal", "badge", "sigil", "hallmark",
        "motif", "icon", "glyph", "banner", "masthead", "letterhead",
        "watermark", "stamp",
    ),
    ("invoice5", "Address"): (
        "street", "city", "zip", "avenue", "boulevard", "suite", "postal",
        "province", "county", "district", "lane", "road", "plaza", "floor",
        "building", "state", "country", "postcode", "locality", "township",
    ),
    ("invoice5", "Bill/Invoice Information"): (
        "invoice", "billing", "account", "reference", "purchase", "order",
        "terms", "issued", "number", "customer", "vendor", "client",
        "contract", "period", "cycle", "statement", "memo", "voucher",
        "receipt", "docket",
    ),
    ("invoice5", "Tables"): (
        "description", "quantity", "unit", "price", "rate", "hours", "qty",
        "sku", "product", "service", "catalog", "weight", "freight",
        "handling", "packaging", "shipment", "carton", "pallet", "batch",
        "lot",
    ),
    ("invoice5", "(Total) Amount Information"): (
        "total", "due", "tax", "subtotal", "balance", "payable", "grand",
        "sum", "amount", "currency", "usd", "eur", "remit", "payment",
        "paid", "outstanding", "net", "gross", "levy", "surcharge",
    ),
    ("resume6", "Education"): (
        "university", "college", "bachelor", "master", "doctorate", "phd",
        "gpa", "graduated", "degree", "major", "minor", "thesis",
        "coursework", "diploma", "academy", "institute", "semester",
        "honors", "scholarship", "alumnus",
    ),
    ("resume6", "Experience"): (
        "engineer", "manager", "developer", "analyst", "consultant",
        "intern", "director", "coordinator", "lead", "architect",
        "supervised", "managed", "developed", "implemented", "launched",
        "shipped", "maintained", "automated", "promoted", "mentored",
    ),
    ("resume6", "Bio"): (
        "name", "email", "phone", "linkedin", "github", "portfolio",
        "website", "contact", "mobile", "residence", "citizenship",
        "nationality", "birthdate", "pronouns", "headline", "handle",
        "profile", "alias", "username", "location",
    ),
    ("resume6", "Skills"): (
        "python", "java", "javascript", "sql", "excel", "photoshop",
        "kubernetes", "docker", "linux", "git", "tensorflow", "react",
        "nodejs", "typescript", "rust", "golang", "mongodb", "redis",
        "graphql", "bash",
    ),
    ("resume6", "Summary"): (
        "motivated", "passionate", "seasoned", "versatile", "proactive",
        "meticulous", "results", "driven", "dedicated", "accomplished",
        "dynamic", "strategic", "innovative", "collaborative", "adaptable",
        "enthusiastic", "reliable", "resourceful", "visionary", "pragmatic",
    ),
    ("resume6", "Other"): (
        "hobbies", "volunteering", "awards", "certifications", "languages",
        "interests", "references", "publications", "patents", "memberships",
        "affiliations", "clubs", "sports", "travel", "photography", "chess",
        "hiking", "reading", "music", "cooking",
    ),
}

# Short forms accepted by class_lexicon for the multi-word canonical labels.
_LABEL_ALIASES: dict[tuple[str, str], str] = {
    ("invoice5", "Amount"): "(Total) Amount Information",
    ("invoice5", "Bill"): "Bill/Invoice Information",
    ("invoice5", "Info"): "Bill/Invoice Information",
    ("source8", "Caption"): "Image/Table Caption",
    ("source8", "Image"): "Image Content",
    ("source8", "Text"): "Text Block",
}


def class_lexicon(label: str, taxonomy: str | None = None) -> tuple[str, ...]:
    """Fixed word list for a class; accepts 'taxonomy:Label' shorthand."""
    if taxonomy is None and ":" in label:
        taxonomy, label = label.split(":", 1)
    if taxonomy is not None:
        canon = _LABEL_ALIASES.get((taxonomy, label), label)
        try:
            return _LEXICONS[(taxonomy, canon)]
        except KeyError:
            raise DataError(f"unknown label {label!r} in taxonomy {taxonomy!r}") from None
    hits = [key for key in _LEXICONS if key[1] == label]
    if len(hits) != 1:
        raise DataError(f"unknown or ambiguous label {label!r}")
    return _LEXICONS[hits[0]]


# ---------------------------------------------------------------------------
# Styles and config


@dataclass(frozen=True)
class GreekedTextStyle:
    """Blob-text geometry: character cell sizes and the three gaps."""

    char_w: int
    char_h: int
    char_gap: int
    word_gap: int
    line_gap: int
    words_per_line: tuple[int, int] = (2, 4)
    lines: tuple[int, int] = (1, 1)

    def validate(self):
        for name in ("char_w", "char_h", "char_gap", "word_gap", "line_gap"):
            if getattr(self, name) < 1:
                raise DataError(f"style.{name} must be >= 1")
        if not (self.char_gap < self.word_gap < self.line_gap):
            raise DataError("need char_gap < word_gap < line_gap")
        for name in ("words_per_line", "lines"):
            lo, hi = getattr(self, name)
            if lo < 1 or lo > hi:
                raise DataError(f"style.{name} must be a range with 1 <= lo <= hi")

    def word_width(self, word: str) -> int:
        n = len(word)
        return n * self.char_w + (n - 1) * self.char_gap

    def line_width(self, words: list[str]) -> int:
        if not words:
            return 0
        return sum(self.word_width(w) for w in words) + (len(words) - 1) * self.word_gap

    def text_height(self, n_lines: int) -> int:
        return n_lines * self.char_h + (n_lines - 1) * self.line_gap

    @property
    def line_pitch(self) -> int:
        return self.char_h + self.line_gap


_DEFAULT_MIX = {
    "Title": 0.06,
    "Heading": 0.10,
    "Sub-Heading": 0.08,
    "Text Block": 0.38,
    "List": 0.12,
    "Table": 0.10,
    "Image Content": 0.08,
    "Image/Table Caption": 0.08,
}

# Glyph scale multipliers for the display classes.
_CLASS_SCALE = {"Title": 2.0, "Heading": 1.6, "Sub-Heading": 1.3}


@dataclass
class GenConfig:
    """Everything the generator needs; corpora are pure functions of this.

    The default glyph geometry (24 px character pitch, 36 px word-boundary
    pitch, 40 px line pitch) keeps the three nearest-neighbor spacing peaks
    far enough apart to survive a 2 px histogram with 5-bin smoothing, and
    keeps diagonal neighbors closer than second-order horizontal ones so
    they drop out of both axis histograms.
    """

    seed: int = 0
    n_docs: int = 1
    preset: str = "source8"
    page_sizes: tuple = ((620, 877), (827, 1169), (1240, 1754))
    two_column_prob: float = 0.25
    margin: int = 40
    gutter: int = 64
    char_w: tuple[int, int] = (16, 16)
    char_h: tuple[int, int] = (19, 19)
    char_gap: int = 8
    word_gap: int = 20
    line_gap: int = 21
    block_gap: int | None = None  # inter-element gap; defaults to 3 * line_gap
    jitter_x: int = 0
    jitter_y: int = 0
    class_mix: dict[str, float] = field(default_factory=lambda: dict(_DEFAULT_MIX))
    max_elements: int | None = None
    test_fraction: float = 0.0

    def validate(self):
        if self.preset not in _PAGE_BUILDERS:
            raise DataError(f"unknown preset {self.preset!r}")
        if not self.page_sizes:
            raise DataError("page_sizes must be non-empty")
        for pw, ph in self.page_sizes:
            if pw < 64 or ph < 64:
                raise DataError(f"page size {pw}x{ph} too small")
        if not (0.0 <= self.two_column_prob <= 1.0):
            raise DataError("two_column_prob outside [0, 1]")
        if not (0.0 <= self.test_fraction <= 1.0):
            raise DataError("test_fraction outside [0, 1]")
        for name in ("char_gap", "word_gap", "line_gap"):
            if getattr(self, name) < 1:
                raise DataError(f"{name} must be >= 1")
        if not (self.char_gap < self.word_gap < self.line_gap):
            raise DataError("need char_gap < word_gap < line_gap")
        for name in ("char_w", "char_h"):
            lo, hi = getattr(self, name)
            if lo < 1 or lo > hi:
                raise DataError(f"{name} must be a range with 1 <= lo <= hi")
        if self.margin < 0 or self.gutter < 1:
            raise DataError("bad margin/gutter")
        if self.jitter_x < 0 or self.jitter_y < 0:
            raise DataError("jitter amplitudes must be >= 0")
        for label, p in self.class_mix.items():
            if not (0.0 <= p <= 1.0):
                raise DataError(f"class_mix[{label!r}] outside [0, 1]")
        if self.preset == "source8" and sum(self.class_mix.values()) <= 0:
            raise DataError("class_mix has no positive weight")

    @property
    def element_gap(self) -> int:
        return 3 * self.line_gap if self.block_gap is None else self.block_gap

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "n_docs": self.n_docs,
            "preset": self.preset,
            "page_sizes": [list(p) for p in self.page_sizes],
            "two_column_prob": self.two_column_prob,
            "margin": self.margin,
            "gutter": self.gutter,
            "char_w": list(self.char_w),
            "char_h": list(self.char_h),
            "char_gap": self.char_gap,
            "word_gap": self.word_gap,
            "line_gap": self.line_gap,
            "block_gap": self.block_gap,
            "jitter_x": self.jitter_x,
            "jitter_y": self.jitter_y,
            "class_mix": self.class_mix,
            "max_elements": self.max_elements,
            "test_fraction": self.test_fraction,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GenConfig":
        cfg = cls()
        for key, value in obj.items():
            if not hasattr(cfg, key):
                raise DataError(f"unknown GenConfig field {key!r}")
            if key == "page_sizes":
                value = tuple((int(w), int(h)) for w, h in value)
            elif key in ("char_w", "char_h"):
                value = (int(value[0]), int(value[1]))
            setattr(cfg, key, value)
        return cfg


def preset_config(preset: str, **overrides) -> GenConfig:
    """A GenConfig tuned for one of the three layout presets."""
    if preset == "source8":
        cfg = GenConfig()
    elif preset in ("synthetic-invoice", "synthetic-resume"):
        # Target-domain pages use finer print-like glyphs; Docstrum quality
        # is not a goal there, only the few-shot protocol.
        cfg = GenConfig(
            preset=preset,
            page_sizes=((620, 877),),
            two_column_prob=0.0,
            margin=36,
            char_w=(6, 6),
            char_h=(8, 8),
            char_gap=2,
            word_gap=5,
            line_gap=7,
            jitter_x=6,
            jitter_y=4,
        )
    else:
        raise DataError(f"unknown preset {preset!r}")
    for key, value in overrides.items():
        if not hasattr(cfg, key):
            raise DataError(f"unknown GenConfig field {key!r}")
        setattr(cfg, key, value)
    cfg.preset = preset
    return cfg


def taxonomy_for_preset(preset: str) -> LabelTaxonomy:
    try:
        return {
            "source8": SOURCE8,
            "synthetic-invoice": INVOICE5,
            "synthetic-resume": RESUME6,
        }[preset]
    except KeyError:
        raise DataError(f"unknown preset {preset!r}") from None


# ---------------------------------------------------------------------------
# Rendering primitives


def fill_rect(img: GrayImage, x: int, y: int, w: int, h: int, value: int = INK):
    img.pixels[y : y + h, x : x + w] = value


def _plan_line(rng: RngStream, lexicon, style: GreekedTextStyle, max_width: int) -> list[str]:
    """Pick words for one line; always at least one (truncated if needed)."""
    target = rng.uniform(*style.words_per_line)
    words: list[str] = []
    width = 0
    while len(words) < target:
        word = rng.choice(lexicon)
        ww = style.word_width(word)
        if not words:
            if ww > max_width:
                max_chars = (max_width + style.char_gap) // (style.char_w + style.char_gap)
                word = word[: max(1, max_chars)]
                ww = style.word_width(word)
            words.append(word)
            width = ww
            continue
        if width + style.word_gap + ww > max_width:
            break
        words.append(word)
        width += style.word_gap + ww
    return words


def _paint_lines(img: GrayImage, x0: int, y0: int, style: GreekedTextStyle,
                 plan: list[list[str]]) -> BBox:
    """Rasterize planned lines as character blobs; returns the tight bbox."""
    widest = 0
    for i, words in enumerate(plan):
        x = x0
        y = y0 + i * style.line_pitch
        for wi, word in enumerate(words):
            if wi:
                x += style.word_gap
            for ci in range(len(word)):
                if ci:
                    x += style.char_gap
                fill_rect(img, x, y, style.char_w, style.char_h)
                x += style.char_w
        widest = max(widest, x - x0)
    return BBox(x0, y0, widest, style.text_height(len(plan)))


def render_greeked_text(img: GrayImage, origin: tuple[int, int],
                        style: GreekedTextStyle, rng: RngStream, lexicon,
                        max_width: int | None = None,
                        n_lines: int | None = None) -> tuple[BBox, list[str]]:
    """Greeked paragraph at origin; returns (tight bbox, words used)."""
    if n_lines is None:
        n_lines = rng.uniform(*style.lines)
    limit = max_width if max_width is not None else 1 << 30
    plan = [_plan_line(rng, lexicon, style, limit) for _ in range(n_lines)]
    bbox = _paint_lines(img, origin[0], origin[1], style, plan)
    return bbox, [w for line in plan for w in line]


def render_table(img: GrayImage, origin: tuple[int, int], style: GreekedTextStyle,
                 rng: RngStream, lexicon, rows: int, cols: int,
                 max_width: int) -> tuple[BBox, list[str]]:
    """Ruled grid with one greeked word per cell; bbox is the outer rule rect."""
    pad = 3
    cell_w = max((max_width - (cols + 1)) // cols, style.char_w + 2 * pad)
    cell_h = style.char_h + 2 * pad
    x0, y0 = origin
    total_w = cols * (cell_w + 1) + 1
    total_h = rows * (cell_h + 1) + 1
    for r in range(rows + 1):
        fill_rect(img, x0, y0 + r * (cell_h + 1), total_w, 1)
    for c in range(cols + 1):
        fill_rect(img, x0 + c * (cell_w + 1), y0, 1, total_h)
    words = []
    max_chars = (cell_w - 2 * pad + style.char_gap) // (style.char_w + style.char_gap)
    for r in range(rows):
        for c in range(cols):
            word = rng.choice(lexicon)[: max(1, max_chars)]
            _paint_lines(
                img,
                x0 + c * (cell_w + 1) + 1 + pad,
                y0 + r * (cell_h + 1) + 1 + pad,
                style,
                [[word]],
            )
            words.append(word)
    return BBox(x0, y0, total_w, total_h), words


def render_list(img: GrayImage, origin: tuple[int, int], style: GreekedTextStyle,
                rng: RngStream, lexicon, n_items: int,
                max_width: int) -> tuple[BBox, list[str]]:
    """Bulleted items: a filled square plus one indented greeked line each."""
    side = max(3, style.char_h // 2)
    indent = side + style.word_gap
    x0, y0 = origin
    right = x0 + indent
    words_all: list[str] = []
    for i in range(n_items):
        y = y0 + i * style.line_pitch
        fill_rect(img, x0, y + (style.char_h - side) // 2, side, side)
        words = _plan_line(rng, lexicon, style, max_width - indent)
        line_box = _paint_lines(img, x0 + indent, y, style, [words])
        right = max(right, line_box.x2)
        words_all.extend(words)
    return BBox(x0, y0, right - x0, style.text_height(n_items)), words_all


def render_image_block(img: GrayImage, origin: tuple[int, int], w: int, h: int,
                       hatch_step: int = 9) -> BBox:
    """1 px border plus diagonal hatch fill; no ink outside the bbox."""
    x, y = origin
    sub = img.pixels[y : y + h, x : x + w]
    diag = (np.arange(h)[:, None] + np.arange(w)[None, :]) % hatch_step == 0
    sub[diag] = INK
    sub[0, :] = INK
    sub[-1, :] = INK
    sub[:, 0] = INK
    sub[:, -1] = INK
    return BBox(x, y, w, h)


def render_caption(img: GrayImage, y: int, parent_x: int, parent_w: int,
                   style: GreekedTextStyle, rng: RngStream, lexicon,
                   col_x: int, col_w: int) -> tuple[BBox, list[str]]:
    """One short greeked line centered under a parent element."""
    words = _plan_line(rng, lexicon, style, col_w)
    width = style.line_width(words)
    x = parent_x + (parent_w - width) // 2
    x = max(col_x, min(x, col_x + col_w - width))
    bbox = _paint_lines(img, x, y, style, [words])
    return bbox, words


# ---------------------------------------------------------------------------
# Page builders


def _style(cfg: GenConfig, rng: RngStream, scale: float = 1.0,
           words=(2, 4), lines=(1, 1)) -> GreekedTextStyle:
    cw = rng.uniform(*cfg.char_w)
    ch = rng.uniform(*cfg.char_h)
    return GreekedTextStyle(
        char_w=max(2, round(cw * scale)),
        char_h=max(2, round(ch * scale)),
        char_gap=cfg.char_gap,
        word_gap=cfg.word_gap,
        line_gap=cfg.line_gap,
        words_per_line=words,
        lines=lines,
    )


def _region(bbox: BBox, label: str, words: list[str]) -> LabeledRegion:
    return LabeledRegion(bbox, label, " ".join(words) if words else None)


def _render_source8_element(cfg, img, rng, label, x, y, col_w, avail_h):
    """Render one element; returns (region, last_visual) or None if no fit."""
    lex = class_lexicon(label, "source8")
    if label in ("Title", "Heading", "Sub-Heading"):
        style = _style(cfg, rng, _CLASS_SCALE[label], words=(1, 3))
        if style.char_h > avail_h:
            return None
        bbox, words = render_greeked_text(img, (x, y), style, rng, lex, col_w)
        return _region(bbox, label, words), None
    if label == "Text Block":
        style = _style(cfg, rng, 1.0, words=(2, 5), lines=(3, 6))
        n = rng.uniform(*style.lines)
        n = min(n, (avail_h + style.line_gap) // style.line_pitch)
        if n < 1:
            return None
        bbox, words = render_greeked_text(img, (x, y), style, rng, lex, col_w, n_lines=n)
        return _region(bbox, label, words), None
    if label == "List":
        style = _style(cfg, rng, 1.0, words=(1, 3))
        n = rng.uniform(2, 5)
        n = min(n, (avail_h + style.line_gap) // style.line_pitch)
        if n < 1:
            return None
        bbox, words = render_list(img, (x, y), style, rng, lex, n, col_w)
        return _region(bbox, label, words), None
    if label == "Table":
        style = _style(cfg, rng, 1.0)
        rows = rng.uniform(2, 5)
        cols = rng.uniform(2, min(4, max(2, col_w // (6 * style.char_w))))
        cell_h = style.char_h + 6
        rows = min(rows, (avail_h - 1) // (cell_h + 1))
        if rows < 1:
            return None
        bbox, words = render_table(img, (x, y), style, rng, lex, rows, cols, col_w)
        return _region(bbox, label, words), (bbox.x, bbox.w)
    if label == "Image Content":
        w = rng.uniform(max(24, col_w * 3 // 5), col_w)
        h = rng.uniform(60, 180)
        h = min(h, avail_h)
        if h < 24:
            return None
        bbox = render_image_block(img, (x, y), w, h)
        return _region(bbox, label, []), (bbox.x, bbox.w)
    if label == "Image/Table Caption":
        style = _style(cfg, rng, 1.0, words=(2, 4))
        if style.char_h > avail_h:
            return None
        bbox, words = render_caption(img, y, x, col_w, style, rng, lex, x, col_w)
        return _region(bbox, label, words), None
    raise DataError(f"no renderer for label {label!r}")


def _build_source8_page(cfg: GenConfig, rng: RngStream):
    pw, ph = rng.choice(cfg.page_sizes)
    img = GrayImage.blank(pw, ph)
    ncols = 2 if rng.chance(cfg.two_column_prob) else 1
    col_w = (pw - 2 * cfg.margin - (ncols - 1) * cfg.gutter) // ncols
    labels = list(SOURCE8.labels)
    weights = [cfg.class_mix.get(l, 0.0) for l in labels]
    regions: list[LabeledRegion] = []
    last_visual = None
    total = 0
    for c in range(ncols):
        col_x = cfg.margin + c * (col_w + cfg.gutter)
        y = cfg.margin
        while y < ph - cfg.margin:
            if cfg.max_elements is not None and total >= cfg.max_elements:
                break
            avail_h = ph - cfg.margin - y
            label = rng.weighted_choice(labels, weights)
            jx = rng.uniform(0, cfg.jitter_x) if cfg.jitter_x else 0
            jx = min(jx, max(0, col_w // 8))
            if label == "Image/Table Caption" and last_visual is not None:
                px, pws = last_visual
                lex = class_lexicon(label, "source8")
                style = _style(cfg, rng, 1.0, words=(2, 4))
                if style.char_h > avail_h:
                    break
                bbox, words = render_caption(
                    img, y, px, pws, style, rng, lex, col_x, col_w
                )
                rendered = (_region(bbox, label, words), None)
            else:
                rendered = _render_source8_element(
                    cfg, img, rng, label, col_x + jx, y, col_w - jx, avail_h
                )
            if rendered is None:
                break
            region, visual = rendered
            regions.append(region)
            last_visual = visual if visual is not None else last_visual
            total += 1
            y = region.bbox.y2 + cfg.element_gap
            if cfg.jitter_y:
                y += rng.uniform(0, cfg.jitter_y)
        last_visual = None
    return img, regions, (pw, ph)


def _build_invoice_page(cfg: GenConfig, rng: RngStream):
    pw, ph = rng.choice(cfg.page_sizes)
    img = GrayImage.blank(pw, ph)
    m = cfg.margin
    usable = pw - 2 * m
    jx = lambda: rng.uniform(0, cfg.jitter_x) if cfg.jitter_x else 0
    jy = lambda: rng.uniform(0, cfg.jitter_y) if cfg.jitter_y else 0
    gap = cfg.element_gap
    regions = []

    logo = render_image_block(
        img, (m + jx(), m + jy()), rng.uniform(90, 150), rng.uniform(50, 80)
    )
    regions.append(_region(logo, "Logo", []))

    addr_style = _style(cfg, rng, 1.0, words=(1, 3))
    addr_lines = rng.uniform(3, 4)
    addr_plan = [
        _plan_line(rng, class_lexicon("Address", "invoice5"), addr_style, usable // 3)
        for _ in range(addr_lines)
    ]
    addr_w = max(addr_style.line_width(p) for p in addr_plan)
    addr_box = _paint_lines(
        img, pw - m - addr_w - jx(), m + jy(), addr_style, addr_plan
    )
    regions.append(_region(addr_box, "Address", [w for p in addr_plan for w in p]))

    info_style = _style(cfg, rng, 1.0, words=(2, 4))
    info_box, info_words = render_greeked_text(
        img,
        (m + jx(), max(logo.y2, addr_box.y2) + gap + jy()),
        info_style,
        rng,
        class_lexicon("Bill", "invoice5"),
        usable // 2,
        n_lines=rng.uniform(2, 4),
    )
    regions.append(_region(info_box, "Bill/Invoice Information", info_words))

    table_style = _style(cfg, rng, 1.0)
    table_box, table_words = render_table(
        img,
        (m + jx(), info_box.y2 + gap + jy()),
        table_style,
        rng,
        class_lexicon("Tables", "invoice5"),
        rng.uniform(3, 7),
        rng.uniform(3, 5),
        usable,
    )
    regions.append(_region(table_box, "Tables", table_words))

    amt_style = _style(cfg, rng, 1.0, words=(2, 3))
    amt_lines = rng.uniform(1, 2)
    amt_plan = [
        _plan_line(rng, class_lexicon("Amount", "invoice5"), amt_style, usable // 3)
        for _ in range(amt_lines)
    ]
    amt_w = max(amt_style.line_width(p) for p in amt_plan)
    amt_box = _paint_lines(
        img, pw - m - amt_w - jx(), table_box.y2 + gap + jy(), amt_style, amt_plan
    )
    regions.append(_region(amt_box, "(Total) Amount Information",
                           [w for p in amt_plan for w in p]))
    return img, regions, (pw, ph)


def _build_resume_page(cfg: GenConfig, rng: RngStream):
    pw, ph = rng.choice(cfg.page_sizes)
    img = GrayImage.blank(pw, ph)
    m = cfg.margin
    usable = pw - 2 * m
    gap = cfg.element_gap
    bands = [
        ("Bio", (1, 3), (2, 3)),
        ("Summary", (3, 5), (2, 3)),
        ("Experience", (3, 5), (3, 6)),
        ("Education", (2, 4), (2, 4)),
        ("Skills", (3, 6), (2, 3)),
        ("Other", (2, 4), (1, 2)),
    ]
    regions = []
    y = m
    for label, words, lines in bands:
        style = _style(cfg, rng, 1.0, words=words)
        n = rng.uniform(*lines)
        jx = rng.uniform(0, cfg.jitter_x) if cfg.jitter_x else 0
        bbox, got = render_greeked_text(
            img, (m + jx, y), style, rng,
            class_lexicon(label, "resume6"), usable - jx, n_lines=n,
        )
        regions.append(_region(bbox, label, got))
        y = bbox.y2 + gap
        if cfg.jitter_y:
            y += rng.uniform(0, cfg.jitter_y)
    return img, regions, (pw, ph)


_PAGE_BUILDERS = {
    "source8": _build_source8_page,
    "synthetic-invoice": _build_invoice_page,
    "synthetic-resume": _build_resume_page,
}


# ---------------------------------------------------------------------------
# Corpus generation


def build_page(cfg: GenConfig, doc_index: int):
    """One page, independent of any other: rng state is seed XOR doc index."""
    rng = RngStream(cfg.seed ^ doc_index)
    img, regions, (pw, ph) = _PAGE_BUILDERS[cfg.preset](cfg, rng)
    doc = AnnotatedDoc(
        doc_id=f"doc_{doc_index:06d}",
        image_path=f"images/doc_{doc_index:06d}.pgm",
        page_w=pw,
        page_h=ph,
        regions=tuple(regions),
    )
    return img, doc


def generate_corpus(cfg: GenConfig, out_dir, jobs: int = 1) -> Manifest:
    """Write n_docs PGM pages plus manifest.json under out_dir.

    Output bytes depend only on cfg, not on jobs: every page derives its
    own rng from (seed XOR doc index) and results are assembled in order.
    """
    cfg.validate()
    if cfg.n_docs < 1:
        raise DataError(f"n_docs must be >= 1, got {cfg.n_docs}")
    images_dir = os.path.join(out_dir, "images")
    os.makedirs(images_dir, exist_ok=True)

    def job(i: int) -> AnnotatedDoc:
        img, doc = build_page(cfg, i)
        write_pgm(img, os.path.join(out_dir, doc.image_path))
        return doc

    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            docs = list(pool.map(job, range(cfg.n_docs)))
    else:
        docs = [job(i) for i in range(cfg.n_docs)]

    split = None
    if cfg.test_fraction > 0:
        n_test = int(cfg.n_docs * cfg.test_fraction + 0.5)
        n_train = cfg.n_docs - n_test
        split = {
            d.doc_id: ("train" if i < n_train else "test")
            for i, d in enumerate(docs)
        }
    manifest = Manifest(taxonomy_for_preset(cfg.preset), tuple(docs), split)
    save_manifest(manifest, os.path.join(out_dir, "manifest.json"))
    return manifest
