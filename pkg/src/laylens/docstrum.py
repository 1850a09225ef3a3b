"""Bottom-up page segmentation from connected-component spacing statistics.

Pipeline: binarize, label components, build an exact K-nearest-neighbor
graph over their centroids, estimate page skew from the edge-angle
histogram, read character / word / line spacings off smoothed distance
histograms, then group components into lines and lines into blocks.

Skew is handled by rotating centroid coordinates analytically; image
pixels are never resampled. When the spacing estimates are unusable the
pipeline degrades to one box per component so it stays a total function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import FOREGROUND, BBox, DataError, LabeledRegion
from .raster import Component, GrayImage, binarize, connected_components


class SpacingFailure(Exception):
    """Spacing histograms unusable (e.g. a page with a single text line)."""


@dataclass(frozen=True)
class DocstrumParams:
    """All the knobs; every tolerance is deliberately overridable."""

    k: int = 5
    min_pixels: int = 3
    hist_bin_px: float = 2.0
    smooth_window_bins: int = 5
    angle_tol_deg: float = 20.0
    word_tol: float = 1.3
    line_merge_parallel_tol: float = 1.5
    line_merge_perp_tol: float = 1.3
    min_overlap_frac: float = 0.0

    def validate(self):
        for name in ("k", "min_pixels", "hist_bin_px", "smooth_window_bins",
                     "angle_tol_deg", "word_tol", "line_merge_parallel_tol",
                     "line_merge_perp_tol"):
            if getattr(self, name) <= 0:
                raise DataError(f"DocstrumParams.{name} must be positive")
        if self.smooth_window_bins % 2 != 1:
            raise DataError("smooth_window_bins must be odd")
        if self.min_overlap_frac < 0:
            raise DataError("min_overlap_frac must be >= 0")

    @classmethod
    def from_json(cls, obj: dict) -> "DocstrumParams":
        known = {f for f in cls.__dataclass_fields__}
        bad = set(obj) - known
        if bad:
            raise DataError(f"unknown DocstrumParams field(s): {sorted(bad)}")
        p = cls(**obj)
        p.validate()
        return p


@dataclass(frozen=True)
class Edge:
    """Directed K-NN edge to component `j` at `dist` px and folded angle."""

    j: int
    dist: float
    angle_deg: float


@dataclass
class ComponentGraph:
    components: list[Component]
    neighbors: list[list[Edge]]

    @property
    def degenerate(self) -> bool:
        """Fewer than two components: no geometry to estimate from."""
        return len(self.components) < 2


@dataclass(frozen=True)
class SpacingEstimates:
    skew_deg: float
    char_spacing: float
    word_spacing: float
    line_spacing: float

    @property
    def usable(self) -> bool:
        return self.char_spacing <= self.word_spacing < self.line_spacing


@dataclass(frozen=True)
class Line:
    """A component group with its original-space bbox and deskewed stats."""

    comp_indices: tuple[int, ...]
    bbox: BBox
    cy: float          # deskewed mean centroid y
    x0: float          # deskewed centroid extent
    x1: float
    angle_deg: float   # least-squares direction in deskewed space


def fold_angle(deg: float) -> float:
    """Fold an angle to [-90, 90); line directions are 180-degree periodic."""
    return (deg + 90.0) % 180.0 - 90.0


def angle_delta(a: float, b: float) -> float:
    """Signed angular difference a - b on the folded line, in [-90, 90)."""
    return fold_angle(a - b)


def _edge(i_pt, j, j_pt, dist_sq) -> Edge:
    ang = fold_angle(math.degrees(math.atan2(j_pt[1] - i_pt[1], j_pt[0] - i_pt[0])))
    return Edge(j, math.sqrt(dist_sq), ang)


def build_knn_graph(components: list[Component], k: int = 5) -> ComponentGraph:
    """Exact K nearest neighbors by centroid distance, ties by (dist, id).

    Uses a uniform-grid spatial index with expanding ring search; the ring
    bound guarantees the result equals the brute-force answer, ties
    included.
    """
    n = len(components)
    if n < 2:
        return ComponentGraph(list(components), [[] for _ in range(n)])
    pts = [c.centroid for c in components]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    minx, maxx = min(xs), max(xs)
    miny, maxy = min(ys), max(ys)
    span_x = max(maxx - minx, 1.0)
    span_y = max(maxy - miny, 1.0)
    cell = max(1.0, math.sqrt(span_x * span_y / n))
    cells: dict[tuple[int, int], list[int]] = {}
    coords = []
    for i, (x, y) in enumerate(pts):
        cx = int((x - minx) / cell)
        cy = int((y - miny) / cell)
        coords.append((cx, cy))
        cells.setdefault((cx, cy), []).append(i)
    max_cx = max(c[0] for c in coords)
    max_cy = max(c[1] for c in coords)
    k_eff = min(k, n - 1)

    neighbors: list[list[Edge]] = []
    for i, (x, y) in enumerate(pts):
        ci, cj = coords[i]
        cands: list[tuple[float, int]] = []
        r = 0
        while True:
            lo_x, hi_x = ci - r, ci + r
            lo_y, hi_y = cj - r, cj + r
            for gx in range(lo_x, hi_x + 1):
                for gy in range(lo_y, hi_y + 1):
                    if r > 0 and lo_x < gx < hi_x and lo_y < gy < hi_y:
                        continue  # interior cells were already visited
                    for j in cells.get((gx, gy), ()):
                        if j != i:
                            dx = pts[j][0] - x
                            dy = pts[j][1] - y
                            cands.append((dx * dx + dy * dy, j))
            if len(cands) >= k_eff:
                cands.sort(key=lambda t: (t[0], t[1]))
                kth = math.sqrt(cands[k_eff - 1][0])
                # any point beyond ring r is at least r*cell away; strict
                # inequality keeps ties-by-id exact
                if r * cell > kth:
                    break
            if lo_x <= 0 and lo_y <= 0 and hi_x >= max_cx and hi_y >= max_cy:
                cands.sort(key=lambda t: (t[0], t[1]))
                break
            r += 1
        neighbors.append([_edge(pts[i], j, pts[j], dq) for dq, j in cands[:k_eff]])
    return ComponentGraph(list(components), neighbors)


def estimate_skew(graph: ComponentGraph, smooth_window_bins: int = 5) -> float:
    """Mode of the 1-degree edge-angle histogram, as the page skew.

    The histogram is circularly smoothed (angles are 180-periodic) with the
    same window the spacing histograms use, and the returned value is the
    mean of the raw angles in the winning bin, so a two-component page
    returns its single edge angle exactly.
    """
    angles = [e.angle_deg for edges in graph.neighbors for e in edges]
    if not angles:
        raise DataError("estimate_skew needs a non-empty graph")
    nbins = 180
    hist = [0] * nbins
    for a in angles:
        hist[int(math.floor(a)) + 90] += 1
    half = smooth_window_bins // 2
    smooth = [
        sum(hist[(i + d) % nbins] for d in range(-half, half + 1)) for i in range(nbins)
    ]
    mode = smooth.index(max(smooth))
    in_bin = [a for a in angles if int(math.floor(a)) + 90 == mode]
    if not in_bin:  # mode bin emptied by smoothing spill; fall back to center
        return float(mode - 90) + 0.5
    return sum(in_bin) / len(in_bin)


def _smoothed(hist: list[float], window: int) -> list[float]:
    half = window // 2
    n = len(hist)
    out = []
    for i in range(n):
        lo = max(0, i - half)
        hi = min(n, i + half + 1)
        out.append(sum(hist[lo:hi]) / window)  # zero-padded at the borders
    return out


def _peak_centers(smooth: list[float], bin_px: float) -> list[float]:
    """Centers of plateau-aware local maxima, in ascending distance order."""
    peaks = []
    n = len(smooth)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and smooth[j + 1] == smooth[i]:
            j += 1
        val = smooth[i]
        left = smooth[i - 1] if i > 0 else -1.0
        right = smooth[j + 1] if j + 1 < n else -1.0
        if val > 0 and val > left and val > right:
            peaks.append(((i + j) // 2 + 0.5) * bin_px)
        i = j + 1
    return peaks


def _distance_histogram(dists: list[float], bin_px: float) -> list[float]:
    hist = [0.0] * (int(max(dists) / bin_px) + 1)
    for d in dists:
        hist[int(d / bin_px)] += 1.0
    return hist


def estimate_spacings(
    graph: ComponentGraph, params: DocstrumParams, skew_deg: float = 0.0
) -> SpacingEstimates:
    """Character, word and line spacing off the two NN distance histograms.

    Near-horizontal edges (within angle_tol of the skew direction) feed the
    character/word histogram, near-vertical ones the line histogram. Each
    is binned at hist_bin_px, smoothed by a centered moving average, and
    read through plateau-aware local maxima: the first peak is the
    character spacing, the next strictly-greater peak the word spacing
    (with a word_tol * char * 2 fallback), and the first vertical peak the
    line spacing.
    """
    tol = params.angle_tol_deg
    horiz: list[float] = []
    vert: list[float] = []
    for edges in graph.neighbors:
        for e in edges:
            d = abs(angle_delta(e.angle_deg, skew_deg))
            if d <= tol:
                horiz.append(e.dist)
            elif 90.0 - d <= tol:
                vert.append(e.dist)
    if not horiz:
        raise SpacingFailure("no near-horizontal neighbor edges")
    if not vert:
        raise SpacingFailure("no near-vertical neighbor edges")

    bin_px = params.hist_bin_px
    window = params.smooth_window_bins
    h_peaks = _peak_centers(_smoothed(_distance_histogram(horiz, bin_px), window), bin_px)
    v_peaks = _peak_centers(_smoothed(_distance_histogram(vert, bin_px), window), bin_px)
    if not h_peaks or not v_peaks:
        raise SpacingFailure("spacing histogram has no peak")
    char = h_peaks[0]
    word = next((p for p in h_peaks if p > char), params.word_tol * char * 2)
    line = v_peaks[0]
    return SpacingEstimates(skew_deg, char, word, line)


def _rotate(pts, deg: float, center: tuple[float, float]):
    t = math.radians(deg)
    c, s = math.cos(t), math.sin(t)
    cx, cy = center
    return [
        (cx + c * (x - cx) - s * (y - cy), cy + s * (x - cx) + c * (y - cy))
        for x, y in pts
    ]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        p = self.parent
        while p[a] != a:
            p[a] = p[p[a]]
            a = p[a]
        return a

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def _fit_angle(pts) -> float:
    """Least-squares direction of a point set, degrees in [-90, 90)."""
    n = len(pts)
    if n < 2:
        return 0.0
    mx = sum(p[0] for p in pts) / n
    my = sum(p[1] for p in pts) / n
    sxx = sum((p[0] - mx) ** 2 for p in pts)
    sxy = sum((p[0] - mx) * (p[1] - my) for p in pts)
    if sxx < 1e-12:
        return 0.0 if abs(sxy) < 1e-12 else fold_angle(90.0)
    return fold_angle(math.degrees(math.atan(sxy / sxx)))


def build_lines(
    graph: ComponentGraph,
    spacings: SpacingEstimates,
    params: DocstrumParams,
    center: tuple[float, float] | None = None,
) -> list[Line]:
    """Transitive closure over near-horizontal edges within word reach."""
    comps = graph.components
    n = len(comps)
    pts = [c.centroid for c in comps]
    if center is None:
        center = (
            sum(p[0] for p in pts) / n,
            sum(p[1] for p in pts) / n,
        )
    deskewed = _rotate(pts, -spacings.skew_deg, center)
    reach = params.word_tol * spacings.word_spacing
    uf = _UnionFind(n)
    for i, edges in enumerate(graph.neighbors):
        for e in edges:
            if e.dist <= reach and abs(angle_delta(e.angle_deg, spacings.skew_deg)) <= params.angle_tol_deg:
                uf.union(i, e.j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(uf.find(i), []).append(i)
    lines = []
    for members in groups.values():
        bbox = comps[members[0]].bbox
        for m in members[1:]:
            bbox = bbox.union(comps[m].bbox)
        ds = [deskewed[m] for m in members]
        lines.append(
            Line(
                comp_indices=tuple(members),
                bbox=bbox,
                cy=sum(p[1] for p in ds) / len(ds),
                x0=min(p[0] for p in ds),
                x1=max(p[0] for p in ds),
                angle_deg=_fit_angle(ds),
            )
        )
    lines.sort(key=lambda l: (l.bbox.y, l.bbox.x))
    return lines


def _lines_mergeable(a: Line, b: Line, spacings: SpacingEstimates,
                     params: DocstrumParams) -> bool:
    if abs(a.cy - b.cy) > params.line_merge_perp_tol * spacings.line_spacing:
        return False
    overlap = min(a.x1, b.x1) - max(a.x0, b.x0)
    gap = max(0.0, -overlap)
    if gap > params.line_merge_parallel_tol * spacings.word_spacing:
        return False
    shorter = min(a.x1 - a.x0, b.x1 - b.x0)
    frac = (max(0.0, overlap) / shorter) if shorter > 0 else (1.0 if overlap >= 0 else 0.0)
    if frac < params.min_overlap_frac:
        return False
    return abs(angle_delta(a.angle_deg, b.angle_deg)) <= params.angle_tol_deg


def build_blocks(lines: list[Line], spacings: SpacingEstimates,
                 params: DocstrumParams) -> list[BBox]:
    """Merge lines into blocks by perpendicular gap, overlap and angle."""
    n = len(lines)
    if n == 0:
        return []
    uf = _UnionFind(n)
    for i in range(n):
        for j in range(i + 1, n):
            if _lines_mergeable(lines[i], lines[j], spacings, params):
                uf.union(i, j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(uf.find(i), []).append(i)
    blocks = []
    for members in groups.values():
        bbox = lines[members[0]].bbox
        for m in members[1:]:
            bbox = bbox.union(lines[m].bbox)
        blocks.append(bbox)
    blocks.sort(key=lambda b: (b.y, b.x))
    return blocks


def _component_boxes(comps: list[Component]) -> list[LabeledRegion]:
    return [LabeledRegion(c.bbox, FOREGROUND, None, 1.0) for c in comps]


def docstrum(img: GrayImage, params: DocstrumParams | None = None) -> list[LabeledRegion]:
    """Full pipeline; emits class-agnostic foreground blocks, score 1.0.

    Deterministic for a given (image, params). Degenerate inputs (no ink,
    one component, unusable spacing estimates) fall back to one box per
    surviving component rather than failing.
    """
    params = params or DocstrumParams()
    params.validate()
    comps = connected_components(binarize(img), 8, params.min_pixels)
    if not comps:
        return []
    graph = build_knn_graph(comps, params.k)
    if graph.degenerate:
        return _component_boxes(comps)
    skew = estimate_skew(graph)
    try:
        spacings = estimate_spacings(graph, params, skew)
    except SpacingFailure:
        return _component_boxes(comps)
    if not spacings.usable:
        return _component_boxes(comps)
    lines = build_lines(graph, spacings, params, center=(img.w / 2.0, img.h / 2.0))
    blocks = build_blocks(lines, spacings, params)
    return [LabeledRegion(b, FOREGROUND, None, 1.0) for b in blocks]
