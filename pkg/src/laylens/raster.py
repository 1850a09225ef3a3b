"""Grayscale raster substrate: PGM I/O, Otsu binarization, component labeling.

Images are 8-bit single channel, 0 = black ink, 255 = white paper. The only
on-disk format is binary PGM (P5, maxval 255).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BBox, DataError


@dataclass(eq=False)
class GrayImage:
    """8-bit grayscale raster; pixels is a row-major (h, w) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim != 2 or self.pixels.dtype != np.uint8:
            raise DataError("GrayImage needs a 2-D uint8 array")
        if self.pixels.shape[0] < 1 or self.pixels.shape[1] < 1:
            raise DataError("GrayImage needs w,h >= 1")

    @property
    def w(self) -> int:
        return self.pixels.shape[1]

    @property
    def h(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def blank(cls, w: int, h: int, value: int = 255) -> "GrayImage":
        return cls(np.full((h, w), value, dtype=np.uint8))


@dataclass(eq=False)
class BinaryImage:
    """Ink mask; bits is a row-major (h, w) bool array, True = ink."""

    bits: np.ndarray

    def __post_init__(self):
        if self.bits.ndim != 2 or self.bits.dtype != np.bool_:
            raise DataError("BinaryImage needs a 2-D bool array")

    @property
    def w(self) -> int:
        return self.bits.shape[1]

    @property
    def h(self) -> int:
        return self.bits.shape[0]


@dataclass(frozen=True)
class Component:
    """A connected ink region: size, tight bbox and pixel-mean centroid."""

    id: int
    pixel_count: int
    bbox: BBox
    centroid: tuple[float, float]


# ---------------------------------------------------------------------------
# PGM I/O


def write_pgm(img: GrayImage, path):
    """Write binary PGM: exactly 'P5\\n<w> <h>\\n255\\n' + w*h raw bytes."""
    header = f"P5\n{img.w} {img.h}\n255\n".encode("ascii")
    with open(path, "wb") as f:
        f.write(header)
        f.write(img.pixels.tobytes())


def _pgm_tokens(data: bytes, count: int, path) -> tuple[list[bytes], int]:
    """Read `count` whitespace-separated header tokens, honoring # comments.

    Returns the tokens and the offset just past the single whitespace byte
    that terminates the last one.
    """
    tokens: list[bytes] = []
    i = 0
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i] == ord("#"):
            while i < n and data[i] != ord("\n"):
                i += 1
            continue
        start = i
        while i < n and not data[i : i + 1].isspace():
            i += 1
        if start == i:
            raise DataError(f"{path}: truncated PGM header")
        tokens.append(data[start:i])
        if len(tokens) == count:
            if i >= n:
                raise DataError(f"{path}: truncated PGM header")
            i += 1  # exactly one whitespace byte ends the header
    return tokens, i


def read_pgm(path) -> GrayImage:
    """Read binary PGM (P5, maxval 255); errors name what is malformed."""
    try:
        with open(path, "rb") as f:
            data = f.read()
    except OSError as e:
        raise DataError(f"{path}: {e}") from None
    if not data.startswith(b"P5"):
        magic = data[:2].decode("ascii", "replace")
        raise DataError(f"{path}: not a binary PGM (magic {magic!r}, want 'P5')")
    tokens, offset = _pgm_tokens(data, 4, path)
    try:
        w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    except ValueError:
        raise DataError(f"{path}: malformed PGM header (non-numeric field)") from None
    if w < 1 or h < 1:
        raise DataError(f"{path}: malformed PGM header (size {w}x{h})")
    if maxval != 255:
        raise DataError(f"{path}: unsupported PGM maxval {maxval} (want 255)")
    payload = data[offset:]
    if len(payload) != w * h:
        raise DataError(
            f"{path}: PGM payload is {len(payload)} bytes, expected {w * h}"
        )
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(h, w).copy()
    return GrayImage(pixels)


# ---------------------------------------------------------------------------
# Otsu thresholding


def otsu_threshold(img: GrayImage) -> int:
    """Threshold maximizing between-class variance; smallest t wins ties.

    Ink is defined as pixel <= t. A constant image has zero variance for
    every t and therefore returns 0.
    """
    hist = np.bincount(img.pixels.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    cum_n = np.cumsum(hist)                       # pixels with value <= t
    cum_s = np.cumsum(hist * np.arange(256.0))    # their value sum
    w0 = cum_n / total
    w1 = 1.0 - w0
    sum_all = cum_s[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = np.where(cum_n > 0, cum_s / cum_n, 0.0)
        rest = total - cum_n
        mu1 = np.where(rest > 0, (sum_all - cum_s) / rest, 0.0)
    var = w0 * w1 * (mu0 - mu1) ** 2
    return int(np.argmax(var))  # argmax takes the first (smallest) maximum


def binarize(img: GrayImage, threshold: int | None = None) -> BinaryImage:
    """Ink mask with pixel <= threshold; Otsu threshold when not given."""
    t = otsu_threshold(img) if threshold is None else threshold
    return BinaryImage(img.pixels <= t)


# ---------------------------------------------------------------------------
# Connected components: two-pass union-find over horizontal runs


def _row_runs(row: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Inclusive [start, end] column indices of True runs in a bool row."""
    padded = np.empty(len(row) + 2, dtype=np.int8)
    padded[0] = padded[-1] = 0
    padded[1:-1] = row
    d = np.diff(padded)
    return np.flatnonzero(d == 1), np.flatnonzero(d == -1) - 1


class _UnionFind:
    def __init__(self):
        self.parent: list[int] = []

    def make(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, a: int) -> int:
        p = self.parent
        root = a
        while p[root] != root:
            root = p[root]
        while p[a] != root:  # path compression
            p[a], a = root, p[a]
        return root

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller root wins so labels stay in first-touch order
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def _label_runs(bits: np.ndarray, connectivity: int):
    """First pass: extract runs per row and union vertically-adjacent ones.

    Returns (runs, uf) where runs is a list of (y, x_start, x_end, label).
    8-connectivity also joins runs that touch diagonally.
    """
    if connectivity not in (4, 8):
        raise DataError(f"connectivity must be 4 or 8, got {connectivity}")
    reach = 0 if connectivity == 4 else 1
    uf = _UnionFind()
    runs: list[tuple[int, int, int, int]] = []
    prev: list[tuple[int, int, int]] = []  # (x_start, x_end, label) in prev row
    for y in range(bits.shape[0]):
        starts, ends = _row_runs(bits[y])
        cur: list[tuple[int, int, int]] = []
        pi = 0
        for s, e in zip(starts.tolist(), ends.tolist()):
            label = uf.make()
            # advance past previous-row runs that end left of our reach
            while pi < len(prev) and prev[pi][1] < s - reach:
                pi += 1
            pj = pi
            while pj < len(prev) and prev[pj][0] <= e + reach:
                uf.union(label, prev[pj][2])
                pj += 1
            if pj > pi:
                pj -= 1  # last overlapping run may also touch the next run
            runs.append((y, s, e, label))
            cur.append((s, e, label))
            pi = pj
        prev = cur
    return runs, uf


def label_image(bin_img: BinaryImage, connectivity: int = 8) -> np.ndarray:
    """Second pass painted to a grid: 0 background, 1..n in scan order."""
    runs, uf = _label_runs(bin_img.bits, connectivity)
    labels = np.zeros(bin_img.bits.shape, dtype=np.int32)
    remap: dict[int, int] = {}
    for y, s, e, label in runs:
        root = uf.find(label)
        comp = remap.setdefault(root, len(remap) + 1)
        labels[y, s : e + 1] = comp
    return labels


def connected_components(
    bin_img: BinaryImage, connectivity: int = 8, min_pixels: int = 3
) -> list[Component]:
    """Connected ink components, smallest-noise filtered.

    Two-pass union-find labeling over horizontal runs; components with
    fewer than min_pixels pixels are dropped. Output is sorted by
    (bbox.y, bbox.x, id) where id is the first-touch scan order, so the
    result is stable across runs.
    """
    if min_pixels < 1:
        raise DataError(f"min_pixels must be >= 1, got {min_pixels}")
    runs, uf = _label_runs(bin_img.bits, connectivity)
    # aggregate per root: count, coordinate sums, bbox extremes
    stats: dict[int, list] = {}
    order: dict[int, int] = {}
    for y, s, e, label in runs:
        root = uf.find(label)
        n = e - s + 1
        sum_x = (s + e) * n // 2
        st = stats.get(root)
        if st is None:
            order[root] = len(order)
            stats[root] = [n, sum_x, y * n, s, e, y, y]
        else:
            st[0] += n
            st[1] += sum_x
            st[2] += y * n
            if s < st[3]:
                st[3] = s
            if e > st[4]:
                st[4] = e
            st[6] = y  # rows are visited top to bottom
    comps = []
    for root, st in stats.items():
        count, sum_x, sum_y, x0, x1, y0, y1 = st
        if count < min_pixels:
            continue
        comps.append(
            Component(
                id=order[root],
                pixel_count=count,
                bbox=BBox(x0, y0, x1 - x0 + 1, y1 - y0 + 1),
                centroid=(sum_x / count, sum_y / count),
            )
        )
    comps.sort(key=lambda c: (c.bbox.y, c.bbox.x, c.id))
    return comps
