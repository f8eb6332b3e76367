"""Facet images: Gaussian-spot rendering of site intensities and 16-bit PGM I/O."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import EmptyGraph
from .lattice import Graph

FULL_SCALE = 65535
MODE_DIAMETER_UM = 13.0


@dataclass(frozen=True)
class RasterImage:
    """Grayscale image; ``pixels[row, col]`` with row 0 at the top (largest y)."""

    pixels: np.ndarray  # uint16, (height, width)
    scale_um_per_px: float
    origin_um: tuple[float, float] = (0.0, 0.0)  # position of pixel (row=height-1, col=0)
    comment: str = ""

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def pixel_of(self, x_um: float, y_um: float) -> tuple[int, int]:
        """``(row, col)`` of the pixel whose centre is nearest to ``(x, y)``."""
        col = int(round((x_um - self.origin_um[0]) / self.scale_um_per_px))
        row = self.height - 1 - int(round((y_um - self.origin_um[1]) / self.scale_um_per_px))
        return row, col


def _canvas(positions: np.ndarray, mode_diameter_um: float, scale: float):
    pad = 2.0 * mode_diameter_um
    x0 = positions[:, 0].min() - pad
    y0 = positions[:, 1].min() - pad
    width = int(math.floor((positions[:, 0].max() + pad - x0) / scale + 1e-9)) + 1
    height = int(math.floor((positions[:, 1].max() + pad - y0) / scale + 1e-9)) + 1
    xs = x0 + scale * np.arange(width)
    ys = y0 + scale * np.arange(height)[::-1]
    return xs, ys, (x0, y0)


def render_field(graph: Graph, intensities, mode_diameter_um: float = MODE_DIAMETER_UM, scale_um_per_px: float = 1.0):
    """Unnormalised sum of Gaussian spots; returns ``(field, origin_um)``."""
    if graph.spacing_um is None:
        raise ValueError("graph needs spacing_um set to be rendered")
    if not mode_diameter_um > 0 or not scale_um_per_px > 0:
        raise ValueError("mode diameter and pixel scale must be positive")
    weights = np.asarray(intensities, dtype=float).reshape(-1)
    if weights.shape[0] == 0:
        raise EmptyGraph("nothing to render")
    if weights.shape[0] != graph.n:
        raise ValueError(f"{weights.shape[0]} intensities for {graph.n} sites")
    pos = graph.positions()
    xs, ys, origin = _canvas(pos, mode_diameter_um, scale_um_per_px)
    radius = mode_diameter_um / 2.0
    # separable spots: exp(-2 r^2 / w^2) = gx * gy
    gx = np.exp(-2.0 * (xs[None, :] - pos[:, 0:1]) ** 2 / radius**2)
    gy = np.exp(-2.0 * (ys[None, :] - pos[:, 1:2]) ** 2 / radius**2)
    field = np.einsum("k,ky,kx->yx", weights, gy, gx)
    return field, origin


def render_facet(
    graph: Graph,
    intensities,
    mode_diameter_um: float = MODE_DIAMETER_UM,
    scale_um_per_px: float = 1.0,
    comment: str = "",
) -> RasterImage:
    """Render site intensities as 1/e^2-diameter Gaussian spots, brightest pixel at full scale."""
    field, origin = render_field(graph, intensities, mode_diameter_um, scale_um_per_px)
    peak = field.max()
    if peak > 0:
        pixels = np.rint(field * (FULL_SCALE / peak)).astype(np.uint16)
    else:
        pixels = np.zeros(field.shape, dtype=np.uint16)
    return RasterImage(pixels, float(scale_um_per_px), origin, comment)


def pgm_bytes(image: RasterImage) -> bytes:
    """Binary P5 with 16-bit big-endian samples."""
    header = "P5\n"
    if image.comment:
        header += "".join(f"# {line}\n" for line in image.comment.splitlines())
    header += f"{image.width} {image.height}\n{FULL_SCALE}\n"
    return header.encode("ascii") + image.pixels.astype(">u2").tobytes()


def write_pgm(image: RasterImage, path) -> None:
    Path(path).write_bytes(pgm_bytes(image))


def read_pgm(data) -> tuple[np.ndarray, list[str]]:
    """Parse a P5 image from bytes or a path; returns ``(pixels, comments)``."""
    if not isinstance(data, (bytes, bytearray)):
        data = Path(data).read_bytes()
    pos = 0
    tokens: list[str] = []
    comments: list[str] = []
    while len(tokens) < 4:
        while data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            end = data.index(b"\n", pos)
            comments.append(data[pos + 1 : end].decode("ascii").strip())
            pos = end + 1
            continue
        start = pos
        while not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos].decode("ascii"))
    pos += 1  # single whitespace before the raster
    magic, width, height, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic != "P5":
        raise ValueError(f"not a binary PGM (magic {magic!r})")
    dtype = ">u2" if maxval > 255 else "u1"
    pixels = np.frombuffer(data, dtype=dtype, count=width * height, offset=pos).reshape(height, width)
    return pixels.astype(np.uint16), comments
