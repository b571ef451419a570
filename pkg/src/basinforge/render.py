"""Basin and iteration-count images as binary PPM (P6)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classifier import ABORTED, DIVERGED, MAX_ROOTS, NONCONVERGED

BLUE = (0, 0, 255)
GREEN = (0, 160, 0)
RED = (255, 0, 0)
YELLOW = (255, 255, 0)
ORANGE = (255, 140, 0)
PURPLE = (128, 0, 160)
OLIVE = (128, 128, 0)
CYAN = (0, 200, 200)
MAGENTA = (255, 0, 255)
TEAL = (0, 128, 128)
BROWN = (140, 80, 20)
WHITE = (255, 255, 255)
BLACK = (0, 0, 0)


class PaletteTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class Palette:
    root_colors: tuple
    diverged_color: tuple = YELLOW
    aborted_color: tuple = ORANGE
    nonconverged_color: tuple = BLACK

    @classmethod
    def for_roots(cls, k: int) -> "Palette":
        if k <= 3:
            return THREE_ROOTS
        if k <= 9:
            return NINE_ROOTS
        raise PaletteTooSmall(f"no default palette for {k} roots")

    def lookup(self) -> np.ndarray:
        """256x3 table indexed by kind tag."""
        table = np.zeros((256, 3), dtype=np.uint8)
        table[: len(self.root_colors)] = self.root_colors
        table[DIVERGED] = self.diverged_color
        table[ABORTED] = self.aborted_color
        table[NONCONVERGED] = self.nonconverged_color
        return table


THREE_ROOTS = Palette((BLUE, GREEN, RED))
NINE_ROOTS = Palette((BLUE, PURPLE, OLIVE, GREEN, CYAN, MAGENTA, RED, TEAL, BROWN))


def iteration_ramp() -> np.ndarray:
    """256-entry black -> red -> yellow -> near-white ramp.

    Entry t (0..255) has red = min(3t, 255), green = clip(3t - 255, 0, 255),
    blue = clip(3t - 510, 0, 255), with the last entries capped at 250 so no
    converged pixel collides with the white used for ill-behaved nodes.
    """
    t = np.arange(256) * 3
    ramp = np.stack([np.clip(t, 0, 255), np.clip(t - 255, 0, 255), np.clip(t - 510, 0, 250)], axis=1)
    return ramp.astype(np.uint8)


RAMP = iteration_ramp()


def _ppm(rgb: np.ndarray) -> bytes:
    """``rgb`` is indexed [i_re, j_im, channel]; output has max-im row first."""
    img = np.ascontiguousarray(np.transpose(rgb, (1, 0, 2))[::-1])
    h, w = img.shape[:2]
    return f"P6\n{w} {h}\n255\n".encode("ascii") + img.tobytes()


def render_basins(grid, palette: Palette | None = None) -> bytes:
    tags = grid.tags
    conv = tags[tags < MAX_ROOTS]
    needed = int(conv.max()) + 1 if conv.size else 0
    if grid.roots is not None:
        needed = max(needed, len(grid.roots))
    palette = palette or Palette.for_roots(needed)
    if needed > len(palette.root_colors):
        raise PaletteTooSmall(f"{needed} roots but only {len(palette.root_colors)} colors")
    return _ppm(palette.lookup()[tags])


def render_iterations(grid) -> bytes:
    conv = grid.converged_mask()
    it = grid.iterations.astype(np.int64)
    top = int(it[conv].max()) if conv.any() else 0
    level = np.zeros_like(it) if top == 0 else (it * 255) // top
    rgb = RAMP[np.clip(level, 0, 255)]
    rgb[~conv] = WHITE
    return _ppm(rgb)


def read_ppm(data: bytes) -> np.ndarray:
    """Parse a P6 image into an array of shape (height, width, 3)."""
    fields, pos = [], 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        fields.append(data[pos:end])
        pos = end
    if fields[0] != b"P6" or int(fields[3]) != 255:
        raise ValueError("not an 8-bit P6 image")
    w, h = int(fields[1]), int(fields[2])
    # exactly one whitespace byte separates the header from the raster
    return np.frombuffer(data, dtype=np.uint8, count=w * h * 3, offset=pos + 1).reshape(h, w, 3)


def write_image(data: bytes, path) -> None:
    with open(path, "wb") as fh:
        fh.write(data)
