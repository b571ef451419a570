"""Basin entropy and boundary basin entropy over a box tiling of a grid."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classifier import MAX_ROOTS

# 1024 is not a multiple of 5; 4x4 boxes tile the default grid exactly
DEFAULT_BOX_NODES = 4
LOG2_THRESHOLD = math.log10(2.0)
FAILED_LABEL = MAX_ROOTS  # Diverged, Aborted and NonConverged share one label


class IndivisibleGrid(ValueError):
    pass


@dataclass(frozen=True)
class EntropyConfig:
    box_nodes: int = DEFAULT_BOX_NODES
    log_base: int = 10

    def __post_init__(self):
        if self.box_nodes < 2:
            raise ValueError("box_nodes must be at least 2")
        if self.log_base != 10:
            raise ValueError("only base-10 logarithms are supported")


@dataclass(frozen=True)
class EntropyReport:
    s_b: float
    s_bb: float
    n_boxes: int
    n_boundary_boxes: int
    box_nodes: int = DEFAULT_BOX_NODES

    @property
    def fractal_boundaries(self) -> bool:
        return self.s_bb > LOG2_THRESHOLD

    def as_dict(self) -> dict:
        return {"s_b": self.s_b, "s_bb": self.s_bb, "n_boxes": self.n_boxes,
                "n_boundary_boxes": self.n_boundary_boxes,
                "fractal_boundaries": self.fractal_boundaries, "box_nodes": self.box_nodes}


def pooled_labels(tags: np.ndarray) -> np.ndarray:
    """Root index per node, with every non-converged kind mapped to one label."""
    tags = np.asarray(tags)
    return np.where(tags < MAX_ROOTS, tags, FAILED_LABEL).astype(np.int64)


def cell_entropy(labels) -> float:
    labels = np.asarray(labels).ravel()
    if labels.size == 0:
        raise ValueError("empty box")
    _, counts = np.unique(labels, return_counts=True)
    p = counts / labels.size
    return float(-(p * np.log10(p)).sum())


def box_entropies(labels: np.ndarray, box_nodes: int) -> np.ndarray:
    """Entropy of each box of a label lattice, shape (n_re/box, n_im/box)."""
    n_re, n_im = labels.shape
    if n_re % box_nodes or n_im % box_nodes:
        raise IndivisibleGrid(f"grid {n_re}x{n_im} is not divisible by box size {box_nodes}")
    br, bi = n_re // box_nodes, n_im // box_nodes
    boxes = labels.reshape(br, box_nodes, bi, box_nodes).transpose(0, 2, 1, 3)
    boxes = boxes.reshape(br * bi, box_nodes * box_nodes)
    size = box_nodes * box_nodes
    out = np.zeros(br * bi)
    # one pass per distinct label keeps memory at a single boolean lattice
    for lab in np.unique(labels):
        p = (boxes == lab).sum(axis=1) / size
        nz = p > 0
        out[nz] -= p[nz] * np.log10(p[nz])
    return out.reshape(br, bi)


def basin_entropy(grid, cfg: EntropyConfig | None = None) -> EntropyReport:
    cfg = cfg or EntropyConfig()
    labels = pooled_labels(grid.tags if hasattr(grid, "tags") else grid)
    ent = box_entropies(labels, cfg.box_nodes)
    n_re, n_im = labels.shape
    b = cfg.box_nodes
    boxes = labels.reshape(n_re // b, b, n_im // b, b)
    mixed = (boxes.max(axis=(1, 3)) != boxes.min(axis=(1, 3)))
    total = float(ent.sum())
    n_boxes = ent.size
    n_boundary = int(mixed.sum())
    s_bb = total / n_boundary if n_boundary else 0.0
    return EntropyReport(total / n_boxes, s_bb, n_boxes, n_boundary, b)
