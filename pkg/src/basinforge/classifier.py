"""Grid scans of the complex plane and per-node outcome classification."""

from __future__ import annotations

import csv
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .polynomials import Polynomial, RootCatalog
from .schemes import DEFAULT_KING_BETA, SchemeId, StepStatus, get_scheme, step_array

# kind tags used in arrays and in the binary format; 0..k-1 are root indices
DIVERGED = 252
ABORTED = 253
NONCONVERGED = 254
MAX_ROOTS = 252

MAGIC = b"BSGR"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIII")
_RECORD = np.dtype([("kind", "u1"), ("iterations", "<u2")])

CHUNK_NODES = 1 << 16
THREADS_ENV = "BASINFORGE_THREADS"


class OutcomeKind(Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    ABORTED = "aborted"
    NONCONVERGED = "nonconverged"


_TAG_TO_KIND = {DIVERGED: OutcomeKind.DIVERGED, ABORTED: OutcomeKind.ABORTED,
                NONCONVERGED: OutcomeKind.NONCONVERGED}


@dataclass(frozen=True)
class NodeOutcome:
    kind: OutcomeKind
    iterations: int
    root_index: int | None = None

    @classmethod
    def from_tag(cls, tag: int, iterations: int) -> "NodeOutcome":
        tag = int(tag)
        if tag in _TAG_TO_KIND:
            return cls(_TAG_TO_KIND[tag], int(iterations))
        return cls(OutcomeKind.CONVERGED, int(iterations), tag)

    @property
    def tag(self) -> int:
        if self.kind is OutcomeKind.CONVERGED:
            return self.root_index
        return {v: k for k, v in _TAG_TO_KIND.items()}[self.kind]


@dataclass(frozen=True)
class ScanConfig:
    window: tuple[float, float, float, float] = (-3.0, 3.0, -3.0, 3.0)
    grid: tuple[int, int] = (1024, 1024)
    n_max: int = 500
    accuracy: float = 1e-15
    divergence_radius: float = 1e10
    king_beta: float = DEFAULT_KING_BETA

    def __post_init__(self):
        re_min, re_max, im_min, im_max = (float(v) for v in self.window)
        object.__setattr__(self, "window", (re_min, re_max, im_min, im_max))
        n_re, n_im = (int(v) for v in self.grid)
        object.__setattr__(self, "grid", (n_re, n_im))
        if not (re_min < re_max and im_min < im_max):
            raise ValueError("window must satisfy re_min < re_max and im_min < im_max")
        if n_re < 2 or n_im < 2:
            raise ValueError("grid needs at least 2 nodes per axis")
        if self.n_max < 1 or self.n_max > 65535:
            raise ValueError("n_max must be in [1, 65535]")
        if not self.accuracy > 0 or not self.divergence_radius > 0:
            raise ValueError("accuracy and divergence_radius must be positive")

    def axis(self, which: str) -> np.ndarray:
        """Node coordinates along ``'re'`` or ``'im'``, endpoints included.

        Written as a weighted mean of the endpoints so a symmetric window gives
        exactly mirrored coordinates.
        """
        if which == "re":
            lo, hi, n = self.window[0], self.window[1], self.grid[0]
        else:
            lo, hi, n = self.window[2], self.window[3], self.grid[1]
        k = np.arange(n, dtype=float)
        return (lo * (n - 1 - k) + hi * k) / (n - 1)

    def node(self, i: int, j: int) -> complex:
        return complex(self.axis("re")[i], self.axis("im")[j])


def _match_roots(z, roots: np.ndarray, accuracy: float) -> np.ndarray:
    hit = np.full(z.shape, -1, dtype=np.int16)
    re, im = z.real, z.imag
    for k, r in enumerate(roots):
        ok = (np.abs(re - r.real) <= accuracy) & (np.abs(im - r.imag) <= accuracy)
        hit[ok & (hit < 0)] = k
    return hit


def classify_points(z0, scheme, p: Polynomial, roots: RootCatalog, cfg: ScanConfig):
    """Classify every entry of ``z0``; returns ``(tags, iterations)`` arrays."""
    s = get_scheme(scheme)
    if len(roots) > MAX_ROOTS:
        raise ValueError(f"at most {MAX_ROOTS} roots are supported")
    z0 = np.asarray(z0, dtype=complex)
    shape = z0.shape
    z0 = z0.ravel()
    rts = roots.as_array()
    tags = np.full(z0.size, NONCONVERGED, dtype=np.uint8)
    iters = np.full(z0.size, cfg.n_max, dtype=np.uint16)

    first = _match_roots(z0, rts, cfg.accuracy)
    start = first >= 0
    tags[start] = first[start]
    iters[start] = 0
    idx = np.flatnonzero(~start)
    z = z0[idx]
    with np.errstate(all="ignore"):
        for it in range(1, cfg.n_max + 1):
            if idx.size == 0:
                break
            nxt, status = step_array(s, z, p, cfg.king_beta)
            hit = _match_roots(nxt, rts, cfg.accuracy)
            conv = hit >= 0
            abort = ~conv & (status == StepStatus.TINY_DENOMINATOR)
            div = ~conv & ~abort & (~np.isfinite(nxt) | (np.abs(nxt) > cfg.divergence_radius))
            tags[idx[conv]] = hit[conv]
            tags[idx[abort]] = ABORTED
            tags[idx[div]] = DIVERGED
            done = conv | abort | div
            iters[idx[done]] = it
            keep = ~done
            idx = idx[keep]
            z = nxt[keep]
    return tags.reshape(shape), iters.reshape(shape)


def classify_node(z0: complex, scheme, p: Polynomial, roots: RootCatalog,
                  cfg: ScanConfig | None = None) -> NodeOutcome:
    cfg = cfg or ScanConfig()
    tags, iters = classify_points(np.array([z0]), scheme, p, roots, cfg)
    return NodeOutcome.from_tag(tags[0], iters[0])


def worker_count() -> int:
    n = os.cpu_count() or 1
    cap = os.environ.get(THREADS_ENV)
    if cap:
        n = min(n, max(1, int(cap)))
    return n


@dataclass
class BasinGrid:
    """Outcome lattice; ``tags[i, j]`` and ``iterations[i, j]`` belong to the
    node with real-axis index ``i`` and imaginary-axis index ``j``."""

    config: ScanConfig
    scheme: SchemeId | None
    polynomial: Polynomial | None
    roots: RootCatalog | None
    tags: np.ndarray
    iterations: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.tags.shape

    def outcome(self, i: int, j: int) -> NodeOutcome:
        return NodeOutcome.from_tag(self.tags[i, j], self.iterations[i, j])

    def node(self, i: int, j: int) -> complex:
        return self.config.node(i, j)

    def converged_mask(self) -> np.ndarray:
        return self.tags < MAX_ROOTS

    def counts(self) -> dict[str, int]:
        conv = int(self.converged_mask().sum())
        return {
            "converged": conv,
            "diverged": int((self.tags == DIVERGED).sum()),
            "aborted": int((self.tags == ABORTED).sum()),
            "nonconverged": int((self.tags == NONCONVERGED).sum()),
        }

    def to_bytes(self) -> bytes:
        n_re, n_im = self.shape
        rec = np.empty(n_re * n_im, dtype=_RECORD)
        rec["kind"] = self.tags.ravel()
        rec["iterations"] = self.iterations.ravel()
        return _HEADER.pack(MAGIC, FORMAT_VERSION, n_re, n_im) + rec.tobytes()

    @staticmethod
    def arrays_from_bytes(data: bytes) -> tuple[np.ndarray, np.ndarray]:
        magic, version, n_re, n_im = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise ValueError("not a basin grid file")
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported format version {version}")
        rec = np.frombuffer(data, dtype=_RECORD, offset=_HEADER.size, count=n_re * n_im)
        return (rec["kind"].reshape(n_re, n_im).copy(),
                rec["iterations"].reshape(n_re, n_im).astype(np.uint16))

    @classmethod
    def from_bytes(cls, data: bytes, config: ScanConfig | None = None) -> "BasinGrid":
        tags, iters = cls.arrays_from_bytes(data)
        if config is None:
            config = ScanConfig(grid=tags.shape)
        elif config.grid != tags.shape:
            raise ValueError("config grid does not match the stored lattice")
        return cls(config, None, None, None, tags, iters)

    def write_binary(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    def write_csv(self, path) -> None:
        re_axis, im_axis = self.config.axis("re"), self.config.axis("im")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "re", "im", "kind", "root_index", "iterations"])
            n_re, n_im = self.shape
            for i in range(n_re):
                for j in range(n_im):
                    o = self.outcome(i, j)
                    w.writerow([i, j, repr(float(re_axis[i])), repr(float(im_axis[j])), o.kind.value,
                                "" if o.root_index is None else o.root_index, o.iterations])


def scan_grid(scheme, p: Polynomial, roots: RootCatalog, cfg: ScanConfig | None = None,
              workers: int | None = None) -> BasinGrid:
    """Classify every node of ``cfg``'s lattice.

    Nodes are processed in independent chunks; the result does not depend on
    the number of workers.
    """
    cfg = cfg or ScanConfig()
    s = get_scheme(scheme)
    re_axis, im_axis = cfg.axis("re"), cfg.axis("im")
    z0 = (re_axis[:, None] + 1j * im_axis[None, :]).ravel()
    tags = np.empty(z0.size, dtype=np.uint8)
    iters = np.empty(z0.size, dtype=np.uint16)
    bounds = [(a, min(a + CHUNK_NODES, z0.size)) for a in range(0, z0.size, CHUNK_NODES)]

    def run(chunk):
        a, b = chunk
        tags[a:b], iters[a:b] = classify_points(z0[a:b], s, p, roots, cfg)

    n_workers = workers or worker_count()
    if n_workers <= 1:
        for c in bounds:
            run(c)
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            list(pool.map(run, bounds))
    return BasinGrid(cfg, s, p, roots, tags.reshape(cfg.grid), iters.reshape(cfg.grid))
