"""Command-line driver for single scans and multi-scheme comparison studies."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .classifier import ScanConfig, scan_grid
from .entropy import EntropyConfig, basin_entropy
from .polynomials import (Polynomial, RootCatalog, format_polynomial, parse_polynomial,
                          parse_root_catalog, unity_polynomial, unity_roots)
from .render import Palette, render_basins, render_iterations, write_image
from .schemes import DEFAULT_KING_BETA, SCHEMES, SchemeId, get_scheme
from .stats import histogram, stats_record, write_histogram_csv

log = logging.getLogger("basinforge")

EMIT_CHOICES = ("images", "hist", "report")

REPORT_COLUMNS = [
    "scheme_index", "scheme", "order", "evals_per_step", "efficiency_index", "polynomial",
    "n_star", "a_offset", "a", "b", "h", "s_b", "s_bb", "n_boxes", "n_boundary_boxes",
    "fractal_boundaries", "converged_fraction", "diverged_fraction", "aborted_fraction",
    "nonconverged_fraction", "wall_time_s", "king_beta", "box_nodes", "status", "error",
]

# one bar-chart table per comparison figure
BAR_CHARTS = {"n_star": "bars_n_star.csv", "b": "bars_diversity_b.csv",
              "h": "bars_differential_entropy_h.csv", "s_b": "bars_basin_entropy_sb.csv",
              "s_bb": "bars_boundary_entropy_sbb.csv"}


class UsageError(Exception):
    pass


@dataclass
class PolySpec:
    polynomial: Polynomial
    roots: RootCatalog
    tag: str


@dataclass
class RunManifest:
    schemes: list[SchemeId]
    polynomials: list[PolySpec]
    scan: ScanConfig = field(default_factory=ScanConfig)
    entropy: EntropyConfig = field(default_factory=EntropyConfig)
    out: Path = Path("basinforge-out")
    emit: tuple[str, ...] = EMIT_CHOICES
    overwrite: bool = False
    parallel_pairs: int = 1

    def __post_init__(self):
        if not self.schemes:
            raise UsageError("no schemes selected")
        if not self.polynomials:
            raise UsageError("no polynomials selected")


# ---------------------------------------------------------------- parsing

def parse_methods(text: str) -> list[SchemeId]:
    out = []
    for item in (s.strip() for s in str(text).split(",")):
        if not item:
            continue
        if item.lower() == "all":
            out.extend(SCHEMES)
            continue
        try:
            out.append(get_scheme(item))
        except (KeyError, ValueError) as exc:
            raise UsageError(f"unknown method {item!r}") from exc
    if not out:
        raise UsageError("empty method list")
    return out


def parse_poly(text: str, roots_file: str | None = None) -> PolySpec:
    text = text.strip()
    if text.lower().startswith("unity:"):
        try:
            n = int(text.split(":", 1)[1])
        except ValueError as exc:
            raise UsageError(f"bad unity degree in {text!r}") from exc
        if n < 1:
            raise UsageError("unity degree must be at least 1")
        return PolySpec(unity_polynomial(n), unity_roots(n), f"unity{n}")
    try:
        p = parse_polynomial(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if roots_file is None:
        raise UsageError(f"polynomial {text!r} needs a --roots catalog file")
    try:
        roots = parse_root_catalog(Path(roots_file).read_text())
        roots.check(p)
    except (OSError, ValueError) as exc:
        raise UsageError(f"root catalog {roots_file}: {exc}") from exc
    return PolySpec(p, roots, Path(roots_file).stem)


def parse_grid(text: str) -> tuple[int, int]:
    parts = str(text).lower().split("x")
    try:
        vals = [int(v) for v in parts]
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}") from exc
    if len(vals) == 1:
        vals = vals * 2
    if len(vals) != 2:
        raise UsageError(f"bad grid {text!r}")
    return vals[0], vals[1]


def parse_window(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in str(text).split(","))
    except ValueError as exc:
        raise UsageError(f"bad window {text!r}") from exc
    if len(vals) != 4:
        raise UsageError("window needs rmin,rmax,imin,imax")
    return vals


def read_manifest_file(path) -> dict[str, list[str]]:
    """``key = value`` lines; repeated keys accumulate, ``#`` starts a comment."""
    out: dict[str, list[str]] = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        out.setdefault(key.replace("_", "-").lower(), []).append(val)
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="basinforge",
        description="Basins of attraction of iterative root finders on polynomials.")
    ap.add_argument("--manifest", help="key = value file; command-line flags take precedence")
    ap.add_argument("--method", help="scheme index, name, comma list or 'all' (default all)")
    ap.add_argument("--poly", action="append",
                    help="unity:<n> or comma-separated coefficients, lowest degree first (repeatable)")
    ap.add_argument("--roots", action="append",
                    help="root catalog file, one per coefficient polynomial, in order")
    ap.add_argument("--window", help="rmin,rmax,imin,imax (default -3,3,-3,3)")
    ap.add_argument("--grid", help="n or NxM nodes (default 1024)")
    ap.add_argument("--nmax", type=int)
    ap.add_argument("--tol", type=float)
    ap.add_argument("--divergence-radius", type=float)
    ap.add_argument("--box-nodes", type=int)
    ap.add_argument("--king-beta", type=float)
    ap.add_argument("--out")
    ap.add_argument("--emit", help="comma list from images,hist,report (default all)")
    ap.add_argument("--overwrite", action="store_true", default=None)
    ap.add_argument("--parallel-pairs", type=int, help="run this many (scheme, polynomial) pairs at once")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def manifest_from_args(args: argparse.Namespace) -> RunManifest:
    file_vals = read_manifest_file(args.manifest) if args.manifest else {}

    def pick(name, default=None, many=False):
        cli = getattr(args, name.replace("-", "_"))
        if cli is not None:
            return cli
        if name in file_vals:
            vals = file_vals[name]
            return vals if many else vals[-1]
        return default

    polys_raw = pick("poly", many=True) or ["unity:3", "unity:9"]
    roots_raw = list(pick("roots", many=True) or [])
    polys = []
    for text in polys_raw:
        rf = None
        if not text.strip().lower().startswith("unity:"):
            if not roots_raw:
                raise UsageError(f"polynomial {text!r} needs a --roots catalog file")
            rf = roots_raw.pop(0)
        polys.append(parse_poly(text, rf))

    try:
        scan = ScanConfig(
            window=parse_window(pick("window", "-3,3,-3,3")),
            grid=parse_grid(pick("grid", "1024")),
            n_max=int(pick("nmax", 500)),
            accuracy=float(pick("tol", 1e-15)),
            divergence_radius=float(pick("divergence-radius", 1e10)),
            king_beta=float(pick("king-beta", DEFAULT_KING_BETA)),
        )
        ent = EntropyConfig(box_nodes=int(pick("box-nodes", EntropyConfig().box_nodes)))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    emit = tuple(s.strip() for s in str(pick("emit", ",".join(EMIT_CHOICES))).split(",") if s.strip())
    bad = [e for e in emit if e not in EMIT_CHOICES]
    if bad:
        raise UsageError(f"unknown --emit item(s): {', '.join(bad)}")
    overwrite = pick("overwrite", False)
    if isinstance(overwrite, str):
        overwrite = overwrite.lower() in ("1", "true", "yes", "on")
    return RunManifest(
        schemes=parse_methods(pick("method", "all")),
        polynomials=polys,
        scan=scan,
        entropy=ent,
        out=Path(pick("out", "basinforge-out")),
        emit=emit,
        overwrite=bool(overwrite),
        parallel_pairs=max(1, int(pick("parallel-pairs", 1))),
    )


# ---------------------------------------------------------------- running

def pair_dir(out: Path, scheme: SchemeId, poly: PolySpec) -> Path:
    return out / poly.tag / f"{scheme.index:02d}-{scheme.name}"


def _artifact_names(emit) -> list[str]:
    names = []
    if "images" in emit:
        names += ["basins.ppm", "iterations.ppm"]
    if "hist" in emit:
        names.append("histogram.csv")
    names.append("record.json")
    return names


def run_single(scheme: SchemeId, poly: PolySpec, scan: ScanConfig, ent: EntropyConfig,
               out_dir: Path | None = None, emit=EMIT_CHOICES, overwrite: bool = False) -> dict:
    """Scan one (scheme, polynomial) pair and write its artifacts.

    Returns the run record. Files written before a failure are removed.
    """
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        clash = [n for n in _artifact_names(emit) if (out_dir / n).exists()]
        if clash and not overwrite:
            raise FileExistsError(f"{out_dir / clash[0]} exists (use --overwrite)")
    written: list[Path] = []
    try:
        t0 = time.perf_counter()
        grid = scan_grid(scheme, poly.polynomial, poly.roots, scan)
        h = histogram(grid)
        rep = basin_entropy(grid, ent)
        wall = time.perf_counter() - t0
        counts = grid.counts()
        total = grid.tags.size
        record = {
            "scheme_index": scheme.index, "scheme": scheme.name, "order": scheme.claimed_order,
            "evals_per_step": scheme.evals_per_step, "efficiency_index": scheme.efficiency_index,
            "polynomial": poly.polynomial.name or format_polynomial(poly.polynomial.coefficients),
            **stats_record(h),
            **{k: v for k, v in rep.as_dict().items()},
            **{f"{k}_fraction": v / total for k, v in counts.items()},
            "counts": counts,
            "wall_time_s": wall,
            "king_beta": scan.king_beta,
            "grid": list(scan.grid), "window": list(scan.window), "n_max": scan.n_max,
            "accuracy": scan.accuracy, "divergence_radius": scan.divergence_radius,
            # plane-unit box edge, for comparison with an epsilon quoted in plane units
            "box_edge": ent.box_nodes * (scan.window[1] - scan.window[0]) / (scan.grid[0] - 1),
            "status": "ok", "error": "",
        }
        if out_dir is not None:
            def put(name, data):
                path = out_dir / name
                written.append(path)
                write_image(data, path)

            if "images" in emit:
                put("basins.ppm", render_basins(grid, _palette(poly)))
                put("iterations.ppm", render_iterations(grid))
            if "hist" in emit:
                written.append(out_dir / "histogram.csv")
                write_histogram_csv(h, out_dir / "histogram.csv")
            written.append(out_dir / "record.json")
            (out_dir / "record.json").write_text(json.dumps(record, indent=2) + "\n")
        return record
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise


def _palette(poly: PolySpec) -> Palette | None:
    try:
        return Palette.for_roots(len(poly.roots))
    except ValueError:
        # more roots than any default palette: fall back to a generated one
        import colorsys
        k = len(poly.roots)
        cols = tuple(tuple(int(255 * c) for c in colorsys.hsv_to_rgb(i / k, 0.85, 0.9)) for i in range(k))
        return Palette(cols)


def _failed_record(scheme: SchemeId, poly: PolySpec, scan: ScanConfig, ent: EntropyConfig, exc) -> dict:
    return {"scheme_index": scheme.index, "scheme": scheme.name, "order": scheme.claimed_order,
            "evals_per_step": scheme.evals_per_step, "efficiency_index": scheme.efficiency_index,
            "polynomial": poly.polynomial.name or format_polynomial(poly.polynomial.coefficients),
            "king_beta": scan.king_beta, "box_nodes": ent.box_nodes,
            "status": "failed", "error": f"{type(exc).__name__}: {exc}"}


def run_study(m: RunManifest) -> list[dict]:
    """Run every (scheme, polynomial) pair; failures become records, not exceptions."""
    pairs = [(s, p) for p in m.polynomials for s in m.schemes]
    m.out.mkdir(parents=True, exist_ok=True)
    if "report" in m.emit and not m.overwrite:
        for name in ["report.csv", "summary.txt", *BAR_CHARTS.values()]:
            if (m.out / name).exists():
                raise FileExistsError(f"{m.out / name} exists (use --overwrite)")

    def one(pair):
        s, p = pair
        try:
            rec = run_single(s, p, m.scan, m.entropy, pair_dir(m.out, s, p), m.emit, m.overwrite)
            log.info("%-22s %-8s N*=%s b=%s S_b=%.4f (%.1fs)", s.name, p.tag, rec["n_star"],
                     None if rec["b"] is None else round(rec["b"], 3), rec["s_b"], rec["wall_time_s"])
            return rec
        except Exception as exc:  # recorded, the study goes on
            log.error("%s on %s failed: %s", s.name, p.tag, exc)
            return _failed_record(s, p, m.scan, m.entropy, exc)

    if m.parallel_pairs > 1:
        with ThreadPoolExecutor(max_workers=m.parallel_pairs) as pool:
            records = list(pool.map(one, pairs))
    else:
        records = [one(pr) for pr in pairs]
    if "report" in m.emit:
        write_report(records, m.out)
    return records


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def write_report(records: list[dict], out: Path) -> None:
    with open(out / "report.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        for r in records:
            w.writerow([_cell(r.get(c)) for c in REPORT_COLUMNS])
    (out / "summary.txt").write_text(summary_text(records))
    polys = list(dict.fromkeys(r["polynomial"] for r in records))
    schemes = list(dict.fromkeys((r["scheme_index"], r["scheme"]) for r in records))
    by_key = {(r["scheme_index"], r["polynomial"]): r for r in records}
    for metric, name in BAR_CHARTS.items():
        with open(out / name, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["scheme_index", "scheme", *polys])
            for idx, nm in schemes:
                w.writerow([idx, nm, *(_cell(by_key.get((idx, p), {}).get(metric)) for p in polys)])


def summary_text(records: list[dict]) -> str:
    head = ["#", "scheme", "poly", "N*", "a", "b", "h", "S_b", "S_bb", "conv", "div", "abort", "EI", "time"]
    rows, failed = [], []
    for r in records:
        if r.get("status") != "ok":
            failed.append(f"{r['scheme_index']}  {r['scheme']}  {r['polynomial']}  failed: {r['error']}")
            continue

        def f(key, fmt):
            v = r.get(key)
            return "-" if v is None else format(v, fmt)

        a = "-" if r["a_offset"] is None else ("N*" if r["a_offset"] == 0 else "N*+1")
        rows.append([str(r["scheme_index"]), r["scheme"], r["polynomial"], f("n_star", "d"), a,
                     f("b", ".2f"), f("h", ".3f"), f("s_b", ".4f"), f("s_bb", ".4f"),
                     f("converged_fraction", ".4f"), f("diverged_fraction", ".4f"),
                     f("aborted_fraction", ".4f"), f("efficiency_index", ".3f"), f("wall_time_s", ".1f")])
    widths = [max([len(head[i])] + [len(r[i]) for r in rows]) for i in range(len(head))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(head, widths)).rstrip()]
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    return "\n".join(lines + failed) + "\n"


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        m = manifest_from_args(args)
    except (UsageError, OSError) as exc:
        ap.print_usage(sys.stderr)
        print(f"basinforge: error: {exc}", file=sys.stderr)
        return 2
    try:
        records = run_study(m)
    except FileExistsError as exc:
        print(f"basinforge: error: {exc}", file=sys.stderr)
        return 1
    print(summary_text(records), end="")
    return 0 if all(r.get("status") == "ok" for r in records) else 1


if __name__ == "__main__":
    sys.exit(main())
