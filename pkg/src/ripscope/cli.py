"""Command-line entry point: ``ripscope {rips,ph,pl,pca,all,compare}``."""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import exact_linalg as xl
from . import persistence as ph
from . import spectral as pl
from . import sr_algebra as pca
from .complex import (
    DEFAULT_SIMPLEX_BUDGET,
    Filtration,
    SimplexBudgetExceeded,
    build_rips_filtration,
    euler_characteristic,
    f_vector,
    h_vector,
    round_scale,
    scale_grid,
    snapshot,
)
from .ingest import GENERATORS, ParseError, PointCloud, load_fixture, read_structure

log = logging.getLogger("ripscope")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_GUARD = 4
EXIT_NUMERIC = 5

THREADS_ENV = "RIPSCOPE_THREADS"
COMMANDS = ("rips", "ph", "pl", "pca", "all", "compare")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str = "all"
    input_path: Optional[str] = None
    input_format: Optional[str] = None
    atoms: list = field(default_factory=lambda: ["CA"])
    chains: Optional[list] = None
    generator: Optional[str] = None
    circumradius: float = 2.0
    fixture: Optional[str] = None
    max_dim: int = 3
    max_radius: Optional[float] = None
    grid_start: float = 0.0
    grid_stop: Optional[float] = None
    grid_step: float = 0.1
    grid: Optional[list] = None
    lag: float = 0.0
    zero_tol: Optional[float] = None
    k_max: int = 2
    graded_betti: bool = False
    strands: list = field(default_factory=lambda: [1, 2, 3])
    pairs: list = field(default_factory=list)
    field: str = xl.GF2
    vertex_guard: int = pca.DEFAULT_VERTEX_GUARD
    simplex_budget: int = DEFAULT_SIMPLEX_BUDGET
    include_zero_bars: bool = False
    out_dir: str = "ripscope-out"
    out_format: str = "csv"
    timing: bool = False
    threads: int = 1
    cache: bool = True

    def validate(self) -> None:
        sources = [self.input_path, self.generator, self.fixture]
        if sum(s is not None for s in sources) != 1:
            raise ConfigError("give exactly one of --input, --generator, --fixture")
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.max_dim < 0:
            raise ConfigError("max_dim must be >= 0")
        if self.max_radius is not None and not self.max_radius > 0:
            raise ConfigError("max_radius must be positive")
        if self.grid is not None:
            if not self.grid:
                raise ConfigError("explicit grid is empty")
            if any(b < a for a, b in zip(self.grid, self.grid[1:])):
                raise ConfigError("grid must be ascending")
        elif not self.grid_step > 0:
            raise ConfigError("grid step must be positive")
        if self.lag < 0:
            raise ConfigError("lag must be nonnegative")
        if self.zero_tol is not None and not self.zero_tol > 0:
            raise ConfigError("zero_tol must be positive")
        if self.field not in xl.FIELDS:
            raise ConfigError(f"field must be one of {xl.FIELDS}")
        if self.out_format not in ("csv", "json"):
            raise ConfigError("output format must be csv or json")
        if self.generator is not None and self.generator not in GENERATORS:
            raise ConfigError(f"unknown generator {self.generator!r}")
        for p in self.pairs:
            if len(p) != 2 or p[0] > p[1]:
                raise ConfigError(f"bad scale pair {p!r}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        cfg = cls(**{k: v for k, v in data.items() if k in names})
        cfg.pairs = [list(p) for p in cfg.pairs]
        return cfg

    def header_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def read_config_header(text: str) -> RunConfig:
    """Recover the RunConfig embedded in a CSV or JSON output file."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return RunConfig.from_dict(json.loads(stripped)["config"])
    for line in text.splitlines():
        if line.startswith("# config: "):
            return RunConfig.from_dict(json.loads(line[len("# config: "):]))
    raise ValueError("no config header found")


# --- helpers -----------------------------------------------------------------------

def load_cloud(cfg: RunConfig) -> PointCloud:
    if cfg.fixture is not None:
        return load_fixture(cfg.fixture)
    if cfg.generator == "octagon":
        if not cfg.circumradius > 0:
            raise ConfigError("circumradius must be positive")
        return GENERATORS["octagon"](cfg.circumradius)
    if cfg.generator is not None:
        return GENERATORS[cfg.generator]()
    try:
        return read_structure(cfg.input_path, cfg.input_format, cfg.atoms, cfg.chains)
    except ParseError:
        raise
    except (ValueError, UnicodeDecodeError) as exc:
        raise ParseError(str(exc)) from exc


def resolve_radius(cfg: RunConfig, cloud: PointCloud) -> float:
    if cfg.max_radius is not None:
        return cfg.max_radius
    if len(cloud) < 2:
        return 1.0
    return round_scale(float(cloud.distance_matrix().max()))


def resolve_grid(cfg: RunConfig, radius: float) -> list[float]:
    if cfg.grid is not None:
        return [float(x) for x in cfg.grid]
    stop = cfg.grid_stop if cfg.grid_stop is not None else radius
    return scale_grid(cfg.grid_start, stop, cfg.grid_step)


def _cache_key(cloud: PointCloud, max_dim: int, radius: float) -> str:
    h = hashlib.sha256()
    h.update(cloud.points.tobytes())
    h.update(f"|{max_dim}|{radius!r}".encode())
    return h.hexdigest()[:24]


class Writer:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.root = Path(cfg.out_dir)
        self.root.mkdir(parents=True, exist_ok=True)
        self.written: list[str] = []

    def csv(self, name: str, body: str) -> None:
        if self.cfg.out_format == "json":
            rows = _csv_rows(body)
            self.json(name, rows)
            return
        path = self.root / f"{name}.csv"
        path.write_text(f"# config: {self.cfg.header_json()}\n{body}")
        self.written.append(path.name)

    def json(self, name: str, data) -> None:
        path = self.root / f"{name}.json"
        payload = {"config": self.cfg.to_dict(), "data": data}
        path.write_text(json.dumps(payload, indent=1, sort_keys=True) + "\n")
        self.written.append(path.name)


def _csv_rows(body: str) -> list[dict]:
    import csv
    import io

    return list(csv.DictReader(io.StringIO(body)))


@dataclass
class Timer:
    phases: dict = field(default_factory=dict)

    def run(self, name, fn, *args, **kwargs):
        t = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        finally:
            self.phases[name] = self.phases.get(name, 0.0) + time.perf_counter() - t


# --- pipeline ------------------------------------------------------------------------

def get_filtration(cfg: RunConfig, cloud: PointCloud, timer: Timer) -> Filtration:
    radius = resolve_radius(cfg, cloud)
    cache_file = None
    if cfg.cache:
        cache_dir = Path(cfg.out_dir) / ".cache"
        cache_file = cache_dir / f"rips-{_cache_key(cloud, cfg.max_dim, radius)}.txt"
        if cache_file.is_file():
            log.info("filtration cache hit %s", cache_file.name)
            return timer.run("filtration", Filtration.from_text, cache_file.read_text())
    filt = timer.run(
        "filtration", build_rips_filtration, cloud, cfg.max_dim, radius, cfg.simplex_budget
    )
    if cache_file is not None:
        cache_file.parent.mkdir(parents=True, exist_ok=True)
        cache_file.write_text(filt.to_text())
    return filt


def run_ph(cfg, filt, grid, out: Writer, timer: Timer) -> ph.Barcode:
    bc = timer.run("ph_reduction", ph.compute_barcodes, filt)
    for k in ph.reported_dims(filt.max_dim):
        sub = ph.Barcode(tuple(b for b in bc.bars if b.dim == k), bc.max_dim)
        out.csv(f"ph_barcode_dim{k}", sub.to_csv(cfg.include_zero_bars))
        out.csv(
            f"ph_betti_curve_dim{k}",
            ph.curves_to_csv(grid, {k: ph.betti_curve(bc, k, grid)}),
        )
    return bc


def run_pl(cfg, filt, grid, out: Writer, timer: Timer):
    k_max = min(cfg.k_max, filt.max_dim)
    t = time.perf_counter()
    curves = pl.spectra_curves(
        filt, k_max, grid, cfg.lag, cfg.zero_tol, threads=cfg.threads
    )
    timer.phases["eigensolve"] = timer.phases.get("eigensolve", 0.0) + time.perf_counter() - t
    for k in sorted(curves):
        out.csv(f"pl_spectra_k{k}", pl.curves_to_csv(grid, {k: curves[k]}))
    out.json("pl_eigenvalues", json.loads(pl.eigenvalues_json(grid, curves)))
    return curves


def run_pca(cfg, filt, grid, out: Writer, timer: Timer):
    bars = timer.run("facets", pca.facet_barcodes, filt)
    out.csv("pca_facet_bars", pca.facet_bars_to_csv(bars))
    which = ["fh", "facets"] + (["graded"] if cfg.graded_betti else [])
    t = time.perf_counter()
    records = pca.curves(
        filt, grid, which, cfg.strands, cfg.field, cfg.vertex_guard
    )
    timer.phases["hochster" if cfg.graded_betti else "fh_counting"] = time.perf_counter() - t
    out.csv("pca_f_vector", pca.records_to_csv(records, "f"))
    out.csv("pca_h_vector", pca.records_to_csv(records, "h"))
    out.csv("pca_facet_counts", pca.records_to_csv(records, "facets"))
    if cfg.graded_betti:
        for j in cfg.strands:
            sub = [
                pca.ScaleRecord(r.scale, r.f, r.h, r.facet_counts,
                                {key: v for key, v in (r.graded or {}).items()
                                 if key[1] - key[0] == j})
                for r in records
            ]
            out.csv(f"pca_graded_strand_j{j}", pca.records_to_csv(sub, "graded"))
    for e1, e2 in cfg.pairs:
        a, b = snapshot(filt, e1), snapshot(filt, e2)
        table, d = timer.run("hochster", pca.hilbert_table, a, b, cfg.field, cfg.vertex_guard)
        fh = pca.persistent_fh_vectors(table, filt.vertex_count, d)
        rows = ["scale1,scale2,i,j,value"] + [
            f"{e1!r},{e2!r},{i},{j},{v}" for (i, j), v in sorted(table.entries.items())
        ]
        tag = f"{e1:g}_{e2:g}"
        out.csv(f"pca_persistent_betti_{tag}", "\n".join(rows) + "\n")
        fh_rows = ["kind,index,value,n,d"]
        fh_rows += [f"h,{m},{v},{fh.n},{fh.d}" for m, v in enumerate(fh.h)]
        fh_rows += [f"f,{m - 1},{v},{fh.n},{fh.d}" for m, v in enumerate(fh.f)]
        out.csv(f"pca_persistent_fh_{tag}", "\n".join(fh_rows) + "\n")
    return records


def run_compare(cfg, filt, grid, out: Writer, timer: Timer) -> int:
    """Cross-checks between the three frameworks; returns the failure count."""
    bc = timer.run("ph_reduction", ph.compute_barcodes, filt)
    k_top = min(2, max(filt.max_dim - 1, 0))
    step = grid[1] - grid[0] if len(grid) > 1 else 0.0
    rows = ["check,scale,lag,k,expected,observed,status"]
    failures = 0

    def record(check, eps, lag, k, expected, observed):
        nonlocal failures
        ok = expected == observed
        failures += not ok
        rows.append(f"{check},{eps!r},{lag!r},{k},{expected},{observed},{'pass' if ok else 'FAIL'}")

    for lag in sorted({0.0, step}):
        curves = timer.run(
            "eigensolve", pl.spectra_curves, filt, k_top, grid, lag, cfg.zero_tol,
            threads=cfg.threads,
        )
        for k, series in curves.items():
            for eps, s in zip(grid, series):
                record("kernel_homology", eps, lag, k,
                       ph.persistent_betti(bc, k, eps, eps + lag), s.harmonic_dim)
    for eps in grid:
        snap = snapshot(filt, eps)
        betti = timer.run("exact_homology", xl.betti_numbers, snap, xl.GF2)
        fv = f_vector(snap)
        chi_b = sum((-1) ** k * b for k, b in enumerate(betti))
        record("euler", eps, 0.0, -1, euler_characteristic(fv), chi_b)
        for k in ph.reported_dims(filt.max_dim):
            exact = betti[k] if k < len(betti) else 0
            record("barcode_vs_exact", eps, 0.0, k, exact, ph.persistent_betti(bc, k, eps, eps))
        if filt.vertex_count <= min(10, cfg.vertex_guard):
            table, d = timer.run(
                "hochster", pca.hilbert_table, snap, snap, cfg.field, cfg.vertex_guard
            )
            fh = pca.persistent_fh_vectors(table, filt.vertex_count, d)
            expected = " ".join(map(str, h_vector(fv).values))
            record("hilbert", eps, 0.0, -1, expected, " ".join(map(str, fh.h)))
    out.csv("compare", "\n".join(rows) + "\n")
    return failures


def execute(cfg: RunConfig) -> int:
    cfg.validate()
    timer = Timer()
    cloud = timer.run("ingest", load_cloud, cfg)
    filt = get_filtration(cfg, cloud, timer)
    grid = resolve_grid(cfg, filt.max_radius)
    out = Writer(cfg)
    out.csv("rips_filtration", "scale,simplex\n" + "".join(
        f"{f!r},{' '.join(map(str, s))}\n" for s, f in filt
    ))
    status = EXIT_OK
    cmd = cfg.command
    if cmd in ("ph", "all"):
        run_ph(cfg, filt, grid, out, timer)
    if cmd in ("pl", "all"):
        run_pl(cfg, filt, grid, out, timer)
    if cmd in ("pca", "all"):
        run_pca(cfg, filt, grid, out, timer)
    if cmd == "compare":
        failures = run_compare(cfg, filt, grid, out, timer)
        print(f"compare: {failures} failed checks", file=sys.stderr)
        status = EXIT_NUMERIC if failures else EXIT_OK
    if cfg.timing:
        counts = []
        for eps in grid:
            snap_len = filt.prefix_length(eps)
            per_dim = [0] * (filt.max_dim + 1)
            for s in filt.simplices[:snap_len]:
                per_dim[len(s) - 1] += 1
            counts.append({"scale": eps, "s_k": per_dim})
        report = {"phases_seconds": timer.phases, "simplex_counts": counts}
        (Path(cfg.out_dir) / "timing.json").write_text(json.dumps(report, indent=1) + "\n")
    return status


# --- argument parsing ---------------------------------------------------------------

def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _pair(text: str) -> list[float]:
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("pair must be EPS1,EPS2")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="ripscope",
        description="Persistent homology, persistent Laplacians and persistent "
        "Stanley-Reisner invariants of a Vietoris-Rips filtration.",
    )
    p.add_argument("command", choices=COMMANDS)
    src = p.add_argument_group("input")
    src.add_argument("--input", dest="input_path")
    src.add_argument("--format", dest="input_format", choices=("xyz", "pdb"))
    src.add_argument("--atoms", type=lambda s: s.split(","), default=["CA"],
                     help="comma-separated PDB atom names (default CA)")
    src.add_argument("--chains", type=lambda s: s.split(","), default=None)
    src.add_argument("--generator", choices=sorted(GENERATORS))
    src.add_argument("--circumradius", type=float, default=2.0)
    src.add_argument("--fixture", help="vendored structure: c20, 1l2y, ...")
    f = p.add_argument_group("filtration")
    f.add_argument("--max-dim", type=int, default=3)
    f.add_argument("--max-radius", type=float)
    f.add_argument("--grid-start", type=float, default=0.0)
    f.add_argument("--grid-stop", type=float)
    f.add_argument("--grid-step", type=float, default=0.1)
    f.add_argument("--grid", type=_floats, help="explicit comma-separated scales")
    f.add_argument("--simplex-budget", type=int, default=DEFAULT_SIMPLEX_BUDGET)
    f.add_argument("--no-cache", dest="cache", action="store_false")
    s = p.add_argument_group("spectra")
    s.add_argument("--lag", type=float, default=0.0)
    s.add_argument("--zero-tol", type=float)
    s.add_argument("--k-max", type=int, default=2)
    a = p.add_argument_group("algebra")
    a.add_argument("--graded-betti", action="store_true")
    a.add_argument("--strands", type=lambda t: [int(x) for x in t.split(",")], default=[1, 2, 3])
    a.add_argument("--pair", dest="pairs", type=_pair, action="append", default=[],
                   help="EPS1,EPS2 scale pair for persistent graded Betti / f / h")
    a.add_argument("--field", choices=xl.FIELDS, default=xl.GF2)
    a.add_argument("--vertex-guard", type=int, default=pca.DEFAULT_VERTEX_GUARD)
    o = p.add_argument_group("output")
    o.add_argument("--out", dest="out_dir", default="ripscope-out")
    o.add_argument("--output-format", dest="out_format", choices=("csv", "json"), default="csv")
    o.add_argument("--include-zero-bars", action="store_true")
    o.add_argument("--timing", action="store_true")
    o.add_argument("--threads", type=int, default=int(os.environ.get(THREADS_ENV, "1")))
    o.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    data = vars(ns).copy()
    data.pop("verbose", None)
    return RunConfig.from_dict(data)


def _error(kind: str, code: int, exc: BaseException) -> int:
    print(json.dumps({"error": kind, "exit_code": code, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv: Optional[list] = None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING)
    cfg = config_from_args(ns)
    try:
        return execute(cfg)
    except ConfigError as exc:
        return _error("config", EXIT_CONFIG, exc)
    except (ParseError, FileNotFoundError, KeyError) as exc:
        return _error("parse", EXIT_PARSE, exc)
    except (pca.GuardExceeded, SimplexBudgetExceeded) as exc:
        return _error("guard", EXIT_GUARD, exc)
    except (pl.EigensolverError, ArithmeticError, pca.IncompleteTable) as exc:
        return _error("numerical", EXIT_NUMERIC, exc)


if __name__ == "__main__":
    sys.exit(main())
