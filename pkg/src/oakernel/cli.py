"""Command-line front end.

    oakernel gram     --dataset DIR --kernel wl-oa --h 4 [--normalize] [--format dense|libsvm] [--output FILE]
    oakernel validate --dataset DIR --kernel wl-oa [--oracle] | --matrix FILE
    oakernel bench    --dataset DIR | --synthetic N  [--kernel K] [--scale]
    oakernel inspect  --dataset DIR [--h 3] [--hierarchy FILE]

Exit codes: 0 success, 1 dataset parse error, 2 unknown kernel, 3 I/O error,
4 validation failure.
"""

from __future__ import annotations

import argparse
import logging
import random
import sys
import time
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from oakernel.assignment import assignment_kernel, cross_matrix, solve_hungarian
from oakernel.errors import InvalidMatrix, ParseError, UnknownKernel
from oakernel.graph import Dataset, parse_dataset, synthetic_dataset
from oakernel.hierarchy import dumps
from oakernel.kernels import (
    KERNELS,
    GramMatrix,
    dirac_hierarchy,
    edge_label_pair,
    feature_rows,
    gram,
    kernel_name,
    normalize,
    _column_gram,
)
from oakernel.validation import (
    DEFAULT_PSD_TOL,
    benchmark_csv,
    benchmark_linear_time,
    check_psd,
    layered_hierarchy,
)
from oakernel.wl import refine, wl_base_kernel

log = logging.getLogger("oakernel")

EXIT_OK, EXIT_PARSE, EXIT_KERNEL, EXIT_IO, EXIT_CHECK = 0, 1, 2, 3, 4
OA_KERNELS = ("V-OA", "E-OA", "WL-OA")
ORACLE_SAMPLE = 50


@dataclass
class RunConfig:
    command: str
    dataset: str | None = None
    synthetic: int | None = None
    kernel: str | None = None
    h: int = 3
    normalize: bool = False
    output_format: str = "dense"
    output_path: str = "-"
    seed: int = 0
    threads: int = 1
    oracle: bool = False
    matrix: str | None = None
    tolerance: float = DEFAULT_PSD_TOL
    scale: bool = False
    hierarchy_path: str | None = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        return cls(
            command=args.command,
            dataset=args.dataset,
            synthetic=args.synthetic,
            kernel=getattr(args, "kernel", None),
            h=args.h,
            normalize=getattr(args, "normalize", False),
            output_format=getattr(args, "format", "dense"),
            output_path=getattr(args, "output", "-"),
            seed=args.seed,
            threads=args.threads,
            oracle=getattr(args, "oracle", False),
            matrix=getattr(args, "matrix", None),
            tolerance=getattr(args, "tolerance", DEFAULT_PSD_TOL),
            scale=getattr(args, "scale", False),
            hierarchy_path=getattr(args, "hierarchy", None),
        )


class CommandError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def fmt(x) -> str:
    return format(float(x), ".9g")


def params_text(M: GramMatrix) -> str:
    items = [f"{k}={v}" for k, v in sorted(M.params.items())]
    items.append(f"normalized={int(M.normalized)}")
    return ",".join(items)


def format_dense(M: GramMatrix) -> str:
    lines = [f"{M.n} {M.kernel_name} {params_text(M)}"]
    lines.extend(" ".join(fmt(x) for x in row) for row in M.values)
    return "\n".join(lines) + "\n"


def format_libsvm(M: GramMatrix, class_labels) -> str:
    lines = []
    for i, row in enumerate(M.values):
        cells = " ".join(f"{j + 1}:{fmt(x)}" for j, x in enumerate(row))
        lines.append(f"{class_labels[i]} 0:{i + 1} {cells}")
    return "\n".join(lines) + "\n"


def read_dense(path) -> np.ndarray:
    """Read a dense matrix file; the ``n kernel params`` header line is optional."""
    rows = []
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip()]
    if lines and len(lines[0]) == 3 and not _is_number(lines[0][1]):
        lines = lines[1:]
    for tokens in lines:
        try:
            rows.append([float(t) for t in tokens])
        except ValueError:
            raise InvalidMatrix(f"non-numeric entry in {path}") from None
    if any(len(r) != len(rows) for r in rows):
        raise InvalidMatrix(f"{path} does not hold a square matrix")
    return np.array(rows, dtype=np.float64).reshape(len(rows), len(rows))


def _is_number(text):
    try:
        float(text)
        return True
    except ValueError:
        return False


def load_dataset(cfg: RunConfig) -> Dataset:
    if cfg.synthetic is not None:
        return synthetic_dataset(cfg.seed, cfg.synthetic)
    if cfg.dataset is None:
        raise CommandError(EXIT_PARSE, "either --dataset or --synthetic is required")
    path = Path(cfg.dataset)
    try:
        return parse_dataset(path)
    except ParseError as exc:
        raise CommandError(EXIT_PARSE, f"parse error: {exc}") from None
    except OSError as exc:
        raise CommandError(EXIT_PARSE, f"cannot read dataset: {exc}") from None


def write_output(cfg: RunConfig, text: str):
    if cfg.output_path in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(cfg.output_path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise CommandError(EXIT_IO, f"cannot write {cfg.output_path}: {exc}") from None


def resolve_kernel(name) -> str:
    try:
        return kernel_name(name)
    except UnknownKernel as exc:
        raise CommandError(EXIT_KERNEL, str(exc)) from None


def cmd_gram(cfg: RunConfig) -> int:
    name = resolve_kernel(cfg.kernel)
    ds = load_dataset(cfg)
    if len(ds) == 0:
        raise CommandError(EXIT_PARSE, "dataset contains no graphs")
    t0 = time.perf_counter()
    M = gram(ds, name, h=cfg.h, normalized=cfg.normalize, threads=cfg.threads)
    log.debug("%s Gram matrix over %d graphs in %.3fs", name, len(ds), time.perf_counter() - t0)
    if cfg.output_format == "libsvm":
        write_output(cfg, format_libsvm(M, ds.class_labels))
    else:
        write_output(cfg, format_dense(M))
    return EXIT_OK


def oracle_value(ds: Dataset, name: str, i: int, j: int, colours=None):
    """Assignment value of graphs ``i`` and ``j`` from the Hungarian method on the
    explicit base kernel matrix."""
    G, H = ds.graphs[i], ds.graphs[j]
    if name == "V-OA":
        X, Y, k = list(G.labels), list(H.labels), lambda a, b: int(a == b)
    elif name == "E-OA":
        X = [edge_label_pair(G, u, v) for u, v in G.edges]
        Y = [edge_label_pair(H, u, v) for u, v in H.edges]
        k = lambda a, b: int(a == b)  # noqa: E731
    else:
        X = [(i, v) for v in range(G.vertex_count)]
        Y = [(j, v) for v in range(H.vertex_count)]
        k = lambda a, b: wl_base_kernel(colours, a[0], a[1], b[0], b[1])  # noqa: E731
    if not X and not Y:
        return 0
    return solve_hungarian(np.array(cross_matrix(k, X, Y), dtype=np.int64))[0]


def run_oracle(cfg: RunConfig, ds: Dataset, name: str, M: GramMatrix) -> list:
    rng = random.Random(cfg.seed)
    n = len(ds)
    all_pairs = [(i, j) for i in range(n) for j in range(i, n)]
    sample = sorted(rng.sample(all_pairs, min(ORACLE_SAMPLE, len(all_pairs))))
    colours = refine(ds.graphs, cfg.h) if name == "WL-OA" else None
    mismatches = []
    for i, j in sample:
        expected = oracle_value(ds, name, i, j, colours)
        if M.values[i, j] != expected:
            mismatches.append((i, j, M.values[i, j], expected))
    return mismatches


def cmd_validate(cfg: RunConfig) -> int:
    if cfg.matrix is not None:
        try:
            values = read_dense(cfg.matrix)
        except OSError as exc:
            raise CommandError(EXIT_IO, f"cannot read {cfg.matrix}: {exc}") from None
        except InvalidMatrix as exc:
            raise CommandError(EXIT_CHECK, str(exc)) from None
        M = GramMatrix(values, "file", {}, False)
        name = None
        ds = None
    else:
        name = resolve_kernel(cfg.kernel)
        ds = load_dataset(cfg)
        M = gram(ds, name, h=cfg.h, normalized=False, threads=cfg.threads)
    try:
        report = check_psd(normalize(M) if cfg.normalize else M, cfg.tolerance)
    except InvalidMatrix as exc:
        print(f"FAIL {exc}", file=sys.stderr)
        return EXIT_CHECK
    print(report)
    ok = report.passed
    if cfg.oracle and name is not None:
        if name not in OA_KERNELS:
            print(f"oracle: skipped, {name} is not an assignment kernel")
        else:
            mismatches = run_oracle(cfg, ds, name, M)
            for i, j, got, expected in mismatches:
                print(f"oracle mismatch at pair ({i}, {j}): histogram={fmt(got)} hungarian={fmt(expected)}",
                      file=sys.stderr)
            print(f"oracle: {'PASS' if not mismatches else 'FAIL'} "
                  f"({min(ORACLE_SAMPLE, len(ds) * (len(ds) + 1) // 2)} pairs)")
            ok = ok and not mismatches
    return EXIT_OK if ok else EXIT_CHECK


def _time_ns(fn) -> int:
    t0 = time.perf_counter_ns()
    fn()
    return time.perf_counter_ns() - t0


def pair_timings(ds: Dataset, name: str, h: int, seed: int, pairs: int = 5) -> tuple:
    """Median per-pair time of the histogram route and the Hungarian route."""
    rng = random.Random(seed)
    n = len(ds)
    sample = [(rng.randrange(n), rng.randrange(n)) for _ in range(pairs)]
    colours = refine(ds.graphs, h) if name == "WL-OA" else None
    hist_times, hung_times = [], []
    for i, j in sample:
        G, H = ds.graphs[i], ds.graphs[j]
        if name == "WL-OA":
            hier = colours.hierarchy
            X, Y = list(colours.vertex_ids(i)), list(colours.vertex_ids(j))
        elif name == "V-OA":
            X, Y = list(G.labels), list(H.labels)
            hier = dirac_hierarchy(X + Y) if X or Y else None
        else:
            X = [edge_label_pair(G, u, v) for u, v in G.edges]
            Y = [edge_label_pair(H, u, v) for u, v in H.edges]
            hier = dirac_hierarchy(X + Y) if X or Y else None
        if hier is None:
            continue
        hist_times.append(_time_ns(lambda: assignment_kernel(hier, X, Y)))
        hung_times.append(_time_ns(lambda: solve_hungarian(np.array(cross_matrix(hier, X, Y)))))
    if not hist_times:
        return None, None
    return int(np.median(hist_times)), int(np.median(hung_times))


def cmd_bench(cfg: RunConfig) -> int:
    names = [resolve_kernel(cfg.kernel)] if cfg.kernel else list(KERNELS)
    ds = load_dataset(cfg)
    if len(ds) == 0:
        raise CommandError(EXIT_PARSE, "dataset contains no graphs")
    lines = ["kernel,graphs,gram_ns,pair_histogram_ns,pair_hungarian_ns"]
    for name in names:
        t = _time_ns(lambda: _column_gram(*feature_rows(ds, name, cfg.h), threads=cfg.threads))
        hist_ns = hung_ns = None
        if name in OA_KERNELS:
            hist_ns, hung_ns = pair_timings(ds, name, cfg.h, cfg.seed)
        lines.append(",".join(str(x) if x is not None else "" for x in (name, len(ds), t, hist_ns, hung_ns)))
    text = "\n".join(lines) + "\n"
    if cfg.scale:
        hier = layered_hierarchy([8, 8, 8], seed=cfg.seed)
        rows = benchmark_linear_time(hier, [256, 512, 1024, 2048, 4096], seed=cfg.seed, hungarian_max=512)
        text += "\n" + benchmark_csv(rows)
    write_output(cfg, text)
    return EXIT_OK


def cmd_inspect(cfg: RunConfig) -> int:
    ds = load_dataset(cfg)
    n_vertices = sum(g.vertex_count for g in ds.graphs)
    n_edges = sum(g.edge_count for g in ds.graphs)
    labels = Counter(lab for g in ds.graphs for lab in g.labels)
    classes = Counter(ds.class_labels)
    out = [
        f"dataset: {ds.name}",
        f"graphs: {len(ds)}",
        f"vertices: {n_vertices}",
        f"edges: {n_edges}",
        f"vertex labels: {len(labels)}",
        "classes: " + ", ".join(f"{c}:{classes[c]}" for c in sorted(classes)),
    ]
    if len(ds):
        colours = refine(ds.graphs, cfg.h)
        per_round = [len({c for cols in rnd for c in cols}) for rnd in colours.colours]
        out.append(f"wl colours per round (h={cfg.h}): " + " ".join(map(str, per_round)))
        hier = colours.hierarchy
        out.append(f"wl hierarchy nodes: {hier.node_count}")
        if cfg.hierarchy_path:
            try:
                Path(cfg.hierarchy_path).write_text(dumps(hier))
            except OSError as exc:
                raise CommandError(EXIT_IO, f"cannot write {cfg.hierarchy_path}: {exc}") from None
    write_output(cfg, "\n".join(out) + "\n")
    return EXIT_OK


COMMANDS = {"gram": cmd_gram, "validate": cmd_validate, "bench": cmd_bench, "inspect": cmd_inspect}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dataset", help="directory holding DS_A.txt, DS_graph_indicator.txt, ...")
    common.add_argument("--synthetic", type=int, metavar="N", help="use N seeded random graphs instead")
    common.add_argument("--h", type=int, default=3, help="WL refinement rounds (WL, WL-OA)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1, help="cap on Gram assembly workers")
    common.add_argument("--output", default="-", help="output file, '-' for stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="oakernel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gram", parents=[common], help="compute and export a Gram matrix")
    p.add_argument("--kernel", required=True, help="one of " + ", ".join(KERNELS))
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--format", choices=("dense", "libsvm"), default="dense")

    p = sub.add_parser("validate", parents=[common], help="check a Gram matrix for positive semidefiniteness")
    p.add_argument("--kernel")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--matrix", help="validate a dense matrix file instead of computing one")
    p.add_argument("--oracle", action="store_true", help="cross-check sampled pairs with the Hungarian method")
    p.add_argument("--tolerance", type=float, default=DEFAULT_PSD_TOL)

    p = sub.add_parser("bench", parents=[common], help="time Gram computation as CSV")
    p.add_argument("--kernel")
    p.add_argument("--scale", action="store_true", help="append a doubling-size histogram/Hungarian series")

    p = sub.add_parser("inspect", parents=[common], help="summarise a dataset")
    p.add_argument("--hierarchy", help="write the WL hierarchy in text form to this file")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = RunConfig.from_args(args)
    if cfg.command == "validate" and cfg.matrix is None and cfg.kernel is None:
        print("validate needs --kernel or --matrix", file=sys.stderr)
        return EXIT_KERNEL
    try:
        return COMMANDS[cfg.command](cfg)
    except CommandError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
