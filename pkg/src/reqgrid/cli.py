"""Command line entry point: ``reqgrid run|stats|compare|audit|mock-serve|synth``."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path

from .analysis import analyze, compare_best, pivot_for_friedman, summarize_factor
from .backend import MockBackend, make_server
from .config import EmbeddingConfig, load_config
from .corpus import canonical_tasks
from .errors import EXIT_BACKEND, EXIT_CONFIG, EXIT_IO, BackendError, ConfigError, DesignError
from .report import WILCOXON_HEADER, emit_report, wilcoxon_rows
from .runner import FAMILIES, MEASURES, Factor, audit, load_results, mock_label_terms, run_grid
from .stats import friedman_test
from .synthetic import write_synthetic_corpora
from .zsl import EmbeddingMode, default_label_lexicon

log = logging.getLogger("reqgrid")


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.pattern:
        unknown = [p for p in args.pattern if p not in cfg.patterns]
        if unknown:
            raise ConfigError(f"unknown pattern(s) {unknown}")
        cfg = dataclasses.replace(cfg, patterns={p: cfg.patterns[p] for p in args.pattern})
    if args.embedding_mode or args.threshold is not None:
        emb = cfg.embedding
        cfg = dataclasses.replace(cfg, embedding=EmbeddingConfig(
            EmbeddingMode(args.embedding_mode) if args.embedding_mode else emb.mode,
            args.threshold if args.threshold is not None else emb.threshold,
            emb.batch_size))
    out = Path(args.out) if args.out else cfg.output_dir
    if out is None:
        raise ConfigError("no output directory: pass --out or set [output].dir")

    def progress(i, n, result):
        log.info("[%d/%d] %s wF1=%.4f", i, n, result.setting.id, result.report.weighted.f1)

    grid = run_grid(cfg, out, args.family, args.pipeline, args.resume, progress=progress)
    emit_report(grid.results, analyze(grid.results), out)
    print(f"planned {len(grid.planned)} settings, executed {len(grid.results)}; report in {out}")
    return 0


def _cmd_stats(args) -> int:
    results = load_results(args.results)
    factor = Factor(args.factor)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["family", "level", "avg", "max", "times_best", "friedman_Q", "df", "p_value"])
    for family in FAMILIES:
        if not any(r.setting.family == family for r in results):
            continue
        summ = summarize_factor(results, factor, args.measure, family)
        piv = pivot_for_friedman(results, factor, args.measure, family)
        if min(piv.values.shape) >= 2:
            res = friedman_test(piv.values)
            q, df, p = f"{res.statistic:.4f}", res.df, f"{res.p_value:.4g}" + ("*" if res.significant else "")
        else:
            q = df = p = ""
        for lv, st in summ.per_level.items():
            w.writerow([family, lv, f"{st.avg:.4f}", f"{st.max:.4f}", st.times_best, q, df, p])
    return 0


def _cmd_compare(args) -> int:
    a = load_results(args.a)
    b = load_results(args.b)
    comp = compare_best(a, b, args.task, shuffle_seed=args.shuffle_seed)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(WILCOXON_HEADER)
    w.writerows(wilcoxon_rows([comp]))
    return 0


def _cmd_audit(args) -> int:
    problems = audit(args.results)
    for p in problems:
        print(p)
    print(f"audit: {'OK' if not problems else f'{len(problems)} mismatches'}")
    return 0 if not problems else 1


def _cmd_mock_serve(args) -> int:
    terms = mock_label_terms(canonical_tasks(), default_label_lexicon())
    server = make_server(MockBackend(terms, dim=args.dim, seed=args.seed), args.host, args.port)
    host, port = server.server_address[:2]
    print(f"mock backend listening on http://{host}:{port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _cmd_synth(args) -> int:
    for name, path in write_synthetic_corpora(args.out, seed=args.seed).items():
        print(f"{name}: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="reqgrid", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute the experiment grid")
    p.add_argument("--config", required=True)
    p.add_argument("--family", choices=["all", *FAMILIES], default="all")
    p.add_argument("--pipeline", choices=["all", "inference", "embedding"], default="all")
    p.add_argument("--resume", action="store_true", help="continue from existing checkpoints")
    p.add_argument("--pattern", action="append", help="restrict to a pattern id (repeatable)")
    p.add_argument("--embedding-mode", choices=[m.value for m in EmbeddingMode])
    p.add_argument("--threshold", type=float)
    p.add_argument("--out", help="run directory (overrides [output].dir)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("stats", help="factor summary and Friedman test for a run directory")
    p.add_argument("--results", required=True)
    p.add_argument("--factor", choices=[f.value for f in Factor], required=True)
    p.add_argument("--measure", choices=MEASURES, default="wF1")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("compare", help="Wilcoxon test between the best settings of two runs")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--task", required=True)
    p.add_argument("--shuffle-seed", type=int, help="group items in a seeded random order")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("audit", help="recompute results.csv from the prediction files")
    p.add_argument("--results", required=True)
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("mock-serve", help="serve the deterministic mock backend over HTTP")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--dim", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_mock_serve)

    p = sub.add_parser("synth", help="write the synthetic stand-in corpora")
    p.add_argument("--out", default="data")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DesignError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
