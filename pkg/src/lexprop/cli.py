"""Command-line front end.

Commands mirror the pipeline stages (vocab, cooccur, embed, graph, induce,
bootstrap) plus evaluation utilities (evaluate, compare, neighbors). Every
stage persists an artifact with a metadata sidecar and skips itself when
nothing it depends on has changed.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numerical convergence failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .config import PipelineConfig, load_config, parse_assignments
from .errors import ConfigError, ConvergenceError, DataError, LexpropError
from .evaluation import (
    ClassDistribution,
    GoldLexicon,
    auc_binary,
    class_mass_labels,
    kendall_tau,
    lexicon_tau_top,
    ternary_f1,
)
from .pipeline import (
    output_lock,
    neighbors_query,
    stage_cooccur,
    stage_embed,
    stage_graph,
    stage_induce,
    stage_vocab,
)
from .propagation import Lexicon

log = logging.getLogger(__name__)

CONFIG_ENV = "LEXPROP_CONFIG"


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1 (argparse defaults to 2, which we reserve for data errors)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_config_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "-c", "--config",
        default=None,
        help=f"pipeline config file (default: ${CONFIG_ENV})",
    )
    sub.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config value (repeatable; flags win over the file)",
    )


def _resolve_config(args: argparse.Namespace) -> PipelineConfig:
    path = args.config or os.environ.get(CONFIG_ENV)
    if path is None and not args.overrides:
        raise ConfigError(
            f"no configuration: pass --config, set ${CONFIG_ENV}, or use --set overrides"
        )
    return load_config(path, parse_assignments(args.overrides))


def _parse_distribution(text: str) -> ClassDistribution:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(
            "--distribution expects 'positive,neutral,negative' fractions"
        )
    try:
        p, m, n = (float(x) for x in parts)
    except ValueError:
        raise ConfigError(f"bad distribution {text!r}") from None
    return ClassDistribution(p, m, n)


def build_parser() -> _Parser:
    parser = _Parser(
        prog="lexprop",
        description="Induce and evaluate domain-specific sentiment lexicons.",
    )
    parser.add_argument("--version", action="version", version=f"lexprop {__version__}")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    subs = parser.add_subparsers(dest="command", required=True)

    for name, helptext in (
        ("vocab", "build the vocabulary artifact from the corpus"),
        ("cooccur", "count windowed co-occurrences against the vocabulary"),
        ("embed", "compute the PPMI matrix and SVD embeddings"),
        ("graph", "build the k-nearest-neighbor lexical graph"),
        ("induce", "score the vocabulary with the configured method"),
        ("bootstrap", "induce with seed-subset resampling (adds a std column)"),
    ):
        sub = subs.add_parser(name, help=helptext)
        _add_config_args(sub)

    ev = subs.add_parser("evaluate", help="score a lexicon against a gold lexicon")
    ev.add_argument("lexicon", help="induced lexicon TSV")
    ev.add_argument("gold", help="gold TSV: word + label or decimal valence")
    ev.add_argument(
        "--mode",
        choices=("auc", "ternary", "tau", "all"),
        default="all",
        help="which metric(s) to report (default: all that the gold supports)",
    )
    ev.add_argument(
        "--distribution",
        default=None,
        metavar="P,M,N",
        help="class fractions for ternary labeling (default: from the gold)",
    )
    ev.add_argument(
        "--neutral-words",
        default=None,
        metavar="FILE",
        help="one-per-line words to add to the gold as neutral",
    )
    ev.add_argument("--out", default=None, help="report path (default: <lexicon>.report.tsv)")

    cmp_ = subs.add_parser("compare", help="rank-correlate two lexicons on their top words")
    cmp_.add_argument("lexicon_a")
    cmp_.add_argument("lexicon_b")
    cmp_.add_argument("--top-frac", type=float, default=0.25)
    cmp_.add_argument(
        "--intersection",
        action="store_true",
        help="restrict to the intersection of the top sets instead of the union",
    )

    nb = subs.add_parser("neighbors", help="query nearest neighbors in the embeddings")
    nb.add_argument("word")
    nb.add_argument("-k", type=int, default=10)
    _add_config_args(nb)

    return parser


def _cmd_stage(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    stages = {
        "vocab": (stage_vocab,),
        "cooccur": (stage_cooccur,),
        "embed": (stage_embed,),
        "graph": (stage_graph,),
        "induce": (stage_induce,),
        "bootstrap": (stage_induce, {"with_bootstrap": True}),
    }
    entry = stages[args.command]
    func = entry[0]
    kwargs = entry[1] if len(entry) > 1 else {}
    with output_lock(cfg):
        out = func(cfg, **kwargs)
    print(out)
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    lexicon = Lexicon.from_tsv(args.lexicon)
    try:
        gold = GoldLexicon.from_tsv(args.gold)
        if args.neutral_words:
            from .propagation import load_seed_words

            gold.add_neutral_words(load_seed_words(args.neutral_words))
    except DataError as exc:
        raise DataError(f"{args.gold}: {exc}") from exc

    rows: list[tuple[str, float, int, str]] = []
    want = ("auc", "ternary", "tau") if args.mode == "all" else (args.mode,)

    if "auc" in want and (gold.binary or args.mode != "all"):
        n = sum(1 for w in gold.binary if w in lexicon)
        rows.append(("auc", auc_binary(lexicon, gold), n, ""))
    if "ternary" in want and (gold.ternary or args.mode != "all"):
        if args.distribution:
            dist = _parse_distribution(args.distribution)
        else:
            shared_labels = [l for w, l in gold.ternary.items() if w in lexicon]
            dist = ClassDistribution.from_labels(shared_labels)
        labeled = class_mass_labels(lexicon, dist)
        n = sum(1 for w in gold.ternary if w in lexicon)
        params = (
            f"dist={dist.frac_positive:.4g},{dist.frac_neutral:.4g},"
            f"{dist.frac_negative:.4g}"
        )
        rows.append(("ternary_f1", ternary_f1(labeled, gold), n, params))
    if "tau" in want and (gold.continuous or args.mode != "all"):
        n = sum(1 for w in gold.continuous if w in lexicon)
        rows.append(("kendall_tau", kendall_tau(lexicon, gold.continuous), n, ""))
    if not rows:
        raise DataError(f"{args.gold}: gold lexicon supports none of the requested metrics")

    report = "\n".join(f"{m}\t{v:.6f}\tn={n}\t{p}" for m, v, n, p in rows)
    print(report)
    out = Path(args.out) if args.out else Path(args.lexicon + ".report.tsv")
    out.write_text(report + "\n", encoding="utf-8")
    log.info("report written to %s", out)
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    lex_a = Lexicon.from_tsv(args.lexicon_a)
    lex_b = Lexicon.from_tsv(args.lexicon_b)
    subset = "intersection" if args.intersection else "union"
    tau = lexicon_tau_top(lex_a, lex_b, top_frac=args.top_frac, subset=subset)
    print(f"tau_top\t{tau:.6f}\ttop_frac={args.top_frac:g}\tsubset={subset}")
    return 0


def _cmd_neighbors(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    for word, sim in neighbors_query(cfg, args.word, args.k):
        print(f"{word}\t{sim:.6f}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command in ("vocab", "cooccur", "embed", "graph", "induce", "bootstrap"):
            return _cmd_stage(args)
        if args.command == "evaluate":
            return _cmd_evaluate(args)
        if args.command == "compare":
            return _cmd_compare(args)
        return _cmd_neighbors(args)
    except ConfigError as exc:
        print(f"lexprop: config error: {exc}", file=sys.stderr)
        return 1
    except ConvergenceError as exc:
        print(f"lexprop: convergence failure: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"lexprop: data error: {exc}", file=sys.stderr)
        return 2
    except LexpropError as exc:
        print(f"lexprop: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"lexprop: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
