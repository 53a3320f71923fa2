"""Command line entry point.

Exit codes: 0 on success, 1 when an evaluation run had no evaluable
targets, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig
from .evaluation import SplitConfig, SplitStrategy, run_evaluation
from .ingestion import (
    CanonicalFormatError,
    MetaKaggleMapping,
    adapt_meta_kaggle,
    compare_with_snapshot,
    compute_statistics,
    export_canonical,
    generate_synthetic,
    load_canonical,
)
from .model import EntityRef, project_dataset_service
from .recommenders import Algorithm, UseCase, recommend, relevant_store
from .reporting import format_table, to_json

log = logging.getLogger("datamarket_rec")

EXIT_OK = 0
EXIT_NO_CASES = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    return p


def _load_store(path: str):
    return load_canonical(_existing(path))


def _run_config(args) -> RunConfig:
    if args.profile:
        return RunConfig.load(_existing(args.profile))
    return RunConfig()


def _use_cases(text: str) -> list[UseCase]:
    if text.strip().lower() == "all":
        return list(UseCase)
    return [UseCase.parse(tok) for tok in text.split(",") if tok.strip()]


def _algorithms(text: str) -> list[Algorithm]:
    try:
        return [Algorithm(tok.strip().lower()) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- subcommands -------------------------------------------------------------


def cmd_ingest(args) -> int:
    if args.meta_kaggle:
        if not (args.forum and args.votes and args.mapping and args.out):
            raise UsageError("--meta-kaggle needs --forum, --votes, --mapping and --out")
        mapping = MetaKaggleMapping.load(_existing(args.mapping))
        n = adapt_meta_kaggle(_existing(args.forum), _existing(args.votes), mapping, args.out)
        log.info("wrote %d records to %s", n, args.out)
        store = load_canonical(args.out)
    elif args.canonical:
        store = _load_store(args.canonical)
        if args.out:
            export_canonical(store, args.out)
    else:
        raise UsageError("give --canonical FILE or --meta-kaggle")

    stats = compute_statistics(store)
    if args.with_projection:
        projected = project_dataset_service(store)
        stats = compute_statistics(store.copy().extend(projected))
    sys.stdout.write(stats.format())
    if args.check_snapshot:
        for problem in compare_with_snapshot(stats):
            log.warning("snapshot mismatch: %s", problem)
    return EXIT_OK


def cmd_project(args) -> int:
    store = _load_store(args.store)
    projected = project_dataset_service(store)
    export_canonical(projected, args.out)
    sys.stdout.write(compute_statistics(projected).format())
    return EXIT_OK


def cmd_recommend(args) -> int:
    config = _run_config(args)
    uc = UseCase.parse(args.uc)
    algo = _algorithms(args.algo)[0]
    profile = config.profiles[algo]
    if args.k is not None:
        profile = profile.updated(k=args.k)
    store = relevant_store(_load_store(args.store), uc)
    target = EntityRef(uc.target_kind, args.target)
    ranked = recommend(store, uc, target, profile)
    if ranked.fallback:
        log.info("%s has no interactions, serving the most-popular list", target)
    for rank, (entity, score) in enumerate(ranked.entries, start=1):
        sys.stdout.write(f"{rank}\t{entity.id}\t{score:.6f}\n")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = _run_config(args)
    split = config.split
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.strategy is not None:
        overrides["strategy"] = SplitStrategy(args.strategy)
    if args.min_interactions is not None:
        overrides["min_interactions"] = args.min_interactions
    if args.holdout is not None:
        overrides["holdout"] = args.holdout
    if overrides:
        split = SplitConfig(**{**split.to_dict(), **overrides})

    store = _load_store(args.store)
    reports = []
    for uc in _use_cases(args.uc):
        for algo in _algorithms(args.algo):
            reports.append(run_evaluation(store, uc, config.profiles[algo], split))

    table = format_table(reports)
    sys.stdout.write(table)
    if args.table_out:
        Path(args.table_out).write_text(table, encoding="utf-8")
    if args.output:
        Path(args.output).write_text(to_json(reports), encoding="utf-8")
    if any(r.metrics.n_cases == 0 for r in reports):
        log.warning("at least one run had no evaluable targets")
        return EXIT_NO_CASES
    return EXIT_OK


def cmd_generate(args) -> int:
    store = generate_synthetic(
        args.users,
        args.datasets,
        args.services,
        dataset_density=args.dataset_density,
        service_density=args.service_density,
        skew=args.skew,
        seed=args.seed if args.seed is not None else 0,
        timestamps=not args.no_timestamps,
    )
    export_canonical(store, args.out)
    sys.stdout.write(compute_statistics(store).format())
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceState, create_app

    config = _run_config(args)
    store = _load_store(args.store)
    state = ServiceState(
        store,
        config.profiles,
        snapshot_path=args.snapshot,
        snapshot_every=args.snapshot_every,
    )
    host, _, port = args.bind.rpartition(":")
    uvicorn.run(create_app(state), host=host or "127.0.0.1", port=int(port))
    if args.snapshot:
        state.snapshot()
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    common.add_argument("--profile", default=argparse.SUPPRESS, help="TOML run configuration")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(
        prog="datamarket-rec",
        description="Recommendations for users, datasets and services in a data market.",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="load or convert interaction files")
    p.add_argument("--canonical", help="canonical CSV file")
    p.add_argument("--meta-kaggle", action="store_true", help="convert Meta Kaggle tables")
    p.add_argument("--forum", help="forum table (user -> dataset)")
    p.add_argument("--votes", help="vote table (user -> service)")
    p.add_argument("--mapping", help="TOML column mapping for --meta-kaggle")
    p.add_argument("--out", help="canonical CSV to write")
    p.add_argument("--with-projection", action="store_true",
                   help="also count dataset/service links")
    p.add_argument("--check-snapshot", action="store_true",
                   help="warn where statistics differ from the 2017-11-15 snapshot")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("project", parents=[common], help="derive dataset -> service links")
    p.add_argument("store")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("recommend", parents=[common], help="top-k list for one target")
    p.add_argument("store")
    p.add_argument("--uc", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--algo", default="cf")
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("evaluate", parents=[common], help="offline leave-n-out evaluation")
    p.add_argument("store")
    p.add_argument("--uc", default="all", help="comma list of uc1..uc4, or 'all'")
    p.add_argument("--algo", default="mp,cf", help="comma list of mp, cf")
    p.add_argument("--strategy", choices=[s.value for s in SplitStrategy])
    p.add_argument("--min-interactions", type=int)
    p.add_argument("--holdout", type=int)
    p.add_argument("--output", help="write the JSON report here")
    p.add_argument("--table-out", help="write the delimited table here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("generate", parents=[common], help="seeded synthetic store")
    p.add_argument("--users", type=int, default=200)
    p.add_argument("--datasets", type=int, default=15)
    p.add_argument("--services", type=int, default=100)
    p.add_argument("--dataset-density", type=float, default=4.0)
    p.add_argument("--service-density", type=float, default=8.0)
    p.add_argument("--skew", type=float, default=1.0)
    p.add_argument("--no-timestamps", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("serve", parents=[common], help="run the REST service")
    p.add_argument("store")
    p.add_argument("--bind", default="127.0.0.1:8000", help="host:port")
    p.add_argument("--snapshot", help="canonical file receiving periodic snapshots")
    p.add_argument("--snapshot-every", type=int, default=100)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("seed", None), ("profile", None), ("verbose", False)):
        if not hasattr(args, name):
            setattr(args, name, default)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (UsageError, CanonicalFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
