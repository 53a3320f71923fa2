"""Regenerate the committed test fixtures and golden reports.

Run from the repository root::

    python scripts/make_fixtures.py

Only rerun this after an intentional behaviour change; the golden tests
exist to catch unintentional ones.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "tests" / "data"
sys.path.insert(0, str(ROOT / "tests"))

from conftest import hub_store  # noqa: E402

from datamarket_rec.cli import main  # noqa: E402
from datamarket_rec.evaluation import SplitConfig, SplitStrategy, run_evaluation  # noqa: E402
from datamarket_rec.ingestion import export_canonical, generate_synthetic, load_canonical  # noqa: E402
from datamarket_rec.model import EntityKind, EntityRef, Interaction, InteractionStore  # noqa: E402
from datamarket_rec.recommenders import Algorithm, RecommendationProfile, UseCase  # noqa: E402

GOLDEN_SHAPE = dict(
    n_users=200,
    n_datasets=15,
    n_services=100,
    dataset_density=6.0,
    service_density=10.0,
    skew=1.0,
    seed=7,
)


def single_target_store() -> InteractionStore:
    store = InteractionStore()
    target = EntityRef(EntityKind.USER, "target")
    for j in range(13):
        store.add(Interaction(target, EntityRef(EntityKind.DATASET, f"d{j:02d}")))
    for i in range(6):
        other = EntityRef(EntityKind.USER, f"o{i}")
        for j in range(i, i + 5):
            store.add(Interaction(other, EntityRef(EntityKind.DATASET, f"d{j:02d}")))
    return store.freeze()


def main_() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    export_canonical(generate_synthetic(**GOLDEN_SHAPE), DATA / "golden_store.csv")
    export_canonical(hub_store(), DATA / "hub_store.csv")
    export_canonical(single_target_store(), DATA / "single_target_store.csv")

    code = main(
        [
            "evaluate",
            str(DATA / "golden_store.csv"),
            "--uc", "all",
            "--algo", "mp,cf",
            "--seed", "7",
            "--table-out", str(DATA / "golden_report.tsv"),
            "--output", str(DATA / "golden_report.json"),
        ]
    )
    assert code == 0, code
    code = main(
        [
            "evaluate",
            str(DATA / "golden_store.csv"),
            "--strategy", "seeded-random",
            "--seed", "7",
            "--table-out", str(DATA / "golden_report_random.tsv"),
        ]
    )
    assert code == 0, code

    report = run_evaluation(
        load_canonical(DATA / "single_target_store.csv"),
        UseCase.UC1,
        RecommendationProfile(Algorithm.CF),
        SplitConfig(strategy=SplitStrategy.SEEDED_RANDOM, seed=3),
    )
    (DATA / "single_target_report.json").write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


if __name__ == "__main__":
    main_()
