from __future__ import annotations

import re
from pathlib import Path

import pytest

from datamarket_rec.model import EntityKind, EntityRef, Interaction, InteractionStore

DATA = Path(__file__).parent / "data"

_criteria: dict[str, str] = {}


def pytest_runtest_logreport(report):
    match = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not match:
        return
    key = f"criterion {match.group(1)} ({match.group(2).replace('_', ' ')})"
    if report.skipped:
        _criteria[key] = "SKIP"
    elif report.failed:
        _criteria[key] = "FAIL"
    elif report.when == "call":
        _criteria[key] = "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_criteria, key=lambda k: int(k.split()[1])):
        terminalreporter.write_line(f"{_criteria[key]:4}  {key}")


@pytest.fixture
def data_dir() -> Path:
    return DATA


def u(i):
    return EntityRef(EntityKind.USER, i)


def d(i):
    return EntityRef(EntityKind.DATASET, i)


def s(i):
    return EntityRef(EntityKind.SERVICE, i)


def hub_store(n_normal: int = 12, n_evaluated: int = 8, n_leaves: int = 30) -> InteractionStore:
    """Raw store in which one dataset, ``hub``, is linked to every service.

    Evaluated services ``e*`` touch all normal datasets early and the hub
    last; leaf services ``l*`` touch the hub and one normal dataset and
    stay below the evaluation threshold.
    """
    store = InteractionStore()
    hub = d("hub")
    for i in range(n_evaluated):
        svc = s(f"e{i}")
        for k in range(n_normal):
            user = u(f"x{i}_{k}")
            t = 10 * k + 1
            store.add(Interaction(user, d(f"n{k:02d}"), timestamp=t))
            store.add(Interaction(user, svc, timestamp=t))
        user = u(f"h{i}")
        store.add(Interaction(user, hub, timestamp=10_000))
        store.add(Interaction(user, svc, timestamp=10_000))
    for j in range(n_leaves):
        user = u(f"w{j}")
        t = 500 + j
        store.add(Interaction(user, hub, timestamp=t))
        store.add(Interaction(user, s(f"l{j:02d}"), timestamp=t))
        store.add(Interaction(user, d(f"n{j % n_normal:02d}"), timestamp=t))
    return store.freeze()
