"""REST front end: query recommendations, add interactions, tune profiles,
trigger offline evaluations.

State lives in immutable generations. A write builds a new frozen store (or
profile table) and swaps it in under a lock, so a request always sees one
consistent generation.
"""

from __future__ import annotations

import logging
import os
import threading
from functools import cached_property
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from .evaluation import SplitConfig, run_evaluation
from .ingestion import compute_statistics, export_canonical
from .model import EntityKind, EntityRef, Interaction, InteractionStore
from .recommenders import (
    Algorithm,
    RecommendationProfile,
    UseCase,
    recommend,
    relevant_store,
)

__all__ = ["Generation", "ServiceState", "create_app"]

log = logging.getLogger(__name__)


class Generation:
    """A frozen store plus the profiles that were current with it."""

    def __init__(self, store: InteractionStore, profiles: dict[Algorithm, RecommendationProfile]):
        self.store = store.freeze()
        self.profiles = dict(profiles)

    @cached_property
    def projected(self) -> InteractionStore:
        return relevant_store(self.store, UseCase.UC3)

    def store_for(self, use_case: UseCase) -> InteractionStore:
        return self.projected if use_case.projected else self.store

    @cached_property
    def known(self) -> dict[EntityKind, set[EntityRef]]:
        return {kind: self.store.entities(kind) for kind in EntityKind}


class ServiceState:
    def __init__(
        self,
        store: InteractionStore,
        profiles: dict[Algorithm, RecommendationProfile] | None = None,
        snapshot_path: str | os.PathLike | None = None,
        snapshot_every: int = 100,
    ) -> None:
        if profiles is None:
            profiles = {algo: RecommendationProfile(algo) for algo in Algorithm}
        self._generation = Generation(store, profiles)
        self._lock = threading.Lock()
        self.snapshot_path = snapshot_path
        self.snapshot_every = max(1, snapshot_every)
        self._pending_writes = 0

    @property
    def generation(self) -> Generation:
        return self._generation

    def add_interaction(self, interaction: Interaction) -> Generation:
        with self._lock:
            current = self._generation
            store = current.store.copy().add(interaction)
            self._generation = Generation(store, current.profiles)
            self._pending_writes += 1
            if self.snapshot_path and self._pending_writes >= self.snapshot_every:
                self.snapshot()
            return self._generation

    def update_profile(self, algorithm: Algorithm, **changes) -> RecommendationProfile:
        with self._lock:
            current = self._generation
            profile = current.profiles[algorithm].updated(**changes)
            profiles = dict(current.profiles)
            profiles[algorithm] = profile
            generation = Generation(current.store, profiles)
            # keep the cached projection, the store did not change
            if "projected" in current.__dict__:
                generation.__dict__["projected"] = current.projected
            self._generation = generation
            return profile

    def snapshot(self) -> None:
        if not self.snapshot_path:
            return
        tmp = f"{self.snapshot_path}.tmp"
        export_canonical(self._generation.store, tmp)
        os.replace(tmp, self.snapshot_path)
        self._pending_writes = 0
        log.info("snapshot written to %s", self.snapshot_path)


class CanonicalRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    source_kind: str
    source_id: str
    target_kind: str
    target_id: str
    weight: Optional[float] = None
    timestamp: Optional[int] = None


class ProfileUpdate(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k: Optional[int] = None
    neighborhood_size: Optional[int] = None
    similarity: Optional[str] = None
    filter_seen: Optional[bool] = None


class SplitBody(BaseModel):
    model_config = ConfigDict(extra="forbid")

    min_interactions: int = 11
    holdout: int = 10
    strategy: Optional[str] = None
    seed: int = 0


def _parse_use_case(token: str) -> UseCase:
    try:
        return UseCase.parse(token)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from None


def _parse_algorithm(token: str) -> Algorithm:
    try:
        return Algorithm(token.lower())
    except ValueError:
        raise HTTPException(status_code=400, detail=f"unknown algorithm {token!r}") from None


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="datamarket-rec", version="0.1.0")
    app.state.service = state

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request, exc):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/recommend/{use_case}/{target_id}")
    def get_recommendation(
        use_case: str,
        target_id: str,
        algo: str = "cf",
        k: Optional[int] = Query(None),
    ):
        uc = _parse_use_case(use_case)
        algorithm = _parse_algorithm(algo)
        gen = state.generation
        try:
            target = EntityRef(uc.target_kind, target_id)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        if target not in gen.known[uc.target_kind]:
            raise HTTPException(
                status_code=404, detail=f"unknown {uc.target_kind.value} {target_id!r}"
            )
        profile = gen.profiles[algorithm]
        if k is not None:
            try:
                profile = profile.updated(k=k)
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None
        ranked = recommend(gen.store_for(uc), uc, target, profile)
        return {
            "use_case": uc.token,
            "target": target_id,
            "algorithm": algorithm.value,
            "k": profile.k,
            "fallback": ranked.fallback,
            "items": [{"id": e.id, "score": score} for e, score in ranked.entries],
        }

    @app.post("/interactions", status_code=201)
    def post_interaction(record: CanonicalRecord):
        try:
            interaction = Interaction(
                EntityRef(EntityKind(record.source_kind.lower()), record.source_id),
                EntityRef(EntityKind(record.target_kind.lower()), record.target_id),
                weight=1 if record.weight is None else record.weight,
                timestamp=record.timestamp,
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        gen = state.add_interaction(interaction)
        return {"interactions": len(gen.store)}

    @app.get("/profiles/{algo}")
    def get_profile(algo: str):
        return state.generation.profiles[_parse_algorithm(algo)].to_dict()

    @app.put("/profiles/{algo}")
    def put_profile(algo: str, update: ProfileUpdate):
        algorithm = _parse_algorithm(algo)
        changes = update.model_dump(exclude_none=True)
        try:
            profile = state.update_profile(algorithm, **changes)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return profile.to_dict()

    @app.post("/evaluate")
    def post_evaluate(body: SplitBody, use_case: str = "uc1", algo: str = "cf"):
        uc = _parse_use_case(use_case)
        algorithm = _parse_algorithm(algo)
        try:
            config = SplitConfig(**body.model_dump())
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        gen = state.generation
        report = run_evaluation(gen.store_for(uc), uc, gen.profiles[algorithm], config)
        return report.to_dict()

    @app.get("/stats")
    def get_stats():
        return compute_statistics(state.generation.store).to_dict()

    return app
