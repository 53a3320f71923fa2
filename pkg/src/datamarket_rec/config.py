"""Declarative run configuration (TOML).

Example::

    [profiles.mp]
    k = 10

    [profiles.cf]
    k = 10
    neighborhood_size = 20
    similarity = "cosine"
    filter_seen = true

    [split]
    min_interactions = 11
    holdout = 10
    strategy = "seeded-random"
    seed = 7
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .evaluation import SplitConfig
from .recommenders import Algorithm, RecommendationProfile

__all__ = ["RunConfig", "read_toml", "default_profiles"]

_PROFILE_KEYS = {"k", "neighborhood_size", "similarity", "filter_seen"}
_SPLIT_KEYS = {"min_interactions", "holdout", "strategy", "seed"}


def read_toml(path: str | os.PathLike) -> dict:
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def default_profiles() -> dict[Algorithm, RecommendationProfile]:
    return {algo: RecommendationProfile(algo) for algo in Algorithm}


@dataclass
class RunConfig:
    profiles: dict[Algorithm, RecommendationProfile] = field(default_factory=default_profiles)
    split: SplitConfig = field(default_factory=SplitConfig)

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        unknown = set(data) - {"profiles", "split"}
        if unknown:
            raise ValueError(f"unknown config section(s): {', '.join(sorted(unknown))}")
        profiles = default_profiles()
        for name, values in data.get("profiles", {}).items():
            algo = Algorithm(name.lower())
            bad = set(values) - _PROFILE_KEYS
            if bad:
                raise ValueError(f"[profiles.{name}] has unknown key(s): {', '.join(sorted(bad))}")
            profiles[algo] = RecommendationProfile(algo, **values)
        split_values = data.get("split", {})
        bad = set(split_values) - _SPLIT_KEYS
        if bad:
            raise ValueError(f"[split] has unknown key(s): {', '.join(sorted(bad))}")
        return cls(profiles=profiles, split=SplitConfig(**split_values))

    @classmethod
    def load(cls, path: str | os.PathLike) -> RunConfig:
        return cls.from_dict(read_toml(path))
