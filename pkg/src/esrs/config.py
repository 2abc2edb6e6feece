"""Engine configuration: every threshold in one document.

Values resolve in three layers: built-in defaults, then the dataset's
config section, then the JSON file named by the ESRS_CONFIG environment
variable.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Mapping

from .errors import ParseError

ENV_CONFIG_VAR = "ESRS_CONFIG"


@dataclass(frozen=True)
class EngineConfig:
    # interest-score weights
    w_alpha: float = 0.25
    w_beta: float = 0.25
    w_gamma: float = 0.25
    w_delta: float = 0.25
    prop_w_category: float = 1 / 3
    prop_w_popularity: float = 1 / 3
    prop_w_review: float = 1 / 3
    # user model
    learning_rate: float = 0.1
    kappa: float = 5.0
    tau: float = 10.0
    content_prior: float = 0.5
    preference_prior: float = 0.5
    # engagement signals
    theta_d: float = 10.0
    theta_d_plus: float = 30.0
    dwell_cap_minutes: float = 60.0
    rating_scale: float = 5.0
    # state estimation
    default_beta: float = 0.05
    default_eta: float = 0.10
    enumeration_budget: int = 4096
    beam_width: int | None = None
    # ranking
    rank_w_interest: float = 0.7
    rank_w_novelty: float = 0.1
    rank_w_diversity: float = 0.2
    diversity_lambda: float = 1.0
    # surmise inference
    min_support: int = 20
    confidence_threshold: float = 0.6
    significance_alpha: float = 0.01
    review_threshold: float = 0.9
    # new-POI soft neighborhood
    soft_jaccard_threshold: float = 0.5
    soft_distance_threshold_m: float = 500.0

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def merged(self, overrides: Mapping[str, Any]) -> "EngineConfig":
        known = {f.name for f in fields(EngineConfig)}
        unknown = set(overrides) - known
        if unknown:
            raise ParseError(f"unknown config keys: {sorted(unknown)}")
        merged = {**self.to_dict(), **dict(overrides)}
        return EngineConfig(**merged)

    @property
    def interest_weights(self) -> tuple[float, float, float, float]:
        return (self.w_alpha, self.w_beta, self.w_gamma, self.w_delta)

    @property
    def prop_weights(self) -> tuple[float, float, float]:
        return (self.prop_w_category, self.prop_w_popularity, self.prop_w_review)

    @property
    def rank_weights(self) -> tuple[float, float, float]:
        return (self.rank_w_interest, self.rank_w_novelty, self.rank_w_diversity)


def load_config(base: EngineConfig | None = None, env: Mapping[str, str] | None = None) -> EngineConfig:
    """Apply the ESRS_CONFIG override file, if any, on top of ``base``."""
    config = base or EngineConfig()
    env = env if env is not None else os.environ
    path = env.get(ENV_CONFIG_VAR)
    if not path:
        return config
    try:
        overrides = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read config override {path!r}: {exc}") from exc
    if not isinstance(overrides, dict):
        raise ParseError(f"config override {path!r} must be a JSON object")
    return config.merged(overrides)
