"""Event-sourced campaign persistence: one human-readable JSON file per campaign.

The file is an append-only log (seeded / suggested / observed /
status_changed events) plus the immutable config. State is always re-derived
by folding the log through the engine's own transition rules, so a stored
campaign replays exactly, and the stored suggestions can be re-verified
against a from-scratch recomputation.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import engine
from .designs import DesignMatrix
from .domain import DesignSpace, Factor, Objective, Trial

__all__ = [
    "SCHEMA_VERSION",
    "CampaignRecord",
    "CampaignStore",
    "NotFoundError",
    "StoreError",
    "config_to_dict",
    "config_from_dict",
    "replay",
    "verify_replay",
]

SCHEMA_VERSION = 1


class StoreError(RuntimeError):
    """Corrupt or incompatible campaign file."""


class NotFoundError(KeyError):
    pass


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def config_to_dict(config: engine.CampaignConfig) -> dict:
    d = {
        "space": {
            "alpha": config.space.alpha,
            "factors": [asdict(f) for f in config.space.factors],
        },
        "objectives": [asdict(o) for o in config.objectives],
        "mode": config.mode,
        "seed_count": config.seed_count,
        "batch_size": config.batch_size,
        "max_trials": config.max_trials,
        "convergence_tol": config.convergence_tol,
        "seed": config.seed,
        "seed_design": None,
    }
    if config.seed_design is not None:
        sd = config.seed_design
        d["seed_design"] = {
            "kind": sd.kind,
            "center_runs": sd.center_runs,
            "alpha": sd.alpha,
            "rows": sd.rows.tolist(),
        }
    return d


def config_from_dict(d: dict) -> engine.CampaignConfig:
    space = DesignSpace(
        factors=tuple(Factor(**f) for f in d["space"]["factors"]),
        alpha=d["space"]["alpha"],
    )
    seed_design = None
    if d.get("seed_design"):
        sd = d["seed_design"]
        seed_design = DesignMatrix(
            rows=np.array(sd["rows"]),
            kind=sd["kind"],
            center_runs=sd["center_runs"],
            alpha=sd["alpha"],
        )
    return engine.CampaignConfig(
        space=space,
        objectives=tuple(Objective(**o) for o in d["objectives"]),
        mode=d["mode"],
        seed_count=d["seed_count"],
        batch_size=d["batch_size"],
        max_trials=d["max_trials"],
        convergence_tol=d["convergence_tol"],
        seed=d["seed"],
        seed_design=seed_design,
    )


@dataclass
class CampaignRecord:
    campaign_id: str
    config: dict
    created_at: str
    events: list = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema_version": self.schema_version,
                "campaign_id": self.campaign_id,
                "created_at": self.created_at,
                "config": self.config,
                "events": self.events,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "CampaignRecord":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise StoreError(f"campaign file is not valid JSON: {exc}") from exc
        version = raw.get("schema_version")
        if version != SCHEMA_VERSION:
            raise StoreError(
                f"campaign file has schema_version {version!r}; "
                f"this build reads only {SCHEMA_VERSION} (no silent migration)"
            )
        missing = {"campaign_id", "config", "events", "created_at"} - raw.keys()
        if missing:
            raise StoreError(f"campaign file missing fields: {sorted(missing)}")
        return cls(
            campaign_id=raw["campaign_id"],
            config=raw["config"],
            created_at=raw["created_at"],
            events=raw["events"],
        )


def _trial_from_event(payload: dict) -> Trial:
    return Trial(
        id=payload["id"],
        settings=tuple(payload["settings"]),
        provenance=payload["provenance"],
    )


def replay(record: CampaignRecord) -> engine.CampaignState | None:
    """Fold the event log into the campaign state (None before seeding)."""
    config = config_from_dict(record.config)
    state: engine.CampaignState | None = None
    for ev in record.events:
        kind = ev["type"]
        if kind == "seeded":
            trials = tuple(_trial_from_event(p) for p in ev["trials"])
            state = engine.CampaignState(config=config, trials=trials, status="seeding")
        elif kind == "suggested":
            if state is None:
                raise StoreError("suggested event before seeding")
            trials = tuple(_trial_from_event(p) for p in ev["trials"])
            batch = np.array([config.space.to_coded(t.settings) for t in trials])
            state = engine.CampaignState(
                config=config,
                trials=(*state.trials, *trials),
                iteration=state.iteration + 1,
                status="awaiting_observations",
                batches=(*state.batches, batch),
                stop_reasons=state.stop_reasons,
                surrogate_failed=state.surrogate_failed,
            )
        elif kind == "observed":
            if state is None:
                raise StoreError("observed event before seeding")
            state = engine.record_observation(state, ev["trial_id"], ev["responses"])
        elif kind == "status_changed":
            pass  # audit trail; statuses are re-derived by the fold
        else:
            raise StoreError(f"unknown event type {kind!r}")
    return state


def verify_replay(record: CampaignRecord) -> bool:
    """Recompute every seeded/suggested event from scratch and compare bit-for-bit.

    Proves the stored campaign is reproducible from (config, seed,
    observations alone). Raises StoreError on any mismatch.
    """
    config = config_from_dict(record.config)
    state: engine.CampaignState | None = None
    for ev in record.events:
        kind = ev["type"]
        if kind == "seeded":
            state = engine.seed_campaign(config)
            got = [list(t.settings) for t in state.trials]
            want = [list(p["settings"]) for p in ev["trials"]]
            if got != want:
                raise StoreError("seed block does not replay identically")
        elif kind == "suggested":
            state, trials = engine.next_suggestions(
                state, count=len(ev["trials"]) or None
            )
            got = [list(t.settings) for t in trials]
            want = [list(p["settings"]) for p in ev["trials"]]
            if got != want:
                raise StoreError(
                    f"suggestions at iteration {state.iteration} do not replay identically"
                )
        elif kind == "observed":
            state = engine.record_observation(state, ev["trial_id"], ev["responses"])
    return True


class CampaignStore:
    """File-per-campaign store with per-campaign mutation locks."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock(self, campaign_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(campaign_id, threading.Lock())

    def _path(self, campaign_id: str) -> Path:
        return self.root / f"{campaign_id}.json"

    def _save(self, record: CampaignRecord) -> None:
        path = self._path(record.campaign_id)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(record.to_json())
        os.replace(tmp, path)

    def list_ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.json"))

    def load(self, campaign_id: str) -> CampaignRecord:
        path = self._path(campaign_id)
        if not path.exists():
            raise NotFoundError(f"no campaign {campaign_id!r} in {self.root}")
        return CampaignRecord.from_json(path.read_text())

    def state(self, campaign_id: str) -> engine.CampaignState | None:
        return replay(self.load(campaign_id))

    def create(self, config: engine.CampaignConfig, campaign_id: str | None = None) -> str:
        campaign_id = campaign_id or uuid.uuid4().hex[:12]
        if self._path(campaign_id).exists():
            raise StoreError(f"campaign {campaign_id!r} already exists")
        record = CampaignRecord(
            campaign_id=campaign_id, config=config_to_dict(config), created_at=_now()
        )
        self._save(record)
        return campaign_id

    def _append_status_change(self, record, before, after) -> None:
        if before != after:
            record.events.append(
                {"type": "status_changed", "from": before, "to": after, "at": _now()}
            )

    def seed(self, campaign_id: str) -> engine.CampaignState:
        with self._lock(campaign_id):
            record = self.load(campaign_id)
            if any(ev["type"] == "seeded" for ev in record.events):
                raise StoreError(f"campaign {campaign_id!r} is already seeded")
            state = engine.seed_campaign(config_from_dict(record.config))
            record.events.append(
                {
                    "type": "seeded",
                    "at": _now(),
                    "trials": [
                        {"id": t.id, "settings": list(t.settings), "provenance": t.provenance}
                        for t in state.trials
                    ],
                }
            )
            self._save(record)
            return state

    def observe(self, campaign_id: str, trial_id: str, responses) -> engine.CampaignState:
        with self._lock(campaign_id):
            record = self.load(campaign_id)
            state = replay(record)
            if state is None:
                raise StoreError(f"campaign {campaign_id!r} is not seeded yet")
            before = state.status
            state = engine.record_observation(state, trial_id, responses)
            record.events.append(
                {
                    "type": "observed",
                    "at": _now(),
                    "trial_id": trial_id,
                    "responses": [float(v) for v in responses],
                }
            )
            self._append_status_change(record, before, state.status)
            self._save(record)
            return state

    def suggest(
        self, campaign_id: str, count: int | None = None
    ) -> tuple[engine.CampaignState, tuple[Trial, ...]]:
        with self._lock(campaign_id):
            record = self.load(campaign_id)
            state = replay(record)
            if state is None:
                raise StoreError(f"campaign {campaign_id!r} is not seeded yet")
            before = state.status
            state, trials = engine.next_suggestions(state, count=count)
            record.events.append(
                {
                    "type": "suggested",
                    "at": _now(),
                    "iteration": state.iteration,
                    "trials": [
                        {"id": t.id, "settings": list(t.settings), "provenance": t.provenance}
                        for t in trials
                    ],
                }
            )
            self._append_status_change(record, before, state.status)
            self._save(record)
            return state, trials
