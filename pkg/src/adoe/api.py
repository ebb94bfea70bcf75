"""HTTP service for running campaigns: thin FastAPI layer over the store.

All computation happens synchronously inside the request; per-campaign
mutations are serialized by the store's locks.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel, Field

from . import engine, moo, rsm
from .designs import ccd
from .domain import DesignSpace, DomainError, Factor, Objective
from .store import CampaignStore, NotFoundError, StoreError

__all__ = ["create_app"]


class FactorIn(BaseModel):
    name: str
    unit: str = ""
    cube_low: float
    cube_high: float


class ObjectiveIn(BaseModel):
    name: str
    unit: str = ""
    threshold: float | None = None
    weight: float = 1.0
    d_min: float | None = None
    d_max: float | None = None


class CampaignIn(BaseModel):
    factors: list[FactorIn]
    objectives: list[ObjectiveIn]
    alpha: float = 2.0
    mode: str = "single"
    seed_count: int = 12
    batch_size: int = 2
    max_trials: int = 40
    convergence_tol: float = 0.05
    seed: int = 0
    seed_from: str = Field("ccd", description="'ccd' draws seeds from a CCD, 'box' space-fills")
    center_runs: int = 7


class ObservationIn(BaseModel):
    responses: list[float]


def _build_config(body: CampaignIn) -> engine.CampaignConfig:
    space = DesignSpace(
        factors=tuple(Factor(f.name, f.unit, f.cube_low, f.cube_high) for f in body.factors),
        alpha=body.alpha,
    )
    objectives = tuple(
        Objective(o.name, o.unit, threshold=o.threshold, weight=o.weight,
                  d_min=o.d_min, d_max=o.d_max)
        for o in body.objectives
    )
    seed_design = None
    if body.seed_from == "ccd":
        seed_design = ccd(space.dim, body.center_runs, space.alpha)
    elif body.seed_from != "box":
        raise DomainError(f"seed_from must be 'ccd' or 'box', got {body.seed_from!r}")
    return engine.CampaignConfig(
        space=space,
        objectives=objectives,
        mode=body.mode,
        seed_count=body.seed_count,
        batch_size=body.batch_size,
        max_trials=body.max_trials,
        convergence_tol=body.convergence_tol,
        seed=body.seed,
        seed_design=seed_design,
    )


def _trial_payload(t) -> dict:
    return {
        "id": t.id,
        "settings": list(t.settings),
        "responses": list(t.responses) if t.responses is not None else None,
        "provenance": t.provenance,
        "status": t.status,
    }


def _state_payload(campaign_id: str, record, state) -> dict:
    return {
        "id": campaign_id,
        "created_at": record.created_at,
        "config": record.config,
        "status": state.status if state else "created",
        "iteration": state.iteration if state else 0,
        "trials": [_trial_payload(t) for t in state.trials] if state else [],
        "stop_reasons": list(state.stop_reasons) if state else [],
        "surrogate_failed": bool(state.surrogate_failed) if state else False,
    }


def _analysis_payload(state) -> dict:
    n = len(state.observed)
    d = state.config.space.dim
    full = rsm.ModelSpec.full_quadratic(d)
    linear = rsm.ModelSpec.linear_model(d)
    if n > full.n_terms:
        spec = full
    elif n > linear.n_terms:
        spec = linear
    else:
        raise HTTPException(
            status_code=409,
            detail=f"need more than {linear.n_terms} observed trials for analysis, have {n}",
        )
    coded, resp = state.observed_arrays()
    names = state.config.space.names
    out = {"model_terms": spec.term_names(names), "responses": {}}
    for j, objective in enumerate(state.config.objectives):
        model = rsm.fit(coded, resp[:, j], spec)
        report = rsm.anova(coded, resp[:, j], spec, factor_names=list(names))
        out["responses"][objective.name] = {
            "coefficients": [float(c) for c in model.coefficients],
            "r2": report.r2,
            "r2_adj": report.r2_adj,
            "r2_pred": report.r2_pred,
            "terms": [
                {"name": t.name, "adj_ss": t.adj_ss, "f": t.f_stat, "p": t.p_value}
                for t in report.terms
            ],
        }
    return out


def _pareto_payload(state) -> dict:
    observed = state.observed
    if not observed:
        return {"points": []}
    F = np.array([t.responses for t in observed])
    front = moo.fast_nondominated_sort(F)[0]
    return {
        "points": [
            {**_trial_payload(observed[i]), "objectives": list(map(float, F[i]))}
            for i in front
        ]
    }


def _convergence_payload(state) -> dict:
    cfg = state.config
    m = len(cfg.objectives)
    rows = []
    best = [math.inf] * m
    counted = 0
    boundaries = [cfg.seed_count]
    for batch in state.batches:
        boundaries.append(boundaries[-1] + batch.shape[0])
    iteration = 0
    for idx, t in enumerate(state.trials, start=1):
        if t.responses is not None:
            best = [min(b, r) for b, r in zip(best, t.responses)]
            counted += 1
        if idx in boundaries:
            rows.append(
                {
                    "iteration": iteration,
                    "trials_observed": counted,
                    "best": [None if math.isinf(b) else b for b in best],
                }
            )
            iteration += 1
    distances = []
    for i in range(1, len(state.batches)):
        a, b = state.batches[i - 1], state.batches[i]
        k = min(a.shape[0], b.shape[0])
        distances.append(
            float(max(np.linalg.norm(a[j] - b[j]) for j in range(k)))
        )
    return {"iterations": rows, "proposal_distances": distances}


def create_app(store: CampaignStore) -> FastAPI:
    app = FastAPI(title="adaptive-doe campaign service")

    def _load(campaign_id: str):
        try:
            record = store.load(campaign_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return record

    @app.exception_handler(DomainError)
    async def _domain_error(request, exc):
        return Response(status_code=422, content=str(exc), media_type="text/plain")

    @app.post("/api/campaigns", status_code=201)
    def create_campaign(body: CampaignIn):
        try:
            config = _build_config(body)
            campaign_id = store.create(config)
            store.seed(campaign_id)
        except DomainError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {"id": campaign_id}

    @app.get("/api/campaigns")
    def list_campaigns():
        return {"ids": store.list_ids()}

    @app.get("/api/campaigns/{campaign_id}")
    def get_campaign(campaign_id: str):
        record = _load(campaign_id)
        return _state_payload(campaign_id, record, store.state(campaign_id))

    @app.post("/api/campaigns/{campaign_id}/suggestions")
    def post_suggestions(campaign_id: str, count: int | None = None):
        _load(campaign_id)
        try:
            state, trials = store.suggest(campaign_id, count=count)
        except engine.SequencingError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except engine.SurrogateError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        except StoreError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return {"trials": [_trial_payload(t) for t in trials], "status": state.status}

    @app.post("/api/campaigns/{campaign_id}/trials/{trial_id}/observation")
    def post_observation(campaign_id: str, trial_id: str, body: ObservationIn):
        record = _load(campaign_id)
        if not all(math.isfinite(v) for v in body.responses):
            raise HTTPException(status_code=422, detail="responses must be finite")
        try:
            store.observe(campaign_id, trial_id, body.responses)
        except engine.UnknownTrialError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except engine.AlreadyObservedError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except DomainError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except StoreError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return _state_payload(campaign_id, record, store.state(campaign_id))

    @app.get("/api/campaigns/{campaign_id}/analysis")
    def get_analysis(campaign_id: str):
        _load(campaign_id)
        state = store.state(campaign_id)
        if state is None:
            raise HTTPException(status_code=409, detail="campaign not seeded")
        return _analysis_payload(state)

    @app.get("/api/campaigns/{campaign_id}/pareto")
    def get_pareto(campaign_id: str):
        _load(campaign_id)
        state = store.state(campaign_id)
        if state is None:
            return {"points": []}
        return _pareto_payload(state)

    @app.get("/api/campaigns/{campaign_id}/convergence")
    def get_convergence(campaign_id: str):
        _load(campaign_id)
        state = store.state(campaign_id)
        if state is None:
            return {"iterations": [], "proposal_distances": []}
        return _convergence_payload(state)

    return app
