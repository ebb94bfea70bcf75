"""Command-line interface: campaign operations, analysis and report rendering.

Report-producing subcommands (analyze, optimize, simulate) write delimited
output plus PNG figures into the report directory.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import click
import numpy as np

from . import engine, moo, plant, plots, rsm
from .designs import ccd, design_to_csv
from .domain import DesignSpace, DomainError, Factor, Objective
from .rsm import LenthEffect
from .stats import t_quantile
from .store import CampaignStore, NotFoundError, StoreError, config_from_dict

RESPONSE_DEFAULTS = ("dt_C", "cycle_s")


class CliError(click.ClickException):
    exit_code = 1


@click.group()
@click.option("--store", "store_dir", default="./campaign-store", show_default=True,
              help="Campaign store directory.")
@click.option("--seed", default=0, show_default=True, type=int, help="Base random seed.")
@click.option("--format", "fmt", default="text", show_default=True,
              type=click.Choice(["text", "csv"]), help="stdout format for tables.")
@click.pass_context
def main(ctx, store_dir, seed, fmt):
    """Adaptive design-of-experiments campaigns, analysis and optimisation."""
    ctx.obj = {"store_dir": store_dir, "seed": seed, "fmt": fmt}


def _store(ctx) -> CampaignStore:
    return CampaignStore(ctx.obj["store_dir"])


def _echo_trials(ctx, trials):
    fmt = ctx.obj["fmt"]
    if fmt == "csv":
        out = io.StringIO()
        w = csv.writer(out)
        w.writerow(["trial", "provenance", "status", "settings", "responses"])
        for t in trials:
            w.writerow([t.id, t.provenance, t.status,
                        ";".join(f"{v:g}" for v in t.settings),
                        ";".join(f"{v:g}" for v in t.responses) if t.responses else ""])
        click.echo(out.getvalue().rstrip())
    else:
        for t in trials:
            settings = ", ".join(f"{v:.4g}" for v in t.settings)
            resp = ("  ->  " + ", ".join(f"{v:.4g}" for v in t.responses)) if t.responses else ""
            click.echo(f"{t.id} [{t.provenance:9s}] ({settings}){resp}")


def _demo_config(ctx, mode, seed_count, batch_size, max_trials) -> engine.CampaignConfig:
    space = plant.reference_space()
    objectives = plant.reference_objectives()
    if mode == "single":
        objectives = (objectives[0],)
    return engine.CampaignConfig(
        space=space,
        objectives=objectives,
        mode=mode,
        seed_count=seed_count,
        batch_size=batch_size,
        max_trials=max_trials,
        seed=ctx.obj["seed"],
        seed_design=ccd(space.dim, 7, space.alpha),
    )


def _config_from_json(path, ctx) -> engine.CampaignConfig:
    raw = json.loads(Path(path).read_text())
    space = DesignSpace(
        factors=tuple(Factor(**f) for f in raw["factors"]),
        alpha=raw.get("alpha", 2.0),
    )
    objectives = tuple(Objective(**o) for o in raw["objectives"])
    seed_design = None
    if raw.get("seed_from", "ccd") == "ccd":
        seed_design = ccd(space.dim, raw.get("center_runs", 7), space.alpha)
    return engine.CampaignConfig(
        space=space,
        objectives=objectives,
        mode=raw.get("mode", "single"),
        seed_count=raw.get("seed_count", 12),
        batch_size=raw.get("batch_size", 2),
        max_trials=raw.get("max_trials", 40),
        convergence_tol=raw.get("convergence_tol", 0.05),
        seed=raw.get("seed", ctx.obj["seed"]),
        seed_design=seed_design,
    )


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="Campaign config JSON (factors/objectives/mode ...).")
@click.option("--demo", is_flag=True, help="Use the bundled moulding demo campaign.")
@click.option("--mode", default="multi", type=click.Choice(["single", "multi"]), show_default=True)
@click.option("--seed-count", default=12, show_default=True)
@click.option("--batch-size", default=2, show_default=True)
@click.option("--max-trials", default=22, show_default=True)
@click.pass_context
def init(ctx, config_path, demo, mode, seed_count, batch_size, max_trials):
    """Create a campaign (does not draw seed trials yet; see 'seed')."""
    if not (config_path or demo):
        raise CliError("provide --config FILE or --demo")
    try:
        config = (
            _config_from_json(config_path, ctx)
            if config_path
            else _demo_config(ctx, mode, seed_count, batch_size, max_trials)
        )
        campaign_id = _store(ctx).create(config)
    except (DomainError, StoreError, KeyError) as exc:
        raise CliError(str(exc))
    click.echo(campaign_id)


@main.command()
@click.argument("campaign_id")
@click.pass_context
def seed(ctx, campaign_id):
    """Draw the campaign's seed block of experiments."""
    try:
        state = _store(ctx).seed(campaign_id)
    except (NotFoundError, StoreError, DomainError) as exc:
        raise CliError(str(exc))
    click.echo(f"status: {state.status}")
    _echo_trials(ctx, state.trials)


@main.command()
@click.argument("campaign_id")
@click.option("--count", type=int, default=None, help="Override the batch size.")
@click.pass_context
def suggest(ctx, campaign_id, count):
    """Compute the next batch of suggested settings."""
    try:
        state, trials = _store(ctx).suggest(campaign_id, count=count)
    except (NotFoundError, StoreError, engine.CampaignError, DomainError) as exc:
        raise CliError(str(exc))
    click.echo(f"iteration {state.iteration}, status: {state.status}")
    _echo_trials(ctx, trials)


@main.command()
@click.argument("campaign_id")
@click.argument("trial_id")
@click.option("--values", required=True, help="Comma-separated responses, e.g. '6.51,32.9'.")
@click.pass_context
def observe(ctx, campaign_id, trial_id, values):
    """Record measured responses for a pending trial."""
    try:
        responses = [float(v) for v in values.split(",")]
    except ValueError as exc:
        raise CliError(f"could not parse --values: {exc}")
    try:
        state = _store(ctx).observe(campaign_id, trial_id, responses)
    except (NotFoundError, StoreError, engine.CampaignError, DomainError) as exc:
        raise CliError(str(exc))
    click.echo(f"status: {state.status}")
    if state.status in engine.TERMINAL_STATUSES:
        click.echo(f"stop reasons: {', '.join(state.stop_reasons)}")


@main.command()
@click.argument("campaign_id")
@click.pass_context
def status(ctx, campaign_id):
    """Show a campaign's current state and trials."""
    store = _store(ctx)
    try:
        record = store.load(campaign_id)
        state = store.state(campaign_id)
    except (NotFoundError, StoreError) as exc:
        raise CliError(str(exc))
    if state is None:
        click.echo("status: created (not seeded)")
        return
    click.echo(f"status: {state.status}  iteration: {state.iteration}  "
               f"trials: {len(state.trials)} ({len(state.observed)} observed)")
    if state.stop_reasons:
        click.echo(f"stop reasons: {', '.join(state.stop_reasons)}")
    _echo_trials(ctx, state.trials)


def _read_table(path, factors, responses):
    """Header-matched CSV ingestion: returns (factor names, X, response names, Y)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise CliError(f"{path}: no data rows")
    header = list(rows[0].keys())
    resp_names = (
        [r for r in responses.split(",")] if responses
        else [c for c in header if c in RESPONSE_DEFAULTS]
    )
    if not resp_names:
        raise CliError("no response columns found; pass --responses")
    fac_names = (
        [f for f in factors.split(",")] if factors
        else [c for c in header if c not in resp_names and c != "run_order"]
    )
    missing = [c for c in (*fac_names, *resp_names) if c not in header]
    if missing:
        raise CliError(f"columns not in {path}: {missing}")
    X = np.array([[float(r[c]) for c in fac_names] for r in rows])
    Y = np.array([[float(r[c]) for c in resp_names] for r in rows])
    return fac_names, X, resp_names, Y


def _space_for(fac_names, X) -> DesignSpace:
    """Reference space when the columns match it, else a data-ranged space."""
    ref = plant.reference_space()
    if tuple(fac_names) == ref.names:
        return ref
    factors = tuple(
        Factor(name, "", float(X[:, i].min()), float(X[:, i].max()))
        for i, name in enumerate(fac_names)
    )
    return DesignSpace(factors=factors, alpha=1.0)


def _model_spec(model, fac_names, interactions) -> rsm.ModelSpec:
    d = len(fac_names)
    if model == "linear":
        return rsm.ModelSpec.linear_model(d)
    if model == "full":
        return rsm.ModelSpec.full_quadratic(d)
    # reduced: all linear terms plus named interactions
    pairs = []
    specs = list(interactions)
    if not specs and tuple(fac_names) == plant.reference_space().names:
        specs = ["holding_s:barrel_temp_C"]
    for item in specs:
        a, _, b = item.partition(":")
        if a not in fac_names or b not in fac_names:
            raise CliError(f"interaction {item!r} references unknown factors")
        pairs.append((fac_names.index(a), fac_names.index(b)))
    return rsm.ModelSpec(n_factors=d, linear=tuple(range(d)), interactions=tuple(pairs))


def _out_dir(out) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--model", default="reduced", show_default=True,
              type=click.Choice(["linear", "reduced", "full"]))
@click.option("--response", "response", default=None,
              help="Response column to analyze (default: every known response).")
@click.option("--factors", default=None, help="Comma-separated factor columns.")
@click.option("--responses", default=None, help="Comma-separated response columns.")
@click.option("--interaction", "interactions", multiple=True,
              help="Interaction term a:b for the reduced model (repeatable).")
@click.option("--out", default="reports", show_default=True, help="Report directory.")
@click.pass_context
def analyze(ctx, data_path, model, response, factors, responses, interactions, out):
    """Fit a response-surface model and report ANOVA (CSV + effects chart)."""
    fac_names, X, resp_names, Y = _read_table(data_path, factors, responses)
    if response:
        if response not in resp_names:
            raise CliError(f"unknown response {response!r}")
        resp_names, Y = [response], Y[:, [resp_names.index(response)]]
    space = _space_for(fac_names, X)
    spec = _model_spec(model, fac_names, interactions)
    coded = np.array([space.to_coded(x) for x in X])
    outdir = _out_dir(out)
    for j, name in enumerate(resp_names):
        try:
            report = rsm.anova(coded, Y[:, j], spec, factor_names=fac_names)
        except rsm.FitError as exc:
            raise CliError(f"{name}: {exc}")
        if ctx.obj["fmt"] == "csv":
            click.echo(rsm.anova_to_csv(report).rstrip())
        else:
            click.echo(rsm.anova_to_text(report, response=name).rstrip())
        (outdir / f"anova_{name}.csv").write_text(rsm.anova_to_csv(report))
        margin = t_quantile(0.975, report.error_df) if report.error_df > 0 else 0.0
        pseudo = [
            LenthEffect(t.name, float(np.sqrt(t.f_stat)) if t.f_stat else 0.0,
                        float(np.sqrt(t.f_stat)) if t.f_stat else 0.0,
                        bool(t.p_value is not None and t.p_value < 0.05))
            for t in report.terms
        ]
        plots.effects_chart(pseudo, margin, outdir / f"effects_{name}.png",
                            title=f"Standardized effects: {name}")
    click.echo(f"reports written to {outdir}")


def _parse_bounds(bound_opts):
    bounds = {}
    for item in bound_opts:
        name, _, rng = item.partition("=")
        lo, _, hi = rng.partition(":")
        try:
            bounds[name] = (float(lo), float(hi))
        except ValueError:
            raise CliError(f"bad --bound {item!r}; expected name=lo:hi")
    return bounds or None


@main.command()
@click.option("--method", required=True, type=click.Choice(["desirability", "nsga2"]))
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--objectives", "objectives_opt", default=None,
              help="Response columns to optimise (default: all known).")
@click.option("--factors", default=None)
@click.option("--responses", default=None)
@click.option("--bound", "bound_opts", multiple=True,
              help="Tighten a factor's search range, name=lo:hi (repeatable).")
@click.option("--population", default=100, show_default=True)
@click.option("--generations", default=100, show_default=True)
@click.option("--crossover-prob", default=0.8, show_default=True)
@click.option("--out", default="reports", show_default=True)
@click.pass_context
def optimize(ctx, method, data_path, objectives_opt, factors, responses,
             bound_opts, population, generations, crossover_prob, out):
    """Optimise fitted response models by desirability or NSGA-II."""
    fac_names, X, resp_names, Y = _read_table(data_path, factors, responses)
    if objectives_opt:
        sel = objectives_opt.split(",")
        missing = [s for s in sel if s not in resp_names]
        if missing:
            raise CliError(f"unknown objectives {missing}")
        Y = Y[:, [resp_names.index(s) for s in sel]]
        resp_names = sel
    space = _space_for(fac_names, X)
    coded = np.array([space.to_coded(x) for x in X])
    spec = rsm.ModelSpec.full_quadratic(space.dim)
    models = [rsm.fit(coded, Y[:, j], spec) for j in range(Y.shape[1])]
    bounds = _parse_bounds(bound_opts)
    outdir = _out_dir(out)
    base_seed = ctx.obj["seed"]

    if method == "desirability":
        dspec = moo.DesirabilitySpec.from_observed(Y)
        result = moo.maximize_desirability(models, dspec, space, seed=base_seed, bounds=bounds)
        d_each = [
            moo.desirability_min(y, lo, hi)
            for y, lo, hi in zip(result.predictions, dspec.y_min, dspec.y_max)
        ]
        lines = [",".join([*fac_names, *(f"pred_{n}" for n in resp_names), "desirability"])]
        lines.append(",".join(
            [f"{v:.6g}" for v in result.settings]
            + [f"{v:.6g}" for v in result.predictions]
            + [f"{result.desirability:.6g}"]
        ))
        text = "\n".join(lines) + "\n"
        (outdir / "desirability_optimum.csv").write_text(text)
        plots.desirability_chart(resp_names, d_each, result.desirability,
                                 outdir / "desirability.png")
        click.echo(text.rstrip() if ctx.obj["fmt"] == "csv" else
                   "optimum: " + ", ".join(f"{n}={v:.4g}" for n, v in zip(fac_names, result.settings))
                   + f"\npredicted: " + ", ".join(f"{n}={v:.4g}" for n, v in zip(resp_names, result.predictions))
                   + f"\ncomposite desirability: {result.desirability:.4f}"
                   + ("\n(warning: desirability is zero everywhere searched)" if result.degenerate else ""))
    else:
        config = moo.Nsga2Config(population=population, generations=generations,
                                 crossover_prob=crossover_prob, seed=base_seed)
        front = moo.nsga2(moo.rsm_evaluators(models, space), space, config, bounds=bounds)
        text = front.to_csv(fac_names, resp_names, outdir / "pareto.csv")
        if len(resp_names) == 2:
            plots.pareto_chart(front.objectives, names=resp_names, path=outdir / "pareto.png",
                               title="NSGA-II front")
        click.echo(text.rstrip() if ctx.obj["fmt"] == "csv" else
                   f"front size: {len(front)}; hypervolume log: "
                   + ", ".join(f"g{g}={v:.3g}" for g, v in front.hypervolume_log))
    click.echo(f"reports written to {outdir}")


@main.command()
@click.option("--mode", default="multi", show_default=True, type=click.Choice(["single", "multi"]))
@click.option("--seeds", "n_seeds", default=20, show_default=True)
@click.option("--noise", default=0.1, show_default=True, help="Plant noise sd on the temperature differential.")
@click.option("--seed-count", default=12, show_default=True)
@click.option("--batch-size", default=2, show_default=True)
@click.option("--max-trials", default=22, show_default=True)
@click.option("--out", default="reports", show_default=True)
@click.pass_context
def simulate(ctx, mode, n_seeds, noise, seed_count, batch_size, max_trials, out):
    """Replay closed-loop campaigns against the simulated plant."""
    oracle = plant.build_oracle(dt_noise_sd=noise)
    space = oracle.space
    objectives = plant.reference_objectives()
    if mode == "single":
        objectives = (objectives[0],)
    design = ccd(space.dim, 7, space.alpha)
    rows = []
    pooled = []
    for k in range(n_seeds):
        config = engine.CampaignConfig(
            space=space, objectives=objectives, mode=mode,
            seed_count=seed_count, batch_size=batch_size, max_trials=max_trials,
            seed=ctx.obj["seed"] + k, seed_design=design,
        )
        state = engine.seed_campaign(config)
        while True:
            for t in state.pending:
                idx = int(t.id[1:])
                obs = plant.evaluate(oracle, t.settings, seed=100000 * config.seed + idx)
                values = [obs[o.name] for o in objectives]
                state = engine.record_observation(state, t.id, values)
                if state.status in engine.TERMINAL_STATUSES:
                    break
            if state.status in engine.TERMINAL_STATUSES:
                break
            state, _ = engine.next_suggestions(state)
        best = np.min([t.responses for t in state.observed], axis=0)
        pooled.extend(t.responses for t in state.observed)
        rows.append({
            "seed": config.seed, "status": state.status,
            "trials": len(state.trials), "best": best,
        })
        click.echo(f"seed {config.seed}: {state.status} after {len(state.trials)} trials "
                   f"(best {', '.join(f'{o.name}={v:.3g}' for o, v in zip(objectives, best))})")

    outdir = _out_dir(out)
    with open(outdir / "simulation.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "status", "trials", *(f"best_{o.name}" for o in objectives)])
        for r in rows:
            w.writerow([r["seed"], r["status"], r["trials"], *(f"{v:.6g}" for v in r["best"])])
    if mode == "multi":
        F = np.array(pooled)
        mask = np.zeros(len(F), dtype=bool)
        mask[moo.fast_nondominated_sort(F)[0]] = True
        plots.pareto_chart(F, mask, thresholds=[o.threshold for o in objectives],
                           names=[o.name for o in objectives],
                           path=outdir / "simulation_tradeoff.png",
                           title="Observed responses across simulated campaigns")
        wins = sum(r["status"] == "threshold_met" for r in rows)
        click.echo(f"threshold_met in {wins}/{n_seeds} runs within {max_trials} trials")
    else:
        series = [{"iteration": i, "best": [float(np.mean([r["best"][0] for r in rows]))]}
                  for i in range(1)]
        plots.convergence_chart(series, [objectives[0].name], outdir / "simulation_best.png")
        click.echo(f"mean best {objectives[0].name}: "
                   f"{np.mean([r['best'][0] for r in rows]):.3f}")
    click.echo(f"reports written to {outdir}")


@main.command()
@click.argument("campaign_id", required=False)
@click.option("--what", default="trials", show_default=True,
              type=click.Choice(["trials", "design", "reference"]))
@click.option("--out", "out_path", default=None, help="Output CSV path (default: stdout).")
@click.pass_context
def export(ctx, campaign_id, what, out_path):
    """Export campaign trials, the campaign's seed design, or the bundled reference data."""
    if what == "reference":
        runs = plant.load_reference_runs()
        lines = ["mould_temp_C,cooling_s,holding_s,barrel_temp_C,dt_C,cycle_s"]
        for x, dt, cyc in zip(runs["settings"], runs["dt_C"], runs["cycle_s"]):
            lines.append(",".join(f"{v:g}" for v in (*x, dt, cyc)))
        text = "\n".join(lines) + "\n"
    else:
        if not campaign_id:
            raise CliError("campaign id required for --what trials/design")
        store = _store(ctx)
        try:
            record = store.load(campaign_id)
            state = store.state(campaign_id)
        except (NotFoundError, StoreError) as exc:
            raise CliError(str(exc))
        config = config_from_dict(record.config)
        if what == "design":
            if config.seed_design is None:
                raise CliError("campaign has no seed design")
            text = design_to_csv(config.seed_design, config.space)
        else:
            out = io.StringIO()
            w = csv.writer(out)
            w.writerow(["trial", "provenance", "status",
                        *config.space.names, *(o.name for o in config.objectives)])
            for t in (state.trials if state else ()):
                w.writerow([t.id, t.provenance, t.status,
                            *(f"{v:g}" for v in t.settings),
                            *((f"{v:g}" for v in t.responses) if t.responses else
                              [""] * len(config.objectives))])
            text = out.getvalue()
    if out_path:
        Path(out_path).write_text(text)
        click.echo(f"written to {out_path}")
    else:
        click.echo(text.rstrip())


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.pass_context
def serve(ctx, host, port):
    """Run the HTTP campaign service."""
    import uvicorn

    from .api import create_app

    app = create_app(_store(ctx))
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
