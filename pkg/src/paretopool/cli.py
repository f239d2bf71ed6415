"""Command-line front door for simulations, live campaigns, and data tools.

Machine-readable outputs have fixed schemas:
    trace.csv        iteration,n_evaluated,utilization,hv,phv,aphv,gd,igd
    snapshots.csv    snapshot_iteration,catalog_index,<objective...>,on_front
    checkpoints.csv  fraction,iteration,n_evaluated,hv,phv,aphv,gd,igd
    aphv.csv         run,seed,aphv
    igd_traces.csv   rank,run,iteration,igd
Floats are written with repr so identical seeds give byte-identical files.
"""

import csv
import json
from pathlib import Path

import click
import numpy as np

from .campaign import (
    LIVE,
    SIMULATION,
    CampaignConfig,
    init_campaign,
    load_campaign,
    run_simulation,
    save_campaign,
    stability_study,
    step,
    submit_observation,
)
from .data import (
    CatalogSchema,
    SynthSpec,
    feature_importance,
    load_bundled_catalog,
    load_catalog,
    load_schema,
    save_catalog,
    save_schema,
    select_feature_set,
    synth_catalog,
)
from .errors import EmptySelectionError, ParetoPoolError
from .metrics import pareto_front

TRACE_COLUMNS = ["iteration", "n_evaluated", "utilization", "hv", "phv", "aphv", "gd", "igd"]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def _load_cli_catalog(catalog_path, schema_path):
    if catalog_path is None:
        return load_bundled_catalog()
    path = Path(catalog_path)
    schema = (
        load_schema(schema_path)
        if schema_path is not None
        else load_schema(path.with_suffix(".schema.json"))
    )
    return load_catalog(path, schema)


def _parse_directions(text):
    return None if text is None else tuple(d.strip() for d in text.split(","))


def _n_evaluated(config: CampaignConfig, rows: int, iteration: int) -> int:
    return min(config.initial_samples + iteration * config.batch_size, rows)


def _trace_rows(state, config, rows):
    for i, report in enumerate(state.trace):
        yield [
            i,
            _n_evaluated(config, rows, i),
            report.utilization,
            report.hv,
            report.phv,
            report.aphv,
            report.gd,
            report.igd,
        ]


def _campaign_options(command):
    for option in reversed([
        click.option("--schema", "schema_path", type=click.Path(exists=True), default=None,
                     help="Schema sidecar (default: <catalog>.schema.json or bundled)."),
        click.option("--directions", default=None,
                     help="Override objective directions, e.g. 'max,min'."),
        click.option("--max-iter", default=150, show_default=True, help="Iteration budget n."),
        click.option("--init", "initial", default=10, show_default=True,
                     help="Initial sample count k."),
        click.option("--batch", default=5, show_default=True, help="Batch size b."),
        click.option("--hv", default=0.97, show_default=True,
                     help="PHV stopping threshold."),
        click.option("--alpha", default=0.3, show_default=True, help="APHV data-cost weight."),
        click.option("--beta", default=0.7, show_default=True, help="APHV front-quality weight."),
        click.option("--seed", default=0, show_default=True, envvar="PARETOPOOL_SEED",
                     help="Random seed (env: PARETOPOOL_SEED)."),
    ]):
        command = option(command)
    return command


def _build_config(mode, directions, max_iter, initial, batch, hv, alpha, beta, seed):
    return CampaignConfig(
        max_iterations=max_iter,
        initial_samples=initial,
        batch_size=batch,
        hv_threshold=hv,
        aphv_alpha=alpha,
        aphv_beta=beta,
        mode=mode,
        seed=seed,
        directions=_parse_directions(directions),
    )


@click.group()
def main():
    """Sequential multi-objective optimization over candidate catalogs."""


@main.command()
@click.argument("catalog", required=False, type=click.Path(exists=True))
@_campaign_options
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--checkpoints", default=None,
              help="Comma-separated utilization fractions to snapshot, e.g. '0.05,0.15,1.0'.")
def simulate(catalog, schema_path, directions, max_iter, initial, batch, hv, alpha, beta,
             seed, out_dir, checkpoints):
    """Run one simulation campaign and write trace/report/snapshot files.

    CATALOG is a CSV path with a schema sidecar; omitted, the bundled
    synthetic catalog is used.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        dataset = _load_cli_catalog(catalog, schema_path)
        config = _build_config(SIMULATION, directions, max_iter, initial, batch, hv,
                               alpha, beta, seed)
        state = run_simulation(dataset, config)
    except ParetoPoolError as exc:
        raise click.ClickException(str(exc)) from exc

    rows = dataset.row_count
    _write_csv(out / "trace.csv", TRACE_COLUMNS, _trace_rows(state, config, rows))

    front_positions = [int(i) for i in state.trace[-1].front_indices]
    report = {
        "status": state.status,
        "iterations": state.iteration,
        "evaluated_count": len(state.evaluated_indices),
        "catalog_rows": rows,
        "objective_names": list(dataset.objective_names),
        "directions": list(state.directions),
        "config": config.as_dict(),
        "final": state.trace[-1].as_dict(),
        "front": {
            "positions": front_positions,
            "catalog_indices": [state.evaluated_indices[i] for i in front_positions],
            "values": [
                [float(v) for v in state.observed_objectives[i]] for i in front_positions
            ],
        },
    }
    _write_json(out / "report.json", report)

    snapshot_iters = sorted({
        it for it in (1, (state.iteration + 1) // 2, state.iteration) if 1 <= it
    } & set(range(state.iteration + 1)) or {0})
    snap_rows = []
    for it in snapshot_iters:
        count = _n_evaluated(config, rows, it)
        prefix = state.observed_objectives[:count]
        on_front = set(pareto_front(prefix, state.directions).tolist())
        for pos in range(count):
            snap_rows.append(
                [it, state.evaluated_indices[pos]]
                + [float(v) for v in prefix[pos]]
                + [int(pos in on_front)]
            )
    _write_csv(
        out / "snapshots.csv",
        ["snapshot_iteration", "catalog_index", *dataset.objective_names, "on_front"],
        snap_rows,
    )

    if checkpoints is not None:
        fractions = [float(f) for f in checkpoints.split(",")]
        check_rows = []
        for fraction in fractions:
            hit = next(
                (
                    (i, r) for i, r in enumerate(state.trace)
                    if r.utilization >= fraction - 1e-12
                ),
                None,
            )
            if hit is None:
                check_rows.append([fraction, None, None, None, None, None, None, None])
            else:
                i, r = hit
                check_rows.append([
                    fraction, i, _n_evaluated(config, rows, i),
                    r.hv, r.phv, r.aphv, r.gd, r.igd,
                ])
        _write_csv(
            out / "checkpoints.csv",
            ["fraction", "iteration", "n_evaluated", "hv", "phv", "aphv", "gd", "igd"],
            check_rows,
        )

    click.echo(
        f"{state.status} after {state.iteration} iterations, "
        f"{len(state.evaluated_indices)}/{rows} evaluated, "
        f"phv={_fmt(state.trace[-1].phv)}"
    )


@main.command()
@click.argument("catalog", required=False, type=click.Path(exists=True))
@_campaign_options
@click.option("--runs", default=25, show_default=True, help="Number of seeded repeats.")
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
def stability(catalog, schema_path, directions, max_iter, initial, batch, hv, alpha, beta,
              seed, runs, out_dir):
    """Repeat the simulation across seeds and emit the APHV distribution."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        dataset = _load_cli_catalog(catalog, schema_path)
        config = _build_config(SIMULATION, directions, max_iter, initial, batch, hv,
                               alpha, beta, seed)
        result = stability_study(dataset, config, runs)
    except ParetoPoolError as exc:
        raise click.ClickException(str(exc)) from exc

    _write_csv(
        out / "aphv.csv",
        ["run", "seed", "aphv"],
        ([j, config.seed + j, v] for j, v in enumerate(result.aphv_values)),
    )
    _write_json(out / "summary.json", result.summary)

    order = np.argsort(result.aphv_values, kind="stable")
    picks = {
        "worst": int(order[0]),
        "median": int(order[(runs - 1) // 2]),
        "best": int(order[-1]),
    }
    igd_rows = []
    for rank in ("best", "median", "worst"):
        run_index = picks[rank]
        for i, report in enumerate(result.states[run_index].trace):
            igd_rows.append([rank, run_index, i, report.igd])
    _write_csv(out / "igd_traces.csv", ["rank", "run", "iteration", "igd"], igd_rows)

    click.echo(
        f"{runs} runs: median aphv={_fmt(result.summary['median'])} "
        f"range [{_fmt(result.summary['min'])}, {_fmt(result.summary['max'])}]"
    )


def _campaign_paths(campaign_dir: Path) -> dict[str, Path]:
    return {
        "catalog": campaign_dir / "catalog.csv",
        "schema": campaign_dir / "schema.json",
        "state": campaign_dir / "state.json",
    }


def _open_campaign(campaign_dir):
    paths = _campaign_paths(Path(campaign_dir))
    if not paths["state"].exists():
        raise click.ClickException(
            f"no campaign in {campaign_dir}; create one with 'suggest --new'"
        )
    dataset = load_catalog(paths["catalog"], load_schema(paths["schema"]))
    state, config = load_campaign(paths["state"], dataset)
    return dataset, state, config, paths


def _echo_pending(state, dataset):
    click.echo("snapped_index\t" + "\t".join(dataset.feature_names))
    for record in state.pending:
        if record.resolved_values is not None:
            continue
        features = dataset.features[record.snapped_index]
        click.echo(
            f"{record.snapped_index}\t" + "\t".join(repr(float(v)) for v in features)
        )


@main.command()
@click.option("--campaign-dir", required=True, type=click.Path(file_okay=False),
              envvar="PARETOPOOL_DATA_DIR")
@click.option("--new", "create_new", is_flag=True, help="Initialize a campaign here.")
@click.argument("catalog", required=False, type=click.Path(exists=True))
@_campaign_options
def suggest(campaign_dir, create_new, catalog, schema_path, directions, max_iter, initial,
            batch, hv, alpha, beta, seed):
    """Print the pending batch of a live campaign, generating it if needed.

    With --new, CATALOG (or the bundled catalog) seeds a fresh live campaign
    in --campaign-dir.
    """
    campaign_dir = Path(campaign_dir)
    try:
        if create_new:
            campaign_dir.mkdir(parents=True, exist_ok=True)
            paths = _campaign_paths(campaign_dir)
            if paths["state"].exists():
                raise click.ClickException(f"{campaign_dir} already holds a campaign")
            dataset = _load_cli_catalog(catalog, schema_path)
            config = _build_config(LIVE, directions, max_iter, initial, batch, hv,
                                   alpha, beta, seed)
            state = init_campaign(dataset, config)
            save_catalog(dataset, paths["catalog"])
            save_schema(dataset.schema, paths["schema"])
            save_campaign(state, config, dataset, paths["state"])
        else:
            dataset, state, config, paths = _open_campaign(campaign_dir)
            if not state.pending:
                step(state, dataset, config)
                save_campaign(state, config, dataset, paths["state"])
    except ParetoPoolError as exc:
        raise click.ClickException(str(exc)) from exc
    _echo_pending(state, dataset)


@main.command()
@click.option("--campaign-dir", required=True, type=click.Path(exists=True, file_okay=False),
              envvar="PARETOPOOL_DATA_DIR")
@click.option("--index", required=True, type=int, help="Snapped catalog index.")
@click.option("--values", required=True, help="Comma-separated objective values.")
def observe(campaign_dir, index, values):
    """Record measured objective values for one pending suggestion."""
    try:
        parsed = [float(v) for v in values.split(",")]
    except ValueError as exc:
        raise click.UsageError(f"--values must be comma-separated numbers: {exc}") from exc
    try:
        dataset, state, config, paths = _open_campaign(campaign_dir)
        submit_observation(state, dataset, config, index, parsed)
        save_campaign(state, config, dataset, paths["state"])
    except ParetoPoolError as exc:
        raise click.ClickException(str(exc)) from exc
    remaining = sum(1 for r in state.pending if r.resolved_values is None)
    click.echo(
        f"recorded index {index}; iteration={state.iteration} "
        f"pending_remaining={remaining} status={state.status}"
    )


@main.command("report")
@click.option("--campaign-dir", required=True, type=click.Path(exists=True, file_okay=False),
              envvar="PARETOPOOL_DATA_DIR")
def report_command(campaign_dir):
    """Print the current front and metric trace of a campaign as JSON."""
    try:
        dataset, state, config, _ = _open_campaign(campaign_dir)
    except ParetoPoolError as exc:
        raise click.ClickException(str(exc)) from exc
    if state.trace:
        front_positions = [int(i) for i in state.trace[-1].front_indices]
        front = {
            "positions": front_positions,
            "catalog_indices": [state.evaluated_indices[i] for i in front_positions],
            "values": [
                [float(v) for v in state.observed_objectives[i]] for i in front_positions
            ],
        }
    else:
        front = {"positions": [], "catalog_indices": [], "values": []}
    payload = {
        "status": state.status,
        "iteration": state.iteration,
        "evaluated_count": len(state.evaluated_indices),
        "pending_count": len(state.pending),
        "objective_names": list(dataset.objective_names),
        "directions": list(state.directions),
        "trace": [r.as_dict() for r in state.trace],
        "front": front,
    }
    click.echo(json.dumps(payload, indent=2))


@main.command("synth-data")
@click.option("--rows", default=402, show_default=True)
@click.option("--seed", default=0, show_default=True, envvar="PARETOPOOL_SEED")
@click.option("--generator", default="convex", show_default=True,
              type=click.Choice(["convex", "concave"]))
@click.option("--distractor-correlation", default=0.0, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def synth_data(rows, seed, generator, distractor_correlation, out):
    """Generate a synthetic catalog CSV plus its schema sidecar."""
    try:
        spec = SynthSpec(generator=generator, distractor_correlation=distractor_correlation)
        dataset = synth_catalog(spec, rows, seed)
    except ParetoPoolError as exc:
        raise click.ClickException(str(exc)) from exc
    out = Path(out)
    save_catalog(dataset, out)
    save_schema(dataset.schema, out.with_suffix(".schema.json"))
    click.echo(f"wrote {dataset.row_count} rows to {out}")


def _validate_threshold(ctx, param, value):
    if not 0.0 < value < 1.0:
        raise click.BadParameter("must lie strictly between 0 and 1")
    return value


@main.command("feature-select")
@click.argument("catalog", required=False, type=click.Path(exists=True))
@click.option("--schema", "schema_path", type=click.Path(exists=True), default=None)
@click.option("--threshold", default=0.6, show_default=True, callback=_validate_threshold)
def feature_select(catalog, schema_path, threshold):
    """Score features by absolute correlation and select those over the threshold."""
    try:
        if catalog is None:
            dataset = load_bundled_catalog(full_features=True)
        else:
            dataset = _load_cli_catalog(catalog, schema_path)
        scores = {
            objective: feature_importance(dataset, objective)
            for objective in dataset.objective_names
        }
        for objective, table in scores.items():
            click.echo(f"{objective}:")
            for feature, score in table.items():
                click.echo(f"  {feature}\t{repr(score)}")
        selected = select_feature_set(scores, threshold)
    except EmptySelectionError as exc:
        raise click.ClickException(str(exc)) from exc
    except ParetoPoolError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo("selected: " + ",".join(selected.selected_features))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--data-dir", default="paretopool-data", show_default=True,
              type=click.Path(file_okay=False), envvar="PARETOPOOL_DATA_DIR")
def serve(host, port, data_dir):
    """Run the campaign HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(Path(data_dir)), host=host, port=port)


if __name__ == "__main__":
    main()
