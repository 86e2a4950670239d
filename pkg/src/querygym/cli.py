"""Command-line surface: interactive play, LLM agent runs, batch eval,
trajectory replay, plan compilation, dataset validation, and the server.

The interactive commands are thin clients: they speak the same wire format to
either an in-process session manager (default) or a remote service
(`--service-url`).
"""
from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import click

from .actions import ActionKind, render_actions_help
from .agent import ChatCompletionsPolicy, EndpointError
from .client import ClientError, HttpClient, LocalClient
from .dataset import load_dataset
from .env import EnvConfig, Environment
from .errors import BadTrajectoryError, QueryGymError
from .model import Dialect, ObservationClass
from .service.sessions import SessionManager
from .trajectory import read_trajectories


@click.group()
@click.option("--dataset-root", type=click.Path(), default=None,
              help="BIRD-layout dataset directory.")
@click.option("--split", default="dev", show_default=True)
@click.option("--service-url", default=None,
              help="Remote service base URL; default is in-process.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-steps", type=int, default=30, show_default=True)
@click.option("--trajectory-dir", type=click.Path(), default=None)
@click.option("--pg-url-map", type=click.Path(exists=True), default=None,
              help="JSON file mapping db_id to a PostgreSQL URL.")
@click.pass_context
def main(ctx, dataset_root, split, service_url, seed, max_steps,
         trajectory_dir, pg_url_map):
    ctx.ensure_object(dict)
    ctx.obj.update(dataset_root=dataset_root, split=split,
                   service_url=service_url, seed=seed, max_steps=max_steps,
                   trajectory_dir=trajectory_dir, pg_url_map=pg_url_map)


def _load_tasks(ctx_obj):
    root = ctx_obj["dataset_root"]
    if not root:
        raise click.UsageError("--dataset-root is required for this command")
    pg_map = None
    if ctx_obj["pg_url_map"]:
        with open(ctx_obj["pg_url_map"]) as fh:
            pg_map = json.load(fh)
    report = load_dataset(root, ctx_obj["split"], pg_url_map=pg_map)
    for error in report.errors:
        click.echo(f"warning: {error}", err=True)
    return report


def _env_config(ctx_obj) -> EnvConfig:
    return EnvConfig(max_steps=ctx_obj["max_steps"], seed=ctx_obj["seed"])


def _make_client(ctx_obj):
    if ctx_obj["service_url"]:
        return HttpClient(ctx_obj["service_url"])
    report = _load_tasks(ctx_obj)
    manager = SessionManager(report.tasks, _env_config(ctx_obj),
                             trajectory_dir=ctx_obj["trajectory_dir"])
    return LocalClient(manager)


@main.command("make-fixtures")
@click.argument("directory", type=click.Path())
@click.pass_context
def make_fixtures(ctx, directory):
    """Generate the bundled fixture dataset under DIRECTORY."""
    from .fixtures import build_fixture_dataset
    manifest = build_fixture_dataset(directory, ctx.obj["split"])
    click.echo(f"wrote {manifest}")


@main.command()
@click.pass_context
def validate(ctx):
    """Check that every task loads and its gold query executes."""
    report = _load_tasks(ctx.obj)
    from .dataset import materialize_target
    from .engine import open_engine
    failures = list(report.errors)
    for task in report.tasks:
        if task.is_remediation and task.dialect == Dialect.POSTGRESQL:
            continue
        try:
            engine = open_engine(task.db_ref, task.dialect)
            try:
                materialize_target(task, engine)
            finally:
                engine.close()
        except QueryGymError as exc:
            failures.append(f"{task.task_id}: {exc}")
        except Exception as exc:
            failures.append(f"{task.task_id}: {exc}")
    click.echo(f"{len(report.tasks)} task(s) loaded, "
               f"{len(failures)} problem(s)")
    for failure in failures:
        click.echo(f"  {failure}")
    if failures:
        sys.exit(1)


@main.command()
@click.option("--port", type=int, default=8777, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--with-console", type=click.Path(), default=None,
              help="Serve a built web console from this directory at /.")
@click.pass_context
def serve(ctx, port, host, with_console):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app
    report = _load_tasks(ctx.obj)
    manager = SessionManager(report.tasks, _env_config(ctx.obj),
                             trajectory_dir=ctx.obj["trajectory_dir"])
    app = create_app(manager)
    if with_console:
        if os.path.isdir(with_console):
            from fastapi.staticfiles import StaticFiles
            app.mount("/", StaticFiles(directory=with_console, html=True),
                      name="console")
        else:
            click.echo(f"warning: console directory {with_console} not found",
                       err=True)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.argument("task_id")
@click.pass_context
def play(ctx, task_id):
    """Interactive REPL for one task; `:help` and `:quit` are built in."""
    client = _make_client(ctx.obj)
    try:
        session_id, observation = client.create(task_id)
    except ClientError as exc:
        click.echo(f"error: {exc.detail}", err=True)
        sys.exit(2)
    click.echo(observation["text"])
    try:
        while True:
            try:
                line = input("> ")
            except EOFError:
                break
            line = line.strip()
            if not line:
                continue
            if line == ":quit":
                break
            if line == ":help":
                click.echo(render_actions_help())
                continue
            try:
                result = client.step(session_id, line)
            except ClientError as exc:
                click.echo(f"error: {exc.detail}", err=True)
                if exc.status == 410:
                    break
                continue
            click.echo(result["observation"]["text"])
            if result["reward"]["value"]:
                click.echo(f"reward={result['reward']['value']}")
            if result["terminated"]:
                click.echo("solved!")
                return
            if result["truncated"]:
                click.echo("step limit reached")
                return
    finally:
        client.abandon(session_id)


def _run_policy_episode(client, task_id: str, policy, max_turns: int):
    """One LLM-driven episode; returns (solved, steps, error)."""
    session_id, observation = client.create(task_id)
    policy.start(observation["text"])
    steps = 0
    solved = False
    try:
        obs_text = None
        for _ in range(max_turns):
            action = policy.next_action(obs_text)
            result = client.step(session_id, action)
            steps += 1
            obs_text = result["observation"]["text"]
            if result["terminated"]:
                solved = True
                break
            if result["truncated"]:
                break
        return solved, steps, None
    except EndpointError as exc:
        return solved, steps, str(exc)
    finally:
        if not solved:
            client.abandon(session_id)


@main.command("agent")
@click.option("--endpoint", required=True,
              help="Chat-completions endpoint URL.")
@click.option("--model", required=True)
@click.option("--task", "task_ids", multiple=True,
              help="Task id(s); default: every task in the dataset.")
@click.pass_context
def agent_cmd(ctx, endpoint, model, task_ids):
    """Run the reference LLM agent."""
    client = _make_client(ctx.obj)
    if not task_ids:
        task_ids = [t["task_id"] for t in client.list_tasks()]
    catalog_help = render_actions_help()
    results = []
    for task_id in task_ids:
        policy = ChatCompletionsPolicy(endpoint, model, catalog_help)
        solved, steps, error = _run_policy_episode(
            client, task_id, policy, ctx.obj["max_steps"])
        status = "solved" if solved else ("errored" if error else "unsolved")
        click.echo(f"{task_id}: {status} in {steps} step(s)"
                   + (f" ({error})" if error else ""))
        results.append(solved)
    solved_count = sum(results)
    click.echo(f"solved {solved_count}/{len(results)}")
    if not any(results):
        sys.exit(1)


def _replay_plan(client, task_id: str, plan: list[str]):
    session_id, _ = client.create(task_id)
    steps = 0
    error_steps = 0
    partial = False
    solved = False
    for action in plan:
        result = client.step(session_id, action)
        steps += 1
        if result["observation"]["klass"] == ObservationClass.ERROR_FEEDBACK.value:
            error_steps += 1
        if result["reward"]["relation"] in ("Subset", "Superset") \
                and result["reward"]["value"] > 0:
            partial = True
        if result["terminated"]:
            solved = True
            break
        if result["truncated"]:
            break
    if not solved:
        client.abandon(session_id)
    return {"task_id": task_id, "solved": solved, "steps": steps,
            "error_steps": error_steps, "partial": partial}


@main.command("eval")
@click.option("--plans", "plans_file", type=click.Path(exists=True),
              help="JSON file mapping task_id to a list of action strings.")
@click.option("--endpoint", default=None)
@click.option("--model", default=None)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--json-out", type=click.Path(), default=None)
@click.pass_context
def eval_cmd(ctx, plans_file, endpoint, model, jobs, json_out):
    """Batch evaluation from stored plans or an LLM endpoint."""
    client = _make_client(ctx.obj)
    tasks = [t["task_id"] for t in client.list_tasks()]
    if plans_file:
        with open(plans_file) as fh:
            plans = json.load(fh)

        def run(task_id):
            return _replay_plan(client, task_id, plans.get(task_id, []))
    elif endpoint and model:
        catalog_help = render_actions_help()

        def run(task_id):
            policy = ChatCompletionsPolicy(endpoint, model, catalog_help)
            solved, steps, error = _run_policy_episode(
                client, task_id, policy, ctx.obj["max_steps"])
            return {"task_id": task_id, "solved": solved, "steps": steps,
                    "error_steps": 0, "partial": False, "error": error}
    else:
        raise click.UsageError("provide --plans or --endpoint/--model")

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run, tasks))
    else:
        rows = [run(t) for t in tasks]

    solved_rows = [r for r in rows if r["solved"]]
    total_steps = sum(r["steps"] for r in rows) or 1
    summary = {
        "tasks": len(rows),
        "solved_rate": len(solved_rows) / len(rows) if rows else 0.0,
        "mean_steps_to_solve": (
            sum(r["steps"] for r in solved_rows) / len(solved_rows)
            if solved_rows else None),
        "partial_credit_rate": (
            sum(1 for r in rows if r.get("partial")) / len(rows)
            if rows else 0.0),
        "error_step_rate": sum(r["error_steps"] for r in rows) / total_steps,
    }
    width = max((len(r["task_id"]) for r in rows), default=8)
    for r in rows:
        status = "solved" if r["solved"] else "unsolved"
        click.echo(f"{r['task_id']:<{width}}  {status:<9} steps={r['steps']} "
                   f"errors={r['error_steps']} partial={r.get('partial', False)}")
    click.echo(json.dumps(summary, indent=2))
    if json_out:
        with open(json_out, "w") as fh:
            json.dump({"rows": rows, "summary": summary}, fh, indent=2)


@main.command()
@click.argument("trajectory_file", type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["chat", "dot"]),
              default="chat", show_default=True)
def replay(trajectory_file, fmt):
    """Render a trajectory file as a chat transcript or a lineage graph."""
    from .replay import render_chat, render_dot
    try:
        records = read_trajectories(trajectory_file)
    except BadTrajectoryError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    renderer = render_chat if fmt == "chat" else render_dot
    for record in records:
        click.echo(renderer(record))


@main.command("compile")
@click.argument("plan_file", type=click.Path(exists=True))
@click.option("--task", "task_id", required=True)
@click.pass_context
def compile_cmd(ctx, plan_file, task_id):
    """Replay a plan and print the single SQL query of its final CTE."""
    from .compiler import compose_with_chain
    plan = _read_plan(plan_file, task_id)
    report = _load_tasks(ctx.obj)
    task = next((t for t in report.tasks if t.task_id == task_id), None)
    if task is None:
        click.echo(f"error: unknown task {task_id}", err=True)
        sys.exit(2)
    env = Environment(task, _env_config(ctx.obj))
    try:
        env.reset()
        for action in plan:
            result = env.step(action)
            if result.observation.klass == ObservationClass.ERROR_FEEDBACK:
                click.echo(result.observation.text, err=True)
                sys.exit(1)
            if result.terminated or result.truncated:
                break
        if not env.state.ctes:
            click.echo("error: plan created no CTEs", err=True)
            sys.exit(1)
        click.echo(compose_with_chain(env.state.ctes[-1].cte_id, env.state))
    finally:
        env.close()


def _read_plan(path: str, task_id: str) -> list[str]:
    with open(path) as fh:
        content = fh.read()
    try:
        data = json.loads(content)
    except json.JSONDecodeError:
        records = read_trajectories(path)
        return [s.raw_action_text for s in records[0].steps]
    if isinstance(data, dict):
        plan = data.get(task_id)
        if plan is None:
            raise click.UsageError(f"no plan for task {task_id} in {path}")
        return plan
    if isinstance(data, list):
        return [str(a) for a in data]
    raise click.UsageError(f"unrecognized plan file format: {path}")


if __name__ == "__main__":
    main()
