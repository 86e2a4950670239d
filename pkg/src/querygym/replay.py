"""Render persisted trajectories as chat transcripts or lineage graphs."""
from __future__ import annotations

from .model import EpisodeStatus, TrajectoryRecord


def render_chat(record: TrajectoryRecord) -> str:
    lines = [f"# task {record.task_id} (seed {record.seed})", ""]
    total = 0.0
    for step in record.steps:
        lines.append(f"AGENT [{step.step_index}]:")
        lines.append(f"  {step.raw_action_text.strip()}")
        lines.append("ENV:")
        for obs_line in step.observation.text.splitlines():
            lines.append(f"  {obs_line}")
        if step.reward.value:
            lines.append(f"  reward={step.reward.value} "
                         f"({step.reward.relation.value})")
        total += step.reward.value
        lines.append("")
    lines.append(f"status: {record.status.value}")
    lines.append(f"reward={total}")
    return "\n".join(lines)


def render_dot(record: TrajectoryRecord) -> str:
    lines = ["digraph lineage {", "  rankdir=LR;"]
    ctes = {entry["cte_id"] for entry in record.lineage}
    bases = set()
    for entry in record.lineage:
        for parent in entry["parent_ids"]:
            if parent not in ctes:
                bases.add(parent)
    for base in sorted(bases):
        lines.append(f'  "{base}" [shape=box];')
    for entry in record.lineage:
        lines.append(f'  "{entry["cte_id"]}" [shape=ellipse];')
    for entry in record.lineage:
        for parent in entry["parent_ids"]:
            lines.append(f'  "{parent}" -> "{entry["cte_id"]}";')
    lines.append("}")
    return "\n".join(lines)
