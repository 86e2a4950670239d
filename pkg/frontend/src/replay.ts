import { buildGraph, renderLineageSvg } from "./lineage";
import type { TrajectoryPayload } from "./types";

export interface ReplayView {
  root: HTMLElement;
  setStep(index: number): void;
  currentStep(): number;
}

function cteCreatedAt(trajectory: TrajectoryPayload, index: number): string | undefined {
  const structured = trajectory.steps[index]?.observation.structured;
  const cteId = structured ? (structured as { cte_id?: unknown }).cte_id : undefined;
  return typeof cteId === "string" ? cteId : undefined;
}

/**
 * Chat timeline (agent/environment bubble per step) with a step scrubber and
 * a synchronized lineage diagram highlighting the CTE created at the scrubbed
 * step.
 */
export function renderReplay(
  container: HTMLElement,
  trajectory: TrajectoryPayload,
): ReplayView {
  const doc = container.ownerDocument;
  const root = doc.createElement("div");
  root.className = "replay";

  const banner = doc.createElement("div");
  banner.className = "banner";
  if (trajectory.status === "Solved") {
    const total = trajectory.steps.reduce(
      (sum, step) => sum + step.reward.value,
      0,
    );
    banner.classList.add("success");
    banner.textContent = `solved — reward ${total}`;
  } else if (trajectory.status === "StepLimit") {
    banner.classList.add("warning");
    banner.textContent = "step limit reached";
  } else {
    banner.textContent = trajectory.status;
  }
  root.appendChild(banner);

  const timeline = doc.createElement("div");
  timeline.className = "timeline";
  trajectory.steps.forEach((step, index) => {
    const agent = doc.createElement("div");
    agent.className = "bubble agent";
    agent.setAttribute("data-step", String(index));
    agent.textContent = step.raw_action_text;
    timeline.appendChild(agent);

    const env = doc.createElement("div");
    env.className = "bubble env";
    env.setAttribute("data-step", String(index));
    if (step.observation.klass === "ErrorFeedback") {
      env.classList.add("error");
    }
    env.textContent = step.observation.text;
    if (step.reward.value) {
      const reward = doc.createElement("div");
      reward.className = "reward";
      reward.textContent = `reward=${step.reward.value} (${step.reward.relation})`;
      env.appendChild(reward);
    }
    timeline.appendChild(env);
  });
  root.appendChild(timeline);

  const scrubber = doc.createElement("input");
  scrubber.type = "range";
  scrubber.className = "scrubber";
  scrubber.min = "0";
  scrubber.max = String(Math.max(0, trajectory.steps.length - 1));
  scrubber.value = "0";
  root.appendChild(scrubber);

  const diagram = doc.createElement("div");
  diagram.className = "diagram";
  root.appendChild(diagram);

  const graph = buildGraph(trajectory.lineage);
  let current = 0;

  const setStep = (index: number): void => {
    current = Math.max(0, Math.min(index, trajectory.steps.length - 1));
    scrubber.value = String(current);
    timeline
      .querySelectorAll(".bubble")
      .forEach((bubble) =>
        bubble.classList.toggle(
          "current",
          bubble.getAttribute("data-step") === String(current),
        ),
      );
    diagram.innerHTML = renderLineageSvg(graph, cteCreatedAt(trajectory, current));
  };
  scrubber.addEventListener("input", () => setStep(Number(scrubber.value)));
  setStep(0);

  container.appendChild(root);
  return { root, setStep, currentStep: () => current };
}
