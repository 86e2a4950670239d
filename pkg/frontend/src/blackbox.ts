import type { ServiceClient } from "./api";
import { renderExplore, type ExploreView } from "./explore";
import type { ActionEntry, TaskSummary } from "./types";

export interface BlackboxView {
  root: HTMLElement;
  load(taskId: string): Promise<void>;
  repairPane: ExploreView;
}

/**
 * Side-by-side comparison for remediation tasks: the left pane shows the
 * seed query's outcome from the episode overview (success preview or the
 * verbatim error trace, both produced server-side as the implicit first
 * action); the right pane hosts a stepwise session on the same task for
 * manual repair.
 */
export function renderBlackbox(
  container: HTMLElement,
  client: ServiceClient,
  tasks: TaskSummary[],
  actions: ActionEntry[],
): BlackboxView {
  const doc = container.ownerDocument;
  const root = doc.createElement("div");
  root.className = "blackbox";

  const picker = doc.createElement("select");
  picker.className = "task-picker";
  const placeholder = doc.createElement("option");
  placeholder.value = "";
  placeholder.textContent = "choose a remediation task…";
  picker.appendChild(placeholder);
  for (const task of tasks.filter((t) => t.remediation)) {
    const option = doc.createElement("option");
    option.value = task.task_id;
    option.textContent = `${task.task_id}: ${task.question}`;
    picker.appendChild(option);
  }
  root.appendChild(picker);

  const panes = doc.createElement("div");
  panes.className = "panes";
  const left = doc.createElement("div");
  left.className = "pane blackbox-pane";
  const leftTitle = doc.createElement("h3");
  leftTitle.textContent = "seed query outcome";
  left.appendChild(leftTitle);
  const seedOutcome = doc.createElement("pre");
  seedOutcome.className = "seed-outcome";
  left.appendChild(seedOutcome);
  const right = doc.createElement("div");
  right.className = "pane repair-pane";
  const rightTitle = doc.createElement("h3");
  rightTitle.textContent = "stepwise repair";
  right.appendChild(rightTitle);
  panes.appendChild(left);
  panes.appendChild(right);
  root.appendChild(panes);

  const repairPane = renderExplore(right, client, tasks, actions);

  const load = async (taskId: string): Promise<void> => {
    // one throwaway episode to read the seed outcome from the overview
    const created = await client.createEpisode(taskId);
    seedOutcome.textContent = created.observation.text;
    seedOutcome.classList.toggle(
      "error",
      created.observation.text.includes("initial query failed"),
    );
    await client.abandon(created.session_id);
    await repairPane.start(taskId);
  };

  picker.addEventListener("change", () => {
    if (picker.value) {
      void load(picker.value);
    }
  });

  container.appendChild(root);
  return { root, load, repairPane };
}
