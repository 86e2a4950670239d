import { renderActionBuilder } from "./actionBuilder";
import type { ServiceClient } from "./api";
import { ServiceError } from "./api";
import type { ActionEntry, StepPayload, TaskSummary } from "./types";

export interface ExploreView {
  root: HTMLElement;
  start(taskId: string): Promise<void>;
  submit(actionText: string): Promise<StepPayload | null>;
  sessionId(): string | null;
}

/**
 * Interactive panel: task picker, action builder generated from catalog
 * metadata, observation log, and a reward/termination banner. The environment
 * is turn-based, so each submit awaits the service response.
 */
export function renderExplore(
  container: HTMLElement,
  client: ServiceClient,
  tasks: TaskSummary[],
  actions: ActionEntry[],
): ExploreView {
  const doc = container.ownerDocument;
  const root = doc.createElement("div");
  root.className = "explore";

  const picker = doc.createElement("select");
  picker.className = "task-picker";
  const placeholder = doc.createElement("option");
  placeholder.value = "";
  placeholder.textContent = "choose a task…";
  picker.appendChild(placeholder);
  for (const task of tasks) {
    const option = doc.createElement("option");
    option.value = task.task_id;
    option.textContent = `${task.task_id}: ${task.question}` +
      (task.remediation ? " [remediation]" : "");
    picker.appendChild(option);
  }
  root.appendChild(picker);

  const banner = doc.createElement("div");
  banner.className = "banner";
  root.appendChild(banner);

  const log = doc.createElement("div");
  log.className = "observation-log";
  root.appendChild(log);

  let session: string | null = null;
  let busy = false;
  let over = false;

  const append = (className: string, text: string): void => {
    const block = doc.createElement("pre");
    block.className = className;
    block.textContent = text;
    log.appendChild(block);
  };

  const submit = async (actionText: string): Promise<StepPayload | null> => {
    if (!session || busy || over) {
      return null;
    }
    busy = true;
    append("entry agent", actionText);
    try {
      const result = await client.step(session, actionText);
      const klass = result.observation.klass;
      append(
        klass === "ErrorFeedback" ? "entry env error" : "entry env",
        result.observation.text,
      );
      if (result.terminated) {
        over = true;
        banner.classList.add("success");
        banner.textContent = `solved! reward ${result.reward.value}`;
      } else if (result.truncated) {
        over = true;
        banner.classList.add("warning");
        banner.textContent = "step limit reached";
      }
      return result;
    } catch (error) {
      if (error instanceof ServiceError) {
        append("entry transport-error", `${error.status}: ${error.detail}`);
        if (error.status === 410) {
          over = true;
        }
        return null;
      }
      throw error;
    } finally {
      busy = false;
    }
  };

  const builder = renderActionBuilder(root, actions, (actionText) => {
    void submit(actionText);
  });
  void builder;

  const start = async (taskId: string): Promise<void> => {
    if (session) {
      try {
        await client.abandon(session);
      } catch {
        // already gone
      }
    }
    log.innerHTML = "";
    banner.textContent = "";
    banner.classList.remove("success", "warning");
    over = false;
    const created = await client.createEpisode(taskId);
    session = created.session_id;
    append("entry env", created.observation.text);
  };

  picker.addEventListener("change", () => {
    if (picker.value) {
      void start(picker.value);
    }
  });

  container.appendChild(root);
  return { root, start, submit, sessionId: () => session };
}
