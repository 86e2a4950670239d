import { loadConfig, ServiceClient } from "./api";
import { renderBlackbox } from "./blackbox";
import { renderExplore } from "./explore";
import { renderReplay } from "./replay";
import type { TrajectoryPayload } from "./types";
import "./style.css";

async function boot(): Promise<void> {
  const app = document.getElementById("app");
  if (!app) {
    return;
  }
  const config = await loadConfig();
  const client = new ServiceClient(config.serviceUrl);

  const nav = document.createElement("nav");
  const views: Record<string, HTMLElement> = {};
  for (const name of ["explore", "blackbox", "replay"]) {
    const button = document.createElement("button");
    button.textContent = name;
    button.addEventListener("click", () => {
      for (const [viewName, element] of Object.entries(views)) {
        element.style.display = viewName === name ? "" : "none";
      }
    });
    nav.appendChild(button);
    const section = document.createElement("section");
    section.id = `view-${name}`;
    views[name] = section;
  }
  app.appendChild(nav);
  Object.values(views).forEach((section) => app.appendChild(section));

  let tasks;
  let actions;
  try {
    [tasks, actions] = await Promise.all([
      client.listTasks(),
      client.listActions(),
    ]);
  } catch (error) {
    const problem = document.createElement("div");
    problem.className = "banner warning";
    problem.textContent = `service unreachable: ${String(error)}`;
    app.appendChild(problem);
    return;
  }

  renderExplore(views.explore, client, tasks, actions);
  renderBlackbox(views.blackbox, client, tasks, actions);

  // replay view: load a trajectory by session id or from an uploaded file
  const replayControls = document.createElement("div");
  replayControls.className = "replay-controls";
  const sessionInput = document.createElement("input");
  sessionInput.placeholder = "session id";
  const fetchButton = document.createElement("button");
  fetchButton.textContent = "fetch trajectory";
  const fileInput = document.createElement("input");
  fileInput.type = "file";
  fileInput.accept = ".json,.jsonl";
  const replayHost = document.createElement("div");
  const replayError = document.createElement("div");
  replayError.className = "banner warning";

  const showTrajectory = (trajectory: TrajectoryPayload): void => {
    replayHost.innerHTML = "";
    replayError.textContent = "";
    renderReplay(replayHost, trajectory);
  };

  fetchButton.addEventListener("click", async () => {
    try {
      showTrajectory(await client.trajectory(sessionInput.value.trim()));
    } catch (error) {
      replayError.textContent = `could not fetch trajectory: ${String(error)}`;
    }
  });
  fileInput.addEventListener("change", async () => {
    const file = fileInput.files?.[0];
    if (!file) {
      return;
    }
    try {
      const text = await file.text();
      const firstLine = text.split("\n").find((line) => line.trim());
      showTrajectory(JSON.parse(firstLine ?? "") as TrajectoryPayload);
    } catch {
      replayError.textContent = "invalid trajectory file";
    }
  });
  replayControls.appendChild(sessionInput);
  replayControls.appendChild(fetchButton);
  replayControls.appendChild(fileInput);
  views.replay.appendChild(replayControls);
  views.replay.appendChild(replayError);
  views.replay.appendChild(replayHost);

  // default view
  views.blackbox.style.display = "none";
  views.replay.style.display = "none";
}

void boot();
