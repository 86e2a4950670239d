import { describe, expect, it } from "vitest";

import { ServiceClient } from "../src/api";
import { renderBlackbox } from "../src/blackbox";
import { renderExplore } from "../src/explore";
import type { ActionEntry, TaskSummary } from "../src/types";
import actionsFixture from "./fixtures/actions.json";
import tasksFixture from "./fixtures/tasks.json";
import { MockService } from "./mockService";

const actions = actionsFixture as ActionEntry[];
const tasks = tasksFixture as TaskSummary[];

function setup() {
  const mock = new MockService();
  const client = new ServiceClient("http://mock", mock.fetch);
  const host = document.createElement("div");
  const view = renderExplore(host, client, tasks, actions);
  return { mock, client, host, view };
}

describe("explore view", () => {
  it("starts an episode and shows the overview", async () => {
    const { host, view } = setup();
    await view.start("dev:0");
    expect(view.sessionId()).not.toBeNull();
    const entries = host.querySelectorAll(".observation-log .entry");
    expect(entries).toHaveLength(1);
    expect(entries[0].textContent).toContain("[OVERVIEW]");
  });

  it("completing the gold plan reaches the success banner", async () => {
    const { mock, host, view } = setup();
    await view.start("dev:2");
    for (const action of mock.plans["dev:2"]) {
      const result = await view.submit(action);
      expect(result).not.toBeNull();
    }
    const banner = host.querySelector(".banner")!;
    expect(banner.classList.contains("success")).toBe(true);
    expect(banner.textContent).toContain("solved");
    expect(banner.textContent).toContain("1");
  });

  it("malformed raw action renders a distinct error block and continues", async () => {
    const { mock, host, view } = setup();
    await view.start("dev:0");
    await view.submit("complete gibberish");
    const errorBlock = host.querySelector(".observation-log .entry.error");
    expect(errorBlock).not.toBeNull();
    expect(errorBlock!.textContent).toContain("[ERROR]");
    // session still usable afterwards
    const result = await view.submit(mock.plans["dev:0"][0]);
    expect(result).not.toBeNull();
    expect(host.querySelector(".banner")!.classList.contains("success")).toBe(
      true,
    );
  });

  it("further submissions are ignored after termination", async () => {
    const { mock, view } = setup();
    await view.start("dev:0");
    await view.submit(mock.plans["dev:0"][0]);
    const after = await view.submit('["get_tables"]');
    expect(after).toBeNull();
  });

  it("only documented endpoints are used", async () => {
    const { mock, view } = setup();
    await view.start("dev:0");
    await view.submit('["get_tables"]');
    const allowed = [
      /^\/v1\/tasks$/,
      /^\/v1\/actions$/,
      /^\/v1\/episodes$/,
      /^\/v1\/episodes\/[^/]+\/step$/,
      /^\/v1\/episodes\/[^/]+\/trajectory$/,
      /^\/v1\/episodes\/[^/]+$/,
    ];
    for (const request of mock.requests) {
      expect(
        allowed.some((pattern) => pattern.test(request.path)),
        request.path,
      ).toBe(true);
    }
  });
});

describe("blackbox view", () => {
  it("shows the seed error trace on the left and a repair pane on the right", async () => {
    const mock = new MockService();
    const client = new ServiceClient("http://mock", mock.fetch);
    const host = document.createElement("div");
    const view = renderBlackbox(host, client, tasks, actions);
    await view.load("dev:12");
    const seed = host.querySelector(".seed-outcome")!;
    expect(seed.textContent).toContain("initial query failed");
    expect(seed.classList.contains("error")).toBe(true);
    // right pane is a live stepwise session on the same task
    expect(view.repairPane.sessionId()).not.toBeNull();
  });

  it("repairing on the right reaches the solved state", async () => {
    const mock = new MockService();
    const client = new ServiceClient("http://mock", mock.fetch);
    const host = document.createElement("div");
    const view = renderBlackbox(host, client, tasks, actions);
    await view.load("dev:12");
    for (const action of mock.plans["dev:12"]) {
      await view.repairPane.submit(action);
    }
    const banner = host.querySelector(".repair-pane .banner")!;
    expect(banner.classList.contains("success")).toBe(true);
  });

  it("task picker lists only remediation tasks", () => {
    const mock = new MockService();
    const client = new ServiceClient("http://mock", mock.fetch);
    const host = document.createElement("div");
    renderBlackbox(host, client, tasks, actions);
    const options = Array.from(
      host.querySelectorAll<HTMLOptionElement>(".blackbox > .task-picker option"),
    )
      .map((o) => o.value)
      .filter(Boolean);
    const remediation = tasks.filter((t) => t.remediation).map((t) => t.task_id);
    expect(options).toEqual(remediation);
  });
});
