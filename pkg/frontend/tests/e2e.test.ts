// @vitest-environment jsdom
//
// Full-stack exercise: spawns the real campaign service, then drives the
// dashboard App against it through DOM events, asserting that everything on
// screen is byte-identical to what the service actually sent.
import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { App } from "../src/main.js";

const PORT = 8300 + (process.pid % 500);
const BASE = `http://127.0.0.1:${PORT}`;
const LONG = 120_000;

let server: ChildProcess;
let dataDir: string;
let container: HTMLElement;
let app: App;
let campaignId = "";
const api = new ApiClient(BASE);

const q = <T extends Element>(selector: string): T => {
  const node = container.querySelector<T>(selector);
  if (node === null) throw new Error("missing element: " + selector);
  return node;
};
const qa = (selector: string): Element[] =>
  Array.from(container.querySelectorAll(selector));

async function until(
  check: () => boolean,
  what: string,
  ms = 60_000,
): Promise<void> {
  const deadline = Date.now() + ms;
  while (Date.now() < deadline) {
    if (check()) return;
    await new Promise((resolve) => setTimeout(resolve, 25));
  }
  throw new Error("timed out waiting for " + what);
}

function fillCard(card: Element, values: string[]): void {
  const inputs = Array.from(card.querySelectorAll<HTMLInputElement>("input"));
  inputs.forEach((input, j) => {
    input.value = values[j] ?? "";
  });
}

function submitCard(card: Element, values: string[]): void {
  fillCard(card, values);
  const form = card.querySelector("form");
  if (form === null) throw new Error("card has no form");
  form.dispatchEvent(new Event("submit", { cancelable: true }));
}

beforeAll(async () => {
  dataDir = mkdtempSync(join(tmpdir(), "dashboard-e2e-"));
  server = spawn(
    "paretopool",
    ["serve", "--host", "127.0.0.1", "--port", String(PORT), "--data-dir", dataDir],
    { stdio: "ignore" },
  );
  const deadline = Date.now() + 60_000;
  for (;;) {
    try {
      const probe = await fetch(`${BASE}/campaigns`);
      if (probe.ok) break;
    } catch {
      // connection refused until uvicorn binds
    }
    if (Date.now() > deadline) throw new Error("service did not start");
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  container = document.createElement("div");
  document.body.appendChild(container);
  app = new App(api, container);
}, LONG);

afterAll(() => {
  server?.kill();
  if (dataDir) rmSync(dataDir, { recursive: true, force: true });
});

describe("dashboard against a live service", () => {
  it("starts with an empty list and a prefilled form", async () => {
    await app.showList();
    expect(qa(".campaign-row")).toHaveLength(0);
    expect(q<HTMLInputElement>('input[name="max_iterations"]').value).toBe("150");
    expect(q<HTMLInputElement>('input[name="hv_threshold"]').value).toBe("0.97");
    expect(q<HTMLSelectElement>('select[name="mode"]').value).toBe("live");
  });

  it(
    "refuses an initial design larger than the catalog",
    async () => {
      await app.create({
        initial_samples: "500",
        batch_size: "5",
        mode: "live",
        catalog_source: "campaign",
      });
      expect(q("#form-message").textContent).toContain("exceeds catalog size");
      expect((await api.listCampaigns()).data).toHaveLength(0);
    },
    LONG,
  );

  it(
    "creates a live campaign and shows its initial design",
    async () => {
      await app.create({
        initial_samples: "5",
        batch_size: "5",
        seed: "1",
        mode: "live",
        catalog_source: "campaign",
      });
      const handles = await api.listCampaigns();
      expect(handles.data).toHaveLength(1);
      campaignId = handles.data[0].id;

      expect(q("#status-banner").textContent).toContain("live campaign — running");
      expect(q("#iteration-counter").textContent).toBe("0");
      const cards = qa(".card");
      expect(cards).toHaveLength(5);
      for (const card of cards) {
        expect(card.querySelectorAll("input")).toHaveLength(2);
        expect(card.querySelectorAll(".card-predicted")).toHaveLength(0);
      }
      // nothing measured yet: no points, metric cells empty
      expect(qa("circle")).toHaveLength(0);
      expect(qa(".metric-value").every((n) => n.textContent === "—")).toBe(true);
    },
    LONG,
  );

  it("blocks a malformed observation before it reaches the wire", async () => {
    const card = qa(".card")[0];
    submitCard(card, ["abc", "1"]);
    const error = card.querySelector<HTMLElement>(".local-error");
    expect(error?.style.display).toBe("block");
    expect(error?.textContent).toBe("must be a finite number");
    expect(card.querySelector<HTMLInputElement>("input")?.value).toBe("abc");
    expect((await api.getReport(campaignId)).data.evaluated).toHaveLength(0);
  });

  it(
    "records the whole initial design through the card forms",
    async () => {
      for (let j = 0; j < 5; j += 1) {
        const card = qa(".card")[0];
        submitCard(card, [String(100 + j), String(50 - j)]);
        if (j < 4) {
          await until(
            () => qa(".card").length === 4 - j,
            `card ${j} to be consumed`,
          );
          expect(q(".view-message").textContent).toBe(
            `recorded; ${4 - j} observations remaining`,
          );
        } else {
          await until(
            () =>
              container.querySelector(".view-message")?.textContent ===
              "batch complete — iteration 0",
            "initial batch to complete",
          );
        }
      }
      expect(q("#iteration-counter").textContent).toBe("0");
      // the refresh that followed pulled the next batch, now with posteriors
      await until(() => qa(".card").length === 5, "next batch to be suggested");
      for (const card of qa(".card")) {
        expect(card.querySelectorAll(".card-predicted")).toHaveLength(2);
      }
      expect(qa("circle.point-pending")).toHaveLength(5);
      expect(
        qa("circle.point-front").length + qa("circle.point-evaluated").length,
      ).toBe(5);
      const hv = q('.metric-value[data-metric="hv"]').textContent;
      expect(hv).not.toBe("—");
      expect(q('.metric-value[data-metric="utilization"]').textContent).not.toBe(
        "—",
      );
    },
    LONG,
  );

  it(
    "shows metrics byte-identical to the service payload",
    async () => {
      const wire = await (await fetch(`${BASE}/campaigns/${campaignId}/report`)).text();
      let checked = 0;
      for (const cell of qa(".metric-value")) {
        const name = (cell as HTMLElement).dataset.metric;
        const text = cell.textContent ?? "";
        if (text === "—") continue;
        expect(wire).toContain(`"${name}":${text}`);
        checked += 1;
      }
      expect(checked).toBeGreaterThanOrEqual(2);
      expect(wire).toContain(`"iteration":${q("#iteration-counter").textContent}`);
    },
    LONG,
  );

  it(
    "highlights exactly the rows the service reports on the front",
    async () => {
      const report = (await api.getReport(campaignId)).data;
      const shown = qa("circle.point-front")
        .map((c) => Number(c.getAttribute("data-catalog-index")))
        .sort((a, b) => a - b);
      const reported = [...report.front.catalog_indices].sort((a, b) => a - b);
      expect(shown).toEqual(reported);
    },
    LONG,
  );

  it(
    "answers what-if hovers from service data only",
    async () => {
      const report = (await api.getReport(campaignId)).data;
      const observedRow = report.evaluated[0];
      const circle = q<SVGCircleElement>(
        `circle[data-catalog-index="${observedRow.catalog_index}"]`,
      );
      circle.dispatchEvent(new Event("mouseenter"));
      const tooltip = q<HTMLElement>("#what-if");
      expect(tooltip.style.display).toBe("block");
      expect(q(".tooltip-title").textContent).toBe(
        `row ${observedRow.catalog_index} (observed)`,
      );
      const lines = qa(".tooltip-line").map((n) => n.textContent ?? "");
      report.objective_names.forEach((name, j) => {
        expect(lines[j].startsWith(`${name}: `)).toBe(true);
        expect(Number(lines[j].slice(name.length + 2))).toBeCloseTo(
          observedRow.values[j],
          10,
        );
      });
      circle.dispatchEvent(new Event("mouseleave"));
      expect(tooltip.style.display).toBe("none");

      const pending = q<SVGCircleElement>("circle.point-pending");
      pending.dispatchEvent(new Event("mouseenter"));
      expect(q(".tooltip-title").textContent).toBe(
        `row ${pending.getAttribute("data-catalog-index")} (predicted)`,
      );
      for (const line of qa(".tooltip-line")) {
        const text = line.textContent ?? "";
        expect(text).toContain("±");
        const sd = Number(text.split("±")[1]);
        expect(Number.isFinite(sd)).toBe(true);
        expect(sd).toBeGreaterThanOrEqual(0);
      }
      pending.dispatchEvent(new Event("mouseleave"));
    },
    LONG,
  );

  it(
    "pins service rejections to the card and keeps typed input",
    async () => {
      const card = qa(".card")[0];
      const index = Number(card.getAttribute("data-snapped-index"));
      fillCard(card, ["90", "40"]);
      // bypass the form so a wrong-arity body reaches the service
      await app.submit(index, ["90"]);
      const repainted = q<HTMLElement>(`.card[data-snapped-index="${index}"]`);
      expect(repainted.querySelector(".service-error")?.textContent).toBe(
        "expected 2 finite objective values",
      );
      expect(repainted.querySelector<HTMLInputElement>("input")?.value).toBe("90");
      expect(qa(".card")).toHaveLength(5);
    },
    LONG,
  );

  it(
    "completes a second batch and advances the iteration counter",
    async () => {
      for (let j = 0; j < 5; j += 1) {
        const card = qa(".card")[0];
        submitCard(card, [String(90 + j), String(40 - j)]);
        if (j < 4) {
          await until(
            () => qa(".card").length === 4 - j,
            `batch-2 card ${j} to be consumed`,
          );
        } else {
          await until(
            () =>
              container.querySelector("#iteration-counter")?.textContent === "1",
            "second batch to complete",
          );
        }
      }
      expect(q(".view-message").textContent).toBe("batch complete — iteration 1");
      const report = (await api.getReport(campaignId)).data;
      expect(report.iteration).toBe(1);
      expect(report.evaluated).toHaveLength(10);
    },
    LONG,
  );

  it("keeps campaigns across dashboard reloads", async () => {
    const second = document.createElement("div");
    document.body.appendChild(second);
    const reloaded = new App(new ApiClient(BASE), second);
    await reloaded.showList();
    expect(
      second.querySelector(`.campaign-row[data-id="${campaignId}"]`),
    ).not.toBeNull();
  });

  it(
    "creates a campaign from an uploaded catalog through the form",
    async () => {
      await app.showList();
      const source = q<HTMLSelectElement>('select[name="catalog_source"]');
      source.value = "upload";
      source.dispatchEvent(new Event("change"));
      expect(q<HTMLElement>(".upload-fields").style.display).toBe("");

      const rows = Array.from({ length: 12 }, (_, i) => `${i},${i},${11 - i}`);
      const csv = "x,y1,y2\n" + rows.join("\n") + "\n";
      const schema = JSON.stringify({
        features: ["x"],
        objectives: ["y1", "y2"],
        directions: ["max", "max"],
      });
      Object.defineProperty(q<HTMLInputElement>('input[name="catalog_csv_file"]'), "files", {
        value: [new File([csv], "lab.csv", { type: "text/csv" })],
      });
      Object.defineProperty(
        q<HTMLInputElement>('input[name="catalog_schema_file"]'),
        "files",
        { value: [new File([schema], "lab.schema.json")] },
      );
      q<HTMLInputElement>('input[name="initial_samples"]').value = "3";
      q<HTMLInputElement>('input[name="batch_size"]').value = "2";
      q<HTMLFormElement>("#create-form").dispatchEvent(
        new Event("submit", { cancelable: true }),
      );

      await until(
        () => qa(".card").length === 3,
        "uploaded catalog's initial design",
      );
      expect(q("#status-banner").textContent).toContain("live campaign — running");
      const featureNames = Array.from(
        qa(".card")[0].querySelectorAll(".card-features dt"),
      ).map((n) => n.textContent);
      expect(featureNames).toEqual(["x"]);
      expect((await api.listCampaigns()).data).toHaveLength(2);
    },
    LONG,
  );
});
