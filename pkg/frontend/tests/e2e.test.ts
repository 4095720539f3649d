/** End-to-end vetting loop against a live gateway.
 *
 * Spawns the real HTTP service over the bundled demo store and drives the
 * UI controllers through actual fetch calls: reject the canonical
 * "(Microsoft, fine)" false positive, trigger a retrain, and verify the
 * refreshed register excludes the mention and carries the bumped model
 * version; then check the portfolio grid renders exactly the demo's
 * filled cells from the live API.
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { buildOverlapGrid } from "../src/overlapView.js";
import { buildRegisterView } from "../src/registerView.js";
import { TriageQueue } from "../src/triage.js";

const PORT = 8400 + (process.pid % 1000);
const BASE_URL = `http://127.0.0.1:${PORT}`;
const REPO_ROOT = join(__dirname, "..", "..");

let server: ChildProcess | undefined;
let storeDir: string;

async function waitForHealth(client: ApiClient, attempts = 120): Promise<void> {
  for (let i = 0; i < attempts; i++) {
    try {
      const health = await client.health();
      if (health.status === "ok") return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 500));
  }
  throw new Error(`gateway did not come up on ${BASE_URL}`);
}

beforeAll(async () => {
  storeDir = mkdtempSync(join(tmpdir(), "riskmine-e2e-"));
  const seeded = spawnSync(
    "python3", ["-m", "riskmine.gateway.cli", "demo", "--store", storeDir],
    { cwd: REPO_ROOT, encoding: "utf-8" },
  );
  if (seeded.status !== 0) {
    throw new Error(`demo seeding failed:\n${seeded.stderr}`);
  }
  server = spawn(
    "python3",
    ["-m", "riskmine.gateway.cli", "serve", "--store", storeDir,
      "--host", "127.0.0.1", "--port", String(PORT)],
    { cwd: REPO_ROOT, stdio: "ignore" },
  );
  await waitForHealth(new ApiClient({ baseUrl: BASE_URL, annotator: "ana" }));
}, 120_000);

afterAll(() => {
  server?.kill("SIGTERM");
  if (storeDir) rmSync(storeDir, { recursive: true, force: true });
});

describe("analyst vetting loop (live gateway)", () => {
  const client = new ApiClient({ baseUrl: BASE_URL, annotator: "ana" });

  it("reject sentence-(b), retrain, refreshed register excludes it and bumps the version",
    async () => {
      const before = await client.health();
      const queue = new TriageQueue(client, "ana");
      await queue.load({ status: "UNREVIEWED", entity: "microsoft" });
      expect(queue.cards.length).toBe(2);

      // find the "I feel fine" card and reject it through the queue
      const feelFine = queue.cards.findIndex((c) => c.snippet.startsWith("I feel fine"));
      expect(feelFine).toBeGreaterThanOrEqual(0);
      queue.cursor = feelFine;
      await queue.reject();
      expect(queue.cards[feelFine].state).toBe("confirmed");
      expect(queue.cards[feelFine].judgment).toBe("INCORRECT");

      const retrained = await client.retrain();
      expect(retrained.model_version).toBe(before.model_version + 1);

      // refreshing the register: mention excluded, version incremented
      const register = await client.register("microsoft");
      const view = buildRegisterView(register);
      expect(view.modelVersion).toBe(before.model_version + 1);
      expect(view.rows).toHaveLength(1);
      expect(view.rows[0].riskType).toBe("fine");
      expect(view.rows[0].count).toBe(1); // only the genuine sentence-(a) mention

      // the rejected card leaves the UNREVIEWED filter
      await queue.load({ status: "UNREVIEWED", entity: "microsoft" });
      expect(queue.cards.map((c) => c.snippet).some((s) => s.startsWith("I feel fine")))
        .toBe(false);
    }, 60_000);

  it("renders the portfolio grid exactly from the live API", async () => {
    const payload = await client.overlap("fig9");
    const grid = buildOverlapGrid(payload);
    expect(grid.columns).toEqual([
      "type-a risk", "type-b risk", "type-c risk",
      "type-d risk", "type-j risk", "type-k risk",
    ]);
    expect(grid.filledCells).toEqual([
      [0, 1], [0, 4],
      [1, 0], [1, 1],
      [2, 2], [2, 4],
      [3, 3],
      [4, 0], [4, 5],
    ]);
    expect(grid.diversity).toBeCloseTo(0.9, 10);
  }, 30_000);

  it("serves candidates whose spans project cleanly into cards", async () => {
    const queue = new TriageQueue(client, "ana");
    await queue.load({ status: "ALL", pageSize: 50 });
    expect(queue.cards.length).toBeGreaterThan(20);
    for (const card of queue.cards) {
      expect(card.segments.map((s) => s.text).join(" ")).toBe(card.snippet);
    }
  }, 30_000);
});
