/**
 * End-to-end decision loop against the real service.
 *
 * Boots the Python service on a scratch model, then drives the same
 * state-machine code the browser uses: admit, three days of observations
 * interleaved with two what-if queries. Asserts the two stay-level
 * contracts: what-ifs never change the committed trajectory, and every
 * probability the chart renders byte-matches a recorded response body.
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { chartData } from "../src/chart.js";
import { PatientSession } from "../src/state.js";
import type { Observations } from "../src/types.js";

const PYTHON = process.env.PYTHON ?? "python3";
const PORT = 18000 + Math.floor(Math.random() * 10_000);
const BASE = `http://127.0.0.1:${PORT}`;

let workdir: string;
let server: ChildProcess;

async function waitForService(timeoutMs = 60_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/healthz`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 300));
  }
  throw new Error("service did not come up in time");
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "nidss-ui-"));
  const write = spawnSync(
    PYTHON,
    [
      "-c",
      [
        "from nidss.clinical import default_schema",
        "from nidss.models import default_ground_truth",
        "from nidss.dbn import save_spec",
        `save_spec(default_ground_truth(default_schema()), r'${join(workdir, "model.json")}')`,
      ].join("\n"),
    ],
    { encoding: "utf-8" },
  );
  if (write.status !== 0) throw new Error(`model generation failed: ${write.stderr}`);
  server = spawn(
    PYTHON,
    ["-m", "nidss.cli", "serve", "--model", join(workdir, "model.json"),
     "--port", String(PORT), "--db", join(workdir, "sessions.db")],
    { stdio: "ignore" },
  );
  await waitForService();
}, 120_000);

afterAll(() => {
  server?.kill();
  rmSync(workdir, { recursive: true, force: true });
});

const ADMISSION: Observations = {
  sex: "female",
  age1: "41-65",
  periode_entr: "winter",
  orig: "emergency",
  detorig: "medical",
  priseAnti: "yes",
  knaus: "C",
  diag: "medical",
  ant: "moderate",
};

const DAYS: Observations[] = [
  { act_1: "yes", act_2: "yes", examinf_5: "yes", sens: "resistant" },
  { act_1: "yes", examinf_5: "no" },
  { act_3: "no", examinf_12: "yes", sens: "sensitive" },
];

describe("UI decision loop", () => {
  it("admission + 3 days + 2 what-ifs gives a 4-point trajectory identical to a what-if-free session",
    async () => {
      const probedClient = new ApiClient(BASE);
      const probed = new PatientSession(probedClient, await probedClient.getModel());
      expect(probed.admissionComplete({})).toBe(false);
      expect(probed.admissionComplete(ADMISSION)).toBe(true);

      await probed.admit(ADMISSION);
      expect(probed.trajectory.map((p) => p.day)).toEqual([0]);

      await probed.submitDay(DAYS[0]!);
      const whatIf1 = await probed.whatIf({ act_9: "yes", examinf_30: "yes" });
      expect(whatIf1.committed).toBe(false);
      expect(whatIf1.day).toBe(2);
      await probed.submitDay(DAYS[1]!);
      const whatIf2 = await probed.whatIf({});
      expect(whatIf2.day).toBe(3);
      await probed.submitDay(DAYS[2]!);

      expect(probed.trajectory.map((p) => p.day)).toEqual([0, 1, 2, 3]);

      // a twin session with the same submissions but no what-if queries
      const plainClient = new ApiClient(BASE);
      const plain = new PatientSession(plainClient, await plainClient.getModel());
      await plain.admit(ADMISSION);
      for (const day of DAYS) await plain.submitDay(day);

      expect(probed.trajectory).toEqual(plain.trajectory);

      // final server-side reads agree too
      const finalProbed = await probedClient.trajectory(probed.patientId!);
      const finalPlain = await plainClient.trajectory(plain.patientId!);
      expect(finalProbed.trajectory).toEqual(finalPlain.trajectory);
    },
    120_000);

  it("every probability the chart renders byte-matches a recorded service response",
    async () => {
      const client = new ApiClient(BASE);
      const session = new PatientSession(client, await client.getModel());
      await session.admit(ADMISSION);
      await session.submitDay(DAYS[0]!);
      await session.whatIf({ act_4: "yes" });
      await session.submitDay(DAYS[1]!);

      const rendered = chartData(session.trajectory, session.model.threshold);
      expect(rendered.points.length).toBe(3);
      for (const point of rendered.points) {
        const literal = JSON.stringify(point.probability);
        const hit = client.log.some((body) => body.includes(literal));
        expect(hit, `rendered ${literal} must appear in a response body`).toBe(true);
      }
    },
    120_000);
});
