/**
 * Round trip against the real task service: a scripted session answers three
 * HITs through the same API-client/session code the page runs, and the
 * resulting log aggregates identically to the same answers produced by the
 * simulator.  Requires the Python package to be installed (`pip install -e .`
 * in the repository root).
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { TaskApiClient } from "../src/api.js";
import { WorkerSession } from "../src/session.js";
import type { AnswerPayload } from "../src/types.js";

const REPO = resolve(__dirname, "..", "..");
const DATA = join(REPO, "data");
const PORT = 17100 + (process.pid % 1800);
const BASE = `http://127.0.0.1:${PORT}`;

let work: string;
let server: ChildProcess | null = null;

function run(args: string[]): void {
  const result = spawnSync("subjkb", args, { encoding: "utf-8" });
  if (result.status !== 0) {
    throw new Error(`subjkb ${args.join(" ")} failed:\n${result.stderr}`);
  }
}

async function waitForService(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      const resp = await fetch(`${BASE}/progress`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error("task service did not come up");
}

beforeAll(async () => {
  work = mkdtempSync(join(tmpdir(), "hit-ui-"));
  // 15 sampled cities -> exactly 3 five-instance HITs, one worker each
  run(["sample", "--kb", join(DATA, "kb.tsv"), "--type", "City", "--budget", "15", "--out", join(work, "sample.txt")]);
  run([
    "hits",
    "--kb", join(DATA, "kb.tsv"),
    "--pair", "big@City",
    "--sample", join(work, "sample.txt"),
    "--workers", "1",
    "--out", join(work, "hits.json"),
  ]);
  run([
    "simulate",
    "--hits", join(work, "hits.json"),
    "--scenario", join(DATA, "scenario.toml"),
    "--kb", join(DATA, "kb.tsv"),
    "--seed", "11",
    "--out", join(work, "expected.jsonl"),
  ]);
  server = spawn(
    "subjkb",
    ["serve", "--hits", join(work, "hits.json"), "--log", join(work, "ui_answers.jsonl"), "--bind", `127.0.0.1:${PORT}`],
    { stdio: ["ignore", "ignore", "pipe"] },
  );
  await waitForService();
}, 30000);

afterAll(() => {
  server?.kill();
});

function readAnswerLog(path: string): AnswerPayload[] {
  return readFileSync(path, "utf-8")
    .trim()
    .split("\n")
    .map((line) => JSON.parse(line) as AnswerPayload);
}

describe("UI round trip against the live service", () => {
  it("three answered HITs produce three log lines that aggregate like the simulator's", async () => {
    const expected = readAnswerLog(join(work, "expected.jsonl"));
    expect(expected).toHaveLength(3);
    const byHit = new Map(expected.map((a) => [a.hit_id, a]));

    const session = new WorkerSession(new TaskApiClient(BASE), "ui-worker");
    await session.loadNext();
    let guard = 0;
    while (session.state === "question" && guard++ < 10) {
      const hit = session.hit!;
      expect(hit.instances.length).toBeGreaterThan(0);
      expect(hit.candidate_properties.length).toBeGreaterThan(0);
      const script = byHit.get(hit.id);
      expect(script).toBeDefined();
      for (const id of script!.selected_instances) session.toggleInstance(id);
      for (const name of script!.selected_properties) session.toggleProperty(name);
      await session.submit();
    }
    expect(session.state).toBe("complete");
    expect(session.answered).toBe(3);

    // the service exits by itself once every HIT is fully answered
    await new Promise<void>((resolveExit) => {
      if (server!.exitCode !== null) return resolveExit();
      server!.once("exit", () => resolveExit());
    });

    const logged = readAnswerLog(join(work, "ui_answers.jsonl"));
    expect(logged).toHaveLength(3);
    const normalize = (rows: AnswerPayload[]) =>
      rows
        .map((r) => ({
          hit_id: r.hit_id,
          selected_instances: [...r.selected_instances].sort(),
          selected_properties: [...r.selected_properties].sort(),
        }))
        .sort((a, b) => a.hit_id.localeCompare(b.hit_id));
    expect(normalize(logged)).toEqual(normalize(expected));

    // and the aggregation artifacts agree byte for byte
    run(["aggregate", "--hits", join(work, "hits.json"), "--answers", join(work, "expected.jsonl"), "--out", join(work, "agg_expected.json")]);
    run(["aggregate", "--hits", join(work, "hits.json"), "--answers", join(work, "ui_answers.jsonl"), "--out", join(work, "agg_ui.json")]);
    const a = readFileSync(join(work, "agg_expected.json"), "utf-8");
    const b = readFileSync(join(work, "agg_ui.json"), "utf-8");
    expect(b).toEqual(a);
  }, 60000);
});
