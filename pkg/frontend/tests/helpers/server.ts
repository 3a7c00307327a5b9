// Spawns the real review service for round-trip tests: build a corpus with
// the CLI, start the HTTP server on a free port, wait until it answers.

import { execFileSync, spawn } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import process from "node:process";

// numba's jit warmup is far slower than the interpreted paths on corpora
// this small
const PY_ENV = { ...process.env, WIKIREC_DISABLE_NUMBA: "1" };

function cli(args: string[]): void {
  execFileSync("python3", ["-m", "wikirec.cli", ...args], {
    env: PY_ENV,
    stdio: "pipe",
  });
}

export interface CorpusSpec {
  editors: number;
  projects: number;
  categories: number;
  weeks: number;
  seed: number;
}

export function makeCorpus(spec: CorpusSpec): string {
  const dir = mkdtempSync(join(tmpdir(), "organizer-ui-"));
  cli([
    "synth",
    "--editors",
    String(spec.editors),
    "--projects",
    String(spec.projects),
    "--categories",
    String(spec.categories),
    "--weeks",
    String(spec.weeks),
    "--seed",
    String(spec.seed),
    "--out",
    dir,
  ]);
  return dir;
}

export function generateBatches(dataDir: string, asOf: string): void {
  cli(["gen-batch", "--as-of", asOf, "--data", dataDir]);
}

export function removeDir(dir: string): void {
  rmSync(dir, { recursive: true, force: true });
}

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const addr = probe.address();
      if (addr === null || typeof addr === "string") {
        probe.close(() => reject(new Error("could not allocate a port")));
        return;
      }
      const port = addr.port;
      probe.close(() => resolve(port));
    });
  });
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

export interface LiveService {
  baseUrl: string;
  stop(): Promise<void>;
}

export async function startService(dataDir: string): Promise<LiveService> {
  const port = await freePort();
  const proc = spawn(
    "python3",
    ["-m", "wikirec.cli", "serve", "--port", String(port), "--data", dataDir],
    { env: PY_ENV, stdio: ["ignore", "pipe", "pipe"] },
  );
  let logs = "";
  proc.stdout.on("data", (chunk) => (logs += chunk));
  proc.stderr.on("data", (chunk) => (logs += chunk));

  const stop = (): Promise<void> =>
    new Promise((resolve) => {
      if (proc.exitCode !== null) return resolve();
      const hardKill = setTimeout(() => proc.kill("SIGKILL"), 5000);
      proc.once("exit", () => {
        clearTimeout(hardKill);
        resolve();
      });
      proc.kill("SIGTERM");
    });

  const baseUrl = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 60_000;
  for (;;) {
    if (proc.exitCode !== null) {
      throw new Error(`service exited before it was ready:\n${logs}`);
    }
    try {
      const res = await fetch(`${baseUrl}/projects`);
      if (res.ok) break;
    } catch {
      // not listening yet
    }
    if (Date.now() > deadline) {
      await stop();
      throw new Error(`service did not become ready:\n${logs}`);
    }
    await sleep(200);
  }
  return { baseUrl, stop };
}
