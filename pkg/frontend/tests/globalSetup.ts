/** Boots the real analysis service on the demo fixture for snapshot tests. */

import { type ChildProcess, spawn } from "node:child_process";
import { copyFileSync, mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { createServer } from "node:net";
import { tmpdir } from "node:os";
import { join, resolve } from "node:path";
import { fileURLToPath } from "node:url";

const HERE = fileURLToPath(new URL(".", import.meta.url));
const REPO = resolve(HERE, "..", "..");
const FIXTURES = join(REPO, "tests", "fixtures");
export const SERVER_INFO = join(HERE, ".server.json");

function freePort(): Promise<number> {
  return new Promise((resolvePort, reject) => {
    const probe = createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port"));
        return;
      }
      probe.close(() => resolvePort(address.port));
    });
  });
}

async function waitReady(baseUrl: string, child: ChildProcess): Promise<void> {
  const deadline = Date.now() + 45000;
  while (Date.now() < deadline) {
    if (child.exitCode !== null) {
      throw new Error(`server exited early with code ${child.exitCode}`);
    }
    try {
      const response = await fetch(`${baseUrl}/api/files`);
      if (response.ok) {
        return;
      }
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 150));
  }
  throw new Error("server did not become ready");
}

export default async function setup(): Promise<() => void> {
  const workdir = mkdtempSync(join(tmpdir(), "tracelens-ui-"));
  const trace = join(workdir, "webapp_demo.jsonl");
  copyFileSync(join(FIXTURES, "webapp_demo.jsonl"), trace);

  const port = await freePort();
  const child = spawn("python3", [
    "-m", "tracelens.cli", "serve", trace,
    "--source-root", join(FIXTURES, "src"),
    "--source-map", join(FIXTURES, "source_map.json"),
    "--constructor-marker", "__init__",
    "--port", String(port),
  ], { stdio: ["ignore", "pipe", "pipe"] });
  child.stderr?.on("data", () => { /* uvicorn chatter */ });

  const baseUrl = `http://127.0.0.1:${port}`;
  await waitReady(baseUrl, child);
  writeFileSync(SERVER_INFO, JSON.stringify({ baseUrl }), "utf-8");

  return () => {
    child.kill("SIGTERM");
    rmSync(workdir, { recursive: true, force: true });
    rmSync(SERVER_INFO, { force: true });
  };
}
