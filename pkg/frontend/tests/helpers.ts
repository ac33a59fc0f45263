/**
 * Test plumbing: a fetch-shaped transport over node:http, a launcher
 * for the real analysis server, and a runner for the analyzer CLI, so
 * UI tests exercise the same HTTP API and command line a user would.
 */

import { spawn, spawnSync } from "node:child_process";
import * as fs from "node:fs";
import * as http from "node:http";
import * as path from "node:path";

import type { FetchLike, FetchResponseLike } from "../src/api.js";

// browser-flavored test environments mangle import.meta.url, so locate
// the repository by walking up from the working directory instead
function findRepoRoot(): string {
  let dir = process.cwd();
  for (let depth = 0; depth < 6; depth++) {
    if (fs.existsSync(path.join(dir, "pyproject.toml")) && fs.existsSync(path.join(dir, "graphs"))) {
      return dir;
    }
    dir = path.dirname(dir);
  }
  throw new Error(`cannot locate the repository root from ${process.cwd()}`);
}

export const REPO_ROOT = findRepoRoot();
export const GRAPHS_DIR = path.join(REPO_ROOT, "graphs");

function abortError(): Error {
  return Object.assign(new Error("request aborted"), { name: "AbortError" });
}

/** Minimal fetch over node:http with AbortSignal support. */
export const nodeFetch: FetchLike = (url, init) => {
  return new Promise<FetchResponseLike>((resolve, reject) => {
    let settled = false;
    const done = (fn: () => void) => {
      if (!settled) {
        settled = true;
        fn();
      }
    };
    if (init.signal.aborted) {
      reject(abortError());
      return;
    }
    const req = http.request(url, { method: init.method, headers: init.headers }, (res) => {
      const chunks: Buffer[] = [];
      res.on("data", (c: Buffer) => chunks.push(c));
      res.on("end", () => {
        const body = Buffer.concat(chunks).toString("utf8");
        const status = res.statusCode ?? 0;
        done(() =>
          resolve({
            ok: status >= 200 && status < 300,
            status,
            text: () => Promise.resolve(body),
          }),
        );
      });
    });
    const onAbort = () => {
      req.destroy();
      done(() => reject(abortError()));
    };
    init.signal.addEventListener("abort", onAbort, { once: true });
    req.on("error", (err) => {
      done(() => reject(init.signal.aborted ? abortError() : err));
    });
    req.on("close", () => {
      done(() => reject(init.signal.aborted ? abortError() : new Error("connection closed")));
    });
    req.end(init.body);
  });
};

export interface LiveServer {
  port: number;
  baseUrl: string;
  stop(): void;
}

const SERVER_SCRIPT = `
import sys
from netident.service import create_server
server = create_server(host="127.0.0.1", port=0, quiet=True)
print(server.server_address[1], flush=True)
server.serve_forever(poll_interval=0.05)
`;

/** Start the real analysis HTTP server on an ephemeral port. */
export function startServer(): Promise<LiveServer> {
  return new Promise((resolve, reject) => {
    const proc = spawn("python3", ["-c", SERVER_SCRIPT], {
      stdio: ["ignore", "pipe", "pipe"],
    });
    let stderr = "";
    proc.stderr.on("data", (c: Buffer) => {
      stderr += c.toString();
    });
    let buffer = "";
    const onData = (chunk: Buffer) => {
      buffer += chunk.toString();
      const line = buffer.split("\n")[0];
      if (line && /^\d+$/.test(line.trim())) {
        proc.stdout.off("data", onData);
        const port = Number(line.trim());
        resolve({
          port,
          baseUrl: `http://127.0.0.1:${port}`,
          stop: () => {
            proc.kill();
          },
        });
      }
    };
    proc.stdout.on("data", onData);
    proc.on("exit", (code) => {
      reject(new Error(`analysis server exited early (code ${code}): ${stderr}`));
    });
    proc.on("error", reject);
  });
}

export interface CliResult {
  status: number;
  stdout: string;
  stderr: string;
}

/** Run the analyzer CLI and capture its output. */
export function runCli(args: string[]): CliResult {
  const proc = spawnSync("python3", ["-m", "netident.cli", ...args], {
    cwd: REPO_ROOT,
    encoding: "utf8",
    timeout: 30000,
  });
  if (proc.error) {
    throw proc.error;
  }
  return { status: proc.status ?? -1, stdout: proc.stdout, stderr: proc.stderr };
}

/** One-shot POST /api/analyze outside the app, for cross-checking. */
export async function analyzeDirect(
  baseUrl: string,
  graph: unknown,
): Promise<{ status: number; document: any }> {
  const controller = new AbortController();
  const response = await nodeFetch(`${baseUrl}/api/analyze`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(graph),
    signal: controller.signal,
  });
  return { status: response.status, document: JSON.parse(await response.text()) };
}
