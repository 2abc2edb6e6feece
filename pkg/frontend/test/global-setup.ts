/** Boots the Python recommendation service for the integration tests. */

import { spawn, type ChildProcess } from "node:child_process";

export const BASE_URL = "http://127.0.0.1:8917";

let server: ChildProcess | null = null;

async function waitForServer(url: string, timeoutMs: number): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${url}/dataset/hasse`);
      if (response.ok) return;
    } catch (error) {
      lastError = error;
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error(`service did not come up at ${url}: ${lastError}`);
}

export async function setup(): Promise<void> {
  server = spawn("python3", ["-m", "esrs", "serve", "--port", "8917", "--host", "127.0.0.1"], {
    stdio: ["ignore", "inherit", "inherit"],
  });
  server.on("exit", (code) => {
    if (code !== null && code !== 0) {
      console.error(`service exited early with code ${code}`);
    }
  });
  await waitForServer(BASE_URL, 30000);
}

export async function teardown(): Promise<void> {
  if (server && !server.killed) {
    server.kill("SIGTERM");
    await new Promise((resolve) => setTimeout(resolve, 300));
    if (server.exitCode === null) server.kill("SIGKILL");
  }
}
