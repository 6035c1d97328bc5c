// Boots the real annotation service for browser-level tests.  The UI
// must only ever talk HTTP, so the tests do too.

import { ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface TaskSeed {
  task_id: string;
  tokens: string[];
  position: number;
  pos: string;
}

export interface TestServer {
  baseUrl: string;
  taskSet: string;
  stop(): void;
  /** Parsed NDJSON export, one object per record. */
  records(): Promise<Array<Record<string, unknown>>>;
}

const LAUNCH = "import sys; from infolab.cli import main; " +
  "sys.exit(main(sys.argv[1:]))";

async function ready(baseUrl: string, taskSet: string,
                     proc: ChildProcess): Promise<boolean> {
  for (let i = 0; i < 150; i++) {
    if (proc.exitCode !== null) return false;
    try {
      const r = await fetch(`${baseUrl}/api/export?set=${taskSet}`);
      if (r.ok) return true;
    } catch {
      // not listening yet
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  return false;
}

export async function startServer(tasks: TaskSeed[]): Promise<TestServer> {
  const dir = mkdtempSync(join(tmpdir(), "annoui-"));
  const taskFile = join(dir, "tasks.jsonl");
  writeFileSync(taskFile,
                tasks.map((t) => JSON.stringify(t)).join("\n") + "\n");

  let lastErr = "";
  for (let attempt = 0; attempt < 3; attempt++) {
    const port = 21000 + Math.floor(Math.random() * 20000);
    const proc = spawn("python3", [
      "-c", LAUNCH, "annotate-serve",
      "--task-set", taskFile,
      "--port", String(port),
      "--host", "127.0.0.1",
      "--anno-data-dir", join(dir, `log${attempt}`),
    ], { stdio: ["ignore", "ignore", "pipe"] });
    let stderr = "";
    proc.stderr?.on("data", (chunk) => { stderr += chunk; });

    const baseUrl = `http://127.0.0.1:${port}`;
    if (await ready(baseUrl, "tasks", proc)) {
      return {
        baseUrl,
        taskSet: "tasks",
        stop: () => { proc.kill(); },
        records: async () => {
          const r = await fetch(`${baseUrl}/api/export?set=tasks`);
          const text = await r.text();
          return text.split("\n").filter(Boolean)
            .map((line) => JSON.parse(line));
        },
      };
    }
    proc.kill();
    lastErr = stderr;
  }
  throw new Error(`annotation server would not start: ${lastErr}`);
}

/** Poll until the condition holds; fails loudly instead of hanging. */
export async function until(cond: () => boolean, what = "condition",
                            ms = 10_000): Promise<void> {
  const deadline = Date.now() + ms;
  while (Date.now() < deadline) {
    if (cond()) return;
    await new Promise((r) => setTimeout(r, 15));
  }
  throw new Error(`timed out waiting for ${what}`);
}
