// Session controller: fetches payloads, paints them, submits inputs.
// One request in flight at a time; the server decides every phase.

import { ApiError, Client, TaskPayload } from "./api.js";
import { renderTask, scaleFor } from "./render.js";

export function keyToScore(key: string): number | null {
  if (key >= "1" && key <= "9") return Number(key);
  if (key === "0") return 10;
  return null;
}

export class SessionFlow {
  private payload: TaskPayload | null = null;
  private busy = false;

  constructor(
    private readonly client: Client,
    readonly sessionId: string,
    private readonly host: HTMLElement,
    private readonly banner: (message: string, kind: "error" | "warn" | "clear") => void,
  ) {}

  get current(): TaskPayload | null {
    return this.payload;
  }

  async refresh(): Promise<void> {
    this.payload = await this.client.nextTask(this.sessionId);
    this.paint();
  }

  private paint(): void {
    if (this.payload) {
      this.host.replaceChildren(renderTask(this.payload));
    }
  }

  private setDisabled(disabled: boolean): void {
    for (const btn of this.host.querySelectorAll("button")) {
      btn.disabled = disabled;
    }
  }

  /** Route one keyboard or button input; no-op while a request runs. */
  async handleKey(key: string): Promise<void> {
    if (this.busy || !this.payload || this.payload.done) return;
    if (key === "r" || key === "Enter") {
      if (this.payload.phase === "reveal") await this.reveal();
      return;
    }
    const score = keyToScore(key);
    if (score !== null) await this.submit(score);
  }

  async submit(score: number): Promise<void> {
    const payload = this.payload;
    if (this.busy || !payload || payload.done || !payload.task_id) return;
    const spec = scaleFor(payload);
    if (!spec) {
      this.banner("reveal the word before the second score", "warn");
      return;
    }
    await this.guarded(async () => {
      await this.client.submitScore(this.sessionId, payload.task_id!,
                                    spec.measure, score);
      this.banner("", "clear");
      await this.refresh();
    });
  }

  async reveal(): Promise<void> {
    const payload = this.payload;
    if (this.busy || !payload || payload.done || !payload.task_id) return;
    await this.guarded(async () => {
      await this.client.reveal(this.sessionId, payload.task_id!);
      this.banner("", "clear");
      await this.refresh();
    });
  }

  private async guarded(action: () => Promise<void>): Promise<void> {
    this.busy = true;
    this.setDisabled(true);
    try {
      await action();
    } catch (err) {
      if (!(err instanceof ApiError)) throw err;
      if (err.kind === "conflict") {
        // someone already scored this task; move on, nothing lost
        this.banner(`already recorded, skipping forward (${err.message})`,
                    "warn");
        await this.refresh();
      } else if (err.kind === "protocol") {
        this.banner(`out of order, re-syncing (${err.message})`, "warn");
        await this.refresh();
      } else {
        // validation and transport errors keep the task on screen
        this.banner(err.message, "error");
        this.paint();
      }
    } finally {
      this.busy = false;
    }
  }
}
