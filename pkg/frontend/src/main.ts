// Page wiring: a start form, one SessionFlow, and the keyboard map.
// The only thing kept client-side is the session id, so a reload lands
// back on the server's cursor.

import { Client, Scheme } from "./api.js";
import { SessionFlow } from "./flow.js";

const STORAGE_KEY = "annoui-session";

export interface AppConfig {
  baseUrl: string;
  annotator: string;
  taskSet: string;
  scheme: Scheme;
  seed: number;
}

interface StoredSession {
  baseUrl: string;
  sessionId: string;
}

export interface App {
  root: HTMLElement;
  flow: SessionFlow | null;
  start(config: AppConfig): Promise<void>;
  resume(stored: StoredSession): Promise<void>;
}

function form(root: HTMLElement, onStart: (config: AppConfig) => void): void {
  const box = document.createElement("form");
  box.className = "start-form";
  box.innerHTML = `
    <label>server <input name="url" value="http://127.0.0.1:8765"></label>
    <label>annotator <input name="annotator"></label>
    <label>task set <input name="taskSet"></label>
    <label>scheme
      <select name="scheme">
        <option value="two_phase">two_phase</option>
        <option value="info3">info3</option>
      </select>
    </label>
    <label>seed <input name="seed" value="0" inputmode="numeric"></label>
    <button type="submit">Start session</button>
  `;
  box.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(box);
    onStart({
      baseUrl: String(data.get("url") ?? ""),
      annotator: String(data.get("annotator") ?? ""),
      taskSet: String(data.get("taskSet") ?? ""),
      scheme: String(data.get("scheme")) as Scheme,
      seed: Number(data.get("seed") ?? 0),
    });
  });
  root.replaceChildren(box);
}

function loadStored(): StoredSession | null {
  try {
    const raw = sessionStorage.getItem(STORAGE_KEY);
    return raw ? (JSON.parse(raw) as StoredSession) : null;
  } catch {
    return null;
  }
}

function saveStored(stored: StoredSession): void {
  try {
    sessionStorage.setItem(STORAGE_KEY, JSON.stringify(stored));
  } catch {
    // storage blocked: sessions just will not survive a reload
  }
}

export function startApp(root: HTMLElement): App {
  const shell = document.createElement("div");
  shell.className = "annoui";
  const bannerBox = document.createElement("div");
  bannerBox.className = "banner-box";
  const host = document.createElement("div");
  host.className = "task-host";
  shell.append(bannerBox, host);
  root.replaceChildren(shell);

  const banner = (message: string, kind: "error" | "warn" | "clear") => {
    if (kind === "clear" || !message) {
      bannerBox.replaceChildren();
      return;
    }
    const note = document.createElement("div");
    note.className = `banner banner-${kind}`;
    note.setAttribute("role", "alert");
    note.textContent = message;
    bannerBox.replaceChildren(note);
  };

  const app: App = {
    root,
    flow: null,

    async start(config: AppConfig): Promise<void> {
      const client = new Client(config.baseUrl);
      try {
        const sessionId = await client.createSession(
          config.annotator, config.scheme, config.taskSet, config.seed);
        saveStored({ baseUrl: config.baseUrl, sessionId });
        app.flow = new SessionFlow(client, sessionId, host, banner);
        await app.flow.refresh();
      } catch (err) {
        banner(err instanceof Error ? err.message : String(err), "error");
      }
    },

    async resume(stored: StoredSession): Promise<void> {
      const client = new Client(stored.baseUrl);
      app.flow = new SessionFlow(client, stored.sessionId, host, banner);
      try {
        await app.flow.refresh();
      } catch (err) {
        // stale session (server restarted with a fresh log): start over
        app.flow = null;
        form(host, (config) => void app.start(config));
        banner(err instanceof Error ? err.message : String(err), "warn");
      }
    },
  };

  document.addEventListener("keydown", (event) => {
    const target = event.target as HTMLElement | null;
    if (target && /^(input|select|textarea)$/i.test(target.tagName)) return;
    void app.flow?.handleKey(event.key);
  });

  host.addEventListener("click", (event) => {
    const target = event.target as HTMLElement | null;
    if (!target || !app.flow) return;
    const score = target.dataset.score;
    if (score !== undefined) void app.flow.submit(Number(score));
    if (target.dataset.action === "reveal") void app.flow.reveal();
  });

  const stored = loadStored();
  if (stored) {
    void app.resume(stored);
  } else {
    form(host, (config) => void app.start(config));
  }
  return app;
}
