/**
 * Page bootstrap.
 *
 * With `?session=<id>` in the URL the console attaches to that session;
 * otherwise it offers a small form that creates an interactive session on
 * the server's preloaded dataset and then navigates into it.
 *
 * Recognized query parameters:
 *   session=<id>        attach to an existing session
 *   confidence=hide     hide the model's own 1–5 confidence score
 *   poll=<ms>           override the 1 s polling period
 *   api=<base>          API base URL (defaults to same origin)
 */

import { ApiClient } from "./api.js";
import { AnnotationApp } from "./app.js";

interface CreateFormDefaults {
  budget: number;
  fraction: number;
  schedule: string;
  switchAt: string;
  fusion: string;
  seed: number;
}

const DEFAULTS: CreateFormDefaults = {
  budget: 25,
  fraction: 0.05,
  schedule: "us:margin",
  switchAt: "",
  fusion: "conservative",
  seed: 0,
};

const STRATEGY_MEASURES: Record<string, string> = {
  lc: "least-confident",
  mu: "margin",
  margin: "margin",
  ec: "entropy",
  entropy: "entropy",
  "least-confident": "least-confident",
};

/** Parse "us:margin,qbc" into the policy schedule the API expects. */
export function parseScheduleText(
  text: string,
): Array<{ kind: string; measure?: string; similarity?: string }> {
  const entries = text
    .split(",")
    .map((part) => part.trim())
    .filter((part) => part.length > 0);
  if (entries.length === 0) {
    throw new Error("schedule must name at least one strategy");
  }
  return entries.map((entry) => {
    const [kind, ...rest] = entry.split(":").map((p) => p.trim());
    if (kind === "us") {
      const measure = rest[0] ? STRATEGY_MEASURES[rest[0]] : undefined;
      if (rest[0] && measure === undefined) {
        throw new Error(`unknown uncertainty measure '${rest[0]}'`);
      }
      return measure ? { kind, measure } : { kind };
    }
    if (kind === "qbc") {
      return { kind };
    }
    if (kind === "dwm") {
      const spec: { kind: string; similarity?: string; measure?: string } = {
        kind,
      };
      if (rest[0]) {
        spec.similarity = rest[0];
      }
      if (rest[1]) {
        const measure = STRATEGY_MEASURES[rest[1]];
        if (measure === undefined) {
          throw new Error(`unknown uncertainty measure '${rest[1]}'`);
        }
        spec.measure = measure;
      }
      return spec;
    }
    throw new Error(`unknown strategy '${kind}'`);
  });
}

/** Assemble the session-creation payload for the interactive console. */
export function buildSessionConfig(values: {
  budget: number;
  fraction: number;
  schedule: string;
  switchAt: string;
  fusion: string;
  seed: number;
}): unknown {
  const schedule = parseScheduleText(values.schedule);
  const switchAt = values.switchAt
    .split(",")
    .map((part) => part.trim())
    .filter((part) => part.length > 0)
    .map((part) => {
      const n = Number(part);
      if (!Number.isInteger(n) || n < 1) {
        throw new Error(`switch points must be positive integers, got '${part}'`);
      }
      return n;
    });
  const policy: Record<string, unknown> = {
    schedule,
    budget: values.budget,
  };
  if (switchAt.length > 0) {
    policy.switch_mode = "fixed";
    policy.switch_at = switchAt;
  }
  return {
    coldstart: { fraction: values.fraction },
    policy,
    fusion: values.fusion,
    oracle_mode: "interactive",
    rng_seed: values.seed,
  };
}

function renderCreateForm(
  root: HTMLElement,
  onCreate: (config: unknown) => void,
): void {
  root.textContent = "";
  const form = document.createElement("form");
  form.id = "create-form";
  form.innerHTML = `
    <h2>start a labeling session</h2>
    <label>query budget <input id="cf-budget" type="number" min="1" value="${DEFAULTS.budget}"></label>
    <label>seed fraction <input id="cf-fraction" type="number" step="0.01" min="0.01" max="0.5" value="${DEFAULTS.fraction}"></label>
    <label>strategy schedule <input id="cf-schedule" type="text" value="${DEFAULTS.schedule}"
      title="comma-separated: us[:measure], qbc, dwm[:similarity[:measure]]"></label>
    <label>switch after queries <input id="cf-switch" type="text" value="${DEFAULTS.switchAt}"
      placeholder="e.g. 10 (blank = signal-driven)"></label>
    <label>fusion
      <select id="cf-fusion">
        <option value="conservative" selected>conservative</option>
        <option value="optimistic">optimistic</option>
        <option value="expert-always-right">expert-always-right</option>
      </select>
    </label>
    <label>random seed <input id="cf-seed" type="number" value="${DEFAULTS.seed}"></label>
    <button type="submit" id="cf-create">create session</button>
    <p id="cf-error" class="form-error" hidden></p>
  `;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const get = (id: string) =>
      form.querySelector<HTMLInputElement | HTMLSelectElement>(`#${id}`)!;
    const errorEl = form.querySelector<HTMLElement>("#cf-error")!;
    try {
      const config = buildSessionConfig({
        budget: Number(get("cf-budget").value),
        fraction: Number(get("cf-fraction").value),
        schedule: get("cf-schedule").value,
        switchAt: get("cf-switch").value,
        fusion: get("cf-fusion").value,
        seed: Number(get("cf-seed").value),
      });
      errorEl.hidden = true;
      onCreate(config);
    } catch (error) {
      errorEl.textContent = error instanceof Error ? error.message : String(error);
      errorEl.hidden = false;
    }
  });
  root.appendChild(form);
}

function showFatal(root: HTMLElement, message: string): void {
  root.textContent = "";
  const p = document.createElement("p");
  p.className = "fatal-error";
  p.textContent = message;
  root.appendChild(p);
}

export async function bootstrap(root: HTMLElement): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const api = new ApiClient(params.get("api") ?? "");
  const showModelScore = params.get("confidence") !== "hide";
  const pollParam = params.get("poll");
  const pollIntervalMs = pollParam === null ? undefined : Number(pollParam);

  const startApp = async (sessionId: string) => {
    const app = new AnnotationApp({
      root,
      api,
      sessionId,
      showModelScore,
      pollIntervalMs,
    });
    await app.attach();
    app.start();
  };

  const sessionId = params.get("session");
  if (sessionId !== null) {
    try {
      await startApp(sessionId);
    } catch {
      showFatal(root, `session '${sessionId}' could not be loaded`);
    }
    return;
  }

  renderCreateForm(root, (config) => {
    void (async () => {
      try {
        const summary = await api.createSession(config);
        const url = new URL(window.location.href);
        url.searchParams.set("session", summary.session_id);
        window.history.replaceState(null, "", url.toString());
        await startApp(summary.session_id);
      } catch (error) {
        showFatal(
          root,
          `could not create session: ${
            error instanceof Error ? error.message : String(error)
          }`,
        );
      }
    })();
  });
}

const rootEl = document.getElementById("app");
if (rootEl !== null) {
  void bootstrap(rootEl);
}
