/**
 * The annotation console: one session, one pending query at a time.
 *
 * Responsibilities:
 *  - poll the pending endpoint once per second (exponential backoff after
 *    network failures, with a "connection lost" banner over stale data);
 *  - render the pending instance and label form, re-rendering only when the
 *    pending query actually changes so in-progress picks survive polls;
 *  - submit labels; a 409 means the query advanced underneath us, so refetch
 *    and tell the annotator rather than erroring out;
 *  - keep the metric charts appended incrementally from the metrics
 *    endpoint; when the run stops, show a "run complete" banner while the
 *    metrics panel stays live.
 */

import {
  ApiClient,
  ApiError,
  LabelSubmission,
  MetricSnapshot,
  PendingInstance,
  SessionSummary,
  StrategyInfo,
} from "./api.js";
import { renderMetricsPanel } from "./charts.js";
import { renderPendingPanel } from "./form.js";
import { displayNumber } from "./round.js";

export interface AppOptions {
  root: HTMLElement;
  api: ApiClient;
  sessionId: string;
  /** Show the model's own confidence score before labeling (default on). */
  showModelScore?: boolean;
  /** Base polling period; 0 disables automatic polling (manual refresh). */
  pollIntervalMs?: number;
}

const DEFAULT_POLL_MS = 1000;
const MAX_POLL_MS = 15_000;

/** Backoff schedule: base period normally, doubling per consecutive failure. */
export function pollDelay(baseMs: number, consecutiveFailures: number): number {
  if (consecutiveFailures <= 0) {
    return baseMs;
  }
  return Math.min(baseMs * 2 ** consecutiveFailures, MAX_POLL_MS);
}

/** Human-readable name of the strategy currently selecting queries. */
export function strategyName(info: StrategyInfo): string {
  if (info.kind === "qbc") {
    return "qbc";
  }
  if (info.kind === "dwm") {
    return `dwm (${info.similarity}, ${info.measure})`;
  }
  return `${info.kind} (${info.measure})`;
}

interface AppElements {
  statusText: HTMLElement;
  seedProgress: HTMLElement;
  queryProgress: HTMLElement;
  strategyNameEl: HTMLElement;
  bannerComplete: HTMLElement;
  bannerConnection: HTMLElement;
  bannerNotice: HTMLElement;
  pendingPanel: HTMLElement;
  salValue: HTMLElement;
  salQuery: HTMLElement;
  charts: HTMLElement;
}

export class AnnotationApp {
  readonly sessionId: string;

  private readonly api: ApiClient;
  private readonly root: HTMLElement;
  private readonly showModelScore: boolean;
  private readonly pollIntervalMs: number;
  private readonly els: AppElements;

  private snapshots: MetricSnapshot[] = [];
  private switches: number[] = [];
  private summary: SessionSummary | null = null;
  private status = "unknown";
  private pendingKey: string | null = null;
  private failures = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private refreshInFlight: Promise<void> | null = null;
  private readonly inFlight = new Set<Promise<void>>();

  constructor(options: AppOptions) {
    this.api = options.api;
    this.root = options.root;
    this.sessionId = options.sessionId;
    this.showModelScore = options.showModelScore ?? true;
    this.pollIntervalMs = options.pollIntervalMs ?? DEFAULT_POLL_MS;
    this.els = this.buildSkeleton();
  }

  private buildSkeleton(): AppElements {
    this.root.textContent = "";
    const make = <K extends keyof HTMLElementTagNameMap>(
      tag: K,
      id: string,
      parent: HTMLElement,
      className = "",
    ): HTMLElementTagNameMap[K] => {
      const el = document.createElement(tag);
      el.id = id;
      if (className) {
        el.className = className;
      }
      parent.appendChild(el);
      return el;
    };

    const bar = make("div", "session-bar", this.root, "session-bar");
    const sessionLabel = document.createElement("span");
    sessionLabel.className = "session-id";
    sessionLabel.textContent = `session ${this.sessionId.slice(0, 8)}`;
    bar.appendChild(sessionLabel);
    const statusText = make("span", "status-text", bar, "session-bar-item");
    const seedProgress = make("span", "seed-progress", bar, "session-bar-item");
    const queryProgress = make(
      "span",
      "query-progress",
      bar,
      "session-bar-item",
    );
    const strategyNameEl = make(
      "span",
      "strategy-name",
      bar,
      "session-bar-item",
    );

    const bannerComplete = make(
      "div",
      "banner-complete",
      this.root,
      "banner banner-complete",
    );
    bannerComplete.textContent = "run complete";
    bannerComplete.hidden = true;
    const bannerConnection = make(
      "div",
      "banner-connection",
      this.root,
      "banner banner-warn",
    );
    bannerConnection.hidden = true;
    const bannerNotice = make(
      "div",
      "banner-notice",
      this.root,
      "banner banner-info",
    );
    bannerNotice.hidden = true;

    const panels = document.createElement("main");
    panels.className = "panels";
    this.root.appendChild(panels);
    const pendingPanel = make("section", "pending-panel", panels, "panel");
    const metricsPanel = make("section", "metrics-panel", panels, "panel");
    const metricsHeading = document.createElement("h2");
    metricsHeading.textContent = "metrics";
    metricsPanel.appendChild(metricsHeading);
    const salReadout = document.createElement("p");
    salReadout.id = "sal-readout";
    salReadout.append("s_al: ");
    metricsPanel.appendChild(salReadout);
    const salValue = document.createElement("span");
    salValue.id = "sal-value";
    salValue.textContent = "—";
    salReadout.appendChild(salValue);
    salReadout.append(" at query ");
    const salQuery = document.createElement("span");
    salQuery.id = "sal-query";
    salQuery.textContent = "—";
    salReadout.appendChild(salQuery);
    const charts = make("div", "charts", metricsPanel);

    return {
      statusText,
      seedProgress,
      queryProgress,
      strategyNameEl,
      bannerComplete,
      bannerConnection,
      bannerNotice,
      pendingPanel,
      salValue,
      salQuery,
      charts,
    };
  }

  // ------------------------------------------------------------------ state

  /** Fetch the summary then do a full refresh; call once after construction. */
  async attach(): Promise<void> {
    await this.track(
      (async () => {
        this.summary = await this.api.getSummary(this.sessionId);
        this.renderSessionBar();
        await this.doRefresh();
      })(),
    );
  }

  /** One poll cycle: pending + incremental metrics.  Coalesces overlaps. */
  refresh(): Promise<void> {
    if (this.refreshInFlight !== null) {
      return this.refreshInFlight;
    }
    const run = this.track(
      this.doRefresh().finally(() => {
        this.refreshInFlight = null;
      }),
    );
    this.refreshInFlight = run;
    return run;
  }

  private async doRefresh(): Promise<void> {
    try {
      const pendingResponse = await this.api.getPending(this.sessionId);
      const metrics = await this.api.getMetrics(
        this.sessionId,
        this.snapshots.length,
      );
      this.noteConnection(true);
      this.ingestMetrics(metrics.snapshots, metrics.switches);
      this.setStatus(pendingResponse.status);
      await this.renderPending(pendingResponse.pending);
    } catch (error) {
      if (!(error instanceof ApiError)) {
        this.noteConnection(false);
      }
      throw error;
    }
  }

  /** Submit a label.  Resolves even on rejection; errors surface in the UI. */
  async submit(submission: LabelSubmission): Promise<void> {
    await this.track(this.doSubmit(submission));
  }

  private async doSubmit(submission: LabelSubmission): Promise<void> {
    try {
      const response = await this.api.submitLabel(this.sessionId, submission);
      this.noteConnection(true);
      this.showNotice(null);
      this.setStatus(response.status);
      const metrics = await this.api.getMetrics(
        this.sessionId,
        this.snapshots.length,
      );
      this.ingestMetrics(metrics.snapshots, metrics.switches);
      this.summary = await this.api.getSummary(this.sessionId);
      this.renderSessionBar();
      await this.renderPending(response.pending, { refreshSummary: false });
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // The query advanced underneath this submit (double click, second
        // tab, or a stop).  Re-sync, then tell the annotator what happened.
        await this.doRefresh().catch(() => undefined);
        this.showNotice("query advanced, reloading");
      } else if (error instanceof ApiError) {
        this.showNotice(`label rejected: ${error.detail}`);
      } else {
        this.noteConnection(false);
      }
    }
  }

  /** Resolves once every in-flight refresh/submit settles. */
  async whenIdle(): Promise<void> {
    while (this.inFlight.size > 0) {
      await Promise.allSettled([...this.inFlight]);
    }
  }

  // ---------------------------------------------------------------- polling

  start(): void {
    if (this.timer !== null || this.pollIntervalMs <= 0) {
      return;
    }
    this.scheduleTick(this.pollIntervalMs);
  }

  stopPolling(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  private scheduleTick(delay: number): void {
    this.timer = setTimeout(() => {
      void this.tick();
    }, delay);
  }

  private async tick(): Promise<void> {
    try {
      await this.refresh();
    } catch {
      // the connection banner already reflects the failure
    }
    if (this.timer !== null) {
      this.scheduleTick(pollDelay(this.pollIntervalMs, this.failures));
    }
  }

  // -------------------------------------------------------------- rendering

  private track(promise: Promise<void>): Promise<void> {
    this.inFlight.add(promise);
    promise.finally(() => this.inFlight.delete(promise)).catch(() => undefined);
    return promise;
  }

  private noteConnection(ok: boolean): void {
    if (ok) {
      this.failures = 0;
      this.els.bannerConnection.hidden = true;
      this.root.classList.remove("stale");
    } else {
      this.failures += 1;
      this.els.bannerConnection.textContent =
        "connection lost — showing last fetched data, retrying…";
      this.els.bannerConnection.hidden = false;
      this.root.classList.add("stale");
    }
  }

  private showNotice(text: string | null): void {
    if (text === null) {
      this.els.bannerNotice.hidden = true;
      this.els.bannerNotice.textContent = "";
    } else {
      this.els.bannerNotice.textContent = text;
      this.els.bannerNotice.hidden = false;
    }
  }

  private setStatus(status: string): void {
    this.status = status;
    this.els.bannerComplete.hidden = status !== "stopped";
    this.renderSessionBar();
  }

  private renderSessionBar(): void {
    this.els.statusText.textContent = this.status;
    if (this.summary === null) {
      return;
    }
    this.els.seedProgress.textContent =
      this.summary.seeds_remaining > 0
        ? `seed labels left: ${this.summary.seeds_remaining}`
        : "";
    this.els.queryProgress.textContent = `queries ${this.summary.queries_made}/${this.summary.budget}`;
    this.els.strategyNameEl.textContent = `strategy: ${strategyName(
      this.summary.strategy,
    )}`;
  }

  private ingestMetrics(
    incoming: MetricSnapshot[],
    switches: number[],
  ): void {
    let appended = false;
    for (const snapshot of incoming) {
      const last = this.snapshots[this.snapshots.length - 1];
      if (last === undefined || snapshot.query_index > last.query_index) {
        this.snapshots.push(snapshot);
        appended = true;
      }
    }
    const switchesChanged =
      switches.length !== this.switches.length;
    if (switchesChanged) {
      this.switches = [...switches];
    }
    if (appended || switchesChanged || this.snapshots.length === 0) {
      this.renderMetrics();
    }
  }

  private renderMetrics(): void {
    renderMetricsPanel(this.els.charts, this.snapshots, this.switches);
    const latest = this.snapshots[this.snapshots.length - 1];
    if (latest === undefined) {
      this.els.salValue.textContent = "—";
      this.els.salQuery.textContent = "—";
    } else {
      this.els.salValue.textContent = displayNumber(latest.s_al);
      this.els.salQuery.textContent = String(latest.query_index);
    }
  }

  private async renderPending(
    pending: PendingInstance | null,
    { refreshSummary = true }: { refreshSummary?: boolean } = {},
  ): Promise<void> {
    const key =
      pending === null
        ? `none:${this.status}`
        : `${pending.phase}:${pending.instance_id}:${pending.query_index}`;
    if (key === this.pendingKey) {
      return;
    }
    const previousKey = this.pendingKey;
    this.pendingKey = key;
    if (pending === null) {
      this.els.pendingPanel.textContent = "";
      const placeholder = document.createElement("p");
      placeholder.className = "pending-placeholder";
      placeholder.textContent =
        this.status === "stopped"
          ? "Run complete — no further queries."
          : "Waiting for the next query…";
      this.els.pendingPanel.appendChild(placeholder);
      return;
    }
    renderPendingPanel(this.els.pendingPanel, pending, {
      showModelScore: this.showModelScore,
      onSubmit: (submission) => {
        void this.submit(submission);
      },
    });
    if (refreshSummary && previousKey !== null && previousKey !== key) {
      // the query advanced; pick up new seed counts / strategy switches
      try {
        this.summary = await this.api.getSummary(this.sessionId);
        this.renderSessionBar();
      } catch {
        // summary refresh is cosmetic; the next poll will retry
      }
    }
  }
}
