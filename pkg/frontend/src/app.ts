import { ApiClient, ApiError } from "./api.js";
import {
  BatchState,
  allLabeled,
  counterText,
  labelCurrent,
  labeledCount,
  moveCursor,
  newBatch,
  remainingHint,
  reopenItem,
} from "./batch.js";
import { clearDraft, loadDraft, saveDraft, StorageLike } from "./drafts.js";
import { curvePoints, renderCurveSvg } from "./curve.js";
import type { SessionSummary } from "./types.js";

export interface AppDeps {
  api: ApiClient;
  storage: StorageLike;
  root: HTMLElement;
  pollIntervalMs?: number;
}

const DONE_PHASES = new Set(["done"]);

/**
 * One annotator, one session: renders the pending batch, takes labels via
 * buttons or number keys, submits the whole batch atomically, and keeps the
 * learning curve in sync with the server's history.
 */
export class AnnotatorApp {
  readonly api: ApiClient;
  readonly storage: StorageLike;
  readonly root: HTMLElement;
  readonly pollIntervalMs: number;

  sessionId = "";
  summary: SessionSummary | null = null;
  batch: BatchState | null = null;
  errorText = "";
  retryVisible = false;
  spinnerVisible = false;
  submitting = false;

  constructor(deps: AppDeps) {
    this.api = deps.api;
    this.storage = deps.storage;
    this.root = deps.root;
    this.pollIntervalMs = deps.pollIntervalMs ?? 1500;
    this.root.innerHTML = this.skeleton();
    this.bindStaticHandlers();
  }

  private skeleton(): string {
    return `
      <section id="annotation" hidden>
        <div id="status"></div>
        <article id="doc-card">
          <header><span id="counter"></span></header>
          <p id="doc-text"></p>
          <nav id="labels"></nav>
        </article>
        <footer>
          <button id="submit" disabled></button>
          <span id="submit-hint"></span>
        </footer>
      </section>
      <div id="spinner" hidden>training…</div>
      <div id="retry-banner" hidden>
        <span>network problem; your labels are kept locally.</span>
        <button id="retry">retry</button>
      </div>
      <div id="error" hidden></div>
      <div id="done-banner" hidden>session complete</div>
      <section id="curve-panel">
        <h2>learning curve</h2>
        <div id="curve"></div>
        <a id="csv-link" hidden>download CSV</a>
      </section>
    `;
  }

  private el<T extends HTMLElement>(id: string): T {
    const found = this.root.querySelector<T>(`#${id}`);
    if (!found) throw new Error(`missing element #${id}`);
    return found;
  }

  private bindStaticHandlers(): void {
    this.el<HTMLButtonElement>("retry").addEventListener("click", () => {
      void this.loadBatch();
    });
    this.el<HTMLButtonElement>("submit").addEventListener("click", () => {
      void this.submit();
    });
    this.root.ownerDocument.addEventListener("keydown", (event) => this.handleKey(event));
  }

  async start(sessionId: string): Promise<void> {
    this.sessionId = sessionId;
    this.el<HTMLAnchorElement>("csv-link").href = this.api.historyCsvUrl(sessionId);
    await this.refreshCurve();
    await this.loadBatch();
  }

  async loadBatch(): Promise<void> {
    this.retryVisible = false;
    try {
      this.summary = await this.api.getSession(this.sessionId);
      if (DONE_PHASES.has(this.summary.phase)) {
        this.batch = null;
        this.spinnerVisible = false;
        this.render();
        return;
      }
      const batch = await this.api.nextBatch(this.sessionId);
      const drafts = loadDraft(this.storage, this.sessionId, batch.round);
      this.batch = newBatch(batch.round, batch.items, drafts);
      this.spinnerVisible = false;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // Another writer is mid-train; poll until the next batch exists.
        this.spinnerVisible = true;
        this.render();
        setTimeout(() => void this.loadBatch(), this.pollIntervalMs);
        return;
      }
      this.retryVisible = true;
    }
    this.render();
  }

  handleKey(event: KeyboardEvent): void {
    if (!this.root.isConnected || !this.batch || !this.summary) return;
    if (event.key === "ArrowRight") {
      this.batch = moveCursor(this.batch, this.batch.cursor + 1);
      this.render();
      return;
    }
    if (event.key === "ArrowLeft") {
      this.batch = moveCursor(this.batch, this.batch.cursor - 1);
      this.render();
      return;
    }
    const digit = Number.parseInt(event.key, 10);
    if (Number.isInteger(digit) && digit >= 1 && digit <= this.summary.label_set.length) {
      this.applyLabel(this.summary.label_set[digit - 1]);
    }
  }

  applyLabel(label: string): void {
    if (!this.batch) return;
    this.batch = labelCurrent(this.batch, label);
    saveDraft(this.storage, this.sessionId, this.batch.round, this.batch.labels);
    this.render();
  }

  async submit(): Promise<void> {
    if (!this.batch || !allLabeled(this.batch) || this.submitting) return;
    this.submitting = true;
    this.errorText = "";
    const submitted = this.batch;
    try {
      const response = await this.api.submitLabels(this.sessionId, submitted.labels);
      clearDraft(this.storage, this.sessionId, submitted.round);
      this.batch = null;
      if (response.round_completed) {
        await this.refreshCurve();
      }
      await this.loadBatch();
    } catch (error) {
      if (error instanceof ApiError && error.status === 400) {
        // Reopen the offending item (when the server names it), keep the rest.
        const match = /(?:document|unknown id) ([\w-]+)/.exec(error.message);
        if (match && this.batch) {
          this.batch = reopenItem(this.batch, match[1]);
          saveDraft(this.storage, this.sessionId, this.batch.round, this.batch.labels);
        }
        this.errorText = error.message;
      } else {
        this.retryVisible = true;
      }
      this.render();
    } finally {
      this.submitting = false;
    }
  }

  async refreshCurve(): Promise<void> {
    try {
      const history = await this.api.history(this.sessionId);
      const points = curvePoints(history.rounds);
      this.el("curve").innerHTML = renderCurveSvg(points);
      this.el<HTMLAnchorElement>("csv-link").hidden = history.rounds.length === 0;
    } catch {
      this.el("curve").innerHTML = renderCurveSvg([]);
    }
  }

  render(): void {
    const annotation = this.el("annotation");
    const spinner = this.el("spinner");
    const retry = this.el("retry-banner");
    const errorBox = this.el("error");
    const doneBanner = this.el("done-banner");

    spinner.hidden = !this.spinnerVisible;
    retry.hidden = !this.retryVisible;
    errorBox.hidden = this.errorText === "";
    errorBox.textContent = this.errorText;

    const done = this.summary !== null && DONE_PHASES.has(this.summary.phase);
    doneBanner.hidden = !done;

    if (!this.batch || !this.summary) {
      annotation.hidden = true;
      return;
    }
    annotation.hidden = false;

    const batch = this.batch;
    const item = batch.items[batch.cursor];
    this.el("status").textContent =
      `round ${batch.round} · ${this.summary.n_labeled} labeled of ${this.summary.n_pool} pool`;
    this.el("counter").textContent = counterText(batch);
    this.el("doc-text").textContent = item ? item.text : "";

    const labelsNav = this.el("labels");
    labelsNav.innerHTML = "";
    this.summary.label_set.forEach((label, index) => {
      const button = this.root.ownerDocument.createElement("button");
      button.className = "label-button";
      button.dataset.label = label;
      const active = item && batch.labels[item.id] === label;
      button.textContent = `${index + 1} · ${label}${active ? " ✓" : ""}`;
      button.addEventListener("click", () => this.applyLabel(label));
      labelsNav.appendChild(button);
    });

    const submit = this.el<HTMLButtonElement>("submit");
    submit.disabled = !allLabeled(batch);
    submit.textContent = `submit ${labeledCount(batch)}/${batch.items.length}`;
    this.el("submit-hint").textContent = remainingHint(batch);
  }
}
