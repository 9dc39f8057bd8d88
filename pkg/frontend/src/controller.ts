/**
 * Session flow: fetch query -> render -> capture one A/B choice -> submit ->
 * poll while the server computes -> repeat until done.
 *
 * At most one mutation request is in flight (double-click guard); while the
 * server reports `computing` the controller polls once per second.  The view
 * is an injected interface so the flow is testable without a DOM.
 */

import {
  ApiError,
  Choice,
  Estimate,
  QueryPayload,
  SessionClient,
} from "./api.js";
import { ComparisonView, renderComparison, renderEstimate } from "./render.js";

export interface View {
  showComparison(view: ComparisonView): void;
  showEstimate(lines: string[]): void;
  setButtonsEnabled(enabled: boolean): void;
  showError(message: string, retryable: boolean): void;
  showDone(): void;
}

export type Sleep = (ms: number) => Promise<void>;

const realSleep: Sleep = (ms) => new Promise((resolve) => setTimeout(resolve, ms));

export const POLL_INTERVAL_MS = 1000;

export class SessionController {
  private current: QueryPayload | null = null;
  private inFlight = false;
  private done = false;

  constructor(
    private readonly client: SessionClient,
    private readonly sessionId: string,
    private readonly view: View,
    private readonly sleep: Sleep = realSleep,
  ) {}

  /** Fetch and render the next query; retries while the server is busy. */
  async start(): Promise<void> {
    const estimate = await this.client.getEstimate(this.sessionId);
    this.view.showEstimate(renderEstimate(estimate).lines);
    await this.fetchQuery();
  }

  private async fetchQuery(): Promise<void> {
    for (;;) {
      try {
        this.current = await this.client.getQuery(this.sessionId);
        break;
      } catch (err) {
        if (err instanceof ApiError && err.error.code === "computing") {
          await this.sleep(POLL_INTERVAL_MS);
          continue;
        }
        if (err instanceof ApiError && err.error.code === "done") {
          this.done = true;
          this.view.showDone();
          return;
        }
        this.view.showError(String(err), false);
        return;
      }
    }
    this.view.showComparison(renderComparison(this.current));
    this.view.setButtonsEnabled(true);
  }

  /** Handle an A/B button press (or keyboard shortcut). */
  async choose(choice: Choice): Promise<void> {
    if (this.inFlight || this.done || this.current === null) {
      return; // guard: ignore double clicks and stray keys
    }
    this.inFlight = true;
    this.view.setButtonsEnabled(false);
    const queryId = this.current.query_id;
    try {
      let estimate: Estimate;
      for (;;) {
        try {
          estimate = await this.client.submitResponse(this.sessionId, queryId, choice);
          break;
        } catch (err) {
          if (err instanceof ApiError && err.error.code === "computing") {
            await this.sleep(POLL_INTERVAL_MS);
            continue;
          }
          throw err;
        }
      }
      this.current = null;
      this.view.showEstimate(renderEstimate(estimate).lines);
      await this.fetchQuery();
    } catch (err) {
      const retryable = err instanceof ApiError && err.status === 409;
      this.view.showError(String(err), retryable);
    } finally {
      this.inFlight = false;
    }
  }

  /** Keyboard accessibility: "a"/"b" mirror the buttons. */
  async onKey(key: string): Promise<void> {
    const k = key.toLowerCase();
    if (k === "a") {
      await this.choose("A");
    } else if (k === "b") {
      await this.choose("B");
    }
  }

  get isDone(): boolean {
    return this.done;
  }
}
