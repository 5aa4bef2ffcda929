/** UI session state: strokes, model, staleness, and coalesced seed syncing.
 *
 * Seeds are synced as a full replacement of the server list (idempotent
 * PUT), debounced so rapid painting coalesces into one request; at most one
 * PUT is in flight and a repaint during flight queues exactly one follow-up.
 * The result shown on screen is stale whenever seeds or the model changed
 * after the last completed solve.
 */

import { ModelConfig, SegmentResult, SessionClient } from "./api.js";
import { paintedLabels, rasterizeStrokes, Seed, Stroke } from "./strokes.js";

export const SEED_SYNC_DEBOUNCE_MS = 150;

export interface UiStateOptions {
  debounceMs?: number;
  onSeedsRejected?: (detail: string, stroke: Stroke) => void;
  onSynced?: (revision: number) => void;
}

export class UiState {
  activeLabel = 0;
  brushRadius = 1;
  zoom = 1;
  readonly strokes: Stroke[] = [];

  private dirtySinceSolve = false;
  private serverStale = false;
  private syncTimer: ReturnType<typeof setTimeout> | null = null;
  private syncInFlight: Promise<void> | null = null;
  private resyncQueued = false;
  private readonly debounceMs: number;

  constructor(
    public readonly client: SessionClient,
    public readonly width: number,
    public readonly height: number,
    private readonly options: UiStateOptions = {},
  ) {
    this.debounceMs = options.debounceMs ?? SEED_SYNC_DEBOUNCE_MS;
  }

  /** Rasterized view of everything painted so far. */
  seeds(): Seed[] {
    return rasterizeStrokes(this.strokes, this.width, this.height);
  }

  labelsPainted(): number[] {
    return paintedLabels(this.strokes, this.width, this.height);
  }

  canSegment(): boolean {
    return this.labelsPainted().length >= 2;
  }

  isStale(): boolean {
    return this.dirtySinceSolve || this.serverStale;
  }

  /** Append a finished stroke and schedule a (debounced) seed sync. */
  addStroke(stroke: Stroke): void {
    this.strokes.push(stroke);
    this.dirtySinceSolve = true;
    this.scheduleSync();
  }

  markModelChanged(): void {
    this.dirtySinceSolve = true;
  }

  private scheduleSync(): void {
    if (this.syncTimer) clearTimeout(this.syncTimer);
    this.syncTimer = setTimeout(() => {
      this.syncTimer = null;
      void this.syncNow();
    }, this.debounceMs);
  }

  /** Push the current rasterized seed list; coalesces concurrent calls. */
  async syncNow(): Promise<void> {
    if (this.syncInFlight) {
      this.resyncQueued = true;
      await this.syncInFlight;
      if (!this.resyncQueued) return;
    }
    this.resyncQueued = false;
    const seeds = this.seeds();
    if (seeds.length === 0) return; // the API rejects empty lists
    const run = (async () => {
      try {
        const revision = await this.client.putSeeds(seeds);
        this.options.onSynced?.(revision);
      } catch (err) {
        const stroke = this.strokes.pop(); // roll back the offending stroke
        if (stroke) this.options.onSeedsRejected?.(String(err), stroke);
      }
    })();
    this.syncInFlight = run;
    await run;
    this.syncInFlight = null;
    if (this.resyncQueued) await this.syncNow();
  }

  /** Flush pending paints, run the solve, and clear staleness on success. */
  async segment(): Promise<SegmentResult> {
    if (this.syncTimer) {
      clearTimeout(this.syncTimer);
      this.syncTimer = null;
    }
    await this.syncNow();
    const result = await this.client.segment();
    this.dirtySinceSolve = false;
    this.serverStale = false;
    return result;
  }

  async syncModel(config: ModelConfig): Promise<void> {
    await this.client.putModel(config);
    this.dirtySinceSolve = true;
  }

  noteServerStale(stale: boolean): void {
    this.serverStale = stale;
  }
}

/** Client-side model panel validation: beta only exists for the baseline. */
export function validateModelConfig(config: ModelConfig): string | null {
  if (config.model === "grady") {
    if (config.beta === undefined || !(config.beta > 0)) {
      return "the baseline model needs beta > 0";
    }
  }
  if (config.k !== undefined && (!Number.isInteger(config.k) || config.k < 1)) {
    return "window radius k must be a positive integer";
  }
  return null;
}
