/** Typed client for the segmentation session API. */

import { Seed } from "./strokes.js";

export interface ModelConfig {
  model: "poisson" | "const-gauss" | "var-gauss" | "grady";
  beta?: number;
  k?: number;
}

export interface SessionSummary {
  id: string;
  width: number;
  height: number;
  channels: number;
  model: string;
  k: number;
  revision: number;
  seeds: Seed[];
  result_revision: number | null;
  stale: boolean;
  has_ground_truth: boolean;
}

export interface SegmentResult {
  revision: number;
  seconds: number;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function raiseForStatus(resp: Response): Promise<void> {
  if (resp.ok) return;
  let detail = resp.statusText;
  try {
    const body = await resp.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    /* non-JSON error body */
  }
  throw new ApiError(resp.status, detail);
}

export class SessionClient {
  constructor(
    public readonly baseUrl: string,
    public readonly id: string,
  ) {}

  static async create(baseUrl: string, image: Blob, model?: ModelConfig): Promise<SessionClient> {
    const form = new FormData();
    form.append("image", image, "image.png");
    if (model) form.append("model", JSON.stringify(model));
    const resp = await fetch(`${baseUrl}/api/sessions`, { method: "POST", body: form });
    await raiseForStatus(resp);
    const body = (await resp.json()) as { id: string };
    return new SessionClient(baseUrl, body.id);
  }

  private url(path: string): string {
    return `${this.baseUrl}/api/sessions/${this.id}${path}`;
  }

  async summary(): Promise<SessionSummary> {
    const resp = await fetch(this.url(""));
    await raiseForStatus(resp);
    return (await resp.json()) as SessionSummary;
  }

  async putSeeds(seeds: Seed[]): Promise<number> {
    const resp = await fetch(this.url("/seeds"), {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(seeds),
    });
    await raiseForStatus(resp);
    return ((await resp.json()) as { revision: number }).revision;
  }

  async putModel(config: ModelConfig): Promise<number> {
    const resp = await fetch(this.url("/model"), {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(config),
    });
    await raiseForStatus(resp);
    return ((await resp.json()) as { revision: number }).revision;
  }

  async segment(): Promise<SegmentResult> {
    const resp = await fetch(this.url("/segment"), { method: "POST" });
    await raiseForStatus(resp);
    return (await resp.json()) as SegmentResult;
  }

  /** Fetch a result image; reports the server-side staleness flag. */
  async fetchResult(
    name: "labels.png" | "overlay.png",
  ): Promise<{ bytes: ArrayBuffer; stale: boolean }> {
    const resp = await fetch(this.url(`/${name}`), { cache: "no-store" });
    await raiseForStatus(resp);
    return {
      bytes: await resp.arrayBuffer(),
      stale: resp.headers.get("X-Stale") === "true",
    };
  }

  async delete(): Promise<void> {
    const resp = await fetch(this.url(""), { method: "DELETE" });
    await raiseForStatus(resp);
  }
}
