/** Typed client for the session service. Configured by a single base URL. */

export interface SessionMeta {
  id: string;
  status: "awaiting_points" | "segmented" | "accepted";
  rank: 2 | 3;
  dims: number[];
  spacing: number[];
  rounds: number;
  bbox: { lo: number[]; hi: number[] } | null;
}

export interface ClickEntry {
  coords: number[];
  label: "fg" | "bg";
}

export class ApiError extends Error {
  constructor(
    public status: number,
    detail: string,
  ) {
    super(detail);
  }
}

async function check(resp: Response): Promise<Response> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      detail = (await resp.json()).detail ?? detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(resp.status, detail);
  }
  return resp;
}

export class Client {
  constructor(private baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async createSession(image: Blob): Promise<SessionMeta> {
    const resp = await check(
      await fetch(this.url("/sessions"), {
        method: "POST",
        headers: { "content-type": "application/octet-stream" },
        body: image,
      }),
    );
    return resp.json();
  }

  async meta(id: string): Promise<SessionMeta> {
    return (await check(await fetch(this.url(`/sessions/${id}/meta`)))).json();
  }

  async submitPoints(id: string, points: ClickEntry[]): Promise<SessionMeta> {
    return this.postJson(`/sessions/${id}/points`, points);
  }

  async submitClicks(id: string, clicks: ClickEntry[]): Promise<SessionMeta> {
    return this.postJson(`/sessions/${id}/clicks`, clicks);
  }

  async undo(id: string): Promise<SessionMeta> {
    return this.postJson(`/sessions/${id}/undo`);
  }

  async accept(id: string): Promise<SessionMeta> {
    return this.postJson(`/sessions/${id}/accept`);
  }

  async maskPng(id: string, round: number, slice?: number): Promise<Blob> {
    const q = new URLSearchParams({ format: "png", round: String(round) });
    if (slice !== undefined) q.set("slice", String(slice));
    const resp = await check(await fetch(this.url(`/sessions/${id}/mask?${q}`)));
    return resp.blob();
  }

  async imagePng(id: string, slice?: number): Promise<Blob> {
    const q = slice === undefined ? "" : `?slice=${slice}`;
    const resp = await check(await fetch(this.url(`/sessions/${id}/image${q}`)));
    return resp.blob();
  }

  private async postJson(path: string, body?: unknown): Promise<SessionMeta> {
    const resp = await check(
      await fetch(this.url(path), {
        method: "POST",
        headers: body === undefined ? {} : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      }),
    );
    return resp.json();
  }
}
