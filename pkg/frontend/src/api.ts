// Thin client for the segmentation service. The fetch function is
// injectable so tests can run against a scripted fake.

export interface RunStatus {
  status: "idle" | "running" | "done" | "failed";
  progress: { iteration: number; mean_max_domination: number };
  error: string | null;
}

export interface SegmentOverrides {
  mode?: string;
  max_pixels?: number;
  seed?: number;
  delta_v?: number;
  p_grd?: number;
  max_ite?: number;
  max_stop?: number;
  control_stop?: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    detail: string,
  ) {
    super(detail);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function errorDetail(resp: Response): Promise<string> {
  try {
    const body = await resp.json();
    if (typeof body?.detail === "string") return body.detail;
    return JSON.stringify(body.detail ?? body);
  } catch {
    return resp.statusText || `HTTP ${resp.status}`;
  }
}

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async ok(resp: Response): Promise<Response> {
    if (!resp.ok) throw new ApiError(resp.status, await errorDetail(resp));
    return resp;
  }

  async createSession(image: Blob, filename: string): Promise<string> {
    const form = new FormData();
    form.append("image", image, filename);
    const resp = await this.ok(await this.fetchFn(`${this.base}/api/sessions`, { method: "POST", body: form }));
    return (await resp.json()).id as string;
  }

  async putAnnotations(sessionId: string, serialized: string): Promise<void> {
    await this.ok(
      await this.fetchFn(`${this.base}/api/sessions/${sessionId}/annotations`, {
        method: "PUT",
        headers: { "content-type": "application/json" },
        body: serialized,
      }),
    );
  }

  async startSegment(sessionId: string, overrides: SegmentOverrides): Promise<void> {
    await this.ok(
      await this.fetchFn(`${this.base}/api/sessions/${sessionId}/segment`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(overrides),
      }),
    );
  }

  async getStatus(sessionId: string): Promise<RunStatus> {
    const resp = await this.ok(await this.fetchFn(`${this.base}/api/sessions/${sessionId}/status`));
    return (await resp.json()) as RunStatus;
  }

  async fetchMask(sessionId: string): Promise<Blob> {
    const resp = await this.ok(await this.fetchFn(`${this.base}/api/sessions/${sessionId}/mask`));
    return await resp.blob();
  }

  async fetchOverlay(sessionId: string): Promise<Blob> {
    const resp = await this.ok(await this.fetchFn(`${this.base}/api/sessions/${sessionId}/overlay`));
    return await resp.blob();
  }
}
