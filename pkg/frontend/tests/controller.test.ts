import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api";
import { runAndDisplay, type RunView } from "../src/controller";

const PNG_BYTES = new Uint8Array([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 1, 2, 3]);

interface Scripted {
  statuses: object[];
  segmentResponse?: { status: number; body: object };
  putResponse?: { status: number; body: object };
}

function mockedApi(script: Scripted): { api: ApiClient; calls: string[] } {
  const calls: string[] = [];
  let statusIndex = 0;
  const fetchFn = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    calls.push(`${method} ${url}`);
    if (url.endsWith("/annotations")) {
      const r = script.putResponse ?? { status: 200, body: {} };
      return Response.json(r.body, { status: r.status });
    }
    if (url.endsWith("/segment")) {
      const r = script.segmentResponse ?? { status: 202, body: { status: "running" } };
      return Response.json(r.body, { status: r.status });
    }
    if (url.endsWith("/status")) {
      const body = script.statuses[Math.min(statusIndex++, script.statuses.length - 1)];
      return Response.json(body, { status: 200 });
    }
    if (url.endsWith("/mask") || url.endsWith("/overlay")) {
      return new Response(new Blob([PNG_BYTES], { type: "image/png" }), { status: 200 });
    }
    return Response.json({ detail: `unexpected ${url}` }, { status: 500 });
  };
  return { api: new ApiClient("", fetchFn), calls };
}

class FakeView implements RunView {
  runningStates: boolean[] = [];
  progress: number[] = [];
  overlay: Blob | null = null;
  mask: Blob | null = null;
  errors: string[] = [];

  setRunning(running: boolean) {
    this.runningStates.push(running);
  }
  setProgress(iteration: number, _max: number) {
    this.progress.push(iteration);
  }
  showOverlay(overlay: Blob, mask: Blob) {
    this.overlay = overlay;
    this.mask = mask;
  }
  showError(message: string) {
    this.errors.push(message);
  }
}

const instant = { pollIntervalMs: 0, sleep: async () => {} };

const ANNOTATIONS = '{"strokes":[{"class":0,"points":[[1,1]],"brush_radius":2}],"polygon":null}';

describe("runAndDisplay", () => {
  it("submits, polls and renders the overlay from the mocked service", async () => {
    const { api, calls } = mockedApi({
      statuses: [
        { status: "running", progress: { iteration: 15000, mean_max_domination: 0.8 }, error: null },
        { status: "running", progress: { iteration: 30000, mean_max_domination: 0.9 }, error: null },
        { status: "done", progress: { iteration: 45000, mean_max_domination: 0.97 }, error: null },
      ],
    });
    const view = new FakeView();
    const ok = await runAndDisplay(api, "sid", ANNOTATIONS, view, { overrides: { max_ite: 100000 }, ...instant });

    expect(ok).toBe(true);
    expect(view.errors).toEqual([]);
    expect(view.overlay).not.toBeNull();
    expect(view.overlay!.size).toBe(PNG_BYTES.length);
    expect(view.mask!.size).toBe(PNG_BYTES.length);
    expect(view.progress).toEqual([15000, 30000, 45000]);
    expect(view.runningStates).toEqual([true, false]);
    expect(calls[0]).toBe("PUT /api/sessions/sid/annotations");
    expect(calls[1]).toBe("POST /api/sessions/sid/segment");
    expect(calls.filter((c) => c.endsWith("/overlay")).length).toBe(1);
  });

  it("surfaces a 422 from the service verbatim", async () => {
    const { api } = mockedApi({
      statuses: [],
      segmentResponse: { status: 422, body: { detail: "need at least two classes" } },
    });
    const view = new FakeView();
    const ok = await runAndDisplay(api, "sid", ANNOTATIONS, view, { overrides: {}, ...instant });
    expect(ok).toBe(false);
    expect(view.errors).toEqual(["need at least two classes"]);
    expect(view.overlay).toBeNull();
    expect(view.runningStates).toEqual([true, false]);
  });

  it("surfaces a 409 while a run is in flight", async () => {
    const { api } = mockedApi({
      statuses: [],
      segmentResponse: { status: 409, body: { detail: "segmentation already running" } },
    });
    const view = new FakeView();
    const ok = await runAndDisplay(api, "sid", ANNOTATIONS, view, { overrides: {}, ...instant });
    expect(ok).toBe(false);
    expect(view.errors).toEqual(["segmentation already running"]);
  });

  it("reports a failed run with the engine's message", async () => {
    const { api } = mockedApi({
      statuses: [
        { status: "running", progress: { iteration: 1000, mean_max_domination: 0.5 }, error: null },
        { status: "failed", progress: { iteration: 1000, mean_max_domination: 0.5 }, error: "scribbles lost in downscale" },
      ],
    });
    const view = new FakeView();
    const ok = await runAndDisplay(api, "sid", ANNOTATIONS, view, { overrides: {}, ...instant });
    expect(ok).toBe(false);
    expect(view.errors).toEqual(["scribbles lost in downscale"]);
  });

  it("a re-run replaces the previous overlay", async () => {
    const { api } = mockedApi({
      statuses: [{ status: "done", progress: { iteration: 5000, mean_max_domination: 0.99 }, error: null }],
    });
    const view = new FakeView();
    await runAndDisplay(api, "sid", ANNOTATIONS, view, { overrides: {}, ...instant });
    const first = view.overlay;
    await runAndDisplay(api, "sid", ANNOTATIONS, view, { overrides: {}, ...instant });
    expect(view.overlay).not.toBe(first);
    expect(view.overlay).not.toBeNull();
  });
});
