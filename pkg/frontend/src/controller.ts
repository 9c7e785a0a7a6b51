// Drives one segmentation run: submit annotations, start, poll, display.
// The view is an interface so the loop is testable against a fake.

import type { ApiClient, SegmentOverrides } from "./api";
import { ApiError } from "./api";

export interface RunView {
  setRunning(running: boolean): void;
  setProgress(iteration: number, maxIterations: number): void;
  showOverlay(overlay: Blob, mask: Blob): void;
  showError(message: string): void;
}

export interface RunOptions {
  overrides: SegmentOverrides;
  pollIntervalMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const DEFAULT_POLL_MS = 500;

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export async function runAndDisplay(
  api: ApiClient,
  sessionId: string,
  serializedAnnotations: string,
  view: RunView,
  options: RunOptions,
): Promise<boolean> {
  const sleep = options.sleep ?? defaultSleep;
  const poll = options.pollIntervalMs ?? DEFAULT_POLL_MS;
  const maxIterations = options.overrides.max_ite ?? 1_000_000;
  view.setRunning(true);
  try {
    await api.putAnnotations(sessionId, serializedAnnotations);
    await api.startSegment(sessionId, options.overrides);
    for (;;) {
      const status = await api.getStatus(sessionId);
      view.setProgress(status.progress.iteration, maxIterations);
      if (status.status === "done") break;
      if (status.status === "failed") {
        view.showError(status.error ?? "segmentation failed");
        return false;
      }
      await sleep(poll);
    }
    const [overlay, mask] = await Promise.all([api.fetchOverlay(sessionId), api.fetchMask(sessionId)]);
    view.showOverlay(overlay, mask);
    return true;
  } catch (err) {
    // 409/422 service messages are surfaced verbatim.
    view.showError(err instanceof ApiError ? err.message : String(err));
    return false;
  } finally {
    view.setRunning(false);
  }
}
