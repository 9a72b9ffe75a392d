/**
 * Annotator state machine, DOM-free.
 *
 * Owns the session, the ordered stroke history, the run/poll loop and the
 * overlay state; the DOM layer subscribes to change notifications and
 * renders. Server failures land in the banner with the server's message
 * untouched.
 */

import { ApiClient, ApiError, ConfigOverrides, TraceRecord } from "./api.js";
import { pngDimensions, base64ToBytes } from "./png.js";
import { clipPoint, countLabels, replayStrokes, Stroke, StrokeLabel } from "./strokes.js";

export type UiStatus = "empty" | "idle" | "running" | "done" | "error";

export interface Banner {
  kind: "error" | "info";
  message: string;
}

export interface Brush {
  label: StrokeLabel;
  radius: number;
}

export interface OverlayState {
  maskBase64: string | null;
  maskWidth: number;
  maskHeight: number;
  opacity: number;
  mode: "mask" | "boundary";
}

export interface ControllerOptions {
  pollIntervalMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export class AnnotatorController {
  sessionId: string | null = null;
  imageWidth = 0;
  imageHeight = 0;
  brush: Brush = { label: "fg", radius: 3 };
  strokes: Stroke[] = [];
  status: UiStatus = "empty";
  banner: Banner | null = null;
  trace: TraceRecord[] = [];
  overlay: OverlayState = {
    maskBase64: null,
    maskWidth: 0,
    maskHeight: 0,
    opacity: 0.5,
    mode: "mask",
  };
  onChange: () => void = () => {};

  private activeStroke: Stroke | null = null;
  private readonly pollIntervalMs: number;
  private readonly sleep: (ms: number) => Promise<void>;

  constructor(
    private readonly api: ApiClient,
    options: ControllerOptions = {},
  ) {
    this.pollIntervalMs = options.pollIntervalMs ?? 1000;
    this.sleep = options.sleep ?? defaultSleep;
  }

  private notify() {
    this.onChange();
  }

  private setBanner(banner: Banner | null) {
    this.banner = banner;
    this.notify();
  }

  async loadImage(pngBase64: string): Promise<void> {
    try {
      const info = await this.api.createSession(pngBase64);
      this.sessionId = info.id;
      this.imageWidth = info.width;
      this.imageHeight = info.height;
      this.strokes = [];
      this.activeStroke = null;
      this.trace = [];
      this.overlay = { ...this.overlay, maskBase64: null, maskWidth: 0, maskHeight: 0 };
      this.status = "idle";
      this.setBanner(null);
    } catch (err) {
      this.status = "empty";
      this.setBanner({ kind: "error", message: messageOf(err) });
      throw err;
    }
  }

  get imageLoaded(): boolean {
    return this.sessionId !== null;
  }

  /** Seed-label counts the current stroke history would rasterize to. */
  seedCounts(): { fg: number; bg: number } {
    if (!this.imageLoaded) return { fg: 0, bg: 0 };
    return countLabels(replayStrokes(this.strokes, this.imageWidth, this.imageHeight));
  }

  /** Local preview grid (0 unlabeled / 1 fg / 2 bg) for rendering. */
  seedGrid(): Uint8Array {
    return replayStrokes(this.strokes, this.imageWidth, this.imageHeight);
  }

  setBrush(brush: Partial<Brush>) {
    this.brush = { ...this.brush, ...brush };
    this.notify();
  }

  beginStroke(x: number, y: number) {
    if (!this.imageLoaded || this.status === "running") return;
    const point = clipPoint(x, y, this.imageWidth, this.imageHeight);
    this.activeStroke = {
      label: this.brush.label,
      radius: this.brush.radius,
      points: [point],
    };
    this.strokes.push(this.activeStroke);
    this.notify();
  }

  extendStroke(x: number, y: number) {
    if (!this.activeStroke) return;
    this.activeStroke.points.push(clipPoint(x, y, this.imageWidth, this.imageHeight));
    this.notify();
  }

  endStroke() {
    this.activeStroke = null;
    this.notify();
  }

  clearStrokes() {
    this.strokes = [];
    this.activeStroke = null;
    this.notify();
  }

  /**
   * Validate locally, post the stroke history, start a run and poll until
   * it finishes. Returns true when a mask was produced.
   */
  async submitAndRun(overrides: ConfigOverrides = {}): Promise<boolean> {
    if (!this.imageLoaded || this.sessionId === null) {
      this.setBanner({ kind: "error", message: "load an image first" });
      return false;
    }
    if (this.status === "running") return false;
    const counts = this.seedCounts();
    if (counts.fg === 0 || counts.bg === 0) {
      this.setBanner({
        kind: "error",
        message: "draw at least one foreground and one background stroke first",
      });
      return false;
    }

    this.status = "running";
    this.setBanner(null);
    try {
      await this.api.setScribbles(this.sessionId, this.strokes);
      await this.api.startSegmentation(this.sessionId, overrides);
      for (;;) {
        const result = await this.api.getResult(this.sessionId);
        if (result.status === "DONE") {
          const mask = result.mask_png!;
          const dims = pngDimensions(base64ToBytes(mask));
          if (dims.width !== this.imageWidth || dims.height !== this.imageHeight) {
            throw new ApiError(
              0,
              "DimensionMismatch",
              `mask is ${dims.width}x${dims.height}, image is ${this.imageWidth}x${this.imageHeight}`,
            );
          }
          this.overlay = {
            ...this.overlay,
            maskBase64: mask,
            maskWidth: dims.width,
            maskHeight: dims.height,
          };
          this.trace = result.trace;
          this.status = "done";
          this.notify();
          return true;
        }
        if (result.status === "ERROR") {
          throw new ApiError(0, "RunFailed", result.error ?? "segmentation failed");
        }
        await this.sleep(this.pollIntervalMs);
      }
    } catch (err) {
      this.status = this.overlay.maskBase64 ? "done" : "idle";
      this.setBanner({ kind: "error", message: messageOf(err) });
      return false;
    }
  }

  setOverlayOpacity(opacity: number) {
    this.overlay = { ...this.overlay, opacity: Math.min(Math.max(opacity, 0), 1) };
    this.notify();
  }

  setOverlayMode(mode: "mask" | "boundary") {
    this.overlay = { ...this.overlay, mode };
    this.notify();
  }
}

function messageOf(err: unknown): string {
  if (err instanceof Error) return err.message;
  return String(err);
}
