import type { ClassContours, SessionDescriptor, WeightUpdateResponse } from "./types.js";

export interface ClassView {
  classId: number;
  name: string;
  color: string;
  visible: boolean;
  /** Server-normalized weight currently displayed on the slider. */
  weight: number;
}

/** One hue per class; levels within a class vary only in lightness. */
export function classHue(index: number): number {
  const hues = [210, 0, 120, 40, 280, 170, 320, 80, 240, 20];
  return hues[index % hues.length];
}

/** Lightness varies linearly with the level's mass fraction rho. */
export function levelLightness(rho: number): number {
  return 30 + 45 * rho;
}

export function classColor(index: number): string {
  return `hsl(${classHue(index)}, 70%, 45%)`;
}

/**
 * Client-side session state: displayed contours always belong to exactly one
 * server revision, the revision never decreases, and slider values mirror
 * the server's normalized tau echo.
 */
export class ViewState {
  readonly sessionId: string;
  classes: ClassView[];
  revision: number;
  contours: ClassContours[];
  error: string | null = null;

  constructor(descriptor: SessionDescriptor) {
    this.sessionId = descriptor.session_id;
    this.revision = descriptor.revision;
    this.contours = descriptor.contours;
    this.classes = descriptor.classes.map((c, i) => ({
      classId: c.class_id,
      name: c.name,
      color: classColor(i),
      visible: true,
      weight: descriptor.tau[i],
    }));
  }

  /** Raw slider vector to submit; the server renormalizes it. */
  sliderVector(): number[] {
    return this.classes.map((c) => c.weight);
  }

  setSlider(index: number, value: number): void {
    if (index < 0 || index >= this.classes.length) {
      throw new RangeError(`no class at index ${index}`);
    }
    this.classes[index].weight = Math.min(1, Math.max(0, value));
  }

  toggleVisible(index: number): void {
    this.classes[index].visible = !this.classes[index].visible;
  }

  /**
   * Apply a weight-update response. Stale responses (revision at or below
   * the displayed one) are discarded so the scene's revision never goes
   * backwards; fresh ones snap sliders to the normalized echo and swap the
   * contour set atomically. Returns whether the response was applied.
   */
  applyUpdate(res: WeightUpdateResponse): boolean {
    if (res.revision <= this.revision) {
      return false;
    }
    this.revision = res.revision;
    this.contours = res.contours;
    res.tau.forEach((t, i) => {
      this.classes[i].weight = t;
    });
    this.error = null;
    return true;
  }

  /** Resync from a full session fetch (e.g. after a 409 conflict). */
  resync(descriptor: SessionDescriptor): void {
    if (descriptor.revision < this.revision) {
      return;
    }
    this.revision = descriptor.revision;
    this.contours = descriptor.contours;
    descriptor.tau.forEach((t, i) => {
      this.classes[i].weight = t;
    });
    this.error = null;
  }

  /** Displayed weights: the server echo, which always sums to 1. */
  displayedTau(): number[] {
    return this.classes.map((c) => c.weight);
  }
}
