import { ApiError, SteeringApi } from "./api.js";
import { debounce, type Debounced } from "./debounce.js";
import { ViewState } from "./state.js";

export const DEBOUNCE_MS = 150;

/**
 * Connects sliders to the weight service: slider changes are debounced to at
 * most one request per window, at most one request is in flight, and
 * responses are applied through the ViewState's revision fencing so stale
 * updates are dropped. A 409 triggers a session refetch and a resubmit of
 * the current sliders.
 */
export class SteeringController {
  private readonly submitDebounced: Debounced<[]>;
  private inFlight = false;
  private dirty = false;

  constructor(
    private readonly api: SteeringApi,
    readonly state: ViewState,
    private readonly onChange: () => void,
    waitMs: number = DEBOUNCE_MS,
  ) {
    this.submitDebounced = debounce(() => {
      void this.submit();
    }, waitMs);
  }

  onSliderChange(index: number, value: number): void {
    this.state.setSlider(index, value);
    this.onChange();
    this.submitDebounced();
  }

  onToggleVisible(index: number): void {
    this.state.toggleVisible(index);
    this.onChange();
  }

  private async submit(): Promise<void> {
    if (this.inFlight) {
      this.dirty = true;
      return;
    }
    this.inFlight = true;
    try {
      const res = await this.api.putWeights(
        this.state.sessionId,
        this.state.sliderVector(),
        this.state.revision,
      );
      this.state.applyUpdate(res);
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        const fresh = await this.api.getSession(this.state.sessionId);
        this.state.resync(fresh);
        this.dirty = true;
      } else {
        this.state.error = err instanceof Error ? err.message : String(err);
      }
    } finally {
      this.inFlight = false;
      this.onChange();
      if (this.dirty) {
        this.dirty = false;
        this.submitDebounced();
      }
    }
  }

  /** Force a pending submission (e.g. on slider release). */
  flush(): void {
    this.submitDebounced.flush();
  }
}
