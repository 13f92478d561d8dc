/** Trailing-edge debounce: at most one call per `waitMs` window.
 *
 * The first call in a quiet period schedules execution `waitMs` later;
 * further calls inside the window replace the pending arguments. `flush`
 * runs a pending call immediately; `cancel` drops it.
 */
export interface Debounced<A extends unknown[]> {
  (...args: A): void;
  flush(): void;
  cancel(): void;
  pending(): boolean;
}

export function debounce<A extends unknown[]>(
  fn: (...args: A) => void,
  waitMs: number,
): Debounced<A> {
  let timer: ReturnType<typeof setTimeout> | undefined;
  let lastArgs: A | undefined;

  const fire = () => {
    timer = undefined;
    if (lastArgs !== undefined) {
      const args = lastArgs;
      lastArgs = undefined;
      fn(...args);
    }
  };

  const debounced = (...args: A) => {
    lastArgs = args;
    if (timer === undefined) {
      timer = setTimeout(fire, waitMs);
    }
  };
  debounced.flush = () => {
    if (timer !== undefined) {
      clearTimeout(timer);
      fire();
    }
  };
  debounced.cancel = () => {
    if (timer !== undefined) {
      clearTimeout(timer);
      timer = undefined;
    }
    lastArgs = undefined;
  };
  debounced.pending = () => timer !== undefined;
  return debounced;
}
