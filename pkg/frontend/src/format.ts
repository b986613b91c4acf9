// Display formatting. Every helper is a pure function of the payload value
// so views stay byte-for-byte reproducible for a given API response.

/** Master-timeline milliseconds as "m:ss" (330000 -> "5:30"). */
export function formatClock(ms: number): string {
  const totalSeconds = Math.floor(ms / 1000);
  const minutes = Math.floor(totalSeconds / 60);
  const seconds = totalSeconds % 60;
  return `${minutes}:${String(seconds).padStart(2, "0")}`;
}

/** Fixed two-decimal rendering used by stat and correlation cells. */
export function formatValue(value: number): string {
  return value.toFixed(2);
}

/** Correlation cell text; null marks an undefined coefficient. */
export function formatR(r: number | null): string {
  return r === null ? "n/a" : r.toFixed(2);
}

/** Relative gain as a two-decimal fraction, or "n/a" when undefined. */
export function formatGain(gain: number | null): string {
  return gain === null ? "n/a" : gain.toFixed(2);
}

/** Millisecond span as "m:ss - m:ss". */
export function formatSpan(startMs: number, endMs: number): string {
  return `${formatClock(startMs)} - ${formatClock(endMs)}`;
}
