// Maps the shared master-timeline cursor onto each media asset's local
// clock so every player shows the moment the reviewer is pointing at.

export interface MediaWindow {
  master_start_ms: number;
  duration_ms: number;
}

/**
 * Offset into an asset for a master-timeline cursor, clamped into
 * [0, duration_ms]. Before the asset started recording the answer is 0;
 * after it stopped, the final frame's offset.
 */
export function cursorToMediaOffsetMs(cursorMs: number, media: MediaWindow): number {
  const raw = cursorMs - media.master_start_ms;
  if (raw < 0) return 0;
  if (raw > media.duration_ms) return media.duration_ms;
  return raw;
}

/** Same offset in seconds, ready for HTMLMediaElement.currentTime. */
export function cursorToMediaSeconds(cursorMs: number, media: MediaWindow): number {
  return cursorToMediaOffsetMs(cursorMs, media) / 1000;
}

/** Whether the cursor falls inside the asset's recorded half-open span. */
export function cursorWithinMedia(cursorMs: number, media: MediaWindow): boolean {
  const raw = cursorMs - media.master_start_ms;
  return raw >= 0 && raw < media.duration_ms;
}
