/** Importance chart view-model: horizontal bars scaled to the top score,
 * extra-legal features highlighted. */

import type { ImportanceEntry } from "./types.js";

export interface Bar {
  feature: string;
  score: number;
  widthPct: number;
  highlighted: boolean;
}

export function importanceBars(entries: ImportanceEntry[], topN = 15): Bar[] {
  const sorted = [...entries].sort(
    (a, b) => b.score - a.score || a.feature.localeCompare(b.feature),
  );
  const top = sorted.slice(0, topN);
  const max = top.length ? top[0].score : 0;
  return top.map((e) => ({
    feature: e.feature,
    score: e.score,
    widthPct: max > 0 ? Math.max(1, Math.round((e.score / max) * 100)) : 0,
    highlighted: e.role === "extra_legal",
  }));
}
