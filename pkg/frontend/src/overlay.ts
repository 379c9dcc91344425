/**
 * Read-only multi-annotator overlay: one row per annotation, each span a
 * semi-transparent bar; overlapping bars within a row carry a stacking
 * depth so nested spans stay visible.
 */

import { StoredAnnotation } from "./types.js";

export interface OverlayBar {
  start: number;
  end: number;
  errorType: string;
  severity: number;
  /** Number of earlier bars in the same row this one overlaps. */
  depth: number;
  isAntecedent: boolean;
}

export interface OverlayRow {
  annotationId: string;
  annotatorId: string;
  bars: OverlayBar[];
}

export interface OverlayModel {
  textLength: number;
  rows: OverlayRow[];
  empty: boolean;
}

function overlapsRange(aStart: number, aEnd: number, bStart: number, bEnd: number): boolean {
  return aStart < bEnd && bStart < aEnd;
}

export function buildOverlay(text: string, annotations: StoredAnnotation[]): OverlayModel {
  const rows: OverlayRow[] = annotations.map((ann) => {
    const bars: OverlayBar[] = [];
    for (const span of ann.spans) {
      const pieces: Omit<OverlayBar, "depth">[] = [
        {
          start: span.start,
          end: span.end,
          errorType: span.error_type,
          severity: span.severity,
          isAntecedent: false,
        },
      ];
      if (span.antecedent) {
        pieces.push({
          start: span.antecedent.start,
          end: span.antecedent.end,
          errorType: span.error_type,
          severity: span.severity,
          isAntecedent: true,
        });
      }
      for (const piece of pieces) {
        const depth = bars.filter((b) =>
          overlapsRange(b.start, b.end, piece.start, piece.end)
        ).length;
        bars.push({ ...piece, depth });
      }
    }
    return { annotationId: ann.annotation_id, annotatorId: ann.annotator_id, bars };
  });
  return { textLength: text.length, rows, empty: rows.length === 0 };
}
