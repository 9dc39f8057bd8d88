/**
 * Pure view-model construction.  render* functions turn server payloads into
 * plain data that a thin canvas/DOM adapter draws verbatim; nothing here
 * invents numbers, and every displayed string traces to a server field.
 */

import {
  Estimate,
  GainTuningQuery,
  GenericPairsQuery,
  QueryPayload,
  isGainTuningQuery,
} from "./api.js";
import { Bounds, fitTransform, plotBounds, toCanvas } from "./geometry.js";

export interface Polyline {
  label: string;
  points: [number, number][];
}

export interface Panel {
  title: string;
  /** canvas-space polylines: reference first, candidate second */
  polylines: Polyline[];
  caption: string;
}

export interface ComparisonView {
  queryId: number;
  bounds: Bounds;
  panels: [Panel, Panel];
  scenarios: string[];
}

function project(
  bounds: Bounds,
  width: number,
  height: number,
  points: ReadonlyArray<readonly [number, number]>,
): [number, number][] {
  const t = fitTransform(bounds, width, height);
  return points.map((p) => toCanvas(bounds, t, height, p));
}

export function renderGainComparison(
  query: GainTuningQuery,
  width: number,
  height: number,
): ComparisonView {
  const pathA = query.trajectory_a.map((r) => [r[1], r[2]] as [number, number]);
  const pathB = query.trajectory_b.map((r) => [r[1], r[2]] as [number, number]);
  // one shared scale so A and B are visually comparable
  const bounds = plotBounds([query.reference_path, pathA, pathB]);
  const make = (title: string, gains: number[], path: [number, number][]): Panel => ({
    title,
    polylines: [
      { label: "reference", points: project(bounds, width, height, query.reference_path) },
      { label: "candidate", points: project(bounds, width, height, path) },
    ],
    caption: `gains [${gains.join(", ")}]`,
  });
  return {
    queryId: query.query_id,
    bounds,
    panels: [make("A", query.gains_a, pathA), make("B", query.gains_b, pathB)],
    scenarios: query.scenarios,
  };
}

export function renderGenericComparison(
  query: GenericPairsQuery,
  width: number,
  height: number,
): ComparisonView {
  const a = query.item_a;
  const b = query.item_b;
  const twoD = a.length === 2;
  const pts: [number, number][][] = twoD
    ? [[[a[0], a[1]]], [[b[0], b[1]]]]
    : [[[0, 0]], [[1, 0]]]; // high-d items are shown as readouts only
  const bounds = plotBounds(pts);
  const make = (title: string, item: number[], points: [number, number][]): Panel => ({
    title,
    polylines: twoD
      ? [{ label: "item", points: project(bounds, width, height, points) }]
      : [],
    caption: `item [${item.join(", ")}]`,
  });
  return {
    queryId: query.query_id,
    bounds,
    panels: [make("A", a, pts[0]), make("B", b, pts[1])],
    scenarios: [],
  };
}

export function renderComparison(
  query: QueryPayload,
  width = 360,
  height = 360,
): ComparisonView {
  return isGainTuningQuery(query)
    ? renderGainComparison(query, width, height)
    : renderGenericComparison(query, width, height);
}

export interface EstimatePanel {
  lines: string[];
}

/** Estimate panel text, every value verbatim from the server body. */
export function renderEstimate(estimate: Estimate): EstimatePanel {
  const lines = [
    `responses: ${estimate.query_count}`,
    `posterior trace: ${estimate.posterior_trace}`,
  ];
  if (estimate.gains !== undefined) {
    lines.push(`gains: [${estimate.gains.join(", ")}]`);
  }
  if (estimate.mean_tracking_error !== undefined) {
    lines.push(`tracking error: ${estimate.mean_tracking_error}`);
  }
  if (estimate.mu !== undefined) {
    lines.push(`estimate: [${estimate.mu.join(", ")}]`);
  }
  return { lines };
}
