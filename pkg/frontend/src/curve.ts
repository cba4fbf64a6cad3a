import type { RoundRecord } from "./types.js";

/** Learning-curve geometry: macro F1 against labels used, y fixed to [0, 1]. */

export interface CurvePoint {
  x: number;
  y: number;
}

export const EMPTY_CURVE_MESSAGE = "no metrics yet";

export function curvePoints(rounds: RoundRecord[]): CurvePoint[] {
  return rounds
    .filter((record) => record.macro_f1 !== null)
    .map((record) => ({ x: record.n_labeled, y: record.macro_f1 as number }));
}

const WIDTH = 560;
const HEIGHT = 300;
const PAD = { left: 48, right: 16, top: 12, bottom: 34 };

function scaleX(x: number, xMax: number): number {
  const span = WIDTH - PAD.left - PAD.right;
  return PAD.left + (xMax === 0 ? 0 : (x / xMax) * span);
}

function scaleY(y: number): number {
  const span = HEIGHT - PAD.top - PAD.bottom;
  return PAD.top + (1 - y) * span; // y-domain fixed to [0, 1]
}

/** Render the curve as standalone SVG markup (pure string, unit-testable). */
export function renderCurveSvg(points: CurvePoint[], seriesName = "macro F1"): string {
  if (points.length === 0) {
    return (
      `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" class="curve">` +
      `<text x="${WIDTH / 2}" y="${HEIGHT / 2}" text-anchor="middle" class="curve-empty">` +
      `${EMPTY_CURVE_MESSAGE}</text></svg>`
    );
  }
  const xMax = Math.max(...points.map((p) => p.x)) * 1.05;
  const path = points
    .map((p, i) => `${i === 0 ? "M" : "L"}${scaleX(p.x, xMax).toFixed(1)},${scaleY(p.y).toFixed(1)}`)
    .join(" ");
  const circles = points
    .map(
      (p) =>
        `<circle cx="${scaleX(p.x, xMax).toFixed(1)}" cy="${scaleY(p.y).toFixed(1)}" r="3.5">` +
        `<title>${p.x} labels: ${p.y.toFixed(4)}</title></circle>`,
    )
    .join("");
  const gridlines = [0, 0.25, 0.5, 0.75, 1]
    .map((y) => {
      const sy = scaleY(y).toFixed(1);
      return (
        `<line x1="${PAD.left}" y1="${sy}" x2="${WIDTH - PAD.right}" y2="${sy}" class="grid"/>` +
        `<text x="${PAD.left - 6}" y="${sy}" text-anchor="end" dominant-baseline="middle">${y.toFixed(2)}</text>`
      );
    })
    .join("");
  return (
    `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" class="curve" aria-label="${seriesName}">` +
    `${gridlines}` +
    `<path d="${path}" fill="none" class="series"/>` +
    `${circles}` +
    `<text x="${(WIDTH + PAD.left) / 2}" y="${HEIGHT - 8}" text-anchor="middle">labels used</text>` +
    `</svg>`
  );
}
