/**
 * Risk trajectory chart: probability against hospital day, with the alarm
 * threshold drawn as a horizontal line.
 *
 * The chart stores trajectory probabilities verbatim; geometry maps them
 * to pixels for display but no probability is ever derived client-side.
 * `chartData` is pure so tests can inspect exactly which numbers are
 * rendered.
 */

import { isAlarm, percent } from "./format.js";
import type { TrajectoryPoint } from "./types.js";

export const WIDTH = 640;
export const HEIGHT = 260;
const MARGIN = { left: 46, right: 16, top: 14, bottom: 30 };

export interface ChartPoint {
  day: number;
  probability: number;
  label: string;
  alarm: boolean;
  x: number;
  y: number;
}

export interface ChartData {
  points: ChartPoint[];
  thresholdY: number;
  thresholdLabel: string;
  maxDay: number;
}

export function chartData(trajectory: TrajectoryPoint[], threshold: number): ChartData {
  const innerW = WIDTH - MARGIN.left - MARGIN.right;
  const innerH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const maxDay = Math.max(1, ...trajectory.map((p) => p.day));
  const x = (day: number) => MARGIN.left + (day / maxDay) * innerW;
  const y = (p: number) => MARGIN.top + (1 - p) * innerH;
  const points = trajectory.map((p) => ({
    day: p.day,
    probability: p.probability,
    label: percent(p.probability),
    alarm: isAlarm(p.probability, threshold),
    x: x(p.day),
    y: y(p.probability),
  }));
  return {
    points,
    thresholdY: y(threshold),
    thresholdLabel: percent(threshold),
    maxDay,
  };
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderChartSvg(data: ChartData): string {
  const axisY = HEIGHT - MARGIN.bottom;
  const parts: string[] = [];
  parts.push(
    `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" aria-label="risk trajectory">`,
    `<line class="axis" x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" y2="${axisY}"/>`,
    `<line class="axis" x1="${MARGIN.left}" y1="${axisY}" x2="${WIDTH - MARGIN.right}" y2="${axisY}"/>`,
    `<line class="threshold" x1="${MARGIN.left}" y1="${data.thresholdY}" ` +
      `x2="${WIDTH - MARGIN.right}" y2="${data.thresholdY}"/>`,
    `<text class="threshold-label" x="${WIDTH - MARGIN.right}" y="${data.thresholdY - 5}" ` +
      `text-anchor="end">alarm ${esc(data.thresholdLabel)}</text>`,
  );
  const path = data.points
    .map((p, i) => `${i === 0 ? "M" : "L"}${p.x.toFixed(1)},${p.y.toFixed(1)}`)
    .join(" ");
  if (data.points.length > 1) {
    parts.push(`<path class="risk-line" d="${path}"/>`);
  }
  for (const p of data.points) {
    const cls = p.alarm ? "point alarm" : "point";
    parts.push(
      `<circle class="${cls}" cx="${p.x.toFixed(1)}" cy="${p.y.toFixed(1)}" r="5">` +
        `<title>${esc(`${p.day === 0 ? "admission" : "day " + p.day}: ${p.label}`)}</title></circle>`,
      `<text class="point-label${p.alarm ? " alarm" : ""}" x="${p.x.toFixed(1)}" ` +
        `y="${(p.y - 10).toFixed(1)}" text-anchor="middle">${esc(p.label)}</text>`,
      `<text class="day-label" x="${p.x.toFixed(1)}" y="${axisY + 18}" ` +
        `text-anchor="middle">${p.day}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
