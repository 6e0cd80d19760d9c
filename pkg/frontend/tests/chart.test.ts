import { describe, expect, it } from "vitest";

import { chartData, renderChartSvg } from "../src/chart.js";

const TRAJECTORY = [
  { day: 0, probability: 0.2 },
  { day: 1, probability: 0.53 },
  { day: 2, probability: 0.76 },
];

describe("chartData", () => {
  it("keeps every probability verbatim and in day order", () => {
    const data = chartData(TRAJECTORY, 0.5);
    expect(data.points.map((p) => p.probability)).toEqual([0.2, 0.53, 0.76]);
    expect(data.points.map((p) => p.day)).toEqual([0, 1, 2]);
    const xs = data.points.map((p) => p.x);
    expect([...xs].sort((a, b) => a - b)).toEqual(xs); // monotone x-axis
  });

  it("applies alarm styling at and above the threshold", () => {
    const data = chartData([{ day: 0, probability: 0.5 }, { day: 1, probability: 0.49 }], 0.5);
    expect(data.points[0]!.alarm).toBe(true);
    expect(data.points[1]!.alarm).toBe(false);
  });

  it("handles a baseline-only trajectory", () => {
    const data = chartData([{ day: 0, probability: 0.31 }], 0.5);
    expect(data.points).toHaveLength(1);
    const svg = renderChartSvg(data);
    expect(svg).toContain("31.0%");
    expect(svg).not.toContain("<path"); // a single point draws no line
  });
});

describe("renderChartSvg", () => {
  it("renders one labelled point per trajectory entry plus the threshold", () => {
    const svg = renderChartSvg(chartData(TRAJECTORY, 0.5));
    expect(svg.match(/<circle/g)).toHaveLength(3);
    for (const label of ["20.0%", "53.0%", "76.0%"]) {
      expect(svg).toContain(label);
    }
    expect(svg).toContain('class="threshold"');
    expect(svg).toContain("alarm 50.0%");
  });
});
