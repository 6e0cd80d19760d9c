import { describe, expect, it } from "vitest";

import { dayLabel, isAlarm, percent } from "../src/format.js";

describe("percent", () => {
  it("shows one decimal", () => {
    expect(percent(0.2)).toBe("20.0%");
    expect(percent(0.5294117647058824)).toBe("52.9%");
    expect(percent(0.7634408602150538)).toBe("76.3%");
    expect(percent(0)).toBe("0.0%");
    expect(percent(1)).toBe("100.0%");
  });
});

describe("isAlarm", () => {
  it("alarms exactly at the threshold (matches the server's >= rule)", () => {
    expect(isAlarm(0.5, 0.5)).toBe(true);
    expect(isAlarm(0.4999999, 0.5)).toBe(false);
    expect(isAlarm(0.74, 0.5)).toBe(true);
  });
});

describe("dayLabel", () => {
  it("names day zero as admission", () => {
    expect(dayLabel(0)).toBe("admission");
    expect(dayLabel(3)).toBe("day 3");
  });
});
