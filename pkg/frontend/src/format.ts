/** Display rules shared by the chart and the panels. */

/** Probabilities are shown as percentages with one decimal. */
export function percent(probability: number): string {
  return (probability * 100).toFixed(1) + "%";
}

/**
 * Alarm rule: a risk at or above the threshold alarms (matching the
 * server-side classification rule, where a boundary case counts as
 * positive).
 */
export function isAlarm(probability: number, threshold: number): boolean {
  return probability >= threshold;
}

export function dayLabel(day: number): string {
  return day === 0 ? "admission" : `day ${day}`;
}
