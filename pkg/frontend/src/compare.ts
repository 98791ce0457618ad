/**
 * Side-by-side comparison readout. The numbers come verbatim from
 * GET /api/eval; this module only orders and formats them for display.
 */

import { MetricReport } from "./api.js";

export const METRIC_ORDER: (keyof MetricReport)[] =
  ["dc", "iou", "pa", "ps", "rs", "f1s", "mae", "biou", "bs"];

export const METRIC_LABELS: Record<keyof MetricReport, string> = {
  dc: "DC",
  iou: "IoU",
  pa: "PA",
  ps: "PS",
  rs: "RS",
  f1s: "F1S",
  mae: "MAE",
  biou: "BIoU",
  bs: "BS",
};

export function formatMetric(value: number): string {
  return value.toFixed(2);
}

export interface CompareRow {
  key: keyof MetricReport;
  label: string;
  value: number;
  display: string;
}

export function compareRows(report: MetricReport): CompareRow[] {
  return METRIC_ORDER.map((key) => ({
    key,
    label: METRIC_LABELS[key],
    value: report[key],
    display: formatMetric(report[key]),
  }));
}
