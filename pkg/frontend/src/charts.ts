import type { SensitivityReport } from "./types.js";

export interface Bar {
  label: string;
  value: number;
  /** bar length as a fraction of the chart height (layout only) */
  fraction: number;
}

export interface BarChart {
  title: string;
  bars: Bar[];
}

/** Layout-scale the bars; the displayed values stay the raw report fields. */
export function barChart(title: string, labels: string[],
                         values: number[]): BarChart {
  const top = Math.max(...values.map((v) => Math.abs(v)), 1e-12);
  return {
    title,
    bars: labels.map((label, i) => ({
      label,
      value: values[i],
      fraction: Math.max(Math.abs(values[i]) / top, 0),
    })),
  };
}

export function chartsForReport(report: SensitivityReport): BarChart[] {
  if (report.first_order === null || report.total_effect === null) {
    return [];
  }
  return [
    barChart(`First-order indices (${report.surrogate})`, report.factors,
             report.first_order),
    barChart(`Total-effect indices (${report.surrogate})`, report.factors,
             report.total_effect),
  ];
}

export function chartSvg(chart: BarChart, width = 420, height = 220): string {
  const margin = { top: 28, bottom: 46, left: 10, right: 10 };
  const innerW = width - margin.left - margin.right;
  const innerH = height - margin.top - margin.bottom;
  const slot = innerW / Math.max(chart.bars.length, 1);
  const barW = slot * 0.6;
  const parts: string[] = [];
  parts.push(
    `<svg class="bar-chart" viewBox="0 0 ${width} ${height}" role="img" ` +
    `aria-label="${escapeXml(chart.title)}">`,
  );
  parts.push(
    `<text x="${width / 2}" y="16" text-anchor="middle" class="chart-title">` +
    `${escapeXml(chart.title)}</text>`,
  );
  chart.bars.forEach((bar, i) => {
    const h = Math.max(innerH * bar.fraction, 1);
    const x = margin.left + i * slot + (slot - barW) / 2;
    const y = margin.top + innerH - h;
    parts.push(
      `<rect class="bar" data-factor="${escapeXml(bar.label)}" x="${x.toFixed(1)}" ` +
      `y="${y.toFixed(1)}" width="${barW.toFixed(1)}" height="${h.toFixed(1)}"/>`,
    );
    parts.push(
      `<text class="bar-value" x="${(x + barW / 2).toFixed(1)}" ` +
      `y="${(y - 4).toFixed(1)}" text-anchor="middle">${bar.value.toFixed(3)}</text>`,
    );
    parts.push(
      `<text class="bar-label" x="${(x + barW / 2).toFixed(1)}" ` +
      `y="${height - 30}" text-anchor="middle" transform="rotate(30 ` +
      `${(x + barW / 2).toFixed(1)} ${height - 30})">${escapeXml(bar.label)}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("");
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
