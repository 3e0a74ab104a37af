/**
 * Deterministic SVG figures: a log-log scaling plot and stacked
 * phase-fraction bars.  Plain string assembly keeps the output stable and
 * easy to assert on in tests.
 */

import { ConfigSummary, PHASE_COLUMNS, PhaseColumn, ScalingPoint,
  phaseFractions, scalingCurve } from "./stats.js";

const WIDTH = 760;
const HEIGHT = 420;
const MARGIN = { top: 30, right: 170, bottom: 55, left: 70 };

const SERIES_COLORS = [
  "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

const PHASE_COLORS: Record<PhaseColumn, string> = {
  t_compute: "#4c78a8",
  t_pack: "#f58518",
  t_localcopy: "#e45756",
  t_wait: "#72b7b2",
  t_unpack: "#54a24b",
  t_serial: "#b8b0ac",
};

const PHASE_LABELS: Record<PhaseColumn, string> = {
  t_compute: "compute",
  t_pack: "pack",
  t_localcopy: "local copy",
  t_wait: "comm wait",
  t_unpack: "unpack",
  t_serial: "serial",
};

function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function seriesLabel(s: ConfigSummary): string {
  const strategy = s.strategy === "split_overlap" ? "split-overlap" : s.strategy;
  return `${strategy} / ${s.scheduling} / ${s.path}`;
}

function groupBySeries(summaries: ConfigSummary[]): Map<string, ConfigSummary[]> {
  const out = new Map<string, ConfigSummary[]>();
  for (const s of summaries) {
    const label = seriesLabel(s);
    const list = out.get(label);
    if (list) list.push(s);
    else out.set(label, [s]);
  }
  return out;
}

/** Log-log speedup-vs-cores plot with the ideal-scaling diagonal. */
export function scalingFigure(summaries: ConfigSummary[]): string {
  const bySeries = groupBySeries(summaries);
  const curves = new Map<string, ScalingPoint[]>();
  let maxCores = 1;
  let maxSpeedup = 1;
  for (const [label, series] of bySeries) {
    const curve = scalingCurve(series);
    curves.set(label, curve);
    for (const p of curve) {
      maxCores = Math.max(maxCores, p.cores);
      maxSpeedup = Math.max(maxSpeedup, p.speedup);
    }
  }
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const minCores = Math.min(
    ...[...curves.values()].flat().map((p) => p.cores), 1);
  const logSpan = Math.max(Math.log2(maxCores / minCores), 1);
  const ySpan = Math.max(Math.log2(Math.max(maxSpeedup, maxCores / minCores)), 1);
  const x = (cores: number) =>
    MARGIN.left + (Math.log2(cores / minCores) / logSpan) * plotW;
  const y = (speedup: number) =>
    MARGIN.top + plotH - (Math.log2(Math.max(speedup, 1e-3)) / ySpan) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
      `height="${HEIGHT}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(
    `<text x="${MARGIN.left}" y="18" font-size="14">` +
      `Strong-scaling speedup (log-log)</text>`,
  );
  // axes
  parts.push(
    `<line x1="${MARGIN.left}" y1="${MARGIN.top + plotH}" ` +
      `x2="${MARGIN.left + plotW}" y2="${MARGIN.top + plotH}" stroke="#333"/>`,
    `<line x1="${MARGIN.left}" y1="${MARGIN.top}" x2="${MARGIN.left}" ` +
      `y2="${MARGIN.top + plotH}" stroke="#333"/>`,
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 12}" ` +
      `text-anchor="middle">cores (ranks x threads)</text>`,
    `<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">speedup</text>`,
  );
  // ideal scaling reference
  parts.push(
    `<line x1="${x(minCores)}" y1="${y(1)}" x2="${x(maxCores)}" ` +
      `y2="${y(maxCores / minCores)}" stroke="#999" stroke-dasharray="5,4" ` +
      `class="ideal"/>`,
    `<text x="${x(maxCores) + 4}" y="${y(maxCores / minCores)}" ` +
      `fill="#999">ideal</text>`,
  );
  // tick marks at powers of two
  for (let c = minCores; c <= maxCores; c *= 2) {
    parts.push(
      `<text x="${x(c)}" y="${MARGIN.top + plotH + 16}" ` +
        `text-anchor="middle">${c}</text>`,
    );
  }
  let colorIdx = 0;
  for (const [label, curve] of curves) {
    const color = SERIES_COLORS[colorIdx % SERIES_COLORS.length];
    const pts = curve
      .map((p) => `${x(p.cores).toFixed(2)},${y(p.speedup).toFixed(2)}`)
      .join(" ");
    parts.push(
      `<polyline points="${pts}" fill="none" stroke="${color}" ` +
        `stroke-width="2" class="series"/>`,
    );
    for (const p of curve) {
      parts.push(
        `<circle cx="${x(p.cores).toFixed(2)}" cy="${y(p.speedup).toFixed(2)}" ` +
          `r="3.5" fill="${color}">` +
          `<title>${esc(label)}: ${p.cores} cores, speedup ` +
          `${p.speedup.toFixed(3)}, efficiency ${p.efficiency.toFixed(3)}` +
          `</title></circle>`,
      );
    }
    const ly = MARGIN.top + 14 * colorIdx;
    parts.push(
      `<rect x="${WIDTH - MARGIN.right + 8}" y="${ly}" width="10" ` +
        `height="10" fill="${color}"/>`,
      `<text x="${WIDTH - MARGIN.right + 22}" y="${ly + 9}">` +
        `${esc(label)}</text>`,
    );
    colorIdx += 1;
  }
  parts.push("</svg>");
  return parts.join("\n");
}

/** One stacked bar of phase fractions per configuration. */
export function phaseFigure(summaries: ConfigSummary[]): string {
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const n = summaries.length;
  const slot = plotW / Math.max(n, 1);
  const barW = Math.min(slot * 0.7, 60);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" ` +
      `height="${HEIGHT}" font-family="sans-serif" font-size="11">`,
    `<text x="${MARGIN.left}" y="18" font-size="14">` +
      `Phase-time fractions per configuration</text>`,
    `<line x1="${MARGIN.left}" y1="${MARGIN.top + plotH}" ` +
      `x2="${MARGIN.left + plotW}" y2="${MARGIN.top + plotH}" stroke="#333"/>`,
  );
  summaries.forEach((s, i) => {
    const fractions = phaseFractions(s);
    const x0 = MARGIN.left + i * slot + (slot - barW) / 2;
    let yTop = MARGIN.top;
    for (const col of PHASE_COLUMNS) {
      const h = fractions[col] * plotH;
      parts.push(
        `<rect x="${x0.toFixed(2)}" y="${yTop.toFixed(2)}" ` +
          `width="${barW.toFixed(2)}" height="${h.toFixed(2)}" ` +
          `fill="${PHASE_COLORS[col]}" class="phase-${col}">` +
          `<title>${esc(s.key)} ${PHASE_LABELS[col]}: ` +
          `${(fractions[col] * 100).toFixed(2)}%</title></rect>`,
      );
      yTop += h;
    }
    const label = `${s.ranks}x${s.threads} ${s.strategy === "split_overlap"
      ? "split" : s.strategy}`;
    const cx = x0 + barW / 2;
    parts.push(
      `<text x="${cx.toFixed(2)}" y="${MARGIN.top + plotH + 14}" ` +
        `text-anchor="middle">${esc(label)}</text>`,
      `<text x="${cx.toFixed(2)}" y="${MARGIN.top + plotH + 28}" ` +
        `text-anchor="middle" fill="#666">` +
        `${(s.memBytes / 1048576).toFixed(1)} MiB</text>`,
    );
  });
  PHASE_COLUMNS.forEach((col, i) => {
    const ly = MARGIN.top + 16 * i;
    parts.push(
      `<rect x="${WIDTH - MARGIN.right + 8}" y="${ly}" width="10" ` +
        `height="10" fill="${PHASE_COLORS[col]}"/>`,
      `<text x="${WIDTH - MARGIN.right + 22}" y="${ly + 9}">` +
        `${PHASE_LABELS[col]}</text>`,
    );
  });
  parts.push("</svg>");
  return parts.join("\n");
}
