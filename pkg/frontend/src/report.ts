/**
 * Report assembly: parse a results CSV, aggregate it, and write the SVG
 * figures plus a machine-readable summary.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { phaseFigure, scalingFigure } from "./figures.js";
import { ResultRow, parseResults } from "./schema.js";
import { ConfigSummary, EnergySummary, energySummary, scalingCurve,
  summarize } from "./stats.js";

export interface Report {
  rows: ResultRow[];
  summaries: ConfigSummary[];
  energy: EnergySummary | null;
  errors: ResultRow[];
  scalingSvg: string;
  phaseSvg: string;
}

export function buildReport(csvText: string): Report {
  const rows = parseResults(csvText);
  if (rows.length === 0) {
    throw new Error("results file contains no data rows");
  }
  const summaries = summarize(rows);
  const hasEnergy = rows.some((r) => r.energy_j !== null && r.error === "");
  return {
    rows,
    summaries,
    energy: hasEnergy ? energySummary(rows) : null,
    errors: rows.filter((r) => r.error !== ""),
    scalingSvg: scalingFigure(summaries),
    phaseSvg: phaseFigure(summaries),
  };
}

export function summaryJson(report: Report): string {
  const bySeries = new Map<string, ConfigSummary[]>();
  for (const s of report.summaries) {
    const label = `${s.strategy}/${s.scheduling}/${s.path}`;
    const list = bySeries.get(label);
    if (list) list.push(s);
    else bySeries.set(label, [s]);
  }
  const scaling: Record<string, unknown[]> = {};
  for (const [label, series] of bySeries) {
    scaling[label] = scalingCurve(series).map((p) => ({
      cores: p.cores,
      wall_s: p.wall,
      speedup: p.speedup,
      efficiency: p.efficiency,
    }));
  }
  return JSON.stringify(
    {
      configurations: report.summaries.map((s) => ({
        key: s.key,
        cores: s.cores,
        reps: s.reps,
        median_wall_s: s.medianWall,
        median_mcups: s.medianMcups,
        mem_bytes: s.memBytes,
        energy_j: s.energyJ,
      })),
      scaling,
      energy: report.energy,
      failed_rows: report.errors.map((r) => ({
        run_id: r.run_id,
        rep: r.rep,
        error: r.error,
      })),
    },
    null,
    2,
  );
}

/** Write scaling.svg, phases.svg and summary.json into outDir. */
export function writeReport(report: Report, outDir: string): string[] {
  mkdirSync(outDir, { recursive: true });
  const written = [
    ["scaling.svg", report.scalingSvg],
    ["phases.svg", report.phaseSvg],
    ["summary.json", summaryJson(report)],
  ].map(([name, content]) => {
    const path = join(outDir, name);
    writeFileSync(path, content + "\n");
    return path;
  });
  return written;
}
