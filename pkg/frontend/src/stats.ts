/**
 * Aggregation over parsed benchmark rows: per-configuration medians,
 * scaling curves, phase-time fractions and the energy summary.
 */

import { ResultRow, configKey } from "./schema.js";

export const PHASE_COLUMNS = [
  "t_compute", "t_pack", "t_localcopy", "t_wait", "t_unpack", "t_serial",
] as const;

export type PhaseColumn = (typeof PHASE_COLUMNS)[number];

export interface ConfigSummary {
  key: string;
  ranks: number;
  threads: number;
  cores: number;
  strategy: string;
  scheduling: string;
  path: string;
  nx: number;
  block: number;
  steps: number;
  reps: number;
  medianWall: number;
  medianMcups: number;
  /** median phase seconds, keyed by CSV column */
  phases: Record<PhaseColumn, number>;
  memBytes: number;
  energyJ: number | null;
}

export interface ScalingPoint {
  cores: number;
  wall: number;
  speedup: number;
  efficiency: number;
}

export interface EnergySummary {
  totalJoules: number;
  totalKwh: number;
  gramsCo2: number;
  epc6: number;
  totalCellupdates: number;
}

export function median(values: number[]): number {
  if (values.length === 0) throw new Error("median of empty list");
  const s = [...values].sort((a, b) => a - b);
  const mid = Math.floor(s.length / 2);
  return s.length % 2 === 1 ? s[mid] : 0.5 * (s[mid - 1] + s[mid]);
}

/** Collapse repetitions: one summary per distinct configuration. */
export function summarize(rows: ResultRow[]): ConfigSummary[] {
  const clean = rows.filter((r) => r.error === "");
  const groups = new Map<string, ResultRow[]>();
  for (const row of clean) {
    const key = configKey(row);
    const list = groups.get(key);
    if (list) list.push(row);
    else groups.set(key, [row]);
  }
  const out: ConfigSummary[] = [];
  for (const [key, group] of groups) {
    const first = group[0];
    const phases = {} as Record<PhaseColumn, number>;
    for (const col of PHASE_COLUMNS) {
      phases[col] = median(group.map((r) => r[col]));
    }
    const energies = group
      .map((r) => r.energy_j)
      .filter((e): e is number => e !== null);
    out.push({
      key,
      ranks: first.ranks,
      threads: first.threads,
      cores: first.ranks * first.threads,
      strategy: first.strategy,
      scheduling: first.scheduling,
      path: first.path,
      nx: first.nx,
      block: first.block,
      steps: first.steps,
      reps: group.length,
      medianWall: median(group.map((r) => r.wall_s)),
      medianMcups: median(group.map((r) => r.mcups)),
      phases,
      memBytes: first.mem_bytes,
      energyJ: energies.length > 0 ? median(energies) : null,
    });
  }
  out.sort((a, b) => a.cores - b.cores || a.key.localeCompare(b.key));
  return out;
}

/**
 * Scaling curve for one strategy/scheduling/path series, with speedup and
 * parallel efficiency relative to the smallest core count in the series.
 */
export function scalingCurve(series: ConfigSummary[]): ScalingPoint[] {
  if (series.length === 0) return [];
  const sorted = [...series].sort((a, b) => a.cores - b.cores);
  const ref = sorted[0];
  return sorted.map((s) => {
    const speedup = ref.medianWall / s.medianWall;
    return {
      cores: s.cores,
      wall: s.medianWall,
      speedup,
      efficiency: speedup / (s.cores / ref.cores),
    };
  });
}

/** Phase fractions of one configuration; they always sum to exactly 1. */
export function phaseFractions(
  summary: ConfigSummary,
): Record<PhaseColumn, number> {
  let total = 0;
  for (const col of PHASE_COLUMNS) total += summary.phases[col];
  if (total <= 0) throw new Error(`no phase time recorded for ${summary.key}`);
  const out = {} as Record<PhaseColumn, number>;
  let acc = 0;
  for (const col of PHASE_COLUMNS.slice(0, -1)) {
    out[col] = summary.phases[col] / total;
    acc += out[col];
  }
  // close the partition exactly so the fractions sum to 1 bit-for-bit
  out[PHASE_COLUMNS[PHASE_COLUMNS.length - 1]] = 1 - acc;
  return out;
}

const JOULES_PER_KWH = 3.6e6;

/** Aggregate energy accounting over all rows that carry an energy figure. */
export function energySummary(
  rows: ResultRow[],
  gramsPerKwh = 275.0,
): EnergySummary {
  const withEnergy = rows.filter(
    (r) => r.error === "" && r.energy_j !== null,
  );
  if (withEnergy.length === 0) {
    throw new Error("no rows carry an energy figure");
  }
  let totalJoules = 0;
  let totalCellupdates = 0;
  for (const row of withEnergy) {
    totalJoules += row.energy_j!;
    totalCellupdates += row.cellupdates;
  }
  const totalKwh = totalJoules / JOULES_PER_KWH;
  return {
    totalJoules,
    totalKwh,
    gramsCo2: totalKwh * gramsPerKwh,
    epc6: totalJoules / (totalCellupdates / 1e6),
    totalCellupdates,
  };
}
