import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { parseResults } from "../src/schema.js";
import { PHASE_COLUMNS, energySummary, median, phaseFractions,
  scalingCurve, summarize } from "../src/stats.js";

const ROWS = parseResults(
  readFileSync(join(__dirname, "fixtures", "sweep.csv"), "utf8"));

describe("median", () => {
  it("handles odd and even lengths", () => {
    expect(median([3, 1, 2])).toBe(2);
    expect(median([4, 1, 2, 3])).toBe(2.5);
    expect(median([7])).toBe(7);
  });

  it("rejects an empty list", () => {
    expect(() => median([])).toThrow();
  });
});

describe("summarize", () => {
  it("collapses repetitions per configuration", () => {
    const summaries = summarize(ROWS);
    expect(summaries.length).toBe(6);
    for (const s of summaries) {
      expect(s.reps).toBe(3);
      expect(s.medianWall).toBeGreaterThan(0);
      expect(s.cores).toBe(s.ranks * s.threads);
    }
  });

  it("drops failed rows before aggregating", () => {
    const broken = [...ROWS];
    broken[0] = { ...broken[0], error: "synthetic failure" };
    const summaries = summarize(broken);
    const touched = summaries.find(
      (s) => s.ranks === broken[0].ranks
        && s.strategy === broken[0].strategy);
    expect(touched?.reps).toBe(2);
  });
});

describe("scalingCurve", () => {
  it("is anchored at speedup 1 with efficiency 1", () => {
    const fused = summarize(ROWS).filter((s) => s.strategy === "fused");
    const curve = scalingCurve(fused);
    expect(curve[0].speedup).toBe(1);
    expect(curve[0].efficiency).toBe(1);
    expect(curve.map((p) => p.cores)).toEqual([1, 2, 4]);
  });

  it("computes efficiency as speedup over core ratio", () => {
    const curve = scalingCurve(summarize(ROWS)
      .filter((s) => s.strategy === "split_overlap"));
    for (const p of curve) {
      expect(p.efficiency).toBeCloseTo(p.speedup / p.cores, 12);
    }
  });
});

describe("phaseFractions", () => {
  it("partitions to exactly 1 within 1e-9", () => {
    for (const s of summarize(ROWS)) {
      const f = phaseFractions(s);
      let total = 0;
      for (const col of PHASE_COLUMNS) {
        expect(f[col]).toBeGreaterThanOrEqual(0);
        total += f[col];
      }
      expect(Math.abs(total - 1)).toBeLessThan(1e-9);
    }
  });
});

describe("energySummary", () => {
  it("matches the engine's accounting identities to 1e-9", () => {
    const e = energySummary(ROWS);
    let joules = 0;
    let updates = 0;
    for (const r of ROWS) {
      joules += r.energy_j!;
      updates += r.cellupdates;
    }
    expect(Math.abs(e.totalJoules - joules)).toBeLessThan(1e-9);
    expect(Math.abs(e.totalKwh - joules / 3.6e6)).toBeLessThan(1e-9);
    expect(Math.abs(e.gramsCo2 - (joules / 3.6e6) * 275.0))
      .toBeLessThan(1e-9);
    expect(Math.abs(e.epc6 - joules / (updates / 1e6))).toBeLessThan(1e-9);
  });

  it("reproduces the published reference figures exactly", () => {
    // 384 kWh at 275 g/kWh is 105600 g; 307400 J over 5.3e9 updates is 58
    expect(384.0 * 275.0).toBe(105600.0);
    expect(Math.abs(307400.0 / (5.3e9 / 1e6) - 58.0)).toBeLessThan(1e-9);
  });

  it("refuses rows without energy figures", () => {
    const stripped = ROWS.map((r) => ({ ...r, energy_j: null }));
    expect(() => energySummary(stripped)).toThrow();
  });
});
