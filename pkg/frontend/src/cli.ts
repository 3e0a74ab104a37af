#!/usr/bin/env node
/**
 * halolab-report <results.csv> [--out DIR]
 *
 * Reads a benchmark results CSV and writes scaling.svg, phases.svg and
 * summary.json.  Exits 0 on success, 1 when the report cannot be built,
 * 2 on usage errors.
 */

import { readFileSync } from "node:fs";
import { parseArgs } from "node:util";

import { buildReport, writeReport } from "./report.js";
import { SchemaError } from "./schema.js";

function main(argv: string[]): number {
  let positionals: string[];
  let values: { out?: string };
  try {
    ({ values, positionals } = parseArgs({
      args: argv,
      options: { out: { type: "string", default: "report" } },
      allowPositionals: true,
    }));
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 2;
  }
  if (positionals.length !== 1) {
    console.error("usage: halolab-report <results.csv> [--out DIR]");
    return 2;
  }
  let text: string;
  try {
    text = readFileSync(positionals[0], "utf8");
  } catch (err) {
    console.error(`cannot read ${positionals[0]}: ${(err as Error).message}`);
    return 2;
  }
  try {
    const report = buildReport(text);
    const written = writeReport(report, values.out ?? "report");
    for (const path of written) console.log(`wrote ${path}`);
    if (report.energy) {
      const e = report.energy;
      console.log(
        `energy: ${e.totalJoules.toFixed(1)} J ` +
          `(${e.totalKwh.toFixed(6)} kWh, ${e.gramsCo2.toFixed(1)} gCO2e, ` +
          `${e.epc6.toFixed(3)} J per 1e6 cellupdates)`,
      );
    }
    if (report.errors.length > 0) {
      console.error(`${report.errors.length} row(s) carry errors`);
      return 1;
    }
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`invalid results file: ${err.message}`);
    } else {
      console.error(`report failed: ${(err as Error).message}`);
    }
    return 1;
  }
}

process.exitCode = main(process.argv.slice(2));
