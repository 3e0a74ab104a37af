/**
 * Frozen benchmark CSV schema.
 *
 * The header below is the external contract with the benchmark engine; any
 * input whose header differs byte-for-byte is rejected.
 */

import Papa from "papaparse";

export const CSV_HEADER =
  "run_id,ranks,threads,strategy,scheduling,path,nx,block,steps,rep," +
  "wall_s,cellupdates,mcups,t_compute,t_pack,t_localcopy,t_wait,t_unpack," +
  "t_serial,mem_bytes,state_hash,energy_j,error";

export const COLUMNS = CSV_HEADER.split(",");

export interface ResultRow {
  run_id: string;
  ranks: number;
  threads: number;
  strategy: string;
  scheduling: string;
  path: string;
  nx: number;
  block: number;
  steps: number;
  rep: number;
  wall_s: number;
  cellupdates: number;
  mcups: number;
  t_compute: number;
  t_pack: number;
  t_localcopy: number;
  t_wait: number;
  t_unpack: number;
  t_serial: number;
  mem_bytes: number;
  state_hash: string;
  energy_j: number | null;
  error: string;
}

const INT_COLUMNS = [
  "ranks", "threads", "nx", "block", "steps", "rep", "cellupdates",
  "mem_bytes",
] as const;

const FLOAT_COLUMNS = [
  "wall_s", "mcups", "t_compute", "t_pack", "t_localcopy", "t_wait",
  "t_unpack", "t_serial",
] as const;

export class SchemaError extends Error {}

function toInt(name: string, value: string, line: number): number {
  if (!/^-?\d+$/.test(value)) {
    throw new SchemaError(`line ${line}: ${name} is not an integer: "${value}"`);
  }
  return parseInt(value, 10);
}

function toFloat(name: string, value: string, line: number): number {
  const out = Number(value);
  if (value === "" || Number.isNaN(out)) {
    throw new SchemaError(`line ${line}: ${name} is not a number: "${value}"`);
  }
  return out;
}

/** Parse benchmark CSV text, enforcing the frozen header and field types. */
export function parseResults(text: string): ResultRow[] {
  const normalized = text.replace(/\r\n?/g, "\n").trim();
  const parsed = Papa.parse<string[]>(normalized, { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    throw new SchemaError(`CSV parse error: ${parsed.errors[0].message}`);
  }
  const records = parsed.data;
  if (records.length === 0 || records[0].join(",") !== CSV_HEADER) {
    throw new SchemaError(
      `unexpected header: "${records[0]?.join(",") ?? "<empty>"}"`,
    );
  }
  const rows: ResultRow[] = [];
  for (let i = 1; i < records.length; i++) {
    const rec = records[i];
    if (rec.length !== COLUMNS.length) {
      throw new SchemaError(
        `line ${i + 1}: expected ${COLUMNS.length} fields, got ${rec.length}`,
      );
    }
    const byName: Record<string, string> = {};
    COLUMNS.forEach((c, j) => (byName[c] = rec[j]));
    const row: Partial<ResultRow> = {
      run_id: byName.run_id,
      strategy: byName.strategy,
      scheduling: byName.scheduling,
      path: byName.path,
      state_hash: byName.state_hash,
      error: byName.error,
      energy_j: byName.energy_j === "" ? null
        : toFloat("energy_j", byName.energy_j, i + 1),
    };
    for (const c of INT_COLUMNS) row[c] = toInt(c, byName[c], i + 1);
    for (const c of FLOAT_COLUMNS) row[c] = toFloat(c, byName[c], i + 1);
    if (!/^[0-9a-f]{64}$/.test(row.state_hash!) && row.error === "") {
      throw new SchemaError(`line ${i + 1}: malformed state hash`);
    }
    rows.push(row as ResultRow);
  }
  return rows;
}

/** Configuration identity of a row: everything except rep and measurements. */
export function configKey(row: ResultRow): string {
  return [
    row.ranks, row.threads, row.strategy, row.scheduling, row.path, row.nx,
    row.block, row.steps,
  ].join("/");
}
