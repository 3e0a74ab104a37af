import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { CSV_HEADER, SchemaError, configKey, parseResults }
  from "../src/schema.js";

const FIXTURE = readFileSync(
  join(__dirname, "fixtures", "sweep.csv"), "utf8");

describe("frozen header", () => {
  it("matches the engine contract byte for byte", () => {
    expect(CSV_HEADER).toBe(
      "run_id,ranks,threads,strategy,scheduling,path,nx,block,steps,rep," +
        "wall_s,cellupdates,mcups,t_compute,t_pack,t_localcopy,t_wait," +
        "t_unpack,t_serial,mem_bytes,state_hash,energy_j,error",
    );
  });

  it("rejects a foreign header", () => {
    expect(() => parseResults("a,b,c\n1,2,3\n")).toThrow(SchemaError);
  });

  it("rejects a reordered header", () => {
    const lines = FIXTURE.split("\n");
    const cols = lines[0].split(",");
    [cols[0], cols[1]] = [cols[1], cols[0]];
    expect(() => parseResults([cols.join(","), ...lines.slice(1)].join("\n")))
      .toThrow(SchemaError);
  });
});

describe("parseResults", () => {
  it("parses the fixture produced by the engine CLI", () => {
    const rows = parseResults(FIXTURE);
    expect(rows.length).toBe(3 * 2 * 3); // configs x strategies x reps
    const first = rows[0];
    expect(first.ranks).toBe(1);
    expect(first.nx).toBe(16);
    expect(first.block).toBe(8);
    expect(first.wall_s).toBeGreaterThan(0);
    expect(first.cellupdates).toBe(16 * 16 * 16 * 3 * 2);
    expect(first.state_hash).toMatch(/^[0-9a-f]{64}$/);
    expect(first.energy_j).toBeGreaterThan(0);
    expect(first.error).toBe("");
  });

  it("all repetitions of one sweep share a single state hash", () => {
    const hashes = new Set(parseResults(FIXTURE).map((r) => r.state_hash));
    expect(hashes.size).toBe(1);
  });

  it("rejects rows with the wrong field count", () => {
    expect(() => parseResults(CSV_HEADER + "\nonly,three,fields\n"))
      .toThrow(/expected 23 fields/);
  });

  it("rejects non-numeric measurements", () => {
    const row = FIXTURE.split("\n")[1].replace(/^([^,]*,)1/, "$1x");
    expect(() => parseResults(CSV_HEADER + "\n" + row)).toThrow(SchemaError);
  });

  it("treats an empty energy column as null", () => {
    const fields = FIXTURE.split("\n")[1].split(",");
    fields[21] = "";
    const rows = parseResults(CSV_HEADER + "\n" + fields.join(","));
    expect(rows[0].energy_j).toBeNull();
  });

  it("handles quoted error fields containing commas", () => {
    const fields = FIXTURE.split("\n")[1].split(",");
    fields[22] = '"boom, with comma"';
    const rows = parseResults(CSV_HEADER + "\n" + fields.join(","));
    expect(rows[0].error).toBe("boom, with comma");
  });
});

describe("configKey", () => {
  it("separates configurations but not repetitions", () => {
    const rows = parseResults(FIXTURE);
    const keys = new Set(rows.map(configKey));
    expect(keys.size).toBe(3 * 2);
  });
});
