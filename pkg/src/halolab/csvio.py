"""Frozen CSV schema for benchmark results.

The header is a stability contract consumed by the report frontend; floats
are written with 6 significant digits, energy_j is empty when no power model
was supplied, and the error column is non-empty only for failed runs.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .bench import SweepRow

CSV_HEADER = (
    "run_id,ranks,threads,strategy,scheduling,path,nx,block,steps,rep,"
    "wall_s,cellupdates,mcups,t_compute,t_pack,t_localcopy,t_wait,t_unpack,"
    "t_serial,mem_bytes,state_hash,energy_j,error"
)

COLUMNS = CSV_HEADER.split(",")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def row_values(row: SweepRow) -> list[str]:
    m = row.metrics
    ph = m.phases
    return [
        row.run_id, str(m.ranks), str(m.threads), m.strategy, m.scheduling,
        m.path, str(m.nx), str(m.block), str(m.steps), str(row.rep),
        _fmt(m.wall_s), str(m.cellupdates), _fmt(m.mcups),
        _fmt(ph.compute), _fmt(ph.pack), _fmt(ph.localcopy), _fmt(ph.commwait),
        _fmt(ph.unpack), _fmt(ph.serial), str(m.mem_bytes), m.state_hash,
        "" if m.energy_j is None else _fmt(m.energy_j),
        m.error.replace("\n", " "),
    ]


def emit_csv(rows: list[SweepRow], path) -> None:
    """Write rows (possibly empty: header-only file) to path."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(COLUMNS)
        for row in rows:
            writer.writerow(row_values(row))


def csv_text(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow(row_values(row))
    return buf.getvalue()


def parse_csv(path) -> list[dict]:
    """Read a results file back; rejects files with a non-matching header."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != COLUMNS:
            raise ValueError(f"unexpected CSV header in {path}: {header}")
        out = []
        for raw in reader:
            rec = dict(zip(COLUMNS, raw))
            for key in ("ranks", "threads", "nx", "block", "steps", "rep",
                        "cellupdates", "mem_bytes"):
                rec[key] = int(rec[key])
            for key in ("wall_s", "mcups", "t_compute", "t_pack",
                        "t_localcopy", "t_wait", "t_unpack", "t_serial"):
                rec[key] = float(rec[key])
            rec["energy_j"] = float(rec["energy_j"]) if rec["energy_j"] else None
            out.append(rec)
        return out
