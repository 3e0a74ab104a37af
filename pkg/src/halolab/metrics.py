"""Phase timers, cellupdate accounting and energy/carbon conversions.

A cellupdate is one cell advanced by one temporal sub-step; with the
two-stage integrator each step counts twice per interior cell.  Energy and
CO2-equivalent figures are pure arithmetic on a user-supplied power model
(defaults: 277 W per node, 275 gCO2e/kWh).
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field, fields


class MetricsError(ValueError):
    """Invalid metrics input (e.g. zero cellupdates)."""


PHASES = ("compute", "pack", "localcopy", "commwait", "unpack", "serial")


@dataclass
class PhaseTimes:
    """Accumulated wall seconds per engine phase for one rank."""

    compute: float = 0.0
    pack: float = 0.0
    localcopy: float = 0.0
    commwait: float = 0.0
    unpack: float = 0.0
    serial: float = 0.0

    def add(self, name: str, seconds: float) -> None:
        if seconds < 0.0:
            raise MetricsError(f"negative phase time {seconds} for {name}")
        setattr(self, name, getattr(self, name) + seconds)

    def total(self) -> float:
        return sum(getattr(self, f.name) for f in fields(self))

    def merged(self, other: "PhaseTimes") -> "PhaseTimes":
        out = PhaseTimes()
        for f in fields(self):
            setattr(out, f.name, getattr(self, f.name) + getattr(other, f.name))
        return out

    def scaled(self, factor: float) -> "PhaseTimes":
        out = PhaseTimes()
        for f in fields(self):
            setattr(out, f.name, getattr(self, f.name) * factor)
        return out


@contextmanager
def phase(times: PhaseTimes, name: str):
    """Scoped monotonic timing accrued to one phase accumulator."""
    t0 = time.perf_counter()
    try:
        yield
    finally:
        times.add(name, time.perf_counter() - t0)


@dataclass(frozen=True)
class EnergyModel:
    node_power_w: float = 277.0
    nodes: int = 1
    carbon_intensity_g_per_kwh: float = 275.0

    def __post_init__(self):
        if self.node_power_w <= 0 or self.nodes <= 0 \
                or self.carbon_intensity_g_per_kwh <= 0:
            raise MetricsError(f"energy model parameters must be positive: {self}")


@dataclass
class RunMetrics:
    """One run's configuration echo, timings and derived figures."""

    ranks: int
    threads: int
    strategy: str
    scheduling: str
    path: str
    nx: int
    block: int
    steps: int
    wall_s: float
    cellupdates: int
    phases: PhaseTimes = field(default_factory=PhaseTimes)
    mem_bytes: int = 0
    state_hash: str = ""
    energy_j: float | None = None
    error: str = ""

    @property
    def mcups(self) -> float:
        """Cellupdate rate in units of 1e6 updates per second."""
        if self.wall_s <= 0.0:
            return 0.0
        return self.cellupdates / self.wall_s / 1e6


def cellupdates(interior_cells: int, steps: int, substeps: int = 2) -> int:
    if interior_cells < 0 or steps < 0 or substeps < 0:
        raise MetricsError("cellupdate factors must be non-negative")
    return interior_cells * steps * substeps


def energy_to_solution(model: EnergyModel, wall_s: float) -> float:
    """Joules consumed: node power x nodes x wall seconds."""
    if wall_s < 0.0:
        raise MetricsError(f"wall_s must be >= 0, got {wall_s}")
    return model.node_power_w * model.nodes * wall_s


def epc6(energy_j: float, n_cellupdates: int) -> float:
    """Energy per million cellupdates (J / 1e6 updates)."""
    if n_cellupdates <= 0:
        raise MetricsError("cellupdates must be positive for epc6")
    return energy_j / (n_cellupdates / 1e6)


def co2_equivalent(energy_kwh: float, intensity_g_per_kwh: float) -> float:
    """Grams CO2-equivalent for an energy amount in kWh."""
    if energy_kwh < 0.0 or intensity_g_per_kwh < 0.0:
        raise MetricsError("energy and intensity must be non-negative")
    return energy_kwh * intensity_g_per_kwh


def joules_to_kwh(energy_j: float) -> float:
    return energy_j / 3.6e6


def speedup_efficiency(t_ref: float, cores_ref: int, t: float,
                       cores: int) -> tuple[float, float]:
    if min(t_ref, t) <= 0 or min(cores_ref, cores) <= 0:
        raise MetricsError("times and core counts must be positive")
    speedup = t_ref / t
    efficiency = speedup / (cores / cores_ref)
    return speedup, efficiency


def comm_fraction(times: PhaseTimes) -> float:
    """(CommWait + Pack + Unpack + LocalCopy) / total phase time."""
    total = times.total()
    if total <= 0.0:
        raise MetricsError("comm_fraction undefined for all-zero phases")
    comm = times.commwait + times.pack + times.unpack + times.localcopy
    return comm / total
