"""Anneal-schedule energy tables and the h-gain sweep waveform.

The transverse/longitudinal energy scales A(s) and B(s) are tabulated per
emulated device and interpolated piecewise-linearly. The protocol waveform is a
pause at s* plus a closed field-multiplier cycle g: max -> -max -> max. Time is
metadata only: the samplers are quasistatic, so discrete field steps drive the
simulation and the wall-clock anneal time is recorded but never integrated.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from importlib import resources

import numpy as np

__all__ = [
    "ScheduleError",
    "EnergyTable",
    "SweepPattern",
    "ProtocolWaveform",
    "DeviceProfile",
    "DEVICE_PROFILES",
    "interpolate",
    "gamma_over_j",
    "pause_for_ratio",
    "build_sweep",
    "load_energy_table",
    "dump_energy_table",
    "synthetic_energy_table",
]


class ScheduleError(ValueError):
    """Invalid schedule table, waveform, or query."""


@dataclass(frozen=True)
class EnergyTable:
    """Tabulated (s, A, B) rows in GHz with strictly increasing s.

    A must be non-increasing and B non-decreasing over the tabulated range;
    both are non-negative.
    """

    s: np.ndarray
    a: np.ndarray
    b: np.ndarray
    name: str = "unnamed"

    def __post_init__(self):
        s = np.ascontiguousarray(np.asarray(self.s, dtype=np.float64))
        a = np.ascontiguousarray(np.asarray(self.a, dtype=np.float64))
        b = np.ascontiguousarray(np.asarray(self.b, dtype=np.float64))
        if s.ndim != 1 or s.size < 2 or a.shape != s.shape or b.shape != s.shape:
            raise ScheduleError("table needs >= 2 rows of matching (s, A, B)")
        if np.any(np.diff(s) <= 0):
            raise ScheduleError("s column must be strictly increasing")
        if np.any(a < 0) or np.any(b < 0):
            raise ScheduleError("A and B must be non-negative")
        if np.any(np.diff(a) > 0):
            raise ScheduleError("A(s) must be non-increasing")
        if np.any(np.diff(b) < 0):
            raise ScheduleError("B(s) must be non-decreasing")
        for name, arr in (("s", s), ("a", a), ("b", b)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def s_range(self) -> tuple[float, float]:
        return float(self.s[0]), float(self.s[-1])


class SweepPattern(str, Enum):
    UP_DOWN_UP = "up-down-up"      # start at +h_max, sweep to -h_max and back
    DOWN_UP_DOWN = "down-up-down"  # mirrored


@dataclass(frozen=True)
class ProtocolWaveform:
    """Pause point plus the closed h-gain step sequence.

    steps traverses one full cycle (first and last values equal); every step is
    bounded by the device envelope h_gain_max. total_time_us is metadata carried
    into run records for fidelity with the analog protocol.
    """

    s_pause: float
    steps: np.ndarray
    h_gain_max: float
    pattern: SweepPattern = SweepPattern.UP_DOWN_UP
    total_time_us: float = 11.2

    def __post_init__(self):
        steps = np.ascontiguousarray(np.asarray(self.steps, dtype=np.float64))
        if not 0.0 < self.s_pause < 1.0:
            raise ScheduleError(f"s_pause must lie in (0, 1), got {self.s_pause}")
        if steps.ndim != 1 or steps.size < 3:
            raise ScheduleError("waveform needs at least 3 steps")
        if self.h_gain_max <= 0:
            raise ScheduleError("h_gain_max must be positive")
        if np.max(np.abs(steps)) > self.h_gain_max + 1e-12:
            raise ScheduleError(
                f"|g| exceeds envelope {self.h_gain_max}: max {np.max(np.abs(steps))}"
            )
        if steps[0] != steps[-1]:
            raise ScheduleError("cycle must close: first and last g must be equal")
        steps.setflags(write=False)
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "pattern", SweepPattern(self.pattern))

    @property
    def n_steps(self) -> int:
        return self.steps.size


@dataclass(frozen=True)
class DeviceProfile:
    """Published hardware envelope used for waveform validation."""

    name: str
    graph: str
    qubits: int
    couplers: int
    h_gain_limit: float


DEVICE_PROFILES = {
    p.name: p
    for p in (
        DeviceProfile("Advantage_system4.1", "Pegasus P16", 5627, 40279, 1.75),
        DeviceProfile("Advantage_system6.4", "Pegasus P16", 5612, 40088, 4.0),
        DeviceProfile("Advantage_system7.1", "Pegasus P16", 5554, 39238, 3.5),
        DeviceProfile("Advantage2_prototype2.6", "Zephyr Z6,4", 1248, 10827, 3.0),
    )
}


def interpolate(table: EnergyTable, s: float) -> tuple[float, float]:
    """Piecewise-linear (A(s), B(s)); exact at knots, error outside the range."""
    lo, hi = table.s_range
    if not lo <= s <= hi:
        raise ScheduleError(f"s={s} outside tabulated range [{lo}, {hi}]")
    return float(np.interp(s, table.s, table.a)), float(np.interp(s, table.s, table.b))


def gamma_over_j(table: EnergyTable, s: float, J: float) -> float:
    """Transverse-to-longitudinal scale ratio A(s) / (B(s)·|J|).

    The factor-of-two weights on the two Hamiltonian sectors cancel in the
    ratio, so this equals Gamma / (coupling energy) for programmed coupling J.
    """
    if J == 0:
        raise ScheduleError("J must be nonzero")
    a, b = interpolate(table, s)
    if b == 0:
        raise ScheduleError(f"B({s}) = 0: ratio undefined")
    return a / (b * abs(J))


def pause_for_ratio(table: EnergyTable, ratio: float, J: float = 1.0) -> float:
    """Invert gamma_over_j: the pause point s* at which A/(B|J|) equals ratio.

    A/B is monotone non-increasing in s (A falls, B rises), so bisection on the
    interpolated ratio is exact to the returned tolerance.
    """
    if ratio <= 0:
        raise ScheduleError("ratio must be positive")
    lo, hi = table.s_range
    # skip any leading B == 0 region where the ratio is undefined
    while interpolate(table, lo)[1] == 0.0 and lo < hi:
        lo = lo + (hi - lo) * 1e-3
    r_lo = gamma_over_j(table, lo, J)
    r_hi = gamma_over_j(table, hi, J)
    if not r_hi <= ratio <= r_lo:
        raise ScheduleError(
            f"ratio {ratio} outside attainable range [{r_hi:.3g}, {r_lo:.3g}]"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gamma_over_j(table, mid, J) > ratio:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def build_sweep(
    h_max: float,
    n_slices: int,
    pattern: SweepPattern | str = SweepPattern.UP_DOWN_UP,
    s_pause: float = 0.5,
    h_gain_max: float | None = None,
    total_time_us: float = 11.2,
) -> ProtocolWaveform:
    """Uniform closed sweep: h_max -> -h_max -> h_max (or mirrored).

    n_slices is the number of recorded g values per branch; the turning point is
    shared, so the cycle has 2*n_slices - 1 steps and starts where it ends.
    """
    if n_slices < 2:
        raise ScheduleError(f"n_slices must be >= 2, got {n_slices}")
    if h_max <= 0:
        raise ScheduleError("h_max must be positive")
    pattern = SweepPattern(pattern)
    down = np.linspace(h_max, -h_max, n_slices)
    steps = np.concatenate([down, down[::-1][1:]])
    if pattern is SweepPattern.DOWN_UP_DOWN:
        steps = -steps
    return ProtocolWaveform(
        s_pause=s_pause,
        steps=steps,
        h_gain_max=h_max if h_gain_max is None else h_gain_max,
        pattern=pattern,
        total_time_us=total_time_us,
    )


def load_energy_table(source: str, name: str | None = None) -> EnergyTable:
    """Read a "s,A_GHz,B_GHz" CSV (path or literal text) into an EnergyTable."""
    if "\n" in source:
        text = source
        label = name or "inline"
    else:
        with open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
        label = name or source
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [c.strip() for c in header] != ["s", "A_GHz", "B_GHz"]:
        raise ScheduleError("expected header 's,A_GHz,B_GHz'")
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 3:
            raise ScheduleError(f"line {lineno}: expected 3 columns, got {len(row)}")
        try:
            rows.append(tuple(float(c) for c in row))
        except ValueError as exc:
            raise ScheduleError(f"line {lineno}: non-numeric value in {row}") from exc
    if not rows:
        raise ScheduleError("empty schedule table")
    arr = np.array(rows)
    return EnergyTable(s=arr[:, 0], a=arr[:, 1], b=arr[:, 2], name=label)


def dump_energy_table(table: EnergyTable) -> str:
    out = ["s,A_GHz,B_GHz"]
    for s, a, b in zip(table.s, table.a, table.b):
        out.append(f"{s!r},{a!r},{b!r}")
    return "\n".join(out) + "\n"


def synthetic_energy_table(n_knots: int = 201) -> EnergyTable:
    """Smooth stand-in schedule with the qualitative hardware shape.

    A decays from ~8 GHz to ~0 by s = 0.8; B grows from 0.3 to 12 GHz. Real
    device tables can be dropped in via load_energy_table with the same format.
    """
    s = np.linspace(0.0, 1.0, n_knots)
    a = 8.0 * (1.0 - s) ** 3.2
    b = 0.3 + 11.7 * s**1.8
    return EnergyTable(s=s, a=a, b=b, name="synthetic")


def builtin_table(name: str = "synthetic") -> EnergyTable:
    """Load a table shipped with the package (currently only "synthetic")."""
    ref = resources.files("afmhyst.data").joinpath(f"schedule_{name}.csv")
    if not ref.is_file():
        raise ScheduleError(f"no builtin schedule table named {name!r}")
    return load_energy_table(ref.read_text(encoding="utf-8"), name=name)
