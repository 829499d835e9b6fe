"""Key-pair generation vs public-key expansion timing.

Each preset is timed in two separate, non-interleaved loops, each preceded by
one untimed warm-up round: ``keygen`` and ``sample_expander + expand_key``
(sampling the expander is charged to expansion). Timings use ``time.perf_counter_ns`` with the
garbage collector paused, as :mod:`timeit` does.
"""

from __future__ import annotations

import csv
import gc
import io
import statistics
import time
from dataclasses import dataclass

from . import _backend
from .key_expansion import ExpanderRole, expand_key, sample_expander
from .ntru_core import keygen

MIN_TRIALS = 10
CSV_COLUMNS = ("preset", "security_level", "keygen_ms", "expansion_ms", "speedup")


@dataclass(frozen=True)
class TimingStats:
    mean: float
    median: float
    stdev: float
    trials: int

    @classmethod
    def from_samples(cls, samples_ms):
        samples = list(samples_ms)
        if len(samples) < 2:
            raise ValueError("need at least two samples")
        return cls(
            statistics.fmean(samples),
            statistics.median(samples),
            statistics.stdev(samples),
            len(samples),
        )


@dataclass(frozen=True)
class BenchReport:
    preset: str
    label: str
    security_level: int
    keygen: TimingStats
    expansion: TimingStats
    backend: str = ""

    @property
    def speedup_ratio(self):
        return self.keygen.mean / self.expansion.mean


def _time_ms(fn, trials):
    samples = []
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for _ in range(trials):
            start = time.perf_counter_ns()
            fn()
            samples.append((time.perf_counter_ns() - start) / 1e6)
    finally:
        if gc_was_enabled:
            gc.enable()
    return samples


def bench_preset(params, trials, rng):
    if trials < MIN_TRIALS:
        raise ValueError(f"trials must be at least {MIN_TRIALS}")
    # the warm-up keygen also yields the key that gets expanded
    _, pk = keygen(params, rng)
    keygen_ms = _time_ms(lambda: keygen(params, rng), trials)

    def expand_once():
        expand_key(pk, sample_expander(params, ExpanderRole.DIRECT, rng), params)

    expand_once()
    expansion_ms = _time_ms(expand_once, trials)
    return BenchReport(
        preset=params.name,
        label=params.label,
        security_level=params.security_level,
        keygen=TimingStats.from_samples(keygen_ms),
        expansion=TimingStats.from_samples(expansion_ms),
        backend=_backend.active_backend(),
    )


def compare_backends(params, trials, rng, backends=None):
    """One report per available kernel backend (compiled vs numpy fallback)."""
    reports = []
    for name in backends or _backend.available_backends():
        with _backend.use_backend(name):
            reports.append(bench_preset(params, trials, rng))
    return reports


def _rows(reports):
    for r in reports:
        yield (
            r.preset,
            str(r.security_level),
            f"{r.keygen.mean:.3f}",
            f"{r.expansion.mean:.4f}",
            f"{r.speedup_ratio:.1f}",
        )


def emit_table(reports, fmt="text"):
    """Render reports as CSV or an aligned text table (bytes, UTF-8)."""
    reports = list(reports)
    if not reports:
        raise ValueError("need at least one report")
    rows = list(_rows(reports))
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(rows)
        return buf.getvalue().encode()
    if fmt != "text":
        raise ValueError("format must be 'csv' or 'text'")
    table = [CSV_COLUMNS, *rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(CSV_COLUMNS))]
    lines = [
        "  ".join(cell.ljust(w) if i == 0 else cell.rjust(w) for i, (cell, w) in enumerate(zip(row, widths)))
        for row in table
    ]
    return ("\n".join(lines) + "\n").encode()


def parse_csv(data):
    """Read :func:`emit_table` CSV output back into dicts of typed values."""
    reader = csv.DictReader(io.StringIO(data.decode()))
    return [
        {
            "preset": row["preset"],
            "security_level": int(row["security_level"]),
            "keygen_ms": float(row["keygen_ms"]),
            "expansion_ms": float(row["expansion_ms"]),
            "speedup": float(row["speedup"]),
        }
        for row in reader
    ]
