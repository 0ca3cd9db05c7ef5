"""Benchmark reports: nearest-rank percentiles, JSON and table rendering.

The JSON field names are stable for CI consumption; see README for the
schema.
"""

import json
import math
from dataclasses import dataclass, field


def percentile(sorted_values, p):
    """Nearest-rank percentile over an ascending list; p in (0, 100]."""
    if not sorted_values:
        return None
    rank = max(1, math.ceil(p / 100.0 * len(sorted_values)))
    return sorted_values[rank - 1]


def latency_summary(latencies_us):
    ordered = sorted(latencies_us)
    return {
        "count": len(ordered),
        "p50_us": percentile(ordered, 50),
        "p95_us": percentile(ordered, 95),
        "p99_us": percentile(ordered, 99),
    }


@dataclass
class BenchReport:
    experiment: str
    params: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    buckets: list = field(default_factory=list)
    scenarios: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    valid: bool = True

    def to_dict(self):
        return {
            "experiment": self.experiment,
            "valid": self.valid,
            "params": self.params,
            "metrics": self.metrics,
            "buckets": self.buckets,
            "scenarios": self.scenarios,
            "notes": self.notes,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def render_table(self):
        lines = [f"experiment: {self.experiment}   valid: {self.valid}"]
        if self.params:
            lines.append("params:")
            for k in sorted(self.params):
                lines.append(f"  {k} = {self.params[k]}")
        if self.metrics:
            lines.append("metrics:")
            for k in sorted(self.metrics):
                v = self.metrics[k]
                if isinstance(v, float):
                    v = f"{v:.3f}"
                lines.append(f"  {k} = {v}")
        if self.scenarios:
            lines.append("scenarios:")
            width = max(len(name) for name in self.scenarios)
            for name, data in self.scenarios.items():
                med = data.get("median_us")
                med = f"{med / 1000.0:10.3f} ms" if med is not None else "      n/a"
                lines.append(
                    f"  {name.ljust(width)}  median {med}   reps {data.get('reps', 0)}"
                )
        if self.buckets:
            lines.append("value-size deciles:")
            lines.append("  decile  max_bytes      ops   p50_us   p95_us   p99_us")
            for b in self.buckets:
                lines.append(
                    f"  {b['decile']:>6}  {b['max_bytes']:>9}  {b['count']:>7}"
                    f"  {b['p50_us'] or 0:>7}  {b['p95_us'] or 0:>7}  {b['p99_us'] or 0:>7}"
                )
        for note in self.notes:
            lines.append(f"note: {note}")
        return "\n".join(lines)
