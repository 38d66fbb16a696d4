"""Per-outer-iteration convergence records."""

import csv
import math
from dataclasses import dataclass, field

COLUMNS = ("t", "lambda", "objective", "smoothed_objective", "inner_h", "inner_w", "seconds")


@dataclass
class TraceRecord:
    t: int
    lam: float
    objective: float
    smoothed_objective: float
    inner_h: int
    inner_w: int
    seconds: float

    def row(self):
        return (self.t, self.lam, self.objective, self.smoothed_objective,
                self.inner_h, self.inner_w, self.seconds)


@dataclass
class ConvergenceTrace:
    initial_objective: float = math.nan
    records: list = field(default_factory=list)

    def append(self, *args, **kwargs):
        self.records.append(TraceRecord(*args, **kwargs))

    def __len__(self):
        return len(self.records)

    @property
    def objectives(self):
        return [r.objective for r in self.records]

    @property
    def lambdas(self):
        return [r.lam for r in self.records]

    @property
    def final_objective(self):
        return self.records[-1].objective if self.records else self.initial_objective

    def is_monotone(self, slack=1e-8):
        seq = [self.initial_objective] + self.objectives
        return all(b <= a + slack for a, b in zip(seq, seq[1:]))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COLUMNS)
            for rec in self.records:
                w.writerow([_fmt(v) for v in rec.row()])


def _fmt(v):
    if isinstance(v, int):
        return str(v)
    return "%.17g" % v


def read_trace_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        TraceRecord(int(r["t"]), float(r["lambda"]), float(r["objective"]),
                    float(r["smoothed_objective"]), int(r["inner_h"]),
                    int(r["inner_w"]), float(r["seconds"]))
        for r in rows
    ]
