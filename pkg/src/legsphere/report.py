"""Machine-readable verification reports.

One line-delimited JSON record per check, a trailing summary object, and
optional structured payload lines (solver solutions, basis constants).
Identical inputs produce byte-identical output, so reports can be kept as
diffable goldens.

Check semantics: ``pass`` holds exactly when ``residual < tolerance``.
Lower-bound checks (non-minimality, constraint margins) are encoded as
``residual = threshold - value`` with ``tolerance = 0``, preserving that
invariant.
"""

from dataclasses import dataclass, field
import json

VERSION = "0.1.0"


@dataclass(frozen=True)
class CheckRecord:
    check: str
    immersion: str
    residual: float
    tolerance: float
    samples: int = 0

    @property
    def passed(self):
        return bool(self.residual < self.tolerance)

    def to_dict(self):
        return {
            "kind": "check",
            "check": self.check,
            "immersion": self.immersion,
            "residual": float(self.residual),
            "tolerance": float(self.tolerance),
            "pass": self.passed,
            "samples": int(self.samples),
        }


@dataclass
class Report:
    records: list
    config: dict = field(default_factory=dict)
    payload: dict = field(default_factory=dict)

    def extend(self, other):
        self.records.extend(other.records)
        for key, value in other.payload.items():
            self.payload.setdefault(key, value)
        return self

    @property
    def summary(self):
        passed = sum(1 for r in self.records if r.passed)
        return {"passed": passed, "failed": len(self.records) - passed}

    @property
    def all_passed(self):
        return self.summary["failed"] == 0

    def to_lines(self):
        lines = [json.dumps(r.to_dict(), sort_keys=True) for r in self.records]
        for key in sorted(self.payload):
            lines.append(json.dumps({"kind": key, "data": self.payload[key]},
                                    sort_keys=True))
        lines.append(json.dumps({
            "kind": "summary",
            "summary": self.summary,
            "version": VERSION,
            "config": self.config,
        }, sort_keys=True))
        return lines

    def write(self, path):
        text = "\n".join(self.to_lines()) + "\n"
        with open(path, "w") as fh:
            fh.write(text)
        return text
