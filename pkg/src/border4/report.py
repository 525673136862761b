"""Verdict and report types shared by every membership check.

Reports serialize to deterministic JSON: fixed key order, no timing data,
Fractions rendered as "a/b" strings. Two runs with the same inputs and seed
must produce byte-identical files.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction

MEMBER = "MEMBER"
NON_MEMBER = "NON_MEMBER"
INCONCLUSIVE = "INCONCLUSIVE"

VERDICTS = (MEMBER, NON_MEMBER, INCONCLUSIVE)


def jsonable(value):
    """Recursively convert report payloads to JSON-safe structures."""
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else str(value.numerator)
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        return value if -(2**53) < value < 2**53 else str(value)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        return value
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, "tolist"):
        return jsonable(value.tolist())
    return str(value)


@dataclass
class Stage:
    """One test stage inside a membership run."""

    name: str
    passed: bool
    witness: dict | None = None
    info: dict = field(default_factory=dict)

    def to_json_dict(self):
        d = {"name": self.name, "pass": self.passed}
        if self.witness is not None:
            d["witness"] = jsonable(self.witness)
        if self.info:
            d["info"] = jsonable(self.info)
        return d

    @classmethod
    def from_json_dict(cls, d):
        return cls(
            name=d["name"],
            passed=d["pass"],
            witness=d.get("witness"),
            info=d.get("info", {}),
        )


@dataclass
class MembershipReport:
    verdict: str
    route: str
    stages: list
    mode: str
    seed: int | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    def to_json_dict(self):
        d = {
            "verdict": self.verdict,
            "route": self.route,
            "stages": [s.to_json_dict() for s in self.stages],
            "mode": self.mode,
        }
        if self.seed is not None:
            d["seed"] = self.seed
        if self.extra:
            d["extra"] = jsonable(self.extra)
        return d

    def to_json(self):
        return json.dumps(self.to_json_dict(), separators=(",", ":"), sort_keys=False)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(
            verdict=d["verdict"],
            route=d["route"],
            stages=[Stage.from_json_dict(s) for s in d["stages"]],
            mode=d["mode"],
            seed=d.get("seed"),
            extra=d.get("extra", {}),
        )


def mode_label(mode):
    """Stable string naming an arithmetic mode inside reports."""
    from .modes import FLOAT64, RATIONAL, PrimeFieldMode

    if mode is RATIONAL:
        return "rational"
    if mode is FLOAT64:
        return "float64"
    if isinstance(mode, PrimeFieldMode):
        return f"gfp({mode.p})"
    raise ValueError(f"unlabelled mode {mode!r}")
