"""Flat key = value experiment configs with dotted keys.

Example::

    # lower-bound battery cell
    run.T = 300
    run.reps = 200
    class.d = 1
    adversary.kind = lowerbound
    adversary.sigma = 0.25
    learner.names = rcover, cover, erm, fixed

Unknown keys are rejected.  ``grid.*`` keys hold comma lists and are only
read by sweeps.  The literal ``none`` leaves an optional value unset.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigurationError
from ..learners import LEARNERS


def _bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"not a boolean: {s!r}")


def _opt(parse):
    def f(s):
        return None if s.strip().lower() == "none" else parse(s)
    return f


def _floats(s):
    return tuple(float(v) for v in s.split(",") if v.strip())


def _names(s):
    return tuple(v.strip() for v in s.split(",") if v.strip())


# dotted key -> (attribute, parser)
SCHEMA = {
    "run.T": ("T", int),
    "run.reps": ("reps", int),
    "run.seed": ("seed", int),
    "run.instrument": ("instrument", _bool),
    "run.out": ("out", str),
    "run.exact_rational": ("exact_rational", _bool),
    "run.workers": ("workers", int),
    "class.kind": ("class_kind", str),
    "class.d": ("d", int),
    "adversary.kind": ("adversary", str),
    "adversary.sigma": ("sigma", float),
    "adversary.q": ("q", _opt(float)),
    "adversary.noise": ("noise", float),
    "adversary.loss": ("loss", str),
    "adversary.fstar": ("fstar", _opt(_floats)),
    "adversary.support": ("support", int),
    "adversary.regions": ("regions", _opt(int)),
    "learner.names": ("learners", _names),
    "learner.depth": ("depth", _opt(int)),
    "learner.epsilon": ("epsilon", _opt(float)),
    "learner.engine": ("engine", str),
    "learner.memoize": ("memoize", _bool),
    "learner.K": ("K", _opt(int)),
    "learner.forecaster": ("forecaster", str),
    "learner.member": ("member", _opt(_floats)),
}

GRID_KEYS = {"T": int, "sigma": float, "d": int, "learner": str,
             "epsilon": _opt(float), "depth": _opt(int)}

ADVERSARIES = ("lowerbound", "mixture", "iid", "switching")


@dataclass
class ExperimentConfig:
    T: int = 256
    reps: int = 1
    seed: int = 0
    instrument: bool = False
    out: str = "out"
    exact_rational: bool = False
    workers: int = 1
    class_kind: str = "threshold"
    d: int = 1
    adversary: str = "mixture"
    sigma: float = 0.25
    q: float | None = None
    noise: float = 0.0
    loss: str = "absolute"
    fstar: tuple | None = None
    support: int = 16
    regions: int | None = None
    learners: tuple = ("rcover",)
    depth: int | None = None
    epsilon: float | None = None
    engine: str = "auto"
    memoize: bool = True
    K: int | None = None
    forecaster: str = "hedge"
    member: tuple | None = None
    grid: dict = field(default_factory=dict)

    def validate(self) -> "ExperimentConfig":
        if self.T < 1:
            raise ConfigurationError("run.T must be >= 1")
        if self.reps < 1:
            raise ConfigurationError("run.reps must be >= 1")
        if not 0 < self.sigma <= 1:
            raise ConfigurationError("adversary.sigma must lie in (0, 1]")
        if self.d < 1:
            raise ConfigurationError("class.d must be >= 1")
        if self.class_kind not in ("threshold", "product"):
            raise ConfigurationError(f"unknown class.kind {self.class_kind!r}")
        if self.class_kind == "threshold" and self.d != 1:
            raise ConfigurationError("class.kind = threshold needs class.d = 1")
        if self.adversary not in ADVERSARIES:
            raise ConfigurationError(f"unknown adversary.kind {self.adversary!r}")
        if self.loss not in ("absolute", "squared"):
            raise ConfigurationError(f"unknown adversary.loss {self.loss!r}")
        for name in self.learners:
            if name not in LEARNERS:
                raise ConfigurationError(f"unknown learner {name!r}")
        if self.engine not in ("auto", "reference", "fast"):
            raise ConfigurationError(f"unknown learner.engine {self.engine!r}")
        if self.forecaster not in ("hedge", "aexp"):
            raise ConfigurationError(f"unknown learner.forecaster {self.forecaster!r}")
        return self

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw).validate()


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    values = {}
    grid = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {n}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key.startswith("grid."):
            name = key[5:]
            if name not in GRID_KEYS:
                raise ConfigurationError(f"line {n}: unknown grid key {key!r}")
            grid[name] = [GRID_KEYS[name](v.strip()) for v in val.split(",") if v.strip()]
            continue
        if key not in SCHEMA:
            raise ConfigurationError(f"line {n}: unknown key {key!r}")
        attr, parse = SCHEMA[key]
        try:
            values[attr] = parse(val)
        except ValueError as e:
            raise ConfigurationError(f"line {n}: bad value for {key}: {e}") from None
    cfg = dataclasses.replace(base or ExperimentConfig(), **values)
    cfg.grid = grid
    if "class_kind" not in values and cfg.d > 1:
        cfg.class_kind = "product"
    return cfg.validate()


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def dump_config(cfg: ExperimentConfig) -> str:
    """Inverse of :func:`parse_config` for the non-grid keys."""
    lines = []
    for key, (attr, _) in SCHEMA.items():
        v = getattr(cfg, attr)
        if v is None:
            s = "none"
        elif isinstance(v, tuple):
            s = ", ".join(map(str, v))
        elif isinstance(v, bool):
            s = "true" if v else "false"
        else:
            s = str(v)
        lines.append(f"{key} = {s}")
    for name, vals in cfg.grid.items():
        lines.append(f"grid.{name} = " + ", ".join("none" if v is None else str(v) for v in vals))
    return "\n".join(lines) + "\n"
