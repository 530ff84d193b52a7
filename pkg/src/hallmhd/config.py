"""Plain-text ``key = value`` run configuration.

One key per line, dotted namespaces, ``#`` starts a comment. Every key has a
documented default (see ``DEFAULTS``); unknown keys are rejected. Parsing
collects all violations before raising :class:`ConfigError`.
"""
from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, field, fields, replace

from .material_laws import make_law
from .presets import PRESETS


class ConfigError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.violations))


@dataclass(frozen=True)
class DomainCfg:
    L: float = 2 * math.pi
    M: int = 16


@dataclass(frozen=True)
class ModesCfg:
    K: int = 1


@dataclass(frozen=True)
class PhysicsCfg:
    h: float = 0.0


@dataclass(frozen=True)
class LawsCfg:
    mu: str = "constant:1"
    sigma: str = "constant:1"


@dataclass(frozen=True)
class InitCfg:
    preset: str = "zero"
    amplitude: float = 1.0
    rho_min: float = 1.0
    rho_max: float = 1.0
    K_data: int = 1
    rho_file: str = ""
    u_file: str = ""
    B_file: str = ""


@dataclass(frozen=True)
class MollifyCfg:
    eps: float = 0.0


@dataclass(frozen=True)
class TimeCfg:
    T: float = 1.0
    dt_window: float = 0.1


@dataclass(frozen=True)
class SolverCfg:
    ode_tol: float = 1e-9
    picard_tol: float = 1e-8
    picard_max_iter: int = 30
    relaxation: float = 1.0
    max_halvings: int = 6
    char_substep: float = 0.0


@dataclass(frozen=True)
class OutputCfg:
    name: str = "run"
    snapshot_interval: float = 0.0
    csv: str = "diagnostics.csv"
    snapshot_dir: str = "snapshots"


@dataclass(frozen=True)
class SimConfig:
    domain: DomainCfg = field(default_factory=DomainCfg)
    modes: ModesCfg = field(default_factory=ModesCfg)
    physics: PhysicsCfg = field(default_factory=PhysicsCfg)
    laws: LawsCfg = field(default_factory=LawsCfg)
    init: InitCfg = field(default_factory=InitCfg)
    mollify: MollifyCfg = field(default_factory=MollifyCfg)
    time: TimeCfg = field(default_factory=TimeCfg)
    solver: SolverCfg = field(default_factory=SolverCfg)
    output: OutputCfg = field(default_factory=OutputCfg)
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    def to_text(self) -> str:
        """Canonical document that parses back to this config."""
        lines = []
        for sec in fields(self):
            val = getattr(self, sec.name)
            if sec.name == "seed":
                lines.append(f"seed = {val}")
                continue
            for f in fields(val):
                lines.append(f"{sec.name}.{f.name} = {_fmt(getattr(val, f.name))}")
        return "\n".join(lines) + "\n"

    def with_values(self, **dotted) -> "SimConfig":
        """Copy with dotted-key overrides, e.g. ``with_values(**{"modes.K": 2})``."""
        cfg = self
        for key, v in dotted.items():
            if key == "seed":
                cfg = replace(cfg, seed=v)
                continue
            sec, name = key.split(".")
            cfg = replace(cfg, **{sec: replace(getattr(cfg, sec), **{name: v})})
        return cfg


def _fmt(v):
    return repr(v) if isinstance(v, float) else str(v)


_PI = re.compile(r"^\s*(?:([-+0-9.eE]+)\s*\*\s*)?pi\s*$")


def _to_float(s: str) -> float:
    m = _PI.match(s)
    if m:
        return (float(m.group(1)) if m.group(1) else 1.0) * math.pi
    return float(s)


def _to_int(s: str) -> int:
    v = float(s)
    if v != int(v):
        raise ValueError(s)
    return int(v)


def _schema():
    out = {"seed": (int, 0)}
    for sec in fields(SimConfig):
        if sec.name == "seed":
            continue
        for f in fields(sec.default_factory):
            out[f"{sec.name}.{f.name}"] = (f.type, f.default)
    return out


SCHEMA = _schema()
DEFAULTS = {k: v[1] for k, v in SCHEMA.items()}
_CONVERT = {"float": (_to_float, "a real number"), "int": (_to_int, "an integer"),
            "str": (str, "a string"), float: (_to_float, "a real number"),
            int: (_to_int, "an integer"), str: (str, "a string")}


def parse_config(text: str) -> SimConfig:
    """Parse and validate a configuration document."""
    errors, values = [], {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, _, val = (p.strip() for p in line.partition("="))
        if key not in SCHEMA:
            errors.append(f"{key}: unknown key")
            continue
        if key in values:
            errors.append(f"{key}: given more than once")
            continue
        conv, what = _CONVERT[SCHEMA[key][0]]
        try:
            values[key] = conv(val)
        except ValueError:
            errors.append(f"{key}: expected {what}, got {val!r}")
    cfg = SimConfig().with_values(**values)
    errors += validate(cfg)
    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path) -> SimConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def validate(cfg: SimConfig) -> list:
    """All constraint violations of a config (empty when valid)."""
    e = []
    d, K = cfg.domain, cfg.modes.K
    if not (math.isfinite(d.L) and d.L > 0):
        e.append(f"domain.L: must be > 0, got {d.L}")
    if d.M < 4:
        e.append(f"domain.M: must be >= 4, got {d.M}")
    if K < 1:
        e.append(f"modes.K: must be >= 1, got {K}")
    if d.M < 4 * K:
        e.append(f"domain.M: aliasing rule M >= 4*modes.K violated (M={d.M}, K={K})")
    if cfg.physics.h < 0:
        e.append(f"physics.h: must be >= 0, got {cfg.physics.h}")
    ini = cfg.init
    if ini.preset not in PRESETS:
        e.append(f"init.preset: must be one of {', '.join(PRESETS)}, got {ini.preset!r}")
    if not ini.rho_min > 0:
        e.append(f"init.rho_min: must be > 0, got {ini.rho_min}")
    if ini.rho_max < ini.rho_min:
        e.append(f"init.rho_max: must be >= init.rho_min, got {ini.rho_max}")
    if ini.K_data < 1 or 4 * ini.K_data > d.M:
        e.append(f"init.K_data: must lie in [1, M/4], got {ini.K_data}")
    if ini.preset == "file":
        for k in ("rho_file", "u_file", "B_file"):
            if not getattr(ini, k):
                e.append(f"init.{k}: required by the file preset")
    if ini.rho_min > 0 and ini.rho_max >= ini.rho_min:
        for k in ("mu", "sigma"):
            try:
                make_law(getattr(cfg.laws, k), k, ini.rho_min, ini.rho_max)
            except ValueError as exc:
                e.append(f"laws.{k}: {exc}")
    eps = cfg.mollify.eps
    if eps != 0:
        if not 0 < eps < 1:
            e.append(f"mollify.eps: must be 0 (off) or lie in (0, 1), got {eps}")
        elif d.M >= 4 and d.L > 0 and eps / (d.L / d.M) < 3:
            e.append(f"mollify.eps: support of {eps / (d.L / d.M):.3g} cells is below 3 grid cells")
        elif d.L > 0 and eps >= d.L / 2:
            e.append("mollify.eps: must be shorter than half the period")
    t = cfg.time
    if not t.T > 0:
        e.append(f"time.T: must be > 0, got {t.T}")
    if not t.dt_window > 0:
        e.append(f"time.dt_window: must be > 0, got {t.dt_window}")
    s = cfg.solver
    for k in ("ode_tol", "picard_tol"):
        if not getattr(s, k) > 0:
            e.append(f"solver.{k}: must be > 0, got {getattr(s, k)}")
    if s.picard_max_iter < 1:
        e.append(f"solver.picard_max_iter: must be >= 1, got {s.picard_max_iter}")
    if not 0 < s.relaxation <= 1:
        e.append(f"solver.relaxation: must lie in (0, 1], got {s.relaxation}")
    if s.max_halvings < 0:
        e.append(f"solver.max_halvings: must be >= 0, got {s.max_halvings}")
    if s.char_substep < 0:
        e.append(f"solver.char_substep: must be >= 0 (0 = automatic), got {s.char_substep}")
    if cfg.output.snapshot_interval < 0:
        e.append(f"output.snapshot_interval: must be >= 0, got {cfg.output.snapshot_interval}")
    if not cfg.output.name or "/" in cfg.output.name:
        e.append("output.name: must be a nonempty name without '/'")
    return e
