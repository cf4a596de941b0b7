"""Scenario configuration files.

A scenario is an INI-style file with dotted section names::

    [model.params]
    Lambda = 2.19/74.02
    mu = 1/74.02
    ...
    [model.incidence]
    kind = bilinear
    beta = 0.755
    [model.initial]
    preset = morocco          ; or: preset = explicit, plus S, I, C, A
    [solver]
    alpha = 1.0, 0.85, 0.7, 0.3
    t0 = 0
    tf = 5
    n_steps = 2000
    [focp]
    enabled = true
    B1 = 2.5
    B2 = 2.5
    delta = auto              ; or a number
    v1_max = 1
    v2_max = 1
    C1 = 1
    C2 = 1
    max_iterations = 300
    tolerance = 1e-4
    relaxation = 0.5
    [output]
    directory = out
    formats = csv, json

Numbers may be written as plain floats or as a quotient ``a/b``. Every
section except ``[model.params]``, ``[model.incidence]`` and ``[solver]``
is optional; missing keys take the defaults below.
"""

from __future__ import annotations

import configparser
import io
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Tuple, Union

from .exceptions import ConfigError
from .frackit import TimeGrid
from .sica import INCIDENCE_KINDS, Incidence, SicaParams, make_incidence

MOROCCO_N0 = 23023935
FORMATS = ("csv", "json")
PARAM_KEYS = ("Lambda", "mu", "phi", "rho", "sigma", "omega", "d")
INCIDENCE_PARAM_KEYS = {
    "bilinear": ("beta",),
    "saturated": ("beta", "a"),
    "hattaf_yousfi": ("beta", "a0", "a1", "a2"),
}
SCENARIO_DIR = Path(__file__).parent / "scenarios"


def morocco_initial_state(n0: int = MOROCCO_N0) -> Tuple[float, float, float, float]:
    """Two HIV-infected and nine AIDS cases in a population of ``n0``, as fractions."""
    return ((n0 - (2 + 9)) / n0, 2 / n0, 0.0, 9 / n0)


@dataclass
class ModelConfig:
    params: SicaParams
    incidence_kind: str
    incidence_params: Dict[str, float]
    initial_preset: str = "morocco"
    initial_state: Tuple[float, float, float, float] = field(default_factory=morocco_initial_state)

    def incidence(self) -> Incidence:
        return make_incidence(self.incidence_kind, **self.incidence_params)


@dataclass
class SolverConfig:
    alphas: Tuple[float, ...] = (1.0,)
    t0: float = 0.0
    tf: float = 5.0
    n_steps: int = 2000

    def grid(self) -> TimeGrid:
        return TimeGrid(self.t0, self.tf, self.n_steps)


@dataclass
class FocpConfig:
    enabled: bool = False
    B1: float = 2.5
    B2: float = 2.5
    delta: Union[float, str] = "auto"
    v1_max: float = 1.0
    v2_max: float = 1.0
    C1: float = 1.0
    C2: float = 1.0
    max_iterations: int = 300
    tolerance: float = 1e-4
    relaxation: float = 0.5


@dataclass
class OutputConfig:
    directory: str = "out"
    formats: Tuple[str, ...] = FORMATS


@dataclass
class ScenarioConfig:
    model: ModelConfig
    solver: SolverConfig = field(default_factory=SolverConfig)
    focp: FocpConfig = field(default_factory=FocpConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_NUM = re.compile(r"^\s*([-+]?[0-9.eE+-]+)\s*(?:/\s*([-+]?[0-9.eE+-]+)\s*)?$")


class _Reader:
    def __init__(self, cp: configparser.ConfigParser, text: str, source: str):
        self.cp = cp
        self.lines = text.splitlines()
        self.source = source

    def where(self, section: str, key: str = None) -> str:
        in_section = False
        for lineno, line in enumerate(self.lines, 1):
            stripped = line.strip()
            if stripped.startswith("["):
                in_section = stripped == f"[{section}]"
                if in_section and key is None:
                    return f"{self.source}:{lineno} [{section}]"
                continue
            if in_section and key is not None:
                name = re.split(r"[=:]", stripped, maxsplit=1)[0].strip()
                if name.lower() == key.lower():
                    return f"{self.source}:{lineno} [{section}] {key}"
        return f"{self.source} [{section}]" + (f" {key}" if key else "")

    def fail(self, section, key, msg):
        raise ConfigError(f"{self.where(section, key)}: {msg}")

    def has(self, section, key=None):
        if key is None:
            return self.cp.has_section(section)
        return self.cp.has_option(section, key)

    def raw(self, section, key, default=None):
        if not self.cp.has_section(section) or not self.cp.has_option(section, key):
            if default is None:
                raise ConfigError(f"{self.where(section)}: missing required key {key!r}")
            return default
        return self.cp.get(section, key).strip()

    def number(self, section, key, default=None) -> float:
        raw = self.raw(section, key, None if default is None else repr(float(default)))
        m = _NUM.match(raw)
        try:
            if not m:
                raise ValueError
            val = float(m.group(1))
            if m.group(2) is not None:
                val = val / float(m.group(2))
        except (ValueError, ZeroDivisionError):
            self.fail(section, key, f"expected a number or a/b quotient, got {raw!r}")
        if not math.isfinite(val):
            self.fail(section, key, f"value must be finite, got {raw!r}")
        return val

    def integer(self, section, key, default=None) -> int:
        val = self.number(section, key, default)
        if val != int(val):
            self.fail(section, key, f"expected an integer, got {val!r}")
        return int(val)

    def boolean(self, section, key, default) -> bool:
        if not self.has(section, key):
            return default
        try:
            return self.cp.getboolean(section, key)
        except ValueError:
            self.fail(section, key, f"expected true/false, got {self.cp.get(section, key)!r}")

    def listing(self, section, key, default=None):
        raw = self.raw(section, key, default)
        return [item.strip() for item in raw.split(",") if item.strip()]


def _parse_model(r: _Reader) -> ModelConfig:
    sec = "model.params"
    if not r.has(sec):
        raise ConfigError(f"{r.source}: missing section [{sec}]")
    values = {k: r.number(sec, k) for k in PARAM_KEYS}
    try:
        params = SicaParams(**values)
    except ValueError as exc:
        r.fail(sec, None, str(exc))

    sec = "model.incidence"
    if not r.has(sec):
        raise ConfigError(f"{r.source}: missing section [{sec}]")
    kind = r.raw(sec, "kind")
    if kind not in INCIDENCE_KINDS:
        r.fail(sec, "kind", f"unknown incidence {kind!r}; choose from {sorted(INCIDENCE_KINDS)}")
    inc_params = {k: r.number(sec, k) for k in INCIDENCE_PARAM_KEYS[kind]}
    extra = set(r.cp.options(sec)) - {"kind", *(k.lower() for k in INCIDENCE_PARAM_KEYS[kind])}
    if extra:
        r.fail(sec, sorted(extra)[0], f"unexpected key for incidence {kind!r}")

    sec = "model.initial"
    preset = r.raw(sec, "preset", "morocco") if r.has(sec) else "morocco"
    if preset == "morocco":
        state = morocco_initial_state()
    elif preset == "explicit":
        state = tuple(r.number(sec, k) for k in ("S", "I", "C", "A"))
        if any(v < 0 for v in state):
            r.fail(sec, None, f"initial state must be non-negative, got {state}")
    else:
        r.fail(sec, "preset", f"expected 'morocco' or 'explicit', got {preset!r}")
    return ModelConfig(params, kind, inc_params, preset, state)


def _parse_solver(r: _Reader) -> SolverConfig:
    sec = "solver"
    if not r.has(sec):
        raise ConfigError(f"{r.source}: missing section [{sec}]")
    alphas = []
    for item in r.listing(sec, "alpha"):
        try:
            a = float(item)
        except ValueError:
            r.fail(sec, "alpha", f"not a number: {item!r}")
        if not (0.0 < a <= 1.0):
            r.fail(sec, "alpha", f"fractional order {a} outside (0, 1]")
        alphas.append(a)
    if not alphas:
        r.fail(sec, "alpha", "at least one fractional order is required")
    cfg = SolverConfig(tuple(alphas), r.number(sec, "t0", 0.0), r.number(sec, "tf", 5.0),
                       r.integer(sec, "n_steps", 2000))
    try:
        cfg.grid()
    except ValueError as exc:
        r.fail(sec, None, str(exc))
    return cfg


def _parse_focp(r: _Reader) -> FocpConfig:
    sec = "focp"
    d = FocpConfig()
    if not r.has(sec):
        return d
    delta_raw = r.raw(sec, "delta", "auto")
    delta = "auto" if delta_raw.lower() == "auto" else r.number(sec, "delta")
    cfg = FocpConfig(
        enabled=r.boolean(sec, "enabled", d.enabled),
        B1=r.number(sec, "B1", d.B1),
        B2=r.number(sec, "B2", d.B2),
        delta=delta,
        v1_max=r.number(sec, "v1_max", d.v1_max),
        v2_max=r.number(sec, "v2_max", d.v2_max),
        C1=r.number(sec, "C1", d.C1),
        C2=r.number(sec, "C2", d.C2),
        max_iterations=r.integer(sec, "max_iterations", d.max_iterations),
        tolerance=r.number(sec, "tolerance", d.tolerance),
        relaxation=r.number(sec, "relaxation", d.relaxation),
    )
    for key in ("B1", "B2"):
        if getattr(cfg, key) <= 0:
            r.fail(sec, key, "weight must be positive")
    if delta != "auto" and delta <= 0:
        r.fail(sec, "delta", "delta must be positive or 'auto'")
    for key in ("v1_max", "v2_max"):
        if not 0 < getattr(cfg, key) <= 1:
            r.fail(sec, key, "control bound must lie in (0, 1]")
    for key in ("C1", "C2"):
        if getattr(cfg, key) < 0:
            r.fail(sec, key, "unit cost must be non-negative")
    if cfg.max_iterations < 1:
        r.fail(sec, "max_iterations", "must be positive")
    if cfg.tolerance <= 0:
        r.fail(sec, "tolerance", "must be positive")
    if not 0 < cfg.relaxation < 1:
        r.fail(sec, "relaxation", "must lie in (0, 1)")
    return cfg


def _parse_output(r: _Reader) -> OutputConfig:
    sec = "output"
    if not r.has(sec):
        return OutputConfig()
    formats = tuple(r.listing(sec, "formats", ", ".join(FORMATS)))
    for f in formats:
        if f not in FORMATS:
            r.fail(sec, "formats", f"unknown format {f!r}; choose from {FORMATS}")
    return OutputConfig(r.raw(sec, "directory", "out"), formats)


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    # keys are case-sensitive (Lambda); accept any case on lookup
    lowered = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    for sec in cp.sections():
        lowered.add_section(sec)
        for k, v in cp.items(sec):
            lowered.set(sec, k.lower(), v)
    r = _Reader(lowered, text, source)
    return ScenarioConfig(_parse_model(r), _parse_solver(r), _parse_focp(r), _parse_output(r))


def load_config(path) -> ScenarioConfig:
    """Read a scenario file; a bare name like ``morocco`` loads a bundled scenario."""
    p = Path(path)
    if not p.exists():
        bundled = SCENARIO_DIR / f"{path}.ini"
        if bundled.exists():
            p = bundled
        else:
            raise ConfigError(f"config file not found: {path}")
    return parse_config(p.read_text(), str(p))


# ---------------------------------------------------------------------------
# Dumping
# ---------------------------------------------------------------------------

def dump_config(cfg: ScenarioConfig) -> str:
    """Canonical text form; ``parse_config(dump_config(c)) == c``."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    m = cfg.model
    cp["model.params"] = {k: repr(getattr(m.params, k)) for k in PARAM_KEYS}
    cp["model.incidence"] = {"kind": m.incidence_kind,
                             **{k: repr(v) for k, v in m.incidence_params.items()}}
    if m.initial_preset == "morocco":
        cp["model.initial"] = {"preset": "morocco"}
    else:
        cp["model.initial"] = {"preset": "explicit",
                               **{k: repr(v) for k, v in zip("SICA", m.initial_state)}}
    s = cfg.solver
    cp["solver"] = {"alpha": ", ".join(repr(a) for a in s.alphas), "t0": repr(s.t0),
                    "tf": repr(s.tf), "n_steps": str(s.n_steps)}
    f = cfg.focp
    cp["focp"] = {
        "enabled": "true" if f.enabled else "false",
        "B1": repr(f.B1), "B2": repr(f.B2),
        "delta": "auto" if f.delta == "auto" else repr(f.delta),
        "v1_max": repr(f.v1_max), "v2_max": repr(f.v2_max),
        "C1": repr(f.C1), "C2": repr(f.C2),
        "max_iterations": str(f.max_iterations),
        "tolerance": repr(f.tolerance), "relaxation": repr(f.relaxation),
    }
    cp["output"] = {"directory": cfg.output.directory, "formats": ", ".join(cfg.output.formats)}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
