"""INI-style experiment configuration with line-numbered errors.

The format is ``[section]`` headers followed by ``key = value`` lines;
``#`` and ``;`` start comments. Every key must be known for its section,
and the loader reports the line of the first offending entry.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

HEADER_MARK = "swarmlab config"

KINDS = ("bench", "moo", "ident", "schema", "influence")


class ConfigError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, source: str = "<config>"):
        self.line = line
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


def _int(v):
    return int(v, 0) if isinstance(v, str) else int(v)


def _float(v):
    return float(v)


def _bool(v):
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _ints(v):
    return tuple(int(x) for x in str(v).replace(",", " ").split())


def _str(v):
    return str(v).strip()


# section -> key -> (parser, default)
SCHEMA: dict[str, dict[str, tuple]] = {
    "experiment": {
        "kind": (_str, None),
        "name": (_str, None),
        "seed": (_int, 1),
        "repeats": (_int, 10),
        "budget": (_int, None),
        "jobs": (_int, 1),
        "out": (_str, "results"),
        "checkpoint": (_int, 100),
    },
    "problem": {
        "function": (_str, None),
        "dims": (_int, None),
        "closeness": (_float, None),
        "objectives": (_int, 3),
        "variables": (_int, None),
        "alpha": (_float, 100.0),
        "T": (_float, 0.2),
        "samples": (_int, 200),
        "amplitude": (_float, 311.0),
        "frequency": (_float, 50.0),
        "leak_split": (_float, 0.5),
    },
    "optimizer": {
        "algorithm": (_str, None),
        "swarm_size": (_int, 20),
        "w": (_float, None),
        "chi": (_float, 1.0),
        "phi1": (_float, 1.494),
        "phi2": (_float, 1.494),
        "random_inertia": (_bool, None),
        "vmax": (_bool, True),
        "clubs": (_int, 100),
        "default_level": (_int, 10),
        "min_level": (_int, 5),
        "max_level": (_int, 33),
        "rr": (_int, 2),
        "pop_size": (_int, None),
        "p_c": (_float, None),
        "eta_c": (_float, None),
        "p_m": (_float, None),
        "eta_m": (_float, None),
        "tournament_size": (_int, 2),
        "ploidy": (_int, 2),
        "sbx_exchange": (_bool, False),
        "step_fraction": (_float, 0.001),
    },
    "schema": {
        "table": (_str, "ratio"),
        "rounding": (_str, "floor"),
        "takeover": (_float, 0.6),
        "xi0": (_float, 5.0),
        "p_c": (_float, 0.7),
        "p_m": (_float, 0.01),
        "m": (_int, 20),
        "N": (_int, 500),
        "delta": (_int, 11),
        "order": (_int, 6),
        "ratio": (_float, 1.9),
    },
    "influence": {
        "levels": (_ints, (5, 10, 20)),
        "dims": (_int, 30),
        "iterations": (_int, 100),
        "particles": (_int, 20),
        "clubs": (_int, 100),
        "w": (_float, 1.458),
    },
}

_SECTION = re.compile(r"^\[\s*([A-Za-z_][\w.-]*)\s*\]$")
_ENTRY = re.compile(r"^([A-Za-z_][\w.-]*)\s*[=:]\s*(.*)$")


@dataclass
class Config:
    """Resolved configuration: section -> key -> typed value."""

    values: dict[str, dict[str, Any]]
    source: str = "<config>"
    explicit: dict[str, set] = field(default_factory=dict)
    emit: dict[str, tuple] = field(default_factory=dict)

    def get(self, section: str, key: str, default: Any = None) -> Any:
        v = self.values.get(section, {}).get(key)
        return default if v is None else v

    def is_set(self, section: str, key: str) -> bool:
        return key in self.explicit.get(section, set())

    @property
    def kind(self) -> str:
        return self.values["experiment"]["kind"]

    @property
    def name(self) -> str:
        return self.values["experiment"]["name"]

    def set(self, section: str, key: str, value: Any) -> None:
        parser, _ = SCHEMA[section][key]
        self.values[section][key] = parser(value) if isinstance(value, str) else value
        self.explicit.setdefault(section, set()).add(key)

    def to_ini(self) -> str:
        """Canonical text; loading it back gives the same configuration."""
        lines = []
        for section in SCHEMA:
            if self.emit:
                keys = [k for k in self.emit.get(section, ()) if self.values[section][k] is not None]
            else:
                keys = [k for k in SCHEMA[section] if k in self.explicit.get(section, set())]
            if not keys:
                continue
            lines.append(f"[{section}]")
            for k in keys:
                lines.append(f"{k} = {_fmt(self.values[section][k])}")
            lines.append("")
        return "\n".join(lines).rstrip() + "\n"


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(str(x) for x in v)
    return str(v)


def _extract_header(text: str) -> str:
    """Pull a config back out of an output file's comment header."""
    lines = text.splitlines()
    if not lines or HEADER_MARK not in lines[0]:
        return text
    body = []
    for ln in lines[1:]:
        if not ln.startswith("#"):
            break
        body.append(ln[2:] if ln.startswith("# ") else ln[1:])
    return "\n".join(body)


def parse_config(text: str, source: str = "<config>") -> Config:
    text = _extract_header(text)
    values = {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()}
    explicit: dict[str, set] = {}
    section = None
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            section = m.group(1)
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", lineno, source)
            continue
        m = _ENTRY.match(line)
        if not m:
            raise ConfigError(f"cannot parse line {raw.strip()!r}", lineno, source)
        if section is None:
            raise ConfigError("key outside of any section", lineno, source)
        key, val = m.group(1), m.group(2).strip()
        if key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]", lineno, source)
        if (section, key) in seen:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", lineno, source)
        seen.add((section, key))
        parser, _ = SCHEMA[section][key]
        try:
            values[section][key] = parser(val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno, source) from None
        explicit.setdefault(section, set()).add(key)
    return Config(values, source, explicit)


def load_config(path) -> Config:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(p)) from None
    return parse_config(text, str(p))


PSO_KEYS = ("swarm_size", "w", "chi", "phi1", "phi2", "random_inertia")
CLUB_KEYS = ("clubs", "default_level", "min_level", "max_level", "rr")
GA_KEYS = ("pop_size", "p_c", "eta_c", "p_m", "eta_m", "tournament_size")
MOEA_KEYS = ("pop_size", "p_c", "eta_c", "p_m", "eta_m", "sbx_exchange")
PROBLEM_KEYS = {
    "bench": ("function", "dims", "closeness"),
    "moo": ("function", "objectives", "variables", "alpha"),
    "ident": ("T", "samples", "amplitude", "frequency", "leak_split"),
}
# jobs and out do not change results, so they stay out of the embedded header
EXPERIMENT_KEYS = ("kind", "name", "seed", "repeats", "budget", "checkpoint")


def _default(cfg: Config, section: str, key: str, value) -> None:
    if not cfg.is_set(section, key) or cfg.get(section, key) is None:
        cfg.set(section, key, value)


def _resolve_bench(cfg: Config, src: str):
    from ..benchmarks import BENCH_SETUPS, ObjectiveId

    try:
        oid = ObjectiveId(cfg.get("problem", "function"))
    except ValueError:
        raise ConfigError(f"unknown function {cfg.get('problem', 'function')!r}", None, src) from None
    if oid not in BENCH_SETUPS:
        raise ConfigError(f"{oid.value} is not a single-objective benchmark", None, src)
    setup = BENCH_SETUPS[oid]
    _default(cfg, "problem", "dims", setup.dims)
    _default(cfg, "problem", "closeness", setup.closeness)
    _default(cfg, "experiment", "budget", 200_000)
    return setup


def _resolve_moo(cfg: Config, src: str) -> None:
    from ..benchmarks import DTLZ_DEFAULT_VARS, ObjectiveId

    try:
        oid = ObjectiveId(cfg.get("problem", "function"))
    except ValueError:
        raise ConfigError(f"unknown function {cfg.get('problem', 'function')!r}", None, src) from None
    if not oid.is_dtlz:
        raise ConfigError(f"{oid.value} is not a DTLZ problem", None, src)
    _default(cfg, "problem", "variables", DTLZ_DEFAULT_VARS[oid])
    _default(cfg, "experiment", "budget", 50_000)
    o = "optimizer"
    _default(cfg, o, "pop_size", 100)
    _default(cfg, o, "p_c", 1.0)
    _default(cfg, o, "eta_c", 20.0)
    _default(cfg, o, "p_m", 1.0 / cfg.get("problem", "variables"))
    _default(cfg, o, "eta_m", 15.0)
    if cfg.get(o, "algorithm") == "polyploid":
        cfg.emit[o] = ("algorithm", "ploidy") + MOEA_KEYS
        _default(cfg, o, "ploidy", cfg.get(o, "ploidy"))
    else:
        cfg.emit[o] = ("algorithm",) + MOEA_KEYS


def _resolve_optimizer(cfg: Config, kind: str, setup) -> None:
    o = "optimizer"
    algo = cfg.get(o, "algorithm")
    if algo in ("cpso", "gbest", "lbest"):
        if algo == "cpso":
            w = setup.w_clubs if kind == "bench" else 1.458
            _default(cfg, o, "min_level", 5 if kind == "bench" else 4)
            for k in ("clubs", "default_level", "max_level", "rr"):
                _default(cfg, o, k, cfg.get(o, k))
        else:
            w = 0.729
        _default(cfg, o, "w", w)
        _default(cfg, o, "random_inertia", algo == "cpso")
        for k in ("swarm_size", "chi", "phi1", "phi2"):
            _default(cfg, o, k, cfg.get(o, k))
        keys = ("algorithm",) + PSO_KEYS + (CLUB_KEYS if algo == "cpso" else ())
        if kind == "bench":
            _default(cfg, o, "vmax", cfg.get(o, "vmax"))
            keys += ("vmax",)
        cfg.emit[o] = keys
    elif algo == "ga":
        for k, v in (("pop_size", 50), ("p_c", 0.5), ("eta_c", 15.0), ("p_m", 0.01), ("eta_m", 15.0),
                     ("tournament_size", cfg.get(o, "tournament_size"))):
            _default(cfg, o, k, v)
        cfg.emit[o] = ("algorithm",) + GA_KEYS
    elif algo == "ls":
        _default(cfg, o, "step_fraction", cfg.get(o, "step_fraction"))
        cfg.emit[o] = ("algorithm", "step_fraction")
    else:
        cfg.emit[o] = ("algorithm",)


def validate(cfg: Config) -> None:
    """Cross-key checks and kind-dependent defaults.

    Afterwards every key that affects the run is resolved, and
    :meth:`Config.to_ini` writes exactly those keys.
    """
    src = cfg.source
    kind = cfg.get("experiment", "kind")
    if kind not in KINDS:
        raise ConfigError(f"[experiment] kind must be one of {', '.join(KINDS)}", None, src)
    if not cfg.get("experiment", "name"):
        cfg.set("experiment", "name", kind)
    if not re.fullmatch(r"[\w.-]+", cfg.get("experiment", "name")):
        raise ConfigError("[experiment] name may only contain letters, digits, '.', '-' and '_'", None, src)
    if cfg.get("experiment", "repeats") < 1:
        raise ConfigError("repeats must be at least 1", None, src)
    if cfg.get("experiment", "jobs") < 1:
        raise ConfigError("jobs must be at least 1", None, src)
    budget = cfg.get("experiment", "budget")
    if budget is not None and budget <= 0:
        raise ConfigError("budget must be positive", None, src)
    if cfg.get("experiment", "checkpoint") <= 0:
        raise ConfigError("checkpoint must be positive", None, src)
    seed = cfg.get("experiment", "seed")
    if not 0 <= seed < 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer", None, src)
    algo = cfg.get("optimizer", "algorithm")
    allowed = {
        "bench": ("cpso", "gbest", "lbest", "ga", "ls"),
        "moo": ("polyploid", "nsga2"),
        "ident": ("cpso", "gbest", "lbest", "ga", "ls", "truth"),
    }
    cfg.emit = {}
    if kind in allowed:
        if algo not in allowed[kind]:
            raise ConfigError(f"[optimizer] algorithm must be one of {', '.join(allowed[kind])} "
                              f"for {kind} experiments", None, src)
        if kind in ("bench", "moo") and not cfg.get("problem", "function"):
            raise ConfigError("[problem] function is required", None, src)
        setup = None
        if kind == "bench":
            setup = _resolve_bench(cfg, src)
        elif kind == "moo":
            _resolve_moo(cfg, src)
        else:
            _default(cfg, "experiment", "budget", 10_000)
        if kind != "moo":
            _resolve_optimizer(cfg, kind, setup)
        for k in PROBLEM_KEYS[kind]:
            _default(cfg, "problem", k, cfg.get("problem", k))
        cfg.emit["problem"] = PROBLEM_KEYS[kind]
    elif kind == "schema":
        if cfg.get("schema", "rounding") not in ("floor", "nearest"):
            raise ConfigError("[schema] rounding must be floor or nearest", None, src)
        if cfg.get("schema", "table") not in ("ratio", "shape"):
            raise ConfigError("[schema] table must be ratio or shape", None, src)
        cfg.emit["schema"] = tuple(SCHEMA["schema"])
    else:
        cfg.emit["influence"] = tuple(SCHEMA["influence"])
    cfg.emit["experiment"] = tuple(k for k in EXPERIMENT_KEYS if cfg.get("experiment", k) is not None)
    for section, keys in cfg.emit.items():
        for k in keys:
            _default(cfg, section, k, cfg.get(section, k))
