"""Hardware constants, tunable knobs and the flat key/value config format."""

from __future__ import annotations

import configparser
import enum
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np

TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """Invalid or incomplete configuration. ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
        self.msg = message


class Level(enum.Enum):
    MICRO = "micro"
    MACRO = "macro"
    BILLED = "billed"

    @classmethod
    def parse(cls, value: "Level | str") -> "Level":
        if isinstance(value, Level):
            return value
        aliases = {"microscopic": "micro", "macroscopic": "macro"}
        v = str(value).strip().lower()
        return cls(aliases.get(v, v))


@dataclass(frozen=True)
class PhysicalConstants:
    """Rates are angular (rad/s); power prefactors in W s^2."""

    kappa1: float
    kappa_b: float
    nth_m: float
    nth_b: float
    p_const: float
    d_const: float
    z_const: float
    c_const: float
    g_l: float
    eta: float
    a1: float
    a2: float
    a3: float

    def __post_init__(self):
        for name in ("kappa1", "kappa_b", "g_l", "p_const", "d_const", "z_const", "c_const", "a3"):
            if not getattr(self, name) > 0:
                raise ConfigError(name, "must be strictly positive")
        for name in ("nth_m", "nth_b", "a1", "a2"):
            if not getattr(self, name) >= 0:
                raise ConfigError(name, "must be non-negative")
        if not 0 < self.eta <= 1:
            raise ConfigError("eta", "must lie in (0, 1]")

    @property
    def l_const(self) -> float:
        return self.p_const / 4

    @property
    def memory_thermal(self) -> float:
        return 1 + 2 * self.nth_m

    @property
    def buffer_thermal(self) -> float:
        return 1 + 2 * self.nth_b


@dataclass(frozen=True)
class MacroFactors:
    M_p: float
    M_d: float
    M_z: float
    M_c: float
    M_l: float

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) >= 1:
                raise ConfigError(f.name, "attenuation factor must be >= 1")


@dataclass(frozen=True)
class OperatingPoint:
    """Tunable knobs. Numeric fields may be numpy arrays that broadcast together,
    which is how grid sweeps evaluate many points through one code path."""

    alpha: Any
    kappa2_ratio: Any
    epsilon_z: Any
    g_cnot: Any
    level: Level = Level.MACRO

    def __post_init__(self):
        object.__setattr__(self, "level", Level.parse(self.level))
        checks = (
            ("alpha", np.all(np.asarray(self.alpha) > 0), "must be > 0"),
            ("kappa2_ratio", np.all(np.asarray(self.kappa2_ratio) >= 100), "must be >= 100"),
            ("epsilon_z", np.all(np.asarray(self.epsilon_z) > 0), "must be > 0"),
            ("g_cnot", np.all(np.asarray(self.g_cnot) > 0), "must be > 0"),
        )
        for key, ok, msg in checks:
            if not ok:
                raise ConfigError(key, msg)

    def with_(self, **kw) -> "OperatingPoint":
        return replace(self, **kw)


@dataclass(frozen=True)
class CodeConfig:
    d_c: int = 1
    n_b: int | None = None
    enabled: bool = False

    def __post_init__(self):
        if self.d_c < 1 or self.d_c % 2 == 0:
            raise ConfigError("d_c", f"distance must be an odd integer >= 1, got {self.d_c}")
        if self.n_b is not None and self.n_b < 1:
            raise ConfigError("n_b", "must be >= 1 (omit for no QEC rounds)")


class Scenario(enum.Enum):
    CURRENT = "current"
    PARTIALLY_OPTIMIZED = "partially_optimized"
    FULLY_OPTIMIZED = "fully_optimized"


@dataclass(frozen=True)
class BilledScenario:
    name: Scenario
    power_per_qubit: float

    def __post_init__(self):
        if not self.power_per_qubit > 0:
            raise ConfigError(f"billed.{self.name.value}.power_per_qubit_w", "must be > 0")


@dataclass(frozen=True)
class MachineSpec:
    name: str
    energy_per_flop: float
    rmax: float


@dataclass(frozen=True)
class ModelOptions:
    g_cnot_mode: str = "matched"  # "matched" | "fixed"
    schedule: str = "serial"  # "serial" | "parallel"
    idle_error: bool = False
    include_readout_fidelity: bool = False

    def __post_init__(self):
        if self.g_cnot_mode not in ("matched", "fixed"):
            raise ConfigError("g_cnot_mode", "expected 'matched' or 'fixed'")
        if self.schedule not in ("serial", "parallel"):
            raise ConfigError("schedule", "expected 'serial' or 'parallel'")
        if self.idle_error:
            raise ConfigError("idle_error", "idle decoherence is not modeled; only 'off' is supported")


@dataclass(frozen=True)
class Config:
    pc: PhysicalConstants
    mf: MacroFactors
    op: OperatingPoint
    code: CodeConfig
    scenario: BilledScenario | None = None
    scenarios: Mapping[Scenario, BilledScenario] = field(default_factory=dict)
    machines: Mapping[str, MachineSpec] = field(default_factory=dict)
    options: ModelOptions = ModelOptions()

    def __iter__(self):
        return iter((self.pc, self.mf, self.op, self.code, self.scenario))


def derived_kappa2(pc: PhysicalConstants, op: OperatingPoint):
    return op.kappa2_ratio * pc.kappa1


def epsilon_d(pc: PhysicalConstants, op: OperatingPoint):
    """Buffer drive amplitude needed to hold the cat at amplitude alpha."""
    k2 = derived_kappa2(pc, op)
    return (np.abs(op.alpha) ** 2 + pc.kappa1 / k2) * np.sqrt(pc.kappa_b * k2) / 2


# ---------------------------------------------------------------- config I/O

# config key -> (target, attribute, scale). Frequencies are stored /2pi in Hz.
_PC_KEYS = {
    "kappa1_over_2pi_hz": ("kappa1", TWO_PI),
    "kappa_b_over_2pi_hz": ("kappa_b", TWO_PI),
    "nth_m": ("nth_m", 1.0),
    "nth_b": ("nth_b", 1.0),
    "p_const": ("p_const", 1.0),
    "d_const": ("d_const", 1.0),
    "z_const": ("z_const", 1.0),
    "c_const": ("c_const", 1.0),
    "g_l_over_2pi_hz": ("g_l", TWO_PI),
    "eta": ("eta", 1.0),
    "a1": ("a1", 1.0),
    "a2": ("a2", 1.0),
    "a3": ("a3", 1.0),
}
_MF_KEYS = ("M_p", "M_d", "M_z", "M_c", "M_l")
_OP_KEYS = {
    "alpha": ("alpha", 1.0),
    "kappa2_ratio": ("kappa2_ratio", 1.0),
    "epsilon_z_over_2pi_hz": ("epsilon_z", TWO_PI),
    "g_cnot_over_2pi_hz": ("g_cnot", TWO_PI),
}


def _parse_value(raw: str) -> Any:
    s = raw.strip()
    low = s.lower()
    if low in ("true", "on", "yes"):
        return True
    if low in ("false", "off", "no"):
        return False
    if low in ("none", "inf", "infinity"):
        return None
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s.strip("\"'")


def parse_config_text(text: str) -> dict[str, Any]:
    parser = configparser.ConfigParser(
        interpolation=None, comment_prefixes=("#", ";"), inline_comment_prefixes=("#",)
    )
    parser.optionxform = str  # keep key case (M_p etc.)
    parser.read_string("[config]\n" + text)
    return {k: _parse_value(v) for k, v in parser["config"].items()}


def _num(values: Mapping[str, Any], key: str) -> float:
    if key not in values:
        raise ConfigError(key, "missing required key")
    v = values[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"expected a number, got {v!r}")
    return float(v)


def _with_config_keys(cls, kw: dict, keys: Mapping[str, tuple[str, float]]):
    """Construct ``cls`` and report validation errors under the config key name."""
    try:
        return cls(**kw)
    except ConfigError as e:
        for key, (attr, _) in keys.items():
            if attr == e.key:
                raise ConfigError(key, e.msg) from None
        raise


def config_from_mapping(values: Mapping[str, Any]) -> Config:
    pc_kw = {attr: _num(values, key) * scale for key, (attr, scale) in _PC_KEYS.items()}
    pc = _with_config_keys(PhysicalConstants, pc_kw, _PC_KEYS)
    if "l_const" in values and _num(values, "l_const") != pc.l_const:
        raise ConfigError("l_const", "must equal p_const / 4")

    mf_kw = {k: _num(values, k) for k in ("M_p", "M_d", "M_z")}
    mf_kw["M_c"] = _num(values, "M_c") if "M_c" in values else mf_kw["M_p"]
    mf_kw["M_l"] = _num(values, "M_l") if "M_l" in values else mf_kw["M_p"]
    mf = MacroFactors(**mf_kw)

    op_kw = {attr: _num(values, key) * scale for key, (attr, scale) in _OP_KEYS.items()}
    op_kw["level"] = Level.parse(values.get("level", "macro"))
    op = _with_config_keys(OperatingPoint, op_kw, _OP_KEYS)

    d_c = values.get("d_c", 1)
    if not isinstance(d_c, int) or isinstance(d_c, bool):
        raise ConfigError("d_c", f"expected an integer, got {d_c!r}")
    n_b = values.get("n_b")
    code = CodeConfig(d_c=d_c, n_b=n_b, enabled=bool(values.get("qec_enabled", d_c > 1)))

    scenarios = {}
    for sc in Scenario:
        key = f"billed.{sc.value}.power_per_qubit_w"
        if key in values:
            scenarios[sc] = BilledScenario(sc, _num(values, key))
    scenario = None
    if values.get("billed_scenario"):
        name = str(values["billed_scenario"]).lower()
        try:
            scenario = scenarios[Scenario(name)]
        except (ValueError, KeyError):
            raise ConfigError("billed_scenario", f"no configured power for scenario {name!r}") from None

    machines = {}
    names = sorted({k.split(".")[1] for k in values if k.startswith("machine.")})
    for name in names:
        prefix = f"machine.{name}."
        if prefix + "energy_per_flop_j" in values:
            epf = _num(values, prefix + "energy_per_flop_j")
        elif prefix + "gflops_per_watt" in values:
            epf = 1.0 / (_num(values, prefix + "gflops_per_watt") * 1e9)
        else:
            epf = _num(values, prefix + "power_w") / _num(values, prefix + "rmax_flops")
        machines[name] = MachineSpec(
            str(values.get(prefix + "label", name)), epf, _num(values, prefix + "rmax_flops")
        )

    options = ModelOptions(
        g_cnot_mode=str(values.get("g_cnot_mode", "matched")),
        schedule=str(values.get("schedule", "serial")),
        idle_error=bool(values.get("idle_error", False)),
        include_readout_fidelity=bool(values.get("include_readout_fidelity", False)),
    )
    return Config(pc, mf, op, code, scenario, scenarios, machines, options)


def load_config(path: str | Path) -> Config:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"file not found: {path}")
    return config_from_mapping(parse_config_text(path.read_text(encoding="utf-8")))


def default_config_path() -> Path:
    return Path(__file__).with_name("default.cfg")


def default_config() -> Config:
    return load_config(default_config_path())


def _unscale(x: float, scale: float) -> float:
    """Configured value whose product with ``scale`` reproduces ``x`` exactly."""
    guess = x / scale
    if scale == 1.0 or guess * scale == x:
        return guess
    lo = hi = guess
    for _ in range(8):
        lo, hi = math.nextafter(lo, -math.inf), math.nextafter(hi, math.inf)
        for cand in (lo, hi):
            if cand * scale == x:
                return cand
    return guess


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "none"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def config_to_mapping(cfg: Config) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, (attr, scale) in _PC_KEYS.items():
        out[key] = _unscale(getattr(cfg.pc, attr), scale)
    for key in _MF_KEYS:
        out[key] = getattr(cfg.mf, key)
    for key, (attr, scale) in _OP_KEYS.items():
        out[key] = _unscale(float(getattr(cfg.op, attr)), scale)
    out["level"] = cfg.op.level.value
    out["d_c"] = cfg.code.d_c
    out["n_b"] = cfg.code.n_b
    out["qec_enabled"] = cfg.code.enabled
    for sc, b in cfg.scenarios.items():
        out[f"billed.{sc.value}.power_per_qubit_w"] = b.power_per_qubit
    if cfg.scenario is not None:
        out["billed_scenario"] = cfg.scenario.name.value
    for key, m in cfg.machines.items():
        out[f"machine.{key}.label"] = m.name
        out[f"machine.{key}.energy_per_flop_j"] = m.energy_per_flop
        out[f"machine.{key}.rmax_flops"] = m.rmax
    o = cfg.options
    out.update(
        g_cnot_mode=o.g_cnot_mode,
        schedule=o.schedule,
        idle_error=o.idle_error,
        include_readout_fidelity=o.include_readout_fidelity,
    )
    return out


def dump_config(cfg: Config) -> str:
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in config_to_mapping(cfg).items())
