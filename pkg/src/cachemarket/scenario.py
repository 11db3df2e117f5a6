"""Scenario configs: TOML schema, presets, dB handling, sweeps.

Keys ending in ``_db`` are ratios in dB; ``sigma2_dbm`` is a power in dBm.
Both are converted to linear scale once, here, and never downstream.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, field, fields, replace

import tomli
import tomli_w

from .caching import CatalogParams
from .delay import DelayBudget, QueueParams
from .errors import ParameterError
from .geometry import NetworkParams
from .market import InpParams

MNO_KEYS = ("label", "bandwidth", "subchannels", "xi", "eta")
SECTIONS = {"network": NetworkParams, "catalog": CatalogParams, "queue": QueueParams,
            "budget": DelayBudget, "inp": InpParams}


class ConfigError(ParameterError):
    exit_code = 2


@dataclass(frozen=True)
class SolverOptions:
    coverage_method: str = "closed_form"
    omega: float = 10.0  # price seen by followers in mno-solve
    omega0: float = 1.0
    tol: float = 1e-9
    max_iter: int = 200


@dataclass(frozen=True)
class Sweep:
    variable: str  # "section.field"
    grid: tuple = ()


@dataclass(frozen=True)
class Scenario:
    network: NetworkParams = field(default_factory=NetworkParams)
    catalog: CatalogParams = field(default_factory=CatalogParams)
    queue: QueueParams = field(default_factory=QueueParams)
    budget: DelayBudget = field(default_factory=DelayBudget)
    inp: InpParams = field(default_factory=InpParams)
    mnos: tuple = ({"label": "mno1"},)
    sweep: Sweep | None = None
    solver: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        if not self.mnos:
            raise ConfigError("scenario needs at least one MNO")
        for m in self.mnos:
            bad = set(m) - set(MNO_KEYS)
            if bad:
                raise ConfigError(f"unknown MNO override(s): {sorted(bad)}")
        if self.inp.k_mnos != len(self.mnos):
            object.__setattr__(self, "inp", self.inp.with_(k_mnos=len(self.mnos)))
        if self.sweep is not None:
            _split_var(self.sweep.variable)

    def mno_network(self, k: int) -> NetworkParams:
        over = {key: v for key, v in self.mnos[k].items() if key != "label"}
        return self.network.with_(**over)

    def labels(self) -> tuple:
        return tuple(m.get("label", f"mno{k + 1}") for k, m in enumerate(self.mnos))

    def set(self, variable: str, value) -> "Scenario":
        """Copy with one scalar replaced; ``mnos.K.key`` addresses MNO K (0-based)."""
        sec, key = _split_var(variable)
        if sec == "mnos":
            idx, sub = key.split(".", 1)
            mnos = [dict(m) for m in self.mnos]
            mnos[int(idx)][sub] = value
            return replace(self, mnos=tuple(mnos))
        return replace(self, **{sec: replace(getattr(self, sec), **{key: value})})

    def points(self):
        """(value, scenario) for each sweep point; a single (None, self) without a sweep."""
        if self.sweep is None:
            return [(None, self)]
        return [(v, self.set(self.sweep.variable, v)) for v in self.sweep.grid]


def _split_var(variable: str):
    if "." not in variable:
        raise ConfigError(f"sweep variable must look like 'section.field', got {variable!r}")
    sec, key = variable.split(".", 1)
    if sec == "mnos":
        idx, _, sub = key.partition(".")
        if not idx.isdigit() or sub not in MNO_KEYS:
            raise ConfigError(f"bad MNO variable {variable!r}")
        return sec, key
    if sec == "solver":
        cls = SolverOptions
    elif sec in SECTIONS:
        cls = SECTIONS[sec]
    else:
        raise ConfigError(f"unknown section {sec!r} in {variable!r}")
    if key not in {f.name for f in fields(cls)}:
        raise ConfigError(f"{cls.__name__} has no field {key!r}")
    return sec, key


def db_to_linear(x: float) -> float:
    return 10.0 ** (x / 10.0)


def dbm_to_watt(x: float) -> float:
    return 10.0 ** ((x - 30.0) / 10.0)


def _section(cls, raw: dict, name: str):
    raw = dict(raw)
    names = {f.name for f in fields(cls)}
    for key in list(raw):
        if key.endswith("_dbm"):
            base = key[:-4]
            conv = dbm_to_watt
        elif key.endswith("_db"):
            base = key[:-3]
            conv = db_to_linear
        else:
            continue
        if base in raw:
            raise ConfigError(f"[{name}] sets both {base} and {key}")
        raw[base] = conv(float(raw.pop(key)))
    unknown = set(raw) - names
    if unknown:
        raise ConfigError(f"[{name}] unknown key(s): {sorted(unknown)}")
    try:
        return cls(**raw)
    except TypeError as exc:
        raise ConfigError(f"[{name}] {exc}") from exc


def _merge(base_vals: dict, raw: dict) -> dict:
    """File values over base values; a dB key in the file replaces the base's linear value."""
    out = dict(base_vals)
    for key in raw:
        for suffix in ("_dbm", "_db"):
            if key.endswith(suffix):
                out.pop(key[: -len(suffix)], None)
    out.update(raw)
    return out


def from_dict(data: dict, base: Scenario | None = None) -> Scenario:
    base = base or Scenario()
    unknown = set(data) - set(SECTIONS) - {"mnos", "sweep", "solver"}
    if unknown:
        raise ConfigError(f"unknown top-level table(s): {sorted(unknown)}")
    kw = {}
    for name, cls in SECTIONS.items():
        if name in data:
            kw[name] = _section(cls, _merge(asdict(getattr(base, name)), data[name]), name)
    if "solver" in data:
        kw["solver"] = _section(SolverOptions, _merge(asdict(base.solver), data["solver"]), "solver")
    if "mnos" in data:
        kw["mnos"] = tuple(dict(m) for m in data["mnos"])
    if "sweep" in data:
        sw = data["sweep"]
        if set(sw) - {"variable", "grid"} or "variable" not in sw:
            raise ConfigError("[sweep] needs 'variable' and optional 'grid'")
        kw["sweep"] = Sweep(sw["variable"], tuple(sw.get("grid", ())))
    try:
        return replace(base, **kw)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc


def loads(text: str, base: Scenario | None = None) -> Scenario:
    """Parse TOML text. A top-level ``preset = "name"`` selects the base scenario."""
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    if "preset" in data:
        base = preset_scenario(data.pop("preset"))
    return from_dict(data, base)


def load(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text)


def to_dict(sc: Scenario) -> dict:
    out = {name: asdict(getattr(sc, name)) for name in SECTIONS}
    out["inp"].pop("k_mnos")  # always the MNO count
    out["solver"] = asdict(sc.solver)
    out["mnos"] = [dict(m) for m in sc.mnos]
    if sc.sweep is not None:
        out["sweep"] = {"variable": sc.sweep.variable, "grid": list(sc.sweep.grid)}
    return out


def dumps(sc: Scenario) -> str:
    return tomli_w.dumps(to_dict(sc))


def config_hash(sc: Scenario) -> str:
    return hashlib.sha256(dumps(sc).encode()).hexdigest()[:16]


def baseline() -> Scenario:
    """Single-MNO baseline radio, catalogue and queue constants."""
    net = NetworkParams(p=1.0, sigma2=dbm_to_watt(-150.0), alpha=5.0, t_bar=db_to_linear(10.0),
                        lam=1e-4, subchannels=6, bandwidth=1e9, xi=60 / (math.pi * 500**2), eta=0.014)
    return Scenario(
        network=net,
        catalog=CatalogParams(F=100_000, nu=2.0, S=0, x_f=1e9),
        queue=QueueParams(m=1, tau=5e-3, phi=0.8, c_a=2.0, c_s=1.0),
        budget=DelayBudget(d_th=1e-3, gamma=0.1),
        inp=InpParams(theta=10.0, p_circuit=1.0, k_mnos=1, p=1.0),
        mnos=({"label": "mno1", "bandwidth": 1e9},),
    )


def three_mno(nu: float = 2.0) -> Scenario:
    base = baseline()
    mnos = tuple({"label": f"mno{k + 1}", "bandwidth": w} for k, w in enumerate((3e8, 5e8, 1e9)))
    return replace(base, catalog=base.catalog.with_(nu=nu), mnos=mnos)


PRESETS = {
    "baseline": baseline,
    "three-mno": three_mno,
    # the leader's problem needs nu > 2 for a finite price
    "market": lambda: three_mno(nu=3.0),
}


def preset_scenario(name: str) -> Scenario:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
