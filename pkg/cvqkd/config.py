"""Session configuration: defaults, flat `key = value` files, CVQKD_* environment, CLI flags."""
from __future__ import annotations

import dataclasses
import os
import pathlib
from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Optional, Tuple, Union

from .errors import ConfigError, DomainError
from .keyrate import FiniteSizeParams, parse_mode
from .model import DeviceUncertainty, ProtocolParams, db_to_transmittance, km_to_db
from .simulator import Fractions, ModulationGrid

ENV_PREFIX = "CVQKD_"


def _optional(parse: Callable[[str], object]) -> Callable[[str], object]:
    def inner(raw: str):
        return None if raw.strip().lower() in ("", "none") else parse(raw)
    return inner


def _tuple(parse: Callable[[str], object]) -> Callable[[str], tuple]:
    def inner(raw: str) -> tuple:
        return tuple(parse(tok.strip()) for tok in raw.split(",") if tok.strip())
    return inner


def _int(raw: str) -> int:
    value = float(raw)
    if value != int(value):
        raise ValueError(f"{raw!r} is not an integer")
    return int(value)


_PARSERS: Dict[str, Callable[[str], object]] = {
    "session_id": str,
    "seed": _int,
    "distance_km": _optional(float),
    "loss_db": _optional(float),
    "alpha_db_per_km": float,
    "pulses": _int,
    "block_pulses": _int,
    "rep_rate": float,
    "eta": float,
    "v_el": float,
    "delta_eta": float,
    "delta_v_el": float,
    "xi_true": float,
    "beta": float,
    "xi_schedule": _tuple(float),
    "shot_noise_fraction": float,
    "pe_fraction": float,
    "truncation": float,
    "modulation_bits": _int,
    "catalog": str,
    "security_modes": _tuple(str),
    "eps_pe": float,
    "eps_pa": float,
    "eps_bar": float,
    "eps_total": float,
    "delta_constant": float,
    "max_iters": _int,
    "llr_clamp": float,
    "adaptation_fraction": float,
    "pa_block_bits": _int,
    "finite_block_sizes": _tuple(_int),
    "output_dir": str,
}


@dataclass(frozen=True)
class SessionConfig:
    """Every knob of a simulated session. Defaults are the calibrated device values of the reference link."""

    session_id: str = "session"
    seed: int = 0
    distance_km: Optional[float] = 25.0
    loss_db: Optional[float] = None
    alpha_db_per_km: float = 0.2
    pulses: int = 1_000_000
    block_pulses: int = 0
    rep_rate: float = 1e6
    eta: float = 0.552
    v_el: float = 0.015
    delta_eta: float = 0.0
    delta_v_el: float = 0.0
    xi_true: float = 0.01
    beta: float = 0.95
    xi_schedule: Tuple[float, ...] = ()
    shot_noise_fraction: float = 0.5
    pe_fraction: float = 0.5
    truncation: float = 7.0
    modulation_bits: int = 8
    catalog: str = "codes/catalog.txt"
    security_modes: Tuple[str, ...] = ("asymptotic",)
    eps_pe: float = 1e-10
    eps_pa: float = 1e-10
    eps_bar: float = 1e-10
    eps_total: float = 1e-10
    delta_constant: float = 7.0
    max_iters: int = 200
    llr_clamp: float = 50.0
    adaptation_fraction: float = 0.10
    pa_block_bits: int = 1_000_000
    finite_block_sizes: Tuple[int, ...] = (10**9, 10**8)
    output_dir: str = ""

    def __post_init__(self) -> None:
        def need(ok: bool, key: str, msg: str) -> None:
            if not ok:
                raise ConfigError(f"{key}: {msg} (got {getattr(self, key)!r})")

        need(self.distance_km is not None or self.loss_db is not None, "distance_km", "distance_km or loss_db is required")
        if self.distance_km is not None:
            need(self.distance_km >= 0, "distance_km", "must be non-negative")
        if self.loss_db is not None:
            need(self.loss_db >= 0, "loss_db", "must be non-negative")
        need(self.alpha_db_per_km > 0, "alpha_db_per_km", "must be positive")
        need(self.pulses >= 1, "pulses", "must be positive")
        need(self.block_pulses >= 0, "block_pulses", "must be non-negative")
        need(self.rep_rate > 0, "rep_rate", "must be positive")
        need(0 < self.eta <= 1, "eta", "must lie in (0, 1]")
        need(self.v_el >= 0, "v_el", "must be non-negative")
        need(self.delta_eta >= 0 and self.eta - self.delta_eta > 0, "delta_eta", "must be non-negative and below eta")
        need(self.delta_v_el >= 0, "delta_v_el", "must be non-negative")
        need(self.xi_true >= 0, "xi_true", "must be non-negative")
        need(0 < self.beta <= 1, "beta", "must lie in (0, 1]")
        need(all(x >= 0 for x in self.xi_schedule), "xi_schedule", "values must be non-negative")
        need(0 <= self.shot_noise_fraction < 1, "shot_noise_fraction", "must lie in [0, 1)")
        need(0 < self.pe_fraction < 1, "pe_fraction", "must lie in (0, 1)")
        need(self.truncation >= 5, "truncation", "must be at least 5")
        need(self.modulation_bits >= 4, "modulation_bits", "must be at least 4")
        need(bool(self.security_modes), "security_modes", "at least one mode is required")
        for mode in self.security_modes:
            try:
                parse_mode(mode)
            except DomainError:
                raise ConfigError(f"security_modes: unknown mode {mode!r}") from None
        for key in ("eps_pe", "eps_pa", "eps_bar"):
            need(0 < getattr(self, key) <= self.eps_total, key, "must lie in (0, eps_total]")
        need(0 < self.eps_total < 1, "eps_total", "must lie in (0, 1)")
        need(self.delta_constant > 0, "delta_constant", "must be positive")
        need(self.max_iters >= 1, "max_iters", "must be positive")
        need(self.llr_clamp > 0, "llr_clamp", "must be positive")
        need(0 <= self.adaptation_fraction <= 0.5, "adaptation_fraction", "must lie in [0, 0.5]")
        need(self.pa_block_bits >= 1, "pa_block_bits", "must be positive")
        need(all(n >= 2 * 10_000 for n in self.finite_block_sizes), "finite_block_sizes", "blocks must hold >= 2e4 pulses")

    # layering

    @classmethod
    def from_mapping(cls, values: Mapping[str, str], base: Optional["SessionConfig"] = None, source: str = "") -> "SessionConfig":
        changes = {}
        for key, raw in values.items():
            if key not in _PARSERS:
                raise ConfigError(f"{key}: unknown configuration key{' in ' + source if source else ''}")
            try:
                changes[key] = _PARSERS[key](raw)
            except ValueError as exc:
                raise ConfigError(f"{key}: cannot parse {raw!r} ({exc})") from None
        return dataclasses.replace(base or cls(), **changes)

    @classmethod
    def from_file(cls, path: Union[str, pathlib.Path], base: Optional["SessionConfig"] = None) -> "SessionConfig":
        path = pathlib.Path(path)
        values: Dict[str, str] = {}
        for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
        return cls.from_mapping(values, base, str(path))

    @classmethod
    def from_env(cls, base: Optional["SessionConfig"] = None, environ: Optional[Mapping[str, str]] = None) -> "SessionConfig":
        environ = os.environ if environ is None else environ
        values = {
            key[len(ENV_PREFIX):].lower(): value
            for key, value in environ.items()
            if key.startswith(ENV_PREFIX) and key[len(ENV_PREFIX):].lower() in _PARSERS
        }
        return cls.from_mapping(values, base, "environment")

    @classmethod
    def load(
        cls,
        path: Optional[Union[str, pathlib.Path]] = None,
        overrides: Optional[Mapping[str, object]] = None,
        environ: Optional[Mapping[str, str]] = None,
    ) -> "SessionConfig":
        cfg = cls()
        if path is not None:
            cfg = cls.from_file(path, cfg)
        cfg = cls.from_env(cfg, environ)
        return cfg.with_overrides(**(overrides or {}))

    def with_overrides(self, **changes: object) -> "SessionConfig":
        changes = {k: v for k, v in changes.items() if v is not None}
        unknown = set(changes) - set(_PARSERS)
        if unknown:
            raise ConfigError(f"{sorted(unknown)[0]}: unknown configuration key")
        if "loss_db" in changes and "distance_km" not in changes:
            changes["distance_km"] = None
        if "distance_km" in changes and "loss_db" not in changes:
            changes["loss_db"] = None
        return dataclasses.replace(self, **changes)

    # derived views

    @property
    def loss(self) -> float:
        if self.loss_db is not None:
            return self.loss_db
        return km_to_db(self.distance_km, self.alpha_db_per_km)

    @property
    def distance(self) -> float:
        if self.distance_km is not None:
            return self.distance_km
        return self.loss_db / self.alpha_db_per_km

    @property
    def transmittance(self) -> float:
        return db_to_transmittance(self.loss)

    @property
    def uncertainty(self) -> DeviceUncertainty:
        return DeviceUncertainty(self.delta_eta, self.delta_v_el)

    @property
    def fractions(self) -> Fractions:
        return Fractions(self.shot_noise_fraction, self.pe_fraction)

    @property
    def grid(self) -> ModulationGrid:
        return ModulationGrid(self.truncation, self.modulation_bits)

    def xi_for_block(self, block: int) -> float:
        if self.xi_schedule:
            return self.xi_schedule[block % len(self.xi_schedule)]
        return self.xi_true

    def channel(self, v_a: float, xi: float) -> ProtocolParams:
        return ProtocolParams(v_a=v_a, t=self.transmittance, xi=xi, eta=self.eta, v_el=self.v_el)

    def finite_params(self, n_total: int) -> FiniteSizeParams:
        return FiniteSizeParams.from_block(
            n_total,
            self.pe_fraction,
            eps_pe=self.eps_pe,
            eps_pa=self.eps_pa,
            eps_bar=self.eps_bar,
            eps_total=self.eps_total,
            delta_constant=self.delta_constant,
        )

    def as_dict(self) -> Dict[str, object]:
        return dataclasses.asdict(self)
