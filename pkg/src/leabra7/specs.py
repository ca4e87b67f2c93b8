"""Parameter records for units, layers and projections.

Every spec is a frozen dataclass that validates itself on construction, so an
invalid spec can never reach a network. Parameter names follow Emergent's.
"""
from __future__ import annotations

import ast
import configparser
import dataclasses
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Tuple, Union

import numpy as np

#: Per-unit attributes that can be observed or logged on a layer.
UNIT_ATTRS = (
    "unit_net",
    "unit_i_net",
    "unit_v_m",
    "unit_v_m_eq",
    "unit_act",
    "unit_spike",
    "unit_adapt",
    "unit_gc_i",
    "unit_avg_ss",
    "unit_avg_s",
    "unit_avg_m",
    "unit_avg_l",
)

#: Whole-layer attributes that can be observed or logged.
LAYER_ATTRS = ("avg_act", "avg_net", "fbi", "gc_i", "acts_p_avg")

#: Per-connection attributes that can be observed or logged on a projection.
CONN_ATTRS = ("conn_wt", "conn_fwt", "conn_dwt")

FREQUENCIES = ("cycle", "trial", "epoch")


class SpecError(ValueError):
    """Raised when a spec field violates its bound.

    Attributes:
      field: Name of the offending field.
    """

    def __init__(self, field_name: str, message: str) -> None:
        super().__init__("{0}: {1}".format(field_name, message))
        self.field = field_name


def _check(ok: bool, name: str, message: str) -> None:
    if not ok:
        raise SpecError(name, message)


def _in_unit_interval(spec: Any, name: str, *, open_low: bool = False,
                      open_high: bool = False) -> None:
    value = getattr(spec, name)
    low_ok = value > 0 if open_low else value >= 0
    high_ok = value < 1 if open_high else value <= 1
    bounds = "{0}0, 1{1}".format("(" if open_low else "[",
                                  ")" if open_high else "]")
    _check(math.isfinite(value) and low_ok and high_ok, name,
           "must lie in {0}, got {1!r}".format(bounds, value))


def _positive(spec: Any, name: str) -> None:
    value = getattr(spec, name)
    _check(math.isfinite(value) and value > 0, name,
           "must be > 0, got {0!r}".format(value))


def _non_negative(spec: Any, name: str) -> None:
    value = getattr(spec, name)
    _check(math.isfinite(value) and value >= 0, name,
           "must be >= 0, got {0!r}".format(value))


# Weight distributions ------------------------------------------------------


@dataclass(frozen=True)
class Uniform:
    """Uniform distribution on [low, high]."""
    low: float
    high: float

    def validate(self) -> None:
        _check(self.low <= self.high, "dist",
               "Uniform low must not exceed high")

    def sample(self, rng: np.random.Generator, size: Any) -> np.ndarray:
        return np.clip(rng.uniform(self.low, self.high, size=size), 0.0, 1.0)


@dataclass(frozen=True)
class Constant:
    """Every sample equals ``value``."""
    value: float

    def validate(self) -> None:
        _check(math.isfinite(self.value), "dist", "Constant must be finite")

    def sample(self, rng: np.random.Generator, size: Any) -> np.ndarray:
        return np.clip(np.full(size, self.value, dtype=float), 0.0, 1.0)


@dataclass(frozen=True)
class Gaussian:
    """Normal distribution, clipped to [0, 1]."""
    mean: float
    sd: float

    def validate(self) -> None:
        _check(self.sd >= 0, "dist", "Gaussian sd must be >= 0")

    def sample(self, rng: np.random.Generator, size: Any) -> np.ndarray:
        return np.clip(rng.normal(self.mean, self.sd, size=size), 0.0, 1.0)


Distribution = Union[Uniform, Constant, Gaussian]

_DISTS = {"Uniform": Uniform, "Constant": Constant, "Gaussian": Gaussian}


def parse_dist(text: str) -> Distribution:
    """Parses strings like ``"Uniform(0.25, 0.75)"`` into a distribution."""
    match = re.fullmatch(r"\s*(\w+)\s*\((.*)\)\s*", text)
    if match is None or match.group(1) not in _DISTS:
        raise SpecError("dist", "cannot parse distribution {0!r}".format(text))
    args = ast.literal_eval("(" + match.group(2) + ",)")
    return _DISTS[match.group(1)](*(float(a) for a in args))


# Specs ---------------------------------------------------------------------


@dataclass(frozen=True)
class UnitSpec:
    """Unit dynamics parameters."""
    integ: float = 1.0
    net_dt: float = 0.7
    vm_dt: float = 1 / 3.3
    ss_dt: float = 0.5
    s_dt: float = 0.5
    m_dt: float = 0.1
    adapt_dt: float = 1 / 144
    l_dn_dt: float = 0.4
    l_up_inc: float = 0.2
    e_rev_e: float = 1.0
    e_rev_l: float = 0.3
    e_rev_i: float = 0.25
    gc_l: float = 0.1
    spk_thr: float = 0.5
    v_m_r: float = 0.3
    vm_gain: float = 0.04
    spike_gain: float = 0.005
    # noisy x/(x+1)
    act_gain: float = 100.0
    act_sd: float = 0.005

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        _positive(self, "integ")
        for name in ("net_dt", "vm_dt", "ss_dt", "s_dt", "m_dt", "l_dn_dt"):
            _in_unit_interval(self, name, open_low=True)
        # adapt_dt=0 switches adaptation off entirely
        _in_unit_interval(self, "adapt_dt")
        for name in ("l_up_inc", "gc_l", "vm_gain", "spike_gain"):
            _non_negative(self, name)
        _positive(self, "act_gain")
        _positive(self, "act_sd")
        _check(self.e_rev_i <= self.e_rev_l, "e_rev_i",
               "must not exceed e_rev_l")
        _check(self.e_rev_l < self.spk_thr, "e_rev_l",
               "must be below spk_thr")
        _check(self.spk_thr < self.e_rev_e, "spk_thr",
               "must be below e_rev_e")
        _check(self.v_m_r < self.spk_thr, "v_m_r", "must be below spk_thr")


def _check_log_attrs(spec: Any, allowed: Tuple[str, ...]) -> None:
    for freq in FREQUENCIES:
        name = "log_on_" + freq
        attrs = getattr(spec, name)
        _check(not isinstance(attrs, str), name,
               "must be a sequence of attribute names, not a string")
        for attr in attrs:
            _check(attr in allowed, name,
                   "unknown attribute {0!r}".format(attr))


def _freeze_logs(spec: Any) -> None:
    for freq in FREQUENCIES:
        name = "log_on_" + freq
        value = getattr(spec, name)
        if not isinstance(value, (str, tuple)):
            object.__setattr__(spec, name, tuple(value))


@dataclass(frozen=True)
class LayerSpec:
    """Layer inhibition and logging parameters.

    ``inhibition_combine`` selects how feedforward and feedback inhibition
    are merged into ``gc_i``: ``"product"`` multiplies them, ``"sum"`` adds
    them as in Emergent.
    """
    gi: float = 1.8
    ff: float = 1.0
    ff0: float = 0.1
    fb: float = 1.0
    fb_dt: float = 1 / 1.4
    inhibition_type: str = "fffb"
    inhibition_combine: str = "product"
    k: int = 1
    log_on_cycle: Tuple[str, ...] = ()
    log_on_trial: Tuple[str, ...] = ()
    log_on_epoch: Tuple[str, ...] = ()
    unit_spec: UnitSpec = field(default_factory=UnitSpec)

    def __post_init__(self) -> None:
        _freeze_logs(self)
        self.validate()

    def validate(self) -> None:
        for name in ("gi", "ff", "ff0", "fb"):
            _non_negative(self, name)
        _in_unit_interval(self, "fb_dt", open_low=True)
        _check(self.inhibition_type in ("fffb", "kwta"), "inhibition_type",
               "must be 'fffb' or 'kwta', got {0!r}".format(
                   self.inhibition_type))
        _check(self.inhibition_combine in ("product", "sum"),
               "inhibition_combine", "must be 'product' or 'sum', got "
               "{0!r}".format(self.inhibition_combine))
        _check(isinstance(self.k, (int, np.integer)) and self.k >= 1, "k",
               "must be a positive integer, got {0!r}".format(self.k))
        _check_log_attrs(self, UNIT_ATTRS + LAYER_ATTRS)
        _check(isinstance(self.unit_spec, UnitSpec), "unit_spec",
               "must be a UnitSpec")


@dataclass(frozen=True)
class ProjnSpec:
    """Projection learning parameters.

    ``cos_diff_lrate`` and ``cos_diff_thr_l_mix`` are accepted so configs
    written for Leabra7 load unchanged, but they have no effect.
    """
    lrate: float = 0.02
    dist: Distribution = Uniform(0.25, 0.75)
    thr_l_mix: float = 0.1
    s_mix: float = 0.9
    sig_offset: float = 1.0
    sig_gain: float = 6.0
    wt_scale_rel: float = 1.0
    d_rev: float = 0.1
    cos_diff_lrate: bool = False
    cos_diff_thr_l_mix: bool = False
    log_on_cycle: Tuple[str, ...] = ()
    log_on_trial: Tuple[str, ...] = ()
    log_on_epoch: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if isinstance(self.dist, str):
            object.__setattr__(self, "dist", parse_dist(self.dist))
        _freeze_logs(self)
        self.validate()

    def validate(self) -> None:
        _non_negative(self, "lrate")
        _check(isinstance(self.dist, (Uniform, Constant, Gaussian)), "dist",
               "must be Uniform, Constant or Gaussian")
        self.dist.validate()
        _in_unit_interval(self, "thr_l_mix")
        _in_unit_interval(self, "s_mix")
        _in_unit_interval(self, "d_rev", open_low=True, open_high=True)
        _positive(self, "sig_offset")
        _positive(self, "sig_gain")
        _positive(self, "wt_scale_rel")
        _check_log_attrs(self, CONN_ATTRS)


AnySpec = Union[UnitSpec, LayerSpec, ProjnSpec]


def validate_spec(spec: AnySpec) -> AnySpec:
    """Re-checks every invariant of ``spec`` and returns it unchanged.

    Raises:
      SpecError: naming the first field that is out of range.
    """
    if not isinstance(spec, (UnitSpec, LayerSpec, ProjnSpec)):
        raise TypeError("not a spec: {0!r}".format(spec))
    if isinstance(spec, LayerSpec):
        validate_spec(spec.unit_spec)
    spec.validate()
    return spec


def spec_to_dict(spec: AnySpec) -> Dict[str, Any]:
    """Plain-data view of a spec, suitable for JSON."""
    out: Dict[str, Any] = {}
    for f in dataclasses.fields(spec):
        value = getattr(spec, f.name)
        if isinstance(value, UnitSpec):
            value = spec_to_dict(value)
        elif isinstance(value, (Uniform, Constant, Gaussian)):
            value = {"type": type(value).__name__, **dataclasses.asdict(value)}
        elif isinstance(value, tuple):
            value = list(value)
        out[f.name] = value
    return out


def unit_spec_from_dict(data: Mapping[str, Any]) -> UnitSpec:
    return UnitSpec(**data)


def layer_spec_from_dict(data: Mapping[str, Any]) -> LayerSpec:
    data = dict(data)
    if "unit_spec" in data and not isinstance(data["unit_spec"], UnitSpec):
        data["unit_spec"] = UnitSpec(**data["unit_spec"])
    return LayerSpec(**data)


def projn_spec_from_dict(data: Mapping[str, Any]) -> ProjnSpec:
    data = dict(data)
    dist = data.get("dist")
    if isinstance(dist, Mapping):
        dist = dict(dist)
        data["dist"] = _DISTS[dist.pop("type")](**dist)
    return ProjnSpec(**data)


def _parse_value(text: str) -> Any:
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text.strip()


def read_config(path: Union[str, Path]) -> Dict[str, Dict[str, Any]]:
    """Reads an INI-style key-value config file.

    Values are Python literals (``0.3``, ``("unit_act",)``, ``True``);
    anything that is not a literal is kept as a string, which is how
    distributions such as ``Uniform(0.25, 0.75)`` are written.

    Returns:
      A mapping from section name to its parsed key-value pairs.
    """
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keep key case
    with open(path) as f:
        parser.read_file(f)
    return {
        section: {k: _parse_value(v) for k, v in parser[section].items()}
        for section in parser.sections()
    }


def override(spec: AnySpec, values: Mapping[str, Any]) -> AnySpec:
    """Returns a copy of ``spec`` with ``values`` replaced, re-validated."""
    known = {f.name for f in dataclasses.fields(spec)}
    for key in values:
        if key not in known:
            raise SpecError(key, "unknown parameter for {0}".format(
                type(spec).__name__))
    return dataclasses.replace(spec, **dict(values))
