"""The network: construction, cycling, phases, learning, logging, persistence."""
from __future__ import annotations

import hashlib
import json
import struct
from collections import OrderedDict
from pathlib import Path
from typing import Dict, Iterable, List, NamedTuple, Optional, Union

import numpy as np
import pandas as pd

from leabra7 import specs
from leabra7.layer import Layer
from leabra7.projection import Projection
from leabra7.specs import LayerSpec, ProjnSpec
from leabra7.unit import STATE_VARS

#: Leading bytes of every saved network file.
MAGIC = b"LEABRA7\x00"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sI32sQ")


class NetworkError(ValueError):
    pass


class NetworkFileError(NetworkError):
    pass


class Logs(NamedTuple):
    """Logged observations of one object at one frequency.

    Attributes:
      whole: Object-level attributes, one row per capture.
      parts: Per-unit (or per-connection) attributes, one row per part per
        capture.
    """
    whole: pd.DataFrame
    parts: pd.DataFrame


def _short(attr: str) -> str:
    for prefix in ("unit_", "conn_"):
        if attr.startswith(prefix):
            return attr[len(prefix):]
    return attr


class _Log:
    """Capture buffer for one object at one frequency."""

    def __init__(self, attrs, part_attrs, whole_attrs, index) -> None:
        self.part_attrs = [a for a in attrs if a in part_attrs]
        self.whole_attrs = [a for a in attrs if a in whole_attrs]
        self.index = index  # part-index columns -> arrays
        self.whole_rows: List[Dict[str, float]] = []
        self.part_chunks: List[Dict[str, np.ndarray]] = []

    def capture(self, obj, time: int) -> None:
        if self.whole_attrs:
            row = {"time": time}
            row.update({a: obj.get(a) for a in self.whole_attrs})
            self.whole_rows.append(row)
        if self.part_attrs:
            n = len(next(iter(self.index.values())))
            chunk = {"time": np.full(n, time)}
            chunk.update(self.index)
            chunk.update({_short(a): np.ravel(obj.get(a))
                          for a in self.part_attrs})
            self.part_chunks.append(chunk)

    def frames(self) -> Logs:
        whole = pd.DataFrame(self.whole_rows,
                             columns=["time"] + self.whole_attrs)
        part_cols = (["time"] + list(self.index) +
                     [_short(a) for a in self.part_attrs])
        if self.part_chunks:
            parts = pd.DataFrame({
                col: np.concatenate([c[col] for c in self.part_chunks])
                for col in part_cols
            })
        else:
            parts = pd.DataFrame(columns=part_cols)
        return Logs(whole, parts)


class Net:
    """A recurrent LEABRA network.

    Layers and projections are referred to by name. Time advances with
    ``cycle`` or the phase methods, and weights change only when ``learn``
    is called.

    Args:
      seed: Seed for weight initialization. Identical seeds and call
        sequences give bit-identical trajectories.
    """

    def __init__(self, seed: Optional[int] = None) -> None:
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.layers: "OrderedDict[str, Layer]" = OrderedDict()
        self.projns: "OrderedDict[str, Projection]" = OrderedDict()
        self.cycle_count = 0
        self.trial_count = 0
        self.epoch_count = 0
        self.phase = "none"
        self.logging_enabled = True
        self._logs: Dict[str, Dict[str, _Log]] = {
            freq: {} for freq in specs.FREQUENCIES
        }

    # Construction ----------------------------------------------------------

    def _check_new_name(self, name: str) -> None:
        if name in self.layers or name in self.projns:
            raise NetworkError("name {0!r} is already in use".format(name))

    def _layer(self, name: str) -> Layer:
        try:
            return self.layers[name]
        except KeyError:
            raise NetworkError("no layer named {0!r}".format(name)) from None

    def new_layer(self, name: str, size: int,
                  spec: Optional[LayerSpec] = None) -> None:
        """Adds a layer of ``size`` units at rest."""
        self._check_new_name(name)
        layer = Layer(name, size, spec)
        self.layers[name] = layer
        self._register_logs(name, layer.spec, specs.UNIT_ATTRS,
                            specs.LAYER_ATTRS,
                            {"unit": np.arange(size)})

    def new_projn(self, name: str, pre: str, post: str,
                  spec: Optional[ProjnSpec] = None) -> None:
        """Adds a full projection from layer ``pre`` to layer ``post``."""
        self._check_new_name(name)
        projn = Projection(name, self._layer(pre), self._layer(post), spec,
                           self.rng)
        self.projns[name] = projn
        post_idx, pre_idx = np.indices(projn.fwt.shape)
        self._register_logs(name, projn.spec, specs.CONN_ATTRS, (), {
            "pre_unit": pre_idx.ravel(),
            "post_unit": post_idx.ravel()
        })

    def _register_logs(self, name, spec, part_attrs, whole_attrs,
                       index) -> None:
        for freq in specs.FREQUENCIES:
            attrs = getattr(spec, "log_on_" + freq)
            self._logs[freq][name] = _Log(attrs, part_attrs, whole_attrs,
                                          index)

    # Clamping --------------------------------------------------------------

    def clamp_layer(self, name: str, acts: Iterable[float]) -> None:
        """Forces a layer's activations to ``acts`` every cycle."""
        self._layer(name).clamp(acts)

    def unclamp_layer(self, name: str) -> None:
        self._layer(name).unclamp()

    # Time ------------------------------------------------------------------

    def cycle(self) -> None:
        """Advances the network one time step.

        Every layer updates from start-of-cycle state, then every
        projection sends the new activations, which reach the receivers'
        net input on the next cycle.
        """
        for layer in self.layers.values():
            layer.activation_cycle()
        for projn in self.projns.values():
            projn.flush()
        self.cycle_count += 1
        self._capture("cycle", self.cycle_count)

    def _check_cycles(self, num_cycles: int) -> None:
        if num_cycles < 1:
            raise NetworkError(
                "num_cycles must be >= 1, got {0}".format(num_cycles))

    def minus_phase_cycle(self, num_cycles: int = 50) -> None:
        """Runs the minus (expectation) phase of a trial."""
        self._check_cycles(num_cycles)
        self.phase = "minus"
        for _ in range(num_cycles):
            self.cycle()

    def plus_phase_cycle(self, num_cycles: int = 25) -> None:
        """Runs the plus (outcome) phase and closes the trial.

        At the end of the phase each layer updates its plus-phase activation
        average and its units' long-term averages, and trial logs are
        captured.
        """
        self._check_cycles(num_cycles)
        if self.phase != "minus":
            raise NetworkError("plus phase must follow a minus phase")
        self.phase = "plus"
        for _ in range(num_cycles):
            self.cycle()
        for layer in self.layers.values():
            layer.end_plus_phase()
        self._capture("trial", self.trial_count)
        self.trial_count += 1
        self.phase = "none"

    def learn(self) -> None:
        """Updates every projection's weights from the current averages."""
        for projn in self.projns.values():
            projn.learn()

    def end_epoch(self) -> None:
        self._capture("epoch", self.epoch_count)
        self.epoch_count += 1

    # Observation -----------------------------------------------------------

    def _object(self, name: str) -> Union[Layer, Projection]:
        if name in self.layers:
            return self.layers[name]
        if name in self.projns:
            return self.projns[name]
        raise NetworkError("no layer or projection named {0!r}".format(name))

    def observe(self, name: str, attr: str) -> pd.DataFrame:
        """Snapshot of one attribute of a layer or projection.

        Unit attributes give one row per unit (columns ``unit`` and the
        attribute name without its ``unit_`` prefix); connection attributes
        one row per connection; layer attributes a single row.
        """
        obj = self._object(name)
        if isinstance(obj, Layer):
            if attr in specs.UNIT_ATTRS:
                return pd.DataFrame({
                    "unit": np.arange(obj.size),
                    _short(attr): obj.get(attr)
                })
            if attr in specs.LAYER_ATTRS:
                return pd.DataFrame({attr: [obj.get(attr)]})
        elif attr in specs.CONN_ATTRS:
            post_idx, pre_idx = np.indices(obj.fwt.shape)
            return pd.DataFrame({
                "pre_unit": pre_idx.ravel(),
                "post_unit": post_idx.ravel(),
                _short(attr): obj.get(attr).ravel()
            })
        raise NetworkError("{0!r} has no loggable attribute {1!r}".format(
            name, attr))

    def _capture(self, freq: str, time: int) -> None:
        if not self.logging_enabled:
            return
        for name, log in self._logs[freq].items():
            if log.whole_attrs or log.part_attrs:
                log.capture(self._object(name), time)

    def logs(self, freq: str, name: str) -> Logs:
        """All observations of ``name`` logged at ``freq`` so far."""
        if freq not in specs.FREQUENCIES:
            raise NetworkError("unknown log frequency {0!r}".format(freq))
        self._object(name)
        return self._logs[freq][name].frames()

    def pause_logging(self) -> None:
        self.logging_enabled = False

    def resume_logging(self) -> None:
        self.logging_enabled = True

    # Persistence -----------------------------------------------------------

    def to_dict(self) -> dict:
        """Complete network state as plain data (logs excluded)."""
        layers = []
        for layer in self.layers.values():
            layers.append({
                "name": layer.name,
                "size": layer.size,
                "spec": specs.spec_to_dict(layer.spec),
                "units": {name: getattr(layer.units, name).tolist()
                          for name in STATE_VARS},
                "fbi": layer.fbi,
                "gc_i": layer.gc_i,
                "avg_net": layer.avg_net,
                "avg_act": layer.avg_act,
                "acts_p_avg": layer.acts_p_avg,
                "clamped": layer.clamped,
                "clamp_pattern": layer.clamp_pattern.tolist(),
            })
        projns = [{
            "name": p.name,
            "pre": p.pre.name,
            "post": p.post.name,
            "spec": specs.spec_to_dict(p.spec),
            "fwt": p.fwt.tolist(),
            "wt": p.wt.tolist(),
            "dwt": p.dwt.tolist(),
        } for p in self.projns.values()]
        return {
            "seed": self.seed,
            "rng": self.rng.bit_generator.state,
            "cycle_count": self.cycle_count,
            "trial_count": self.trial_count,
            "epoch_count": self.epoch_count,
            "phase": self.phase,
            "logging_enabled": self.logging_enabled,
            "layers": layers,
            "projns": projns,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Net":
        net = cls(seed=data["seed"])
        for d in data["layers"]:
            net.new_layer(d["name"], d["size"],
                          specs.layer_spec_from_dict(d["spec"]))
            layer = net.layers[d["name"]]
            for name in STATE_VARS:
                getattr(layer.units, name)[:] = d["units"][name]
            for key in ("fbi", "gc_i", "avg_net", "avg_act", "acts_p_avg",
                        "clamped"):
                setattr(layer, key, d[key])
            layer.clamp_pattern = np.array(d["clamp_pattern"], dtype=float)
        for d in data["projns"]:
            net.new_projn(d["name"], d["pre"], d["post"],
                          specs.projn_spec_from_dict(d["spec"]))
            projn = net.projns[d["name"]]
            for key in ("fwt", "wt", "dwt"):
                setattr(projn, key, np.array(d[key], dtype=float))
        net.rng.bit_generator.state = data["rng"]
        for key in ("cycle_count", "trial_count", "epoch_count", "phase",
                    "logging_enabled"):
            setattr(net, key, data[key])
        return net

    def save(self, path: Union[str, Path]) -> None:
        """Writes the network to a single versioned, checksummed file.

        The body is JSON; floats are written with ``repr`` precision, so
        ``load`` restores every value bit for bit.
        """
        body = json.dumps(self.to_dict(), allow_nan=True).encode("utf-8")
        header = _HEADER.pack(MAGIC, FORMAT_VERSION,
                              hashlib.sha256(body).digest(), len(body))
        with open(path, "wb") as f:
            f.write(header)
            f.write(body)


def load(path: Union[str, Path]) -> Net:
    """Reads a network written by ``Net.save``.

    Raises:
      NetworkFileError: if the file is not a network file, was written by an
        incompatible version, or is truncated or corrupted.
    """
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _HEADER.size:
        raise NetworkFileError("truncated network file")
    magic, version, digest, length = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise NetworkFileError("not a leabra7 network file")
    if version != FORMAT_VERSION:
        raise NetworkFileError(
            "unsupported network file version {0} (expected {1})".format(
                version, FORMAT_VERSION))
    body = raw[_HEADER.size:]
    if len(body) != length or hashlib.sha256(body).digest() != digest:
        raise NetworkFileError("corrupt network file payload")
    return Net.from_dict(json.loads(body.decode("utf-8")))
