"""Layers: groups of units sharing inhibition, clamping and aggregates."""
from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from leabra7 import _kernels
from leabra7 import unit as un
from leabra7.specs import LayerSpec, SpecError

#: Rate of the running average of plus-phase layer activation.
ACTS_P_AVG_DT = 0.5

#: Where kWTA places gc_i between the k-th and (k+1)-th unit thresholds.
KWTA_PT = 0.25

#: Use the compiled cycle kernel when numba is available.
COMPILED = _kernels.AVAILABLE


class ClampError(ValueError):
    pass


def compute_ffi(avg_net: float, spec: LayerSpec) -> float:
    """Feedforward inhibition from the layer's mean net input."""
    return spec.ff * max(avg_net - spec.ff0, 0.0)


def update_fbi(fbi: float, avg_act: float, spec: LayerSpec) -> float:
    """One Euler step of feedback inhibition toward ``fb * avg_act``."""
    return fbi + spec.fb_dt * (spec.fb * avg_act - fbi)


def compute_gc_i(ffi: float, fbi: float, spec: LayerSpec) -> float:
    """Layer inhibitory conductance from its feedforward and feedback parts."""
    if spec.inhibition_combine == "sum":
        return spec.gi * (ffi + fbi)
    return spec.gi * (ffi * fbi)


def gc_i_thresholds(net, adapt, spec: un.UnitSpec) -> np.ndarray:
    """Per unit, the inhibitory conductance that puts it exactly at threshold.

    This inverts ``g_e_theta`` in ``gc_i``: a unit has ``net > g_e_theta``
    exactly when the layer's ``gc_i`` is below its value here.
    """
    net = np.asarray(net, dtype=float)
    return (net * (spec.e_rev_e - spec.spk_thr) + spec.gc_l *
            (spec.e_rev_l - spec.spk_thr) - adapt) / (spec.spk_thr -
                                                      spec.e_rev_i)


def kwta_gc_i(net, adapt, k: int, spec: un.UnitSpec) -> float:
    """k-winner-take-all inhibition.

    Places ``gc_i`` a quarter of the way from the (k+1)-th highest unit
    threshold up to the k-th, so the top k units stay above threshold.
    """
    size = len(net)
    if not 1 <= k <= size:
        raise SpecError("k", "must lie in [1, {0}], got {1}".format(size, k))
    if k == size:
        return 0.0
    thr = np.sort(gc_i_thresholds(net, adapt, spec))[::-1]
    gc_i = thr[k] + KWTA_PT * (thr[k - 1] - thr[k])
    return max(float(gc_i), 0.0)


class Layer:
    """A named group of units.

    Args:
      name: The layer name.
      size: Number of units.
      spec: Inhibition, logging and unit parameters.
    """

    def __init__(self, name: str, size: int,
                 spec: Optional[LayerSpec] = None) -> None:
        if size < 1:
            raise ValueError("layer size must be >= 1, got {0}".format(size))
        self.name = name
        self.size = size
        self.spec = spec if spec is not None else LayerSpec()
        if self.spec.inhibition_type == "kwta" and not 1 <= self.spec.k <= size:
            raise SpecError("k", "must lie in [1, {0}], got {1}".format(
                size, self.spec.k))
        self.unit_spec = self.spec.unit_spec
        self.act_fn = un.Nxx1(self.unit_spec.act_gain, self.unit_spec.act_sd)
        self.units = un.UnitState.at_rest(size, self.unit_spec)
        self._params = _kernels.pack_params(self.unit_spec)

        self.fbi = 0.0
        self.gc_i = 0.0
        self.avg_net = 0.0
        self.avg_act = 0.0
        self.acts_p_avg = 0.0
        self.clamped = False
        self.clamp_pattern = np.zeros(size)

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return "Layer(name={0!r}, size={1})".format(self.name, self.size)

    def clamp(self, acts: Iterable[float]) -> None:
        """Forces unit activations to ``acts`` until unclamped."""
        pattern = np.array(acts, dtype=float).ravel()
        if pattern.shape != (self.size,):
            raise ClampError("layer {0!r} has {1} units, got a pattern of "
                             "length {2}".format(self.name, self.size,
                                                  len(pattern)))
        if np.any((pattern < 0) | (pattern > 1)) or not np.all(
                np.isfinite(pattern)):
            raise ClampError("clamp activations must lie in [0, 1]")
        self.clamp_pattern = pattern
        self.clamped = True
        self.units.act[:] = pattern
        self.update_aggregates()

    def unclamp(self) -> None:
        self.clamped = False

    def update_aggregates(self) -> None:
        self.avg_net = float(np.mean(self.units.net))
        self.avg_act = float(np.mean(self.units.act))

    def update_inhibition(self) -> None:
        """Sets ``gc_i`` from the current aggregates."""
        if self.spec.inhibition_type == "kwta":
            self.gc_i = kwta_gc_i(self.units.net, self.units.adapt,
                                  self.spec.k, self.unit_spec)
            return
        ffi = compute_ffi(self.avg_net, self.spec)
        self.fbi = update_fbi(self.fbi, self.avg_act, self.spec)
        self.gc_i = compute_gc_i(ffi, self.fbi, self.spec)

    def activation_cycle(self) -> None:
        """Advances every unit one step.

        Inhibition comes from the aggregates at the start of the cycle.
        Clamped units keep their pattern activation and skip the membrane,
        spike and adaptation steps, but still integrate net input and
        update their cycle averages.
        """
        self.update_inhibition()
        if COMPILED:
            self.avg_net, self.avg_act = _kernels.layer_cycle(
                self.units.block, self._params, self.gc_i, self.clamped,
                self.clamp_pattern, self.act_fn.table)
        else:
            self._numpy_cycle()

    def _numpy_cycle(self) -> None:
        u, spec = self.units, self.unit_spec
        un.integrate_net(u, spec)
        if self.clamped:
            u.act[:] = self.clamp_pattern
            u.spike[:] = 0.0
        else:
            un.update_membrane(u, self.gc_i, spec)
            un.update_spike_and_act(u, self.gc_i, spec, self.act_fn)
            un.update_adapt(u, spec)
        un.update_cycle_averages(u, spec)
        self.update_aggregates()

    def end_plus_phase(self) -> None:
        """Trial bookkeeping: plus-phase activation average and avg_l."""
        self.acts_p_avg += ACTS_P_AVG_DT * (self.avg_act - self.acts_p_avg)
        un.update_avg_l(self.units, self.acts_p_avg, self.unit_spec)

    def get(self, attr: str) -> np.ndarray:
        """Current value of a loggable attribute.

        Unit attributes come back as a per-unit array, layer attributes as a
        scalar.
        """
        if attr == "unit_gc_i":
            return np.full(self.size, self.gc_i)
        if attr.startswith("unit_"):
            return getattr(self.units, attr[len("unit_"):]).copy()
        return getattr(self, attr)
