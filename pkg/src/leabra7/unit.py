"""Per-unit state and the single-cycle update steps.

State is stored structure-of-arrays: a ``UnitState`` holds one float64 array
per variable, one entry per unit, so a layer updates all its units with a
handful of vectorized operations. A lone unit is simply a length-1 state.

Each update function mutates the state in place.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from leabra7.specs import UnitSpec

#: Largest change of ``v_m`` or ``v_m_eq`` allowed in one cycle.
VM_STEP_LIMIT = 100.0

#: Drive range covered by the noisy x/(x+1) lookup table, and its step.
NXX1_LOW = -0.1
NXX1_HIGH = 1.0
NXX1_STEP = 1e-4


def xx1(x: np.ndarray, gain: float) -> np.ndarray:
    """Noise-free ``gain*x / (gain*x + 1)`` for ``x > 0``, zero otherwise."""
    x = np.asarray(x, dtype=float)
    gx = gain * np.maximum(x, 0.0)
    return gx / (gx + 1.0)


@functools.lru_cache(maxsize=None)
def _nxx1_table(gain: float, sd: float) -> np.ndarray:
    n = int(round((NXX1_HIGH - NXX1_LOW) / NXX1_STEP)) + 1
    half = int(np.ceil(8 * sd / NXX1_STEP))
    offsets = np.arange(-half, half + 1) * NXX1_STEP
    kernel = np.exp(-0.5 * (offsets / sd)**2)
    kernel /= kernel.sum()
    # the convolution needs xx1 on the table range widened by the kernel
    wide = NXX1_LOW + np.arange(-half, n + half) * NXX1_STEP
    table = np.convolve(xx1(wide, gain), kernel[::-1], mode="valid")
    table.setflags(write=False)
    return table


def interp_table(x, table: np.ndarray):
    """Linear interpolation into an nxx1 table, saturating at both ends."""
    pos = (np.asarray(x, dtype=float) - NXX1_LOW) / NXX1_STEP
    pos = np.clip(pos, 0.0, len(table) - 1.0)
    i = np.minimum(np.floor(pos).astype(np.intp), len(table) - 2)
    frac = pos - i
    return table[i] + frac * (table[i + 1] - table[i])


class Nxx1:
    """The noisy x/(x+1) activation function.

    ``xx1`` convolved with a zero-mean Gaussian of standard deviation ``sd``.
    The convolution is tabulated once per (gain, sd) over drives in
    ``[NXX1_LOW, NXX1_HIGH]``; lookups interpolate linearly and saturate
    outside the table.
    """

    def __init__(self, gain: float = 100.0, sd: float = 0.005) -> None:
        self.gain = gain
        self.sd = sd
        self.table = _nxx1_table(float(gain), float(sd))

    def __call__(self, x):
        return interp_table(x, self.table)


def nxx1(x, gain: float = 100.0, sd: float = 0.005):
    """Evaluates the noisy x/(x+1) function at threshold-relative drive x."""
    return Nxx1(gain, sd)(x)


@dataclass
class UnitState:
    """Dynamical variables of a group of units (one array entry per unit).

    ``at_rest`` allocates the variables as rows of one contiguous
    ``(n_vars, size)`` block, exposed as ``block``, so compiled kernels can
    update all of them through a single array.
    """
    net: np.ndarray
    input_acc: np.ndarray
    i_net: np.ndarray
    v_m: np.ndarray
    v_m_eq: np.ndarray
    act: np.ndarray
    spike: np.ndarray
    adapt: np.ndarray
    avg_ss: np.ndarray
    avg_s: np.ndarray
    avg_m: np.ndarray
    avg_l: np.ndarray

    @classmethod
    def from_block(cls, block: np.ndarray) -> "UnitState":
        state = cls(*block)
        state.block = block
        return state

    @classmethod
    def at_rest(cls, size: int, spec: UnitSpec) -> "UnitState":
        """Units with zero activity and membranes at the leak reversal."""
        state = cls.from_block(np.zeros((len(STATE_VARS), size)))
        state.v_m[:] = spec.e_rev_l
        state.v_m_eq[:] = spec.e_rev_l
        return state

    def __len__(self) -> int:
        return len(self.act)

    def copy(self) -> "UnitState":
        return UnitState.from_block(
            np.array([getattr(self, name) for name in STATE_VARS]))


STATE_VARS = ("net", "input_acc", "i_net", "v_m", "v_m_eq", "act", "spike",
              "adapt", "avg_ss", "avg_s", "avg_m", "avg_l")


def integrate_net(u: UnitState, spec: UnitSpec) -> None:
    """Moves ``net`` toward this cycle's summed input and clears the sum."""
    u.net += spec.integ * spec.net_dt * (u.input_acc - u.net)
    u.input_acc[:] = 0.0


def net_current(v_m, net, gc_i, spec: UnitSpec):
    """Excitatory, leak and inhibitory currents summed at potential v_m."""
    return (net * (spec.e_rev_e - v_m) + spec.gc_l * (spec.e_rev_l - v_m) +
            gc_i * (spec.e_rev_i - v_m))


def update_membrane(u: UnitState, gc_i: float, spec: UnitSpec) -> None:
    """Euler step of both membrane potentials.

    ``v_m`` is reset by spikes; ``v_m_eq`` never is and integrates its own
    current.
    """
    rate = spec.integ * spec.vm_dt
    u.i_net[:] = net_current(u.v_m, u.net, gc_i, spec)
    u.v_m += np.clip(rate * u.i_net, -VM_STEP_LIMIT, VM_STEP_LIMIT)
    i_net_eq = net_current(u.v_m_eq, u.net, gc_i, spec)
    u.v_m_eq += np.clip(rate * i_net_eq, -VM_STEP_LIMIT, VM_STEP_LIMIT)


def g_e_theta(adapt, gc_i, spec: UnitSpec):
    """Excitatory conductance that holds a unit exactly at spike threshold."""
    return (gc_i * (spec.e_rev_i - spec.spk_thr) + spec.gc_l *
            (spec.e_rev_l - spec.spk_thr) - adapt) / (spec.spk_thr -
                                                      spec.e_rev_e)


def update_spike_and_act(u: UnitState, gc_i: float, spec: UnitSpec,
                         act_fn: Nxx1 = None) -> None:
    """Discrete spiking with reset, then the rate-coded activation step."""
    if act_fn is None:
        act_fn = Nxx1(spec.act_gain, spec.act_sd)
    fired = u.v_m > spec.spk_thr
    u.v_m[fired] = spec.v_m_r
    u.spike[:] = fired

    below = u.v_m_eq < spec.spk_thr
    drive = np.where(below, u.v_m_eq - spec.spk_thr,
                     u.net - g_e_theta(u.adapt, gc_i, spec))
    u.act += spec.integ * spec.vm_dt * (act_fn(drive) - u.act)


def update_adapt(u: UnitState, spec: UnitSpec) -> None:
    """Adaptation current: slow drift toward the potential term plus spikes."""
    u.adapt += (spec.integ * spec.adapt_dt *
                (spec.vm_gain * (u.v_m - spec.e_rev_l) - u.adapt) +
                u.spike * spec.spike_gain)


def update_cycle_averages(u: UnitState, spec: UnitSpec) -> None:
    """Cascade act -> avg_ss -> avg_s -> avg_m, each step using the new value."""
    u.avg_ss += spec.integ * spec.ss_dt * (u.act - u.avg_ss)
    u.avg_s += spec.integ * spec.s_dt * (u.avg_ss - u.avg_s)
    u.avg_m += spec.integ * spec.m_dt * (u.avg_s - u.avg_m)


def update_avg_l(u: UnitState, acts_p_avg: float, spec: UnitSpec) -> None:
    """Once-per-trial update of the long-term average."""
    up = u.avg_m > 0.1
    u.avg_l += np.where(up, u.avg_m * spec.l_up_inc,
                        acts_p_avg * spec.l_dn_dt * (u.avg_m - u.avg_l))
