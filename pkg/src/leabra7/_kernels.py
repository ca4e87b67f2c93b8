"""Compiled per-layer cycle.

``layer_cycle`` performs the same arithmetic, in the same order, as the
numpy update functions in ``leabra7.unit``, one unit at a time. It is used
when numba is importable; otherwise layers fall back to the numpy path.
"""
from __future__ import annotations

import numpy as np

from leabra7.specs import UnitSpec
from leabra7.unit import NXX1_LOW, NXX1_STEP, VM_STEP_LIMIT

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

AVAILABLE = numba is not None

# rows of UnitState.block
NET, INPUT_ACC, I_NET, V_M, V_M_EQ, ACT, SPIKE, ADAPT, AVG_SS, AVG_S, AVG_M, \
    AVG_L = range(12)

_PARAMS = ("integ", "net_dt", "vm_dt", "ss_dt", "s_dt", "m_dt", "adapt_dt",
           "e_rev_e", "e_rev_l", "e_rev_i", "gc_l", "spk_thr", "v_m_r",
           "vm_gain", "spike_gain")


def pack_params(spec: UnitSpec) -> np.ndarray:
    return np.array([getattr(spec, name) for name in _PARAMS], dtype=float)


def _clip(x, limit):
    if x > limit:
        return limit
    if x < -limit:
        return -limit
    return x


def _interp(x, table):
    last = table.shape[0] - 1.0
    pos = (x - NXX1_LOW) / NXX1_STEP
    if pos < 0.0:
        pos = 0.0
    elif pos > last:
        pos = last
    i = int(np.floor(pos))
    if i > table.shape[0] - 2:
        i = table.shape[0] - 2
    frac = pos - i
    return table[i] + frac * (table[i + 1] - table[i])


def _layer_cycle(s, p, gc_i, clamped, pattern, table):
    integ, net_dt, vm_dt, ss_dt, s_dt, m_dt, adapt_dt = (p[0], p[1], p[2],
                                                         p[3], p[4], p[5],
                                                         p[6])
    e_rev_e, e_rev_l, e_rev_i, gc_l, spk_thr, v_m_r = (p[7], p[8], p[9],
                                                       p[10], p[11], p[12])
    vm_gain, spike_gain = p[13], p[14]
    n = s.shape[1]
    rate = integ * vm_dt
    g_e_num = gc_i * (e_rev_i - spk_thr) + gc_l * (e_rev_l - spk_thr)
    sum_net = 0.0
    sum_act = 0.0
    for j in range(n):
        net = s[NET, j] + integ * net_dt * (s[INPUT_ACC, j] - s[NET, j])
        s[NET, j] = net
        s[INPUT_ACC, j] = 0.0
        if clamped:
            s[ACT, j] = pattern[j]
            s[SPIKE, j] = 0.0
        else:
            v_m = s[V_M, j]
            i_net = (net * (e_rev_e - v_m) + gc_l * (e_rev_l - v_m) + gc_i *
                     (e_rev_i - v_m))
            s[I_NET, j] = i_net
            v_m = v_m + _clip(rate * i_net, VM_STEP_LIMIT)
            v_eq = s[V_M_EQ, j]
            i_net_eq = (net * (e_rev_e - v_eq) + gc_l * (e_rev_l - v_eq) +
                        gc_i * (e_rev_i - v_eq))
            v_eq = v_eq + _clip(rate * i_net_eq, VM_STEP_LIMIT)
            s[V_M_EQ, j] = v_eq

            spike = 0.0
            if v_m > spk_thr:
                v_m = v_m_r
                spike = 1.0
            s[V_M, j] = v_m
            s[SPIKE, j] = spike

            adapt = s[ADAPT, j]
            if v_eq < spk_thr:
                drive = v_eq - spk_thr
            else:
                drive = net - (g_e_num - adapt) / (spk_thr - e_rev_e)
            act = s[ACT, j]
            s[ACT, j] = act + integ * vm_dt * (_interp(drive, table) - act)
            s[ADAPT, j] = adapt + (integ * adapt_dt *
                                   (vm_gain * (v_m - e_rev_l) - adapt) +
                                   spike * spike_gain)

        s[AVG_SS, j] += integ * ss_dt * (s[ACT, j] - s[AVG_SS, j])
        s[AVG_S, j] += integ * s_dt * (s[AVG_SS, j] - s[AVG_S, j])
        s[AVG_M, j] += integ * m_dt * (s[AVG_S, j] - s[AVG_M, j])
        sum_net += s[NET, j]
        sum_act += s[ACT, j]
    return sum_net / n, sum_act / n


if AVAILABLE:
    _clip = numba.njit(cache=True)(_clip)
    _interp = numba.njit(cache=True)(_interp)
    layer_cycle = numba.njit(cache=True)(_layer_cycle)
else:  # pragma: no cover
    layer_cycle = None
