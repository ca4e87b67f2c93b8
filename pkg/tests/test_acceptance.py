"""Acceptance criteria, one test per criterion.

Each test records a ``criterion N [PASS|FAIL]`` line, printed in the
terminal summary. The training criteria are marked ``slow``.
"""
import math
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

import leabra7 as lb
from leabra7 import layer as ly
from leabra7 import unit as un
from leabra7.harness import datasets as ds
from leabra7.harness import experiments as ex
from leabra7.projection import contrast_enhance, xcal

SEEDS = range(5)
CASES = settings(max_examples=10_000, deadline=None, derandomize=True,
                 suppress_health_check=list(HealthCheck))


# 1. two neurons -------------------------------------------------------------


def test_two_neurons_dynamics(record_criterion):
    ex.two_neurons(cycles=2)  # load compiled kernels outside the timing
    start = time.perf_counter()
    net = ex.two_neurons(cycles=200, weight=0.5)
    elapsed = time.perf_counter() - start
    p = net.logs("cycle", "output").parts
    act, spike = p["act"].values, p["spike"].values
    gc_i, adapt = p["gc_i"].values, p["adapt"].values

    spikes = np.flatnonzero(spike)
    has_spike = len(spikes) > 0
    first = spikes[0] if has_spike else 0
    peak = int(np.argmax(act))
    rises = (has_spike and np.all(act[:first] == 0) and peak > first and
             np.all(np.diff(act[first - 1:peak + 1]) > 0))
    active = np.maximum.accumulate(act > 0)
    gated = np.all(active[gc_i > 0])
    before = np.r_[0.0, adapt[:-1]]
    spike_steps = np.all(adapt[spikes] >= before[spikes])
    # informational: windows of several cycles that hold one spike
    loose = sum(1 for a in range(len(adapt)) for b in range(a, len(adapt))
                if spike[a:b + 1].any() and adapt[b] < before[a])

    ok = has_spike and rises and gated and spike_steps and elapsed < 1
    record_criterion(
        1, "two-neuron dynamics", ok,
        "{0} spikes, first at cycle {1}; act 0 -> {2:.3f} rising until cycle "
        "{3}; gc_i gated by activity: {4}; adapt non-decreasing across "
        "spike cycles: {5} ({6} multi-cycle windows dip); {7:.3f} s".format(
            len(spikes), first + 1, act.max(), peak + 1, gated, spike_steps,
            loose, elapsed))


# 2-4. pattern tasks ---------------------------------------------------------


def run_patterns(task, exp, build):
    data = ds.builtin_patterns(task)
    results = []
    for seed in SEEDS:
        start = time.perf_counter()
        net = build(exp, 4, 2, seed)
        report = ex.train(net, data, exp)
        results.append((seed, ex.converged(report), len(report),
                        time.perf_counter() - start))
    return results


def describe(results):
    return "; ".join("seed {0}: {1} after {2} epochs ({3:.0f} s)".format(
        seed, "converged" if ok else "not converged", n, t)
                     for seed, ok, n, t in results)


@pytest.mark.slow
def test_pattern_association(record_criterion):
    exp = ex.pat_assoc_experiment()
    assert exp.num_epochs == 3000
    results = run_patterns("pat_assoc", exp, ex.build_two_layer)
    wins = sum(ok for _, ok, _, _ in results)
    fast = all(t < 300 for *_, t in results)
    record_criterion(2, "pattern association >= 4/5 seeds",
                     wins >= 4 and fast,
                     "{0}/5. {1}".format(wins, describe(results)))


@pytest.mark.slow
def test_negative_control(record_criterion):
    exp = ex.pat_assoc_experiment()
    exp.num_epochs = 1000
    results = run_patterns("err_hidden", exp, ex.build_two_layer)
    wins = sum(ok for _, ok, _, _ in results)
    record_criterion(3, "no-hidden net fails err_hidden for 5/5 seeds",
                     wins == 0,
                     "{0}/5 converged. {1}".format(wins, describe(results)))


@pytest.mark.slow
def test_error_driven_hidden(record_criterion):
    exp = ex.err_hidden_experiment()
    assert exp.num_epochs == 3000 and exp.feedback.wt_scale_rel == 0.3
    results = run_patterns("err_hidden", exp, ex.build_hidden)
    wins = sum(ok for _, ok, _, _ in results)
    record_criterion(4, "hidden + feedback learns err_hidden >= 3/5 seeds",
                     wins >= 3, "{0}/5. {1}".format(wins, describe(results)))


# 5. IRIS ---------------------------------------------------------------------


@pytest.mark.slow
def test_iris(record_criterion):
    features, labels = ds.load_iris_table()
    width = ds.preprocess_iris(features, labels, bins=10, seed=0).X.shape[1]
    train_acc, test_acc, times = [], [], []
    for seed in SEEDS:
        start = time.perf_counter()
        exp = ex.iris_experiment()
        assert (exp.hidden, exp.test_frac, exp.num_epochs) == (23, 0.2, 500)
        data = ds.preprocess_iris(features, labels, 10, seed)
        data = data.split(exp.test_frac, seed)
        net = ex.build_hidden(exp, data.X.shape[1], data.Y.shape[1], seed)
        final = ex.train(net, data, exp).iloc[-1]
        train_acc.append(final["train_accuracy"])
        test_acc.append(final["test_accuracy"])
        times.append(time.perf_counter() - start)
    med_train, med_test = np.median(train_acc), np.median(test_acc)
    ok = (width == 36 and med_train >= 0.9 and med_test >= 0.8 and
          max(times) < 1800)
    record_criterion(
        5, "IRIS width 36, median train >= 90%, test >= 80%", ok,
        "width {0}; median train {1:.2%}, test {2:.2%}; per seed train {3}, "
        "test {4}; max {5:.0f} s/seed".format(
            width, med_train, med_test,
            ["{0:.3f}".format(a) for a in train_acc],
            ["{0:.3f}".format(a) for a in test_acc], max(times)))


# 6. equation oracles ---------------------------------------------------------


def oracle_nxx1(x, table):
    pos = (x - (-0.1)) / 1e-4
    pos = min(max(pos, 0.0), len(table) - 1.0)
    i = min(int(math.floor(pos)), len(table) - 2)
    return table[i] + (pos - i) * (table[i + 1] - table[i])


def oracle_trace(cycles, input_acc):
    """Single unit in a one-unit layer, written out as scalar arithmetic."""
    integ, net_dt, vm_dt = 1.0, 0.7, 1 / 3.3
    ss_dt, s_dt, m_dt, adapt_dt = 0.5, 0.5, 0.1, 1 / 144
    e_rev_e, e_rev_l, e_rev_i, gc_l = 1.0, 0.3, 0.25, 0.1
    spk_thr, v_m_r, vm_gain, spike_gain = 0.5, 0.3, 0.04, 0.005
    gi, ff, ff0, fb, fb_dt = 1.8, 1.0, 0.1, 1.0, 1 / 1.4
    table = un.Nxx1().table

    net = i_net = act = spike = adapt = avg_ss = avg_s = avg_m = 0.0
    v_m = v_m_eq = e_rev_l
    fbi = 0.0
    avg_net = avg_act = 0.0
    rows = []
    for _ in range(cycles):
        ffi = ff * max(avg_net - ff0, 0)
        fbi += fb_dt * (fb * avg_act - fbi)
        gc_i = gi * (ffi * fbi)

        net += integ * net_dt * (input_acc - net)
        i_net = (net * (e_rev_e - v_m) + gc_l * (e_rev_l - v_m) + gc_i *
                 (e_rev_i - v_m))
        v_m += min(max(integ * vm_dt * i_net, -100), 100)
        i_net_eq = (net * (e_rev_e - v_m_eq) + gc_l * (e_rev_l - v_m_eq) +
                    gc_i * (e_rev_i - v_m_eq))
        v_m_eq += min(max(integ * vm_dt * i_net_eq, -100), 100)
        if v_m > spk_thr:
            spike, v_m = 1.0, v_m_r
        else:
            spike = 0.0
        if v_m_eq < spk_thr:
            new_act = oracle_nxx1(v_m_eq - spk_thr, table)
        else:
            g_e_thr = (gc_i * (e_rev_i - spk_thr) + gc_l *
                       (e_rev_l - spk_thr) - adapt) / (spk_thr - e_rev_e)
            new_act = oracle_nxx1(net - g_e_thr, table)
        act += integ * vm_dt * (new_act - act)
        adapt += (integ * adapt_dt * (vm_gain * (v_m - e_rev_l) - adapt) +
                  spike * spike_gain)
        avg_ss += integ * ss_dt * (act - avg_ss)
        avg_s += integ * s_dt * (avg_ss - avg_s)
        avg_m += integ * m_dt * (avg_s - avg_m)
        avg_net, avg_act = net, act
        rows.append(dict(net=net, i_net=i_net, v_m=v_m, v_m_eq=v_m_eq,
                         act=act, spike=spike, adapt=adapt, avg_ss=avg_ss,
                         avg_s=avg_s, avg_m=avg_m, gc_i=gc_i))
    return rows


def library_trace(cycles, input_acc, compiled):
    saved = ly.COMPILED
    ly.COMPILED = compiled
    try:
        layer = lb.Layer("unit", 1)
        rows = []
        for _ in range(cycles):
            layer.units.input_acc[:] = input_acc
            layer.activation_cycle()
            row = {k: float(getattr(layer.units, k)[0])
                   for k in ("net", "i_net", "v_m", "v_m_eq", "act", "spike",
                             "adapt", "avg_ss", "avg_s", "avg_m")}
            row["gc_i"] = layer.gc_i
            rows.append(row)
        return rows
    finally:
        ly.COMPILED = saved


def max_trace_error(a, b):
    return max(abs(x[k] - y[k]) for x, y in zip(a, b) for k in x)


def test_equation_oracles(record_criterion):
    tol = 1e-12
    checks = {}

    expected = oracle_trace(10, 0.5)
    assert any(r["spike"] for r in expected) or expected[-1]["act"] > 0
    errs = [max_trace_error(expected, library_trace(10, 0.5, False))]
    if ly.COMPILED:
        errs.append(max_trace_error(expected, library_trace(10, 0.5, True)))
    checks["ten-cycle trace"] = max(errs)

    spec = lb.LayerSpec(ff=1, ff0=0.1, fb=0.5, fb_dt=0.7, gi=2)
    checks["ffi"] = max(abs(ly.compute_ffi(0.5, spec) - 0.4),
                        abs(ly.compute_ffi(0.05, spec) - 0.0))
    checks["fbi"] = abs(ly.update_fbi(0.0, 0.5, spec) - 0.7 * 0.5 * 0.5)
    checks["gc_i"] = max(
        abs(ly.compute_gc_i(0.4, 0.5, spec) - 2 * 0.4 * 0.5),
        abs(ly.compute_gc_i(1, 1, lb.LayerSpec(gi=1.5)) - 1.5))

    th = 0.4
    checks["xcal"] = max(abs(xcal(0.0, th) - 0.0), abs(xcal(th, th) - 0.0),
                         abs(xcal(0.05 * th, th) - (-0.05 * th * 9)),
                         abs(xcal(0.9, 0.3) - 0.6))
    checks["contrast_enhance"] = max(
        abs(contrast_enhance(0.75, 1, 6) - 729 / 730),
        abs(contrast_enhance(0.5, 1, 6) - 0.5),
        abs(contrast_enhance(0.0) - 0.0), abs(contrast_enhance(1.0) - 1.0))

    pre, post = lb.Layer("pre", 1), lb.Layer("post", 1)
    projn = lb.Projection("p", pre, post,
                          lb.ProjnSpec(dist=lb.Constant(0.6), thr_l_mix=0,
                                       s_mix=0.9, lrate=0.02))
    pre.units.avg_s[:] = pre.units.avg_m[:] = post.units.avg_s[:] = 1
    post.units.avg_m[:] = 0
    projn.learn()
    srs, srm = 1 * 1, 0 * 1
    sm_mix = 0.9 * srs + 0.1 * srm
    dwt = 0.02 * (sm_mix - (0 + srm)) * (1 - 0.6)
    fwt = 0.6 + dwt
    wt = 1 / (1 + ((1 - fwt) / fwt)**6)
    checks["learn chain"] = max(abs(projn.dwt[0, 0] - dwt),
                                abs(projn.fwt[0, 0] - fwt),
                                abs(projn.wt[0, 0] - wt))

    worst = max(checks.values())
    record_criterion(6, "equation oracles within 1e-12", worst <= tol,
                     ", ".join("{0} {1:.1e}".format(k, v)
                               for k, v in checks.items()))


# 7. property suites ----------------------------------------------------------


@CASES
@given(size=st.integers(1, 4),
       drives=st.lists(st.floats(0, 5), min_size=1, max_size=30),
       clamp=st.none() | st.floats(0, 1),
       kwta=st.booleans())
def bounds_property(size, drives, clamp, kwta):
    spec = lb.LayerSpec(inhibition_type="kwta" if kwta else "fffb", k=1)
    layer = lb.Layer("l", size, spec)
    for i, drive in enumerate(drives):
        if clamp is not None and i == len(drives) // 2:
            layer.clamp(np.full(size, clamp))
        layer.units.input_acc[:] = drive * np.linspace(0.5, 1, size)
        layer.activation_cycle()
        u = layer.units
        if layer.clamped:
            # a clamp of 1 is allowed, so forced acts lie in [0, 1]
            np.testing.assert_array_equal(u.act, layer.clamp_pattern)
        else:
            assert np.all(u.act >= 0) and np.all(u.act < 1)
        for avg in (u.avg_ss, u.avg_s, u.avg_m):
            assert np.all(avg >= 0) and np.all(avg <= 1)
        assert layer.gc_i >= 0 and layer.fbi >= 0


unit_interval = st.floats(0, 1)


@CASES
@given(lrate=st.floats(0, 1), thr_l_mix=unit_interval, s_mix=unit_interval,
       seed=st.integers(0, 2**32 - 1), steps=st.integers(1, 20))
def weight_bounds_property(lrate, thr_l_mix, s_mix, seed, steps):
    rng = np.random.default_rng(seed)
    pre, post = lb.Layer("pre", 3), lb.Layer("post", 2)
    projn = lb.Projection("p", pre, post,
                          lb.ProjnSpec(lrate=lrate, thr_l_mix=thr_l_mix,
                                       s_mix=s_mix), rng)
    for _ in range(steps):
        for u in (pre.units, post.units):
            u.avg_s[:] = rng.uniform(0, 1, len(u))
            u.avg_m[:] = rng.uniform(0, 1, len(u))
            u.avg_l[:] = rng.uniform(0, 3, len(u))
        projn.learn()
        assert np.all((projn.fwt >= 0) & (projn.fwt <= 1))
        assert np.all((projn.wt >= 0) & (projn.wt <= 1))


@CASES
@given(x=st.floats(0.001, 0.999), dx=st.floats(1e-6, 0.5),
       gain=st.floats(0.5, 10))
def sigmoid_property(x, dx, gain):
    y = min(x + dx, 0.999)
    assume(y - x >= 1e-6)
    lo, hi = contrast_enhance(x, 1, gain), contrast_enhance(y, 1, gain)
    assert lo <= hi
    # strict wherever doubles can still tell the two apart
    if 1e-12 < lo and hi < 1 - 1e-12:
        assert lo < hi
    assert abs(contrast_enhance(0.5, 1, gain) - 0.5) < 1e-15


@CASES
@given(th=st.floats(0.01, 2), d_rev=st.floats(0.01, 0.99))
def xcal_continuity_property(th, d_rev):
    knee = th * d_rev
    meet = -th * (1 - d_rev)
    eps = 1e-9
    assert abs(xcal(knee, th, d_rev) - meet) < 1e-12
    slope = (1 - d_rev) / d_rev + 1
    assert abs(xcal(knee - eps, th, d_rev) - meet) <= slope * eps * 1.01
    assert abs(xcal(knee + eps, th, d_rev) - meet) <= slope * eps * 1.01


@CASES
@given(data=st.data(), size=st.integers(2, 8))
def kwta_property(data, size):
    net = np.array(data.draw(st.lists(st.floats(0.05, 2), min_size=size,
                                      max_size=size)))
    adapt = np.array(data.draw(st.lists(st.floats(0, 0.01), min_size=size,
                                        max_size=size)))
    k = data.draw(st.integers(1, size - 1))
    spec = lb.UnitSpec()
    thr = np.sort(ly.gc_i_thresholds(net, adapt, spec))
    assume(np.all(np.diff(thr) > 1e-9))
    # the k-th strongest unit must be able to fire without inhibition,
    # otherwise no gc_i >= 0 leaves k units above threshold
    assume(thr[::-1][k - 1] > 0)
    gc_i = ly.kwta_gc_i(net, adapt, k, spec)
    # brute force: count units above their own threshold conductance
    count = sum(1 for j in range(size)
                if net[j] > (gc_i * (0.25 - 0.5) + 0.1 * (0.3 - 0.5) -
                             adapt[j]) / (0.5 - 1.0))
    assert count == k


def random_net(seed, sizes, cycles):
    net = lb.Net(seed=seed)
    for i, size in enumerate(sizes):
        net.new_layer("l{0}".format(i), size,
                      lb.LayerSpec(inhibition_combine="sum" if i else
                                   "product"))
    for i in range(1, len(sizes)):
        net.new_projn("p{0}".format(i), "l{0}".format(i - 1),
                      "l{0}".format(i))
    net.clamp_layer("l0", np.linspace(0, 1, sizes[0]))
    if cycles:
        net.minus_phase_cycle(cycles)
        net.plus_phase_cycle(cycles)
        net.learn()
    return net


_TMP = tempfile.TemporaryDirectory()


@CASES
@given(seed=st.integers(0, 2**32 - 1),
       sizes=st.lists(st.integers(1, 4), min_size=1, max_size=3),
       cycles=st.integers(0, 5))
def round_trip_property(seed, sizes, cycles):
    net = random_net(seed, sizes, cycles)
    path = Path(_TMP.name) / "net.bin"
    net.save(path)
    copy = lb.load(path)
    assert copy.to_dict() == net.to_dict()
    for name, layer in net.layers.items():
        np.testing.assert_array_equal(copy.layers[name].units.block,
                                      layer.units.block)
    for name, projn in net.projns.items():
        np.testing.assert_array_equal(copy.projns[name].wt, projn.wt)


@CASES
@given(seed=st.integers(0, 2**32 - 1),
       sizes=st.lists(st.integers(1, 4), min_size=2, max_size=3),
       cycles=st.integers(1, 5))
def determinism_property(seed, sizes, cycles):
    a, b = random_net(seed, sizes, cycles), random_net(seed, sizes, cycles)
    for name in a.layers:
        np.testing.assert_array_equal(a.layers[name].units.block,
                                      b.layers[name].units.block)
    for name in a.projns:
        np.testing.assert_array_equal(a.projns[name].fwt, b.projns[name].fwt)


PROPERTIES = {
    "act/average bounds": bounds_property,
    "fwt/wt in [0, 1]": weight_bounds_property,
    "sigmoid monotone, 0.5 fixed": sigmoid_property,
    "xcal continuity": xcal_continuity_property,
    "kwta exact k": kwta_property,
    "save/load round trip": round_trip_property,
    "fixed-seed determinism": determinism_property,
}


@pytest.mark.slow
def test_property_suites(record_criterion):
    outcomes = {}
    for name, prop in PROPERTIES.items():
        start = time.perf_counter()
        try:
            prop()
            outcomes[name] = "ok ({0:.0f} s)".format(time.perf_counter() -
                                                     start)
        except Exception as err:  # recorded, then reported as a failure
            outcomes[name] = "FAILED: {0}".format(
                str(err).splitlines()[0] if str(err) else type(err).__name__)
    ok = all(v.startswith("ok") for v in outcomes.values())
    record_criterion(7, "property suites, 10000 cases each", ok,
                     "; ".join("{0}: {1}".format(k, v)
                               for k, v in outcomes.items()))
