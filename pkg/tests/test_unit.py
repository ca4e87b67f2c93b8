import numpy as np
import pytest
from scipy import integrate, stats

import leabra7 as lb
from leabra7 import unit as un

SPEC = lb.UnitSpec()


def state(spec=SPEC, **values):
    u = un.UnitState.at_rest(1, spec)
    for name, value in values.items():
        getattr(u, name)[:] = value
    return u


def quad_nxx1(x, gain=100.0, sd=0.005):
    """Direct numerical convolution of xx1 with a Gaussian."""
    f = lambda t: un.xx1(x - t, gain) * stats.norm.pdf(t, scale=sd)
    return integrate.quad(f, -12 * sd, 12 * sd, points=[x], limit=200)[0]


# nxx1 ------------------------------------------------------------------------


def test_nxx1_matches_numerical_convolution():
    xs = np.r_[np.linspace(-0.1, 0.1, 41), 0.3, 0.77, 1.0]
    expected = np.array([quad_nxx1(x) for x in xs])
    np.testing.assert_allclose(lb.nxx1(xs), expected, atol=2e-5)


def test_nxx1_far_below_threshold_is_zero():
    assert lb.nxx1(-1.0) < 1e-6


def test_nxx1_at_threshold_lies_between_zero_and_half():
    assert 0 < lb.nxx1(0.0) < 0.5


def test_nxx1_monotone_on_grid():
    y = lb.nxx1(np.array([-0.1, -0.05, 0, 0.01, 0.1, 1]))
    assert np.all(np.diff(y) >= 0)


def test_nxx1_saturates_below_one():
    assert lb.nxx1(1e6) < 1
    assert lb.nxx1(1e6) == lb.nxx1(un.NXX1_HIGH)


def test_xx1():
    np.testing.assert_allclose(un.xx1([-1, 0, 0.01, 1], 100),
                               [0, 0, 0.5, 100 / 101])


# net input -------------------------------------------------------------------


def test_integrate_net_from_zero():
    u = state(input_acc=1.0)
    un.integrate_net(u, SPEC)
    assert u.net[0] == pytest.approx(0.7, abs=1e-15)
    assert u.input_acc[0] == 0


def test_integrate_net_fixed_point():
    u = state(net=0.37, input_acc=0.37)
    un.integrate_net(u, SPEC)
    assert u.net[0] == 0.37


def test_integrate_net_decay():
    u = state(net=0.7)
    un.integrate_net(u, SPEC)
    assert u.net[0] == pytest.approx(0.7 - 0.7 * 0.7, abs=1e-15)


# membrane --------------------------------------------------------------------


def test_membrane_at_rest():
    u = state()
    un.update_membrane(u, 0.0, SPEC)
    assert u.i_net[0] == 0
    assert u.v_m[0] == SPEC.e_rev_l


def test_membrane_current_hand_value():
    u = state(net=0.5)
    un.update_membrane(u, 0.0, SPEC)
    i_net = 0.5 * (1.0 - 0.3) + 0.1 * (0.3 - 0.3)
    assert u.i_net[0] == pytest.approx(i_net, abs=1e-15)
    assert u.v_m[0] == pytest.approx(0.3 + i_net / 3.3, abs=1e-15)


def test_membrane_step_is_clipped():
    u = state(net=1e6)
    un.update_membrane(u, 0.0, SPEC)
    assert u.v_m[0] == 0.3 + 100
    assert u.v_m_eq[0] == 0.3 + 100


def test_v_m_eq_integrates_its_own_current():
    u = state(net=0.5, v_m=0.45, v_m_eq=0.35)
    un.update_membrane(u, 0.2, SPEC)
    i_eq = 0.5 * (1 - 0.35) + 0.1 * (0.3 - 0.35) + 0.2 * (0.25 - 0.35)
    assert u.v_m_eq[0] == pytest.approx(0.35 + i_eq / 3.3, abs=1e-15)


def test_g_e_theta_hand_values():
    assert un.g_e_theta(0.0, 0.0, SPEC) == pytest.approx(
        (0.1 * (0.3 - 0.5)) / (0.5 - 1.0), abs=1e-15)
    assert un.g_e_theta(0.0, 1.0, SPEC) == pytest.approx(
        (1 * (0.25 - 0.5) + 0.1 * (0.3 - 0.5)) / (0.5 - 1.0), abs=1e-15)
    assert un.g_e_theta(0.1, 0.0, SPEC) > un.g_e_theta(0.0, 0.0, SPEC)


# spikes and activation -------------------------------------------------------


def test_no_spike_at_threshold_exactly():
    u = state(v_m=SPEC.spk_thr)
    un.update_spike_and_act(u, 0.0, SPEC)
    assert u.spike[0] == 0
    assert u.v_m[0] == SPEC.spk_thr


def test_spike_resets_v_m():
    u = state(v_m=0.6)
    un.update_spike_and_act(u, 0.0, SPEC)
    assert u.spike[0] == 1
    assert u.v_m[0] == 0.3


def test_act_stays_near_zero_far_below_threshold():
    u = state(v_m_eq=0.0)
    un.update_spike_and_act(u, 0.0, SPEC)
    assert u.act[0] < 1e-9


def test_act_uses_rate_code_above_threshold():
    u = state(net=0.3, v_m_eq=0.6, act=0.2)
    un.update_spike_and_act(u, 0.0, SPEC)
    target = lb.nxx1(0.3 - 0.04)
    assert u.act[0] == pytest.approx(0.2 + (target - 0.2) / 3.3, abs=1e-12)


# adaptation ------------------------------------------------------------------


def test_adapt_at_rest():
    u = state()
    un.update_adapt(u, SPEC)
    assert u.adapt[0] == 0


def test_adapt_spike_increment():
    u = state(v_m=0.3, spike=1)
    un.update_adapt(u, SPEC)
    assert u.adapt[0] == pytest.approx(0.005, abs=1e-15)
    u = state(v_m=0.5, spike=1)
    un.update_adapt(u, SPEC)
    assert u.adapt[0] == pytest.approx(0.04 * 0.2 / 144 + 0.005, abs=1e-15)


def test_adapt_frozen_when_disabled():
    spec = lb.UnitSpec(adapt_dt=0, vm_gain=0, spike_gain=0)
    u = state(spec, adapt=0.3, v_m=0.45, spike=1)
    for _ in range(50):
        un.update_adapt(u, spec)
    assert u.adapt[0] == 0.3


# averages --------------------------------------------------------------------


def test_cycle_averages_fixed_point():
    u = state(act=0.4, avg_ss=0.4, avg_s=0.4, avg_m=0.4)
    un.update_cycle_averages(u, SPEC)
    assert (u.avg_ss[0], u.avg_s[0], u.avg_m[0]) == (0.4, 0.4, 0.4)


def test_cycle_averages_cascade_in_order():
    spec = lb.UnitSpec(ss_dt=1, s_dt=0.2, m_dt=0.15)
    u = state(spec, act=1.0)
    un.update_cycle_averages(u, spec)
    assert u.avg_ss[0] == 1
    assert u.avg_s[0] == pytest.approx(0.2, abs=1e-15)
    assert u.avg_m[0] == pytest.approx(0.2 * 0.15, abs=1e-15)


def test_cycle_averages_converge():
    u = state(act=0.63)
    for _ in range(200):
        un.update_cycle_averages(u, SPEC)
    for avg in (u.avg_ss, u.avg_s, u.avg_m):
        assert abs(avg[0] - 0.63) < 1e-3


def test_avg_l_up():
    spec = lb.UnitSpec(l_up_inc=0.15)
    u = state(spec, avg_m=0.5, avg_l=1.0)
    un.update_avg_l(u, 0.0, spec)
    assert u.avg_l[0] == pytest.approx(1.0 + 0.5 * 0.15, abs=1e-15)


def test_avg_l_boundary_uses_down_branch():
    u = state(avg_m=0.1, avg_l=0.3)
    un.update_avg_l(u, 0.0, SPEC)
    assert u.avg_l[0] == 0.3


def test_avg_l_down():
    u = state(avg_m=0.0, avg_l=0.5)
    un.update_avg_l(u, 0.2, SPEC)
    assert u.avg_l[0] == pytest.approx(0.5 + 0.2 * 0.4 * (0.0 - 0.5),
                                       abs=1e-15)


# state -----------------------------------------------------------------------


def test_at_rest_block_layout():
    u = un.UnitState.at_rest(3, SPEC)
    assert u.block.shape == (len(un.STATE_VARS), 3)
    u.act[1] = 0.5
    assert u.block[un.STATE_VARS.index("act"), 1] == 0.5
    np.testing.assert_array_equal(u.v_m, 0.3)
    v = u.copy()
    v.act[1] = 0.0
    assert u.act[1] == 0.5
