"""Network builders and training loops for the four demonstration tasks."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Mapping, Optional

import numpy as np
import pandas as pd

import leabra7 as lb
from leabra7.harness.datasets import Dataset
from leabra7.specs import override

logger = logging.getLogger(__name__)

TWO_NEURON_ATTRS = ("unit_v_m", "unit_act", "unit_i_net", "unit_net",
                    "unit_gc_i", "unit_adapt", "unit_spike")

#: How the task configurations combine feedforward and feedback inhibition.
#: The library default multiplies them; with that form the output layer gets
#: no inhibition while its mean net input sits below ff0, and the hidden-layer
#: and IRIS tasks do not train. The tasks therefore use the standard sum.
TASK_INHIBITION = "sum"


@dataclass
class Experiment:
    """Specs and schedule for one task.

    ``feedback`` is only used by architectures with a hidden layer: it is the
    spec of the output-to-hidden projection.
    """
    layer: lb.LayerSpec
    projn: lb.ProjnSpec
    feedback: Optional[lb.ProjnSpec] = None
    minus_cycles: int = 50
    plus_cycles: int = 25
    settle_cycles: int = 50
    num_epochs: int = 500
    checkpoint_every: int = 1
    early_stop: Optional[int] = None
    binarize: bool = False
    hidden: int = 4
    test_frac: float = 0.0


def pat_assoc_experiment() -> Experiment:
    unit = lb.UnitSpec(adapt_dt=0, vm_gain=0, spike_gain=0, ss_dt=1, s_dt=0.2,
                       m_dt=0.15, l_dn_dt=0.4, l_up_inc=0.15, vm_dt=0.3,
                       net_dt=0.7)
    return Experiment(
        layer=lb.LayerSpec(gi=1.5, ff=1, fb=0.5, fb_dt=0.7, unit_spec=unit,
                           inhibition_combine=TASK_INHIBITION),
        projn=lb.ProjnSpec(lrate=0.02, dist=lb.Uniform(0.25, 0.75),
                           thr_l_mix=0.01, cos_diff_lrate=False),
        minus_cycles=100,
        plus_cycles=20,
        num_epochs=3000,
        early_stop=3)


def err_hidden_experiment() -> Experiment:
    unit = lb.UnitSpec(adapt_dt=0, vm_gain=0, spike_gain=0, ss_dt=1, s_dt=0.2,
                       m_dt=0.1, l_dn_dt=0.4, l_up_inc=0.15, vm_dt=1 / 3.3,
                       net_dt=0.7)
    up = lb.ProjnSpec(lrate=0.04, dist=lb.Uniform(0.25, 0.75), thr_l_mix=0,
                      cos_diff_lrate=False, cos_diff_thr_l_mix=True)
    return Experiment(
        layer=lb.LayerSpec(gi=1.5, fb=1, ff=1, unit_spec=unit,
                           inhibition_combine=TASK_INHIBITION),
        projn=up,
        feedback=override(up, {"wt_scale_rel": 0.3}),
        minus_cycles=50,
        plus_cycles=20,
        num_epochs=3000,
        early_stop=3,
        hidden=4)


def iris_experiment() -> Experiment:
    unit = lb.UnitSpec(spike_gain=0, vm_gain=0, adapt_dt=0)
    return Experiment(
        layer=lb.LayerSpec(gi=1.5, ff=1, fb=1, unit_spec=unit,
                           inhibition_combine=TASK_INHIBITION),
        projn=lb.ProjnSpec(lrate=0.02, dist=lb.Uniform(0.25, 0.75),
                           cos_diff_thr_l_mix=False, cos_diff_lrate=False),
        feedback=lb.ProjnSpec(lrate=0.02, dist=lb.Uniform(0.25, 0.5),
                              wt_scale_rel=0.3, cos_diff_thr_l_mix=False,
                              cos_diff_lrate=False),
        minus_cycles=50,
        plus_cycles=25,
        num_epochs=500,
        checkpoint_every=5,
        binarize=True,
        hidden=23,
        test_frac=0.2)


EXPERIMENTS = {
    "pat_assoc": pat_assoc_experiment,
    "err_hidden": err_hidden_experiment,
    "iris": iris_experiment,
}


def apply_config(exp: Experiment,
                 config: Mapping[str, Mapping[str, Any]]) -> Experiment:
    """Overrides experiment settings from a parsed config file.

    Recognized sections are ``unit``, ``layer``, ``projn``, ``feedback`` and
    ``train``; the last sets schedule fields such as ``num_epochs``.
    """
    known = {"unit", "layer", "projn", "feedback", "train"}
    unknown = set(config) - known
    if unknown:
        raise ValueError("unknown config sections: {0}".format(
            ", ".join(sorted(unknown))))
    layer = exp.layer
    if "unit" in config:
        layer = override(layer, {
            "unit_spec": override(layer.unit_spec, config["unit"])
        })
    if "layer" in config:
        layer = override(layer, config["layer"])
    exp.layer = layer
    if "projn" in config:
        exp.projn = override(exp.projn, config["projn"])
    if "feedback" in config and exp.feedback is not None:
        exp.feedback = override(exp.feedback, config["feedback"])
    for key, value in config.get("train", {}).items():
        if not hasattr(exp, key) or key in ("layer", "projn", "feedback"):
            raise ValueError("unknown train setting {0!r}".format(key))
        setattr(exp, key, value)
    return exp


def build_two_layer(exp: Experiment, n_in: int, n_out: int,
                    seed: Optional[int] = None) -> lb.Net:
    """input -> output, no hidden layer."""
    net = lb.Net(seed=seed)
    net.new_layer("input", size=n_in, spec=exp.layer)
    net.new_layer("output", size=n_out, spec=exp.layer)
    net.new_projn("input_to_output", pre="input", post="output",
                  spec=exp.projn)
    return net


def build_hidden(exp: Experiment, n_in: int, n_out: int,
                 seed: Optional[int] = None) -> lb.Net:
    """input -> hidden <-> output, with output-to-hidden feedback."""
    net = lb.Net(seed=seed)
    net.new_layer("input", size=n_in, spec=exp.layer)
    net.new_layer("hidden", size=exp.hidden, spec=exp.layer)
    net.new_layer("output", size=n_out, spec=exp.layer)
    net.new_projn("input_to_hidden", pre="input", post="hidden",
                  spec=exp.projn)
    net.new_projn("hidden_to_output", pre="hidden", post="output",
                  spec=exp.projn)
    net.new_projn("output_to_hidden", pre="output", post="hidden",
                  spec=exp.feedback)
    return net


def two_neurons(cycles: int = 200, weight: float = 0.5,
                input_act: float = 0.95,
                spec: Optional[lb.LayerSpec] = None) -> lb.Net:
    """Runs a clamped input unit driving a single output unit.

    The output unit logs net, i_net, v_m, act, gc_i, adapt and spike each
    cycle.
    """
    if spec is None:
        spec = lb.LayerSpec(log_on_cycle=TWO_NEURON_ATTRS)
    net = lb.Net()
    net.new_layer(name="input", size=1, spec=spec)
    net.new_layer(name="output", size=1, spec=spec)
    # 0.5 is a fixed point of contrast enhancement, so fwt = wt = weight there
    net.new_projn(name="proj1", pre="input", post="output",
                  spec=lb.ProjnSpec(dist=lb.Constant(weight)))
    net.clamp_layer(name="input", acts=[input_act])
    for _ in range(cycles):
        net.cycle()
    return net


def _check_width(net: lb.Net, layer: str, pattern: np.ndarray) -> None:
    size = net.layers[layer].size
    if np.shape(pattern)[-1] != size:
        raise ValueError("pattern width {0} does not match {1!r} layer size "
                         "{2}".format(np.shape(pattern)[-1], layer, size))


def run_trial(net: lb.Net, x: Iterable[float], y: Iterable[float],
              minus_cycles: int, plus_cycles: int) -> None:
    """One learning trial: minus phase, plus phase, then a weight update."""
    _check_width(net, "input", np.asarray(x))
    _check_width(net, "output", np.asarray(y))
    net.clamp_layer("input", x)
    net.minus_phase_cycle(num_cycles=minus_cycles)
    net.clamp_layer("output", y)
    net.plus_phase_cycle(num_cycles=plus_cycles)
    net.unclamp_layer("input")
    net.unclamp_layer("output")
    net.learn()


def run_epoch(net: lb.Net, X: np.ndarray, Y: np.ndarray, minus_cycles: int,
              plus_cycles: int) -> None:
    """One pass over the samples in stored order, then an epoch tick."""
    for x, y in zip(X, Y):
        run_trial(net, x, y, minus_cycles, plus_cycles)
    net.end_epoch()


def mse_thresh(expected: np.ndarray, actual: np.ndarray) -> float:
    """Mean squared error, counting absolute errors below 0.5 as zero."""
    expected = np.asarray(expected, dtype=float)
    actual = np.asarray(actual, dtype=float)
    if expected.shape != actual.shape:
        raise ValueError("shape mismatch: {0} vs {1}".format(
            expected.shape, actual.shape))
    diff = np.abs(expected - actual)
    diff[diff < 0.5] = 0
    return float(np.mean(diff * diff))


def mse(expected: np.ndarray, actual: np.ndarray) -> float:
    return float(np.mean((np.asarray(expected) - np.asarray(actual))**2))


def accuracy(expected: np.ndarray, actual: np.ndarray) -> float:
    """Fraction of rows predicted exactly."""
    return float(np.mean(np.all(expected == actual, axis=1)))


def binarize(acts: np.ndarray) -> np.ndarray:
    """Sets the largest entry to 1 and the rest to 0; ties go to the first."""
    out = np.zeros_like(acts, dtype=float)
    out[np.argmax(acts)] = 1
    return out


def output(net: lb.Net, pattern: Iterable[float], settle_cycles: int = 50,
           binarized: bool = False) -> np.ndarray:
    """The output layer's activation after settling on one input."""
    net.clamp_layer("input", pattern)
    for _ in range(settle_cycles):
        net.cycle()
    net.unclamp_layer("input")
    out = net.observe("output", "unit_act")["act"].values
    return binarize(out) if binarized else out


def predict(net: lb.Net, X: np.ndarray, binarized: bool = False,
            settle_cycles: int = 50) -> np.ndarray:
    """Outputs for every row of ``X``. Never changes weights."""
    X = np.asarray(X, dtype=float)
    if len(X):
        _check_width(net, "input", X)
    return np.array([output(net, x, settle_cycles, binarized) for x in X])


def train(net: lb.Net, data: Dataset, exp: Experiment) -> pd.DataFrame:
    """Trains ``net`` on ``data.train`` and returns the metrics table.

    Pattern tasks record the thresholded MSE after every epoch and stop once
    it has been zero for ``exp.early_stop`` epochs in a row. Tasks with a
    test split record MSE and accuracy on both splits every
    ``exp.checkpoint_every`` epochs. Logging is paused while training.
    """
    X, Y = data.X_train, data.Y_train
    has_test = len(data.test) > 0
    columns = ["epoch", "train_loss"]
    if exp.binarize or has_test:
        columns += ["train_accuracy", "test_loss", "test_accuracy"]
    rows: List[Dict[str, float]] = []

    net.pause_logging()
    perfect = 0
    for i in range(exp.num_epochs):
        run_epoch(net, X, Y, exp.minus_cycles, exp.plus_cycles)
        if (i + 1) % exp.checkpoint_every:
            continue
        pred = predict(net, X, exp.binarize, exp.settle_cycles)
        row = {"epoch": i}
        if len(columns) == 2:
            row["train_loss"] = mse_thresh(Y, pred)
            logger.info("Epoch %d/%d. Train loss: %f", i, exp.num_epochs,
                        row["train_loss"])
        else:
            row["train_loss"] = mse(Y, pred)
            row["train_accuracy"] = accuracy(Y, pred)
            if has_test:
                pred_test = predict(net, data.X_test, exp.binarize,
                                    exp.settle_cycles)
                row["test_loss"] = mse(data.Y_test, pred_test)
                row["test_accuracy"] = accuracy(data.Y_test, pred_test)
            else:
                row["test_loss"] = row["test_accuracy"] = float("nan")
            logger.info("Epoch %d/%d. Train accuracy: %.2f%%. Test accuracy: "
                        "%.2f%%", i, exp.num_epochs,
                        row["train_accuracy"] * 100,
                        row["test_accuracy"] * 100)
        rows.append(row)

        if exp.early_stop:
            perfect = perfect + 1 if row["train_loss"] == 0 else 0
            if perfect == exp.early_stop:
                logger.info("Ending training after %d perfect epochs",
                            perfect)
                break
    net.resume_logging()
    return pd.DataFrame(rows, columns=columns)


def converged(report: pd.DataFrame, run: int = 3) -> bool:
    """Whether the report has ``run`` consecutive zero-loss rows anywhere."""
    streak = 0
    for loss in report["train_loss"].values:
        streak = streak + 1 if loss == 0 else 0
        if streak >= run:
            return True
    return False
