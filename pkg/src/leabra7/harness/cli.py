"""Command line entry point: ``leabra7 <task> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd

import leabra7 as lb
from leabra7.harness import datasets, experiments as ex
from leabra7.harness.outputs import emit_outputs
from leabra7.specs import override, read_config

logger = logging.getLogger("leabra7")

TASKS = ("two-neurons", "pat-assoc", "err-hidden", "iris")

#: Logged on every layer of a training task, captured after training.
FINAL_CAPTURE = ("unit_act", "avg_act", "gc_i")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leabra7",
        description="Run one of the LEABRA demonstration experiments.")
    parser.add_argument("task", choices=TASKS)
    parser.add_argument("--out", type=Path, default=None,
                        help="output directory (default: out/<task>)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--epochs", type=int, default=None,
                        help="maximum number of training epochs")
    parser.add_argument("--bins", type=int, default=10,
                        help="IRIS quantile bins")
    parser.add_argument("--hidden", type=int, default=None,
                        help="hidden layer size")
    parser.add_argument("--test-frac", type=float, default=None,
                        help="fraction of IRIS rows held out for testing")
    parser.add_argument("--config", type=Path, default=None,
                        help="INI file overriding spec and schedule values")
    parser.add_argument("--data", type=Path, default=None,
                        help="IRIS CSV (default: the bundled table)")
    parser.add_argument("-q", "--quiet", action="store_true")
    return parser


def _layer_logs(net: lb.Net, freq: str) -> Dict[str, pd.DataFrame]:
    out = {}
    for name in net.layers:
        logs = net.logs(freq, name)
        if len(logs.parts.columns) > 2:
            out["{0}_{1}_units".format(name, freq)] = logs.parts
        if len(logs.whole.columns) > 1:
            out["{0}_{1}_layer".format(name, freq)] = logs.whole
    return out


def run_two_neurons(args: argparse.Namespace) -> None:
    exp = ex.Experiment(layer=lb.LayerSpec(log_on_cycle=ex.TWO_NEURON_ATTRS),
                        projn=lb.ProjnSpec())
    if args.config is not None:
        exp = ex.apply_config(exp, read_config(args.config))
    net = ex.two_neurons(spec=exp.layer)
    logs = _layer_logs(net, "cycle")
    trace = net.logs("cycle", "output").parts.drop(columns="unit")
    out = args.out or Path("out") / args.task
    emit_outputs(None, logs, out, trace=trace, title="two neurons")
    logger.info("Wrote outputs to %s", out)


def _task_experiment(args: argparse.Namespace) -> ex.Experiment:
    exp = ex.EXPERIMENTS[args.task.replace("-", "_")]()
    if args.config is not None:
        exp = ex.apply_config(exp, read_config(args.config))
    if args.epochs is not None:
        exp.num_epochs = args.epochs
    if args.hidden is not None:
        exp.hidden = args.hidden
    if args.test_frac is not None:
        exp.test_frac = args.test_frac
    exp.layer = override(exp.layer, {"log_on_cycle": FINAL_CAPTURE})
    return exp


def run_task(args: argparse.Namespace) -> pd.DataFrame:
    exp = _task_experiment(args)
    if args.task == "iris":
        features, labels = datasets.load_iris_table(args.data)
        data = datasets.preprocess_iris(features, labels, args.bins, args.seed)
        data = data.split(exp.test_frac, args.seed)
    else:
        data = datasets.builtin_patterns(args.task.replace("-", "_"))
    n_in, n_out = data.X.shape[1], data.Y.shape[1]
    if args.task == "pat-assoc":
        net = ex.build_two_layer(exp, n_in, n_out, args.seed)
    else:
        net = ex.build_hidden(exp, n_in, n_out, args.seed)

    report = ex.train(net, data, exp)
    # one logged evaluation pass over the training rows
    ex.predict(net, data.X_train, exp.binarize, exp.settle_cycles)
    out = args.out or Path("out") / args.task
    emit_outputs(report, _layer_logs(net, "cycle"), out, title=args.task)
    net.save(Path(out) / "network.bin")
    logger.info("Wrote outputs to %s", out)
    return report


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(message)s")
    try:
        if args.task == "two-neurons":
            run_two_neurons(args)
        else:
            run_task(args)
    except (ValueError, OSError, KeyError) as err:
        print("leabra7: error: {0}".format(err), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
