"""Projections: fully connected weight bundles and the XCAL learning rule.

Weights are stored as ``(post_size, pre_size)`` matrices, so connection
``(pre_index, post_index)`` lives at ``[post_index, pre_index]``.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from leabra7.layer import Layer
from leabra7.specs import ProjnSpec


def xcal(x, th, d_rev: float = 0.1):
    """The XCAL "check-mark" function.

    Linear ``x - th`` above ``th * d_rev``; below it, a line back through the
    origin, so weights only change when there is activity.
    """
    x = np.asarray(x, dtype=float)
    return np.where(x > th * d_rev, x - th, -x * (1 - d_rev) / d_rev)


def contrast_enhance(fwt, sig_offset: float = 1.0, sig_gain: float = 6.0):
    """Sigmoidal contrast enhancement of internal weights.

    Defined by its limits at the endpoints: 0 maps to 0 and 1 maps to 1.
    """
    fwt = np.asarray(fwt, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = sig_offset * (1 - fwt) / fwt
        wt = 1 / (1 + ratio**sig_gain)
    return np.where(fwt <= 0, 0.0, np.where(fwt >= 1, 1.0, wt))


class Projection:
    """A full projection from every ``pre`` unit to every ``post`` unit.

    Args:
      name: The projection name.
      pre: The sending layer.
      post: The receiving layer.
      spec: Learning and initialization parameters.
      rng: Source of the initial weights.
    """

    def __init__(self, name: str, pre: Layer, post: Layer,
                 spec: Optional[ProjnSpec] = None,
                 rng: Optional[np.random.Generator] = None) -> None:
        self.name = name
        self.pre = pre
        self.post = post
        self.spec = spec if spec is not None else ProjnSpec()
        if rng is None:
            rng = np.random.default_rng()
        shape = (post.size, pre.size)
        self.fwt = self.spec.dist.sample(rng, shape)
        self.wt = contrast_enhance(self.fwt, self.spec.sig_offset,
                                   self.spec.sig_gain)
        self.dwt = np.zeros(shape)

    def __repr__(self) -> str:
        return "Projection(name={0!r}, pre={1!r}, post={2!r})".format(
            self.name, self.pre.name, self.post.name)

    @property
    def num_connections(self) -> int:
        return self.fwt.size

    def flush(self) -> None:
        """Sends scaled, weighted sender activations to the receivers."""
        self.post.units.input_acc += self.spec.wt_scale_rel * (
            self.wt @ self.pre.units.act)

    def learn(self) -> None:
        """Applies one XCAL weight update from the units' running averages."""
        spec = self.spec
        pre, post = self.pre.units, self.post.units
        srs = np.outer(post.avg_s, pre.avg_s)
        srm = np.outer(post.avg_m, pre.avg_m)
        sm_mix = spec.s_mix * srs + (1 - spec.s_mix) * srm
        lthr = np.outer(post.avg_l, pre.avg_m) * spec.thr_l_mix
        mthr = srm * (1 - spec.thr_l_mix)

        dwt = spec.lrate * xcal(sm_mix, lthr + mthr, spec.d_rev)
        # soft bounding toward 1 and 0
        dwt = np.where(dwt > 0, dwt * (1 - self.fwt), dwt * self.fwt)
        self.dwt = dwt
        self.fwt = np.clip(self.fwt + dwt, 0.0, 1.0)
        self.wt = contrast_enhance(self.fwt, spec.sig_offset, spec.sig_gain)

    def get(self, attr: str) -> np.ndarray:
        """Current (post, pre) matrix of a connection attribute."""
        return getattr(self, attr[len("conn_"):]).copy()
