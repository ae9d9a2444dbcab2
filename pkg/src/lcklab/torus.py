"""Compact torus actions: averaging, rank diagnostics, existence verdicts.

The span tests are pointwise probes of constant-coefficient statements, so
ranks use a relative singular-value cutoff and are required to agree across
all samples.  Existence verdicts implement the decision table

    dim(t ^ Jt) > 2                                  -> NoLCKPossible
    dim in {1, 2}                                    -> VaismanExists
    dim = 0, k = n, some vertical generator, LCK     -> PositivePotentialExists
    dim = 0 otherwise                                -> PurelyReal

and always carry their witnesses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .errors import GalleryError, NumericalError
from .fields import VectorField, as_batch, bracket, complex_jmatrix
from .forms import Form, lie_derivative, pullback
from .lck import LCKStructure
from .manifolds import FlowMap, LeeClass, ModelManifold

VERDICTS = (
    "NoLCKPossible",
    "VaismanExists",
    "PositivePotentialExists",
    "PurelyReal",
    "Inconclusive",
)


class TorusAction:
    """Commuting periodic generators with registered closed-form flows.

    ``generators`` may be constant linear recombinations of the flow basis;
    averaging always runs over the registered flows, which is basis
    independent.
    """

    def __init__(self, manifold: ModelManifold, flows: Sequence[FlowMap],
                 generators: Optional[Sequence[VectorField]] = None):
        self.manifold = manifold
        self.flows = list(flows)
        for fl in self.flows:
            if fl.period is None:
                raise GalleryError(f"generator {fl.name} has no periodic flow")
        self.generators = list(generators) if generators is not None else [
            fl.generator for fl in self.flows
        ]

    @property
    def names(self):
        return [getattr(g, "name", f"xi{i}") for i, g in enumerate(self.generators)]

    def commutation_residual(self, pts) -> float:
        worst = 0.0
        for i in range(len(self.generators)):
            for j in range(i + 1, len(self.generators)):
                br = bracket(self.generators[i], self.generators[j])
                worst = max(worst, float(np.abs(br.values(pts)).max()))
        return worst

    def closure_residual(self, pts) -> float:
        from .manifolds import flow_closure_residual

        return max(
            flow_closure_residual(self.manifold, fl, pts) for fl in self.flows
        )

    def recombine(self, matrix) -> "TorusAction":
        matrix = np.asarray(matrix, dtype=float)
        gens = [
            VectorField.linear_combination(self.generators, row, name=f"mix{i}")
            for i, row in enumerate(matrix)
        ]
        return TorusAction(self.manifold, self.flows, gens)


def average_over_circle(a: Form, flow: FlowMap, nodes: int) -> Form:
    """Trapezoid average (1/T) int_0^T Phi_t^* a dt over one circle factor.

    The integrand is smooth and periodic, so the uniform-node trapezoid rule
    is spectrally accurate.
    """
    if nodes < 8:
        raise ValueError("averaging needs nodes >= 8")
    if flow.period is None:
        raise GalleryError(f"flow {flow.name} is not periodic")
    ts = np.arange(nodes) * (flow.period / nodes)
    terms = [pullback(flow.at(float(t)), a) for t in ts]
    return Form.nsum(terms, [1.0 / nodes] * nodes)


def average_over_action(a: Form, act: TorusAction, nodes: int) -> Form:
    out = a
    for fl in act.flows:
        out = average_over_circle(out, fl, nodes)
    return out


def averaged_pairings(act: TorusAction, theta: Form, pts, nodes=16):
    """Pointwise pairings of the action-averaged theta with each generator.

    Returns (pairings array of shape (k,), constancy residual).  Computed by
    quadrature over the node grid of the torus without materializing the
    averaged form.
    """
    from .fields import Ctx

    pts = as_batch(pts, act.manifold.dim)
    k = len(act.generators)
    d = act.manifold.dim
    n_pts = pts.shape[0]
    xi_vals = [g.values(pts) for g in act.generators]

    # sweep the torus one circle at a time, flattening the node axis into the
    # batch: O(K * nodes) field evaluations instead of O(nodes^K)
    batch = pts
    jac = np.broadcast_to(np.eye(d), (n_pts, d, d)).copy()
    for fl in act.flows:
        ts = np.arange(nodes) * (fl.period / nodes)
        stacked_pts, stacked_jac = [], []
        for t in ts:
            ctx = Ctx(batch)
            jets = [c.eval(ctx, 1) for c in fl.at(float(t)).components]
            stacked_pts.append(np.column_stack([j.v for j in jets]).real)
            step = np.stack([j.g for j in jets], axis=1).real
            stacked_jac.append(np.einsum("bij,bjk->bik", step, jac))
        batch = np.concatenate(stacked_pts, axis=0)
        jac = np.concatenate(stacked_jac, axis=0)
    n_c = batch.shape[0] // n_pts
    tvals = theta.coefficient_values(batch)
    tvec = np.zeros((n_c * n_pts, d))
    for (i,), v in tvals.items():
        tvec[:, i] = np.real(v)
    tvec = tvec.reshape(n_c, n_pts, d)
    jac = jac.reshape(n_c, n_pts, d, d)
    acc = np.empty((k, n_pts))
    for g in range(k):
        pushed = np.einsum("cnij,nj->cni", jac, xi_vals[g])
        acc[g] = np.einsum("cni,cni->n", tvec, pushed) / n_c
    pairings = acc.mean(axis=1)
    constancy = float(np.abs(acc - pairings[:, None]).max())
    return pairings, constancy


def classify_vertical(act: TorusAction, theta: Form, pts, nodes=16,
                      constancy_tol=1e-8, vertical_tol=1e-6):
    """Average theta over the action, then label each generator.

    A generator is vertical when the (constant) pairing theta(xi) is nonzero;
    non-constant pairings signal a broken action or non-invariant input.
    """
    pairings, constancy = averaged_pairings(act, theta, pts, nodes)
    if constancy > constancy_tol:
        raise NumericalError(
            f"averaged pairing is not constant (residual {constancy:.2e})"
        )
    labels = ["vertical" if abs(p) > vertical_tol else "horizontal" for p in pairings]
    return labels, pairings, constancy


def intersection_dimension(act: TorusAction, pts, cutoff=1e-8) -> int:
    """dim(t ^ Jt) from the rank of [Xi | J Xi] at each sample.

    rank[Xi | J Xi] = dim(t + Jt) = 2k - dim(t ^ Jt); the value must agree
    across samples, otherwise the action is stratified at the probe set.
    """
    pts = as_batch(pts, act.manifold.dim)
    k = len(act.generators)
    J = complex_jmatrix(act.manifold.dim)
    cols = [g.values(pts) for g in act.generators]
    Xi = np.stack(cols, axis=2)  # (N, d, k)
    M = np.concatenate([Xi, np.einsum("ij,njk->nik", J, Xi)], axis=2)
    svals = np.linalg.svd(M, compute_uv=False)
    ranks = (svals > cutoff * svals[:, :1]).sum(axis=1)
    dims = 2 * k - ranks
    if dims.min() != dims.max():
        raise NumericalError("stratified action, refine samples")
    return int(dims[0])


@dataclass
class ActionReport:
    verdict: str
    intersection_dim: int
    generators: List[str]
    pairings: Optional[dict] = None
    vertical: Optional[List[str]] = None
    lck_present: bool = False
    notes: str = ""

    def to_json(self):
        out = {
            "verdict": self.verdict,
            "intersection_dim": self.intersection_dim,
            "generators": self.generators,
            "lck_present": self.lck_present,
        }
        if self.pairings is not None:
            out["pairings"] = {k: float(v) for k, v in self.pairings.items()}
        if self.vertical is not None:
            out["vertical"] = self.vertical
        if self.notes:
            out["notes"] = self.notes
        return out


def _theta_of(s):
    if s is None:
        return None
    if isinstance(s, LCKStructure):
        return s.theta
    if isinstance(s, LeeClass):
        return s.theta
    if isinstance(s, Form):
        return s
    raise TypeError("expected an LCKStructure, LeeClass or 1-form")


def verdict(act: TorusAction, s=None, pts=None, nodes=32) -> ActionReport:
    """Existence/obstruction verdict for the action (decision table above).

    ``s`` supplies the LCK hypothesis: an LCKStructure is direct evidence,
    a LeeClass carries it as a declared assumption (admits_lck), and the
    positive-potential row fires only when that hypothesis is present.
    """
    if pts is None:
        pts = act.manifold.sample(60, seed=23)
    dim = intersection_dimension(act, pts)
    names = act.names
    theta = _theta_of(s)
    lck_present = isinstance(s, LCKStructure) or (
        isinstance(s, LeeClass) and s.admits_lck
    )
    if dim > 2:
        return ActionReport("NoLCKPossible", dim, names,
                            notes="intersection exceeds the Lee plane")
    if dim in (1, 2):
        return ActionReport("VaismanExists", dim, names,
                            notes="non purely real torus on an LCK-type manifold")
    pairings = None
    vertical = None
    if theta is not None:
        # the pairings are constants; a small probe subset suffices
        probe = pts[: min(12, len(pts))]
        labels, pvals, _ = classify_vertical(act, theta, probe, nodes=nodes)
        pairings = dict(zip(names, pvals))
        vertical = [n for n, lab in zip(names, labels) if lab == "vertical"]
    k = len(act.generators)
    n = act.manifold.complex_dim
    if k == n and vertical and lck_present:
        return ActionReport("PositivePotentialExists", dim, names,
                            pairings=pairings, vertical=vertical, lck_present=True,
                            notes="maximal purely real torus with a vertical circle")
    return ActionReport("PurelyReal", dim, names, pairings=pairings,
                        vertical=vertical, lck_present=lck_present)


def isotropy_residual(act: TorusAction, s, pts, nodes=16) -> float:
    """max |Omega(xi_i, xi_j)| for a horizontal action (orbits are isotropic)."""
    theta = _theta_of(s)
    labels, _, _ = classify_vertical(act, theta, pts, nodes=nodes)
    if any(lab == "vertical" for lab in labels):
        raise GalleryError("isotropy applies to horizontal actions")
    omega = s.omega if isinstance(s, LCKStructure) else None
    if omega is None:
        raise TypeError("isotropy needs a structure carrying a 2-form")
    worst = 0.0
    vals = [g.values(pts) for g in act.generators]
    for i in range(len(vals)):
        for j in range(i, len(vals)):
            w = omega.evaluate(pts, vals[i], vals[j])
            worst = max(worst, float(np.abs(w).max()))
    return worst


def invariance_residual_under(act: TorusAction, a: Form, pts) -> float:
    """max over generators of |L_xi a| (used to certify averaged outputs)."""
    return max(
        lie_derivative(g, a).max_abs(pts) for g in act.generators
    )
