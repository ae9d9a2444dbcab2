"""Scalar fields, vector fields and smooth point maps on a real chart.

A ScalarField wraps a jet-evaluation closure; algebra on fields builds an
expression DAG that is evaluated lazily.  Evaluation goes through a Ctx so
that shared subexpressions (a radius field appearing in fifty coefficients,
a quadrature node appearing in every term of a sum) are computed once per
point batch.  Fields may take complex values; chart coordinates are always
real, ordered x1, y1, ..., xn, yn with z_j = x_j + i y_j.
"""

from __future__ import annotations

import itertools
from typing import Callable, Sequence

import numpy as np

from .jets import MAX_ORDER, Jet, JetOrderError, compose_multi

_uid = itertools.count(1)


class Ctx:
    """Evaluation context: a point batch plus a per-batch jet cache."""

    __slots__ = ("pts", "cache", "submaps")

    def __init__(self, pts):
        pts = np.asarray(pts, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[None, :]
        self.pts = pts
        self.cache = {}
        self.submaps = {}

    def sub(self, pmap):
        ctx = self.submaps.get(pmap.uid)
        if ctx is None:
            ctx = Ctx(pmap.values_from_ctx(self))
            self.submaps[pmap.uid] = ctx
        return ctx


def as_batch(pts, dim):
    pts = np.asarray(pts, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.shape[1] != dim:
        raise ValueError(f"points have dim {pts.shape[1]}, chart has dim {dim}")
    return pts


class ScalarField:
    __slots__ = ("dim", "_fn", "uid")

    def __init__(self, dim: int, fn: Callable):
        self.dim = dim
        self._fn = fn
        self.uid = next(_uid)

    # -- evaluation -----------------------------------------------------

    def eval(self, ctx: Ctx, order: int) -> Jet:
        key = (self.uid, order)
        jet = ctx.cache.get(key)
        if jet is None:
            jet = self._fn(ctx, order)
            ctx.cache[key] = jet
        return jet

    def jet(self, pts, order):
        return self.eval(Ctx(as_batch(pts, self.dim)), order)

    def values(self, pts):
        return self.jet(pts, 0).v

    def gradient(self, pts):
        return self.jet(pts, 1).g

    def hessian(self, pts):
        return self.jet(pts, 2).h

    # -- algebra ----------------------------------------------------------

    def _binary(self, other, op):
        if isinstance(other, ScalarField):
            return ScalarField(self.dim, lambda c, m: op(self.eval(c, m), other.eval(c, m)))
        return ScalarField(self.dim, lambda c, m: op(self.eval(c, m), other))

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return ScalarField(self.dim, lambda c, m: other / self.eval(c, m))

    def __neg__(self):
        return ScalarField(self.dim, lambda c, m: -self.eval(c, m))

    def __pow__(self, k: int):
        return ScalarField(self.dim, lambda c, m: self.eval(c, m) ** k)

    def exp(self):
        return ScalarField(self.dim, lambda c, m: self.eval(c, m).exp())

    def log(self):
        return ScalarField(self.dim, lambda c, m: self.eval(c, m).log())

    def sin(self):
        return ScalarField(self.dim, lambda c, m: self.eval(c, m).sin())

    def cos(self):
        return ScalarField(self.dim, lambda c, m: self.eval(c, m).cos())

    def sqrt(self):
        return ScalarField(self.dim, lambda c, m: self.eval(c, m).sqrt())

    def real_part(self):
        return ScalarField(self.dim, lambda c, m: self.eval(c, m).real())

    def imag_part(self):
        return ScalarField(self.dim, lambda c, m: self.eval(c, m).imag())

    def conjugate(self):
        return ScalarField(self.dim, lambda c, m: self.eval(c, m).conj())

    # -- calculus -----------------------------------------------------------

    def partial(self, i: int):
        """Exact coordinate-derivative field d/dx_i (one jet order deeper)."""

        def fn(ctx, m):
            if m + 1 > MAX_ORDER:
                raise JetOrderError(
                    "derivative chain exceeds supported jet depth "
                    f"({m + 1} > {MAX_ORDER})"
                )
            return self.eval(ctx, m + 1).partial(i)

        return ScalarField(self.dim, fn)

    @staticmethod
    def nsum(fields: Sequence["ScalarField"], weights=None):
        fields = list(fields)
        if not fields:
            raise ValueError("empty sum")
        dim = fields[0].dim

        def fn(ctx, m):
            if weights is None:
                acc = fields[0].eval(ctx, m)
                for f in fields[1:]:
                    acc = acc + f.eval(ctx, m)
                return acc
            acc = fields[0].eval(ctx, m) * weights[0]
            for f, w in zip(fields[1:], weights[1:]):
                acc = acc + f.eval(ctx, m) * w
            return acc

        return ScalarField(dim, fn)


def constant(value, dim) -> ScalarField:
    return ScalarField(dim, lambda c, m: Jet.constant(value, c.pts.shape[0], dim, m))


def coordinate(i, dim) -> ScalarField:
    return ScalarField(dim, lambda c, m: Jet.coordinate(c.pts, i, m))


def complex_coordinate(j, dim) -> ScalarField:
    """The complex chart function z_j = x_j + i y_j as a complex field."""
    return coordinate(2 * j, dim) + 1j * coordinate(2 * j + 1, dim)


def lift_univariate(inner: ScalarField, derivs_fn: Callable) -> ScalarField:
    """Compose a univariate function (given by a derivative table) with a field.

    ``derivs_fn(x, order)`` must return [u(x), u'(x), ..., u^(order)(x)] as
    arrays for an array argument x.
    """

    def fn(ctx, m):
        x = inner.eval(ctx, m)
        return x.chain(derivs_fn(x.v, m))

    return ScalarField(inner.dim, fn)


class PointMap:
    """A smooth map between real charts, given by component scalar fields."""

    __slots__ = ("dim_in", "dim_out", "components", "uid", "name")

    def __init__(self, components: Sequence[ScalarField], dim_out=None, name=""):
        self.components = tuple(components)
        self.dim_in = self.components[0].dim
        self.dim_out = dim_out if dim_out is not None else len(self.components)
        self.uid = next(_uid)
        self.name = name

    def __call__(self, pts):
        pts = as_batch(pts, self.dim_in)
        ctx = Ctx(pts)
        return self.values_from_ctx(ctx)

    def values_from_ctx(self, ctx):
        cols = [comp.eval(ctx, 0).v for comp in self.components]
        out = np.column_stack(cols)
        if np.iscomplexobj(out):
            if np.abs(out.imag).max() > 1e-9:
                raise ValueError("point map produced non-real coordinates")
            out = out.real
        return out

    def jacobian(self, pts):
        pts = as_batch(pts, self.dim_in)
        ctx = Ctx(pts)
        rows = [comp.eval(ctx, 1).g for comp in self.components]
        jac = np.stack(rows, axis=1)  # (N, dim_out, dim_in)
        return jac.real if np.iscomplexobj(jac) else jac

    @staticmethod
    def identity(dim):
        return PointMap([coordinate(i, dim) for i in range(dim)], name="id")

    @staticmethod
    def from_complex(components, dim_in, name=""):
        """Build a real point map from complex component fields (z'_j)."""
        comps = []
        for zc in components:
            comps.append(zc.real_part())
            comps.append(zc.imag_part())
        return PointMap(comps, name=name)


def compose_field(field: ScalarField, pmap: PointMap) -> ScalarField:
    """The pullback field (f o phi) with exact chain-rule jets."""

    def fn(ctx, m):
        inners = [comp.eval(ctx, m) for comp in pmap.components]
        inners = [j.real() if np.iscomplexobj(j.v) else j for j in inners]
        sub = ctx.sub(pmap)
        outer = field.eval(sub, m)
        return compose_multi(outer, inners, m)

    return ScalarField(pmap.dim_in, fn)


def compose_maps(outer: PointMap, inner: PointMap) -> PointMap:
    comps = [compose_field(c, inner) for c in outer.components]
    return PointMap(comps, dim_out=outer.dim_out, name=f"{outer.name}o{inner.name}")


def affine_quadrature_field(f: ScalarField, mats, offsets, weights) -> ScalarField:
    """sum_s w_s (f o A_s) for affine maps A_s x = M_s x + b_s, vectorized.

    The node axis is flattened into the evaluation batch, so the (possibly
    expensive) field f is evaluated once per context regardless of the node
    count; constant Jacobians make the chain rule three contractions.
    """
    mats = np.asarray(mats, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    weights = np.asarray(weights, dtype=float)
    token = next(_uid)

    def fn(ctx, m):
        pts = ctx.pts
        n = pts.shape[0]
        s = mats.shape[0]
        big = np.einsum("sij,nj->sni", mats, pts) + offsets[:, None, :]
        sub = ctx.submaps.get(token)
        if sub is None:
            sub = Ctx(big.reshape(s * n, -1))
            ctx.submaps[token] = sub
        F = f.eval(sub, m)
        v = np.einsum("s,sn->n", weights, F.v.reshape(s, n))
        g = h = t = None
        if m >= 1:
            G = F.g.reshape(s, n, -1)
            g = np.einsum("s,sna,sap->np", weights, G, mats)
        if m >= 2:
            d = pts.shape[1]
            H = F.h.reshape(s, n, d, d)
            h = np.einsum("s,snab,sap,sbq->npq", weights, H, mats, mats)
        if m >= 3:
            d = pts.shape[1]
            T = F.t.reshape(s, n, d, d, d)
            t = np.einsum("s,snabc,sap,sbq,scr->npqr", weights, T, mats, mats, mats)
        return Jet(m, v, g, h, t)

    return ScalarField(mats.shape[1], fn)


class VectorField:
    """A vector field in the coordinate frame, components as scalar fields."""

    __slots__ = ("dim", "components", "name")

    def __init__(self, components: Sequence[ScalarField], name=""):
        self.components = tuple(components)
        self.dim = self.components[0].dim
        self.name = name

    def values(self, pts):
        pts = as_batch(pts, self.dim)
        ctx = Ctx(pts)
        out = np.column_stack([c.eval(ctx, 0).v for c in self.components])
        return out.real if np.iscomplexobj(out) else out

    def apply_to(self, f: ScalarField) -> ScalarField:
        """Directional derivative X(f)."""
        return ScalarField.nsum(
            [self.components[j] * f.partial(j) for j in range(self.dim)]
        )

    def __add__(self, other):
        return VectorField(
            [a + b for a, b in zip(self.components, other.components)],
            name=f"{self.name}+{other.name}",
        )

    def __sub__(self, other):
        return VectorField(
            [a - b for a, b in zip(self.components, other.components)],
            name=f"{self.name}-{other.name}",
        )

    def scale(self, c):
        return VectorField([comp * c for comp in self.components], name=self.name)

    @staticmethod
    def from_constant(vec, dim, name=""):
        return VectorField([constant(v, dim) for v in vec], name=name)

    @staticmethod
    def linear_combination(fields, coeffs, name=""):
        dim = fields[0].dim
        comps = []
        for i in range(dim):
            comps.append(
                ScalarField.nsum([f.components[i] for f in fields], weights=list(coeffs))
            )
        return VectorField(comps, name=name)

    @staticmethod
    def from_holomorphic(hol_components, dim, name=""):
        """Real field Z + Zbar of a holomorphic field with components h_j(z).

        ``hol_components`` are complex scalar fields; the chart convention
        Re(d/dz_j) = d/dx_j makes the real components (Re h_j, Im h_j).
        """
        comps = []
        for h in hol_components:
            comps.append(h.real_part())
            comps.append(h.imag_part())
        return VectorField(comps, name=name)


def bracket(X: VectorField, Y: VectorField) -> VectorField:
    """Lie bracket [X, Y] from exact component derivatives."""
    comps = []
    for i in range(X.dim):
        terms = []
        weights = []
        for j in range(X.dim):
            terms.append(X.components[j] * Y.components[i].partial(j))
            weights.append(1.0)
            terms.append(Y.components[j] * X.components[i].partial(j))
            weights.append(-1.0)
        comps.append(ScalarField.nsum(terms, weights))
    return VectorField(comps, name=f"[{X.name},{Y.name}]")


def complex_jmatrix(dim):
    """The constant complex-structure matrix: J dx_j = dy_j column-wise.

    Acting on vectors: J d/dx_j = d/dy_j, J d/dy_j = -d/dx_j.
    """
    J = np.zeros((dim, dim))
    for j in range(dim // 2):
        J[2 * j + 1, 2 * j] = 1.0
        J[2 * j, 2 * j + 1] = -1.0
    return J


def apply_J_vector(X: VectorField) -> VectorField:
    J = complex_jmatrix(X.dim)
    comps = []
    for i in range(X.dim):
        terms, weights = [], []
        for c in range(X.dim):
            if J[i, c] != 0.0:
                terms.append(X.components[c])
                weights.append(J[i, c])
        if not terms:
            comps.append(constant(0.0, X.dim))
        else:
            comps.append(ScalarField.nsum(terms, weights))
    return VectorField(comps, name=f"J{X.name}")
