"""Batched forward-mode jets: values with exact derivatives to third order.

A Jet holds the Taylor data of a scalar quantity at a batch of N chart
points: value ``v`` of shape (N,), gradient ``g`` of shape (N, d), Hessian
``h`` of shape (N, d, d) and third-derivative tensor ``t`` of shape
(N, d, d, d), truncated at ``order``.  All derivative tensors are symmetric
in their coordinate axes.  Arithmetic implements the truncated Leibniz and
chain rules, so every quantity built from closed-form primitives carries
exact derivatives (no finite differencing on the evaluation path).
"""

from __future__ import annotations

import numpy as np

MAX_ORDER = 3


class JetOrderError(RuntimeError):
    """Raised when a derivative deeper than MAX_ORDER is requested."""


def _sym_hg(h, g):
    # S_{pqr} = h_{pq} g_r + h_{pr} g_q + h_{qr} g_p
    return (
        h[:, :, :, None] * g[:, None, None, :]
        + h[:, :, None, :] * g[:, None, :, None]
        + h[:, None, :, :] * g[:, :, None, None]
    )


class Jet:
    __slots__ = ("order", "v", "g", "h", "t")

    def __init__(self, order, v, g=None, h=None, t=None):
        self.order = order
        self.v = v
        self.g = g
        self.h = h
        self.t = t

    # -- constructors -------------------------------------------------

    @staticmethod
    def constant(value, n, dim, order, dtype=None):
        if dtype is None:
            dtype = np.complex128 if isinstance(value, complex) else np.float64
        v = np.full(n, value, dtype=dtype)
        g = h = t = None
        if order >= 1:
            g = np.zeros((n, dim), dtype=dtype)
        if order >= 2:
            h = np.zeros((n, dim, dim), dtype=dtype)
        if order >= 3:
            t = np.zeros((n, dim, dim, dim), dtype=dtype)
        return Jet(order, v, g, h, t)

    @staticmethod
    def coordinate(pts, i, order):
        if order > MAX_ORDER:
            raise JetOrderError(f"jet order {order} exceeds supported {MAX_ORDER}")
        n, dim = pts.shape
        v = pts[:, i].astype(np.float64, copy=True)
        g = h = t = None
        if order >= 1:
            g = np.zeros((n, dim))
            g[:, i] = 1.0
        if order >= 2:
            h = np.zeros((n, dim, dim))
        if order >= 3:
            t = np.zeros((n, dim, dim, dim))
        return Jet(order, v, g, h, t)

    # -- structure ----------------------------------------------------

    def partial(self, i):
        """Jet of the i-th coordinate derivative, one order lower."""
        if self.order < 1:
            raise JetOrderError("cannot slice a partial from an order-0 jet")
        g = self.h[:, i, :] if self.order >= 2 else None
        h = self.t[:, i, :, :] if self.order >= 3 else None
        return Jet(self.order - 1, self.g[:, i].copy(), g, h, None)

    def real(self):
        return self._map_linear(np.real)

    def imag(self):
        return self._map_linear(np.imag)

    def conj(self):
        return self._map_linear(np.conj)

    def _map_linear(self, f):
        return Jet(
            self.order,
            f(self.v),
            None if self.g is None else f(self.g),
            None if self.h is None else f(self.h),
            None if self.t is None else f(self.t),
        )

    # -- ring operations ----------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.order, self.v + other, self.g, self.h, self.t)
        m = self.order
        return Jet(
            m,
            self.v + other.v,
            self.g + other.g if m >= 1 else None,
            self.h + other.h if m >= 2 else None,
            self.t + other.t if m >= 3 else None,
        )

    __radd__ = __add__

    def __neg__(self):
        return self._map_linear(np.negative)

    def __sub__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.order, self.v - other, self.g, self.h, self.t)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        m = self.order
        if not isinstance(other, Jet):
            return Jet(
                m,
                self.v * other,
                None if m < 1 else self.g * other,
                None if m < 2 else self.h * other,
                None if m < 3 else self.t * other,
            )
        a, b = self, other
        v = a.v * b.v
        g = h = t = None
        if m >= 1:
            g = a.v[:, None] * b.g + b.v[:, None] * a.g
        if m >= 2:
            h = (
                a.v[:, None, None] * b.h
                + b.v[:, None, None] * a.h
                + a.g[:, :, None] * b.g[:, None, :]
                + b.g[:, :, None] * a.g[:, None, :]
            )
        if m >= 3:
            t = (
                a.v[:, None, None, None] * b.t
                + b.v[:, None, None, None] * a.t
                + _sym_hg(a.h, b.g)
                + _sym_hg(b.h, a.g)
            )
        return Jet(m, v, g, h, t)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("jet powers are integer only")
        if k < 0:
            return self.reciprocal() ** (-k)
        base = self
        result = None
        kk = k
        while kk:
            if kk & 1:
                result = base if result is None else result * base
            kk >>= 1
            if kk:
                base = base * base
        if result is None:  # k == 0
            n = self.v.shape[0]
            dim = 0 if self.g is None else self.g.shape[1]
            return Jet.constant(1.0, n, dim, self.order)
        return result

    # -- univariate chain rule ----------------------------------------

    def chain(self, derivs):
        """Compose with a univariate function given its derivative values.

        ``derivs`` is a sequence [u(x), u'(x), u''(x), u'''(x)] (truncated at
        self.order + 1 entries) evaluated at x = self.v.
        """
        m = self.order
        v = derivs[0]
        g = h = t = None
        if m >= 1:
            g = derivs[1][:, None] * self.g
        if m >= 2:
            gg = self.g[:, :, None] * self.g[:, None, :]
            h = derivs[1][:, None, None] * self.h + derivs[2][:, None, None] * gg
        if m >= 3:
            gg = self.g[:, :, None] * self.g[:, None, :]
            ggg = gg[:, :, :, None] * self.g[:, None, None, :]
            t = (
                derivs[1][:, None, None, None] * self.t
                + derivs[2][:, None, None, None] * _sym_hg(self.h, self.g)
                + derivs[3][:, None, None, None] * ggg
            )
        return Jet(m, v, g, h, t)

    def reciprocal(self):
        x = self.v
        d = [1.0 / x]
        if self.order >= 1:
            d.append(-d[0] / x)
        if self.order >= 2:
            d.append(-2.0 * d[1] / x)
        if self.order >= 3:
            d.append(-3.0 * d[2] / x)
        return self.chain(d)

    def exp(self):
        e = np.exp(self.v)
        return self.chain([e] * (self.order + 1))

    def log(self):
        x = self.v
        d = [np.log(x)]
        if self.order >= 1:
            d.append(1.0 / x)
        if self.order >= 2:
            d.append(-1.0 / x**2)
        if self.order >= 3:
            d.append(2.0 / x**3)
        return self.chain(d)

    def sin(self):
        s, c = np.sin(self.v), np.cos(self.v)
        return self.chain([s, c, -s, -c][: self.order + 1])

    def cos(self):
        s, c = np.sin(self.v), np.cos(self.v)
        return self.chain([c, -s, -c, s][: self.order + 1])

    def sqrt(self):
        r = np.sqrt(self.v)
        d = [r]
        if self.order >= 1:
            d.append(0.5 / r)
        if self.order >= 2:
            d.append(-0.25 / (r * self.v))
        if self.order >= 3:
            d.append(0.375 / (r * self.v**2))
        return self.chain(d)


def compose_multi(outer, inners, order):
    """Chain rule for outer(Y_1(x), ..., Y_k(x)).

    ``outer`` is the jet of the outer function with respect to the target
    chart (dimension k), evaluated at the mapped points; ``inners`` is the
    list of k jets of the component functions with respect to the source
    chart.  Returns the jet of the composite with respect to the source
    chart.
    """
    m = order
    Yg = Yh = Yt = None
    if m >= 1:
        Yg = np.stack([y.g for y in inners], axis=1)  # (N, k, ds)
    if m >= 2:
        Yh = np.stack([y.h for y in inners], axis=1)  # (N, k, ds, ds)
    if m >= 3:
        Yt = np.stack([y.t for y in inners], axis=1)  # (N, k, ds, ds, ds)

    v = outer.v
    g = h = t = None
    if m >= 1:
        g = np.einsum("na,nap->np", outer.g, Yg)
    if m >= 2:
        h = np.einsum("na,napq->npq", outer.g, Yh) + np.einsum(
            "nab,nap,nbq->npq", outer.h, Yg, Yg
        )
    if m >= 3:
        cross = np.einsum("nab,napq,nbr->npqr", outer.h, Yh, Yg)
        t = (
            np.einsum("na,napqr->npqr", outer.g, Yt)
            + cross
            + cross.transpose(0, 1, 3, 2)
            + cross.transpose(0, 3, 1, 2)
            + np.einsum("nabc,nap,nbq,ncr->npqr", outer.t, Yg, Yg, Yg)
        )
    return Jet(m, v, g, h, t)
