"""Exterior calculus on coordinate charts of R^{2n} ~ C^n.

Forms are stored over the real coframe dx_1, dy_1, ..., dx_n, dy_n with
strictly increasing multi-indices (antisymmetry is structural).  A parallel
"complex" frame over dz_1, dzbar_1, ..., dz_n, dzbar_n (index 2j for dz_j,
2j+1 for dzbar_j) provides the bidegree decomposition; d^c is computed
there as i(delbar - del), independently of the commutator [J, d] that the
test suite checks it against.

Sign conventions, fixed once:
  (J alpha)(X) = -alpha(JX) on 1-forms, so J dx = dy and d^c f = J(df);
  J extends to higher degree as a derivation and vanishes on functions;
  d^c = i(delbar - del), so dd^c |z|^2 = 2i sum dz_j ^ dzbar_j > 0.
"""

from __future__ import annotations

from typing import Dict, Sequence, Tuple

import numpy as np

from .fields import (
    Ctx,
    PointMap,
    ScalarField,
    VectorField,
    as_batch,
    compose_field,
    constant,
)

Index = Tuple[int, ...]


class FormDegreeError(ValueError):
    pass


def _merge_indices(a: Index, b: Index):
    """Merge two strictly increasing tuples; returns (sign, merged) or None."""
    out = []
    sign = 1
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i] == b[j]:
            return None
        if a[i] < b[j]:
            out.append(a[i])
            i += 1
        else:
            # b[j] jumps over the remaining entries of a
            if (len(a) - i) % 2 == 1:
                sign = -sign
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return sign, tuple(out)


def _insert_index(idx: Index, j: int):
    """Insert j into a strictly increasing tuple; returns (sign, merged) or None."""
    return _merge_indices((j,), idx)


class Form:
    """A degree-k differential form with scalar-field coefficients."""

    __slots__ = ("dim", "degree", "coeffs", "frame")

    def __init__(self, dim, degree, coeffs: Dict[Index, ScalarField] | None = None,
                 frame="real"):
        self.dim = dim
        self.degree = degree
        self.coeffs = coeffs or {}
        self.frame = frame

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero(dim, degree, frame="real"):
        return Form(dim, degree, {}, frame)

    @staticmethod
    def from_function(f: ScalarField, frame="real"):
        return Form(f.dim, 0, {(): f}, frame)

    @staticmethod
    def basis(dim, idx: Index):
        idx = tuple(idx)
        return Form(dim, len(idx), {idx: constant(1.0, dim)})

    def copy_with(self, coeffs):
        return Form(self.dim, self.degree, coeffs, self.frame)

    # -- algebra ----------------------------------------------------------

    def __add__(self, other):
        self._check_partner(other, same_degree=True)
        coeffs = dict(self.coeffs)
        for idx, f in other.coeffs.items():
            coeffs[idx] = coeffs[idx] + f if idx in coeffs else f
        return self.copy_with(coeffs)

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def __neg__(self):
        return self.scale(-1.0)

    def scale(self, c):
        """Multiply by a constant or a scalar field."""
        return self.copy_with({idx: f * c for idx, f in self.coeffs.items()})

    @staticmethod
    def nsum(forms: Sequence["Form"], weights=None):
        forms = list(forms)
        proto = forms[0]
        groups: Dict[Index, list] = {}
        wlist: Dict[Index, list] = {}
        for k, a in enumerate(forms):
            w = 1.0 if weights is None else weights[k]
            for idx, f in a.coeffs.items():
                groups.setdefault(idx, []).append(f)
                wlist.setdefault(idx, []).append(w)
        coeffs = {
            idx: ScalarField.nsum(groups[idx], wlist[idx]) for idx in groups
        }
        return proto.copy_with(coeffs)

    def _check_partner(self, other, same_degree=False):
        if self.dim != other.dim or self.frame != other.frame:
            raise ValueError("forms live on different charts or frames")
        if same_degree and self.degree != other.degree:
            raise FormDegreeError("degree mismatch")

    # -- evaluation --------------------------------------------------------

    def coefficient_values(self, pts):
        pts = as_batch(pts, self.dim)
        ctx = Ctx(pts)
        return {idx: f.eval(ctx, 0).v for idx, f in self.coeffs.items()}

    def max_abs(self, pts) -> float:
        vals = self.coefficient_values(pts)
        if not vals:
            return 0.0
        return max(float(np.abs(v).max()) for v in vals.values())

    def evaluate(self, pts, *vectors):
        """Evaluate the k-form on k vector-value arrays of shape (N, dim)."""
        if len(vectors) != self.degree:
            raise FormDegreeError("wrong number of vector arguments")
        pts = as_batch(pts, self.dim)
        vals = self.coefficient_values(pts)
        n = pts.shape[0]
        if self.degree == 0:
            return vals.get((), np.zeros(n))
        out = np.zeros(n, dtype=complex)
        V = np.stack(vectors, axis=2)  # (N, dim, k)
        for idx, c in vals.items():
            minor = V[:, idx, :]  # (N, k, k)
            out = out + c * np.linalg.det(minor)
        if np.abs(out.imag).max() < 1e-10:
            out = out.real
        return out

    def as_matrix(self, pts):
        """Antisymmetric coefficient matrix of a 2-form at sample points."""
        if self.degree != 2:
            raise FormDegreeError("as_matrix needs a 2-form")
        pts = as_batch(pts, self.dim)
        vals = self.coefficient_values(pts)
        n = pts.shape[0]
        some = next(iter(vals.values())) if vals else np.zeros(n)
        dt = complex if np.iscomplexobj(some) else float
        A = np.zeros((n, self.dim, self.dim), dtype=dt)
        for (i, j), c in vals.items():
            A[:, i, j] = c
            A[:, j, i] = -c
        return A.real if dt is complex and np.abs(A.imag).max() < 1e-10 else A


# -- wedge, d, interior, Lie, pullback ----------------------------------


def wedge(a: Form, b: Form) -> Form:
    a._check_partner(b)
    degree = a.degree + b.degree
    if degree > a.dim:
        return Form.zero(a.dim, degree, a.frame)
    acc: Dict[Index, list] = {}
    wts: Dict[Index, list] = {}
    for ia, fa in a.coeffs.items():
        for ib, fb in b.coeffs.items():
            merged = _merge_indices(ia, ib)
            if merged is None:
                continue
            sign, idx = merged
            acc.setdefault(idx, []).append(fa * fb)
            wts.setdefault(idx, []).append(float(sign))
    coeffs = {idx: ScalarField.nsum(acc[idx], wts[idx]) for idx in acc}
    return Form(a.dim, degree, coeffs, a.frame)


def exterior_d(a: Form) -> Form:
    if a.frame != "real":
        raise ValueError("exterior_d acts on real-frame forms")
    acc: Dict[Index, list] = {}
    wts: Dict[Index, list] = {}
    for idx, f in a.coeffs.items():
        for j in range(a.dim):
            ins = _insert_index(idx, j)
            if ins is None:
                continue
            sign, nidx = ins
            acc.setdefault(nidx, []).append(f.partial(j))
            wts.setdefault(nidx, []).append(float(sign))
    coeffs = {idx: ScalarField.nsum(acc[idx], wts[idx]) for idx in acc}
    return Form(a.dim, a.degree + 1, coeffs, "real")


def interior_product(X: VectorField, a: Form) -> Form:
    if a.degree == 0:
        raise FormDegreeError("cannot contract a function")
    acc: Dict[Index, list] = {}
    wts: Dict[Index, list] = {}
    for idx, f in a.coeffs.items():
        for pos, i in enumerate(idx):
            rest = idx[:pos] + idx[pos + 1 :]
            acc.setdefault(rest, []).append(f * X.components[i])
            wts.setdefault(rest, []).append(float((-1) ** pos))
    coeffs = {idx: ScalarField.nsum(acc[idx], wts[idx]) for idx in acc}
    return Form(a.dim, a.degree - 1, coeffs, a.frame)


def apply_J(a: Form) -> Form:
    """The derivation extension of J: J dx_j = dy_j, J dy_j = -dx_j, J f = 0."""
    if a.frame != "real":
        raise ValueError("apply_J acts on real-frame forms")
    if a.degree == 0:
        return Form.zero(a.dim, 0)
    acc: Dict[Index, list] = {}
    wts: Dict[Index, list] = {}
    for idx, f in a.coeffs.items():
        for pos, i in enumerate(idx):
            if i % 2 == 0:
                repl, factor = i + 1, 1.0
            else:
                repl, factor = i - 1, -1.0
            rest = idx[:pos] + idx[pos + 1 :]
            ins = _insert_index(rest, repl)
            if ins is None:
                continue
            sign, nidx = ins
            # moving the slot out of position pos costs (-1)^pos
            acc.setdefault(nidx, []).append(f)
            wts.setdefault(nidx, []).append(factor * sign * (-1) ** pos)
    coeffs = {idx: ScalarField.nsum(acc[idx], wts[idx]) for idx in acc}
    return Form(a.dim, a.degree, coeffs, "real")


def lie_derivative(X: VectorField, a: Form) -> Form:
    """Cartan formula L_X = d iota_X + iota_X d (X(f) on functions)."""
    if a.degree == 0:
        return interior_product(X, exterior_d(a))
    return exterior_d(interior_product(X, a)) + interior_product(X, exterior_d(a))


def pullback(pmap: PointMap, a: Form) -> Form:
    """phi^* a with exact Jacobians from the map's component fields."""
    if a.frame != "real":
        raise ValueError("pullback acts on real-frame forms")
    if a.dim != pmap.dim_out:
        raise ValueError(
            f"form lives on a dim-{a.dim} chart, map lands in dim {pmap.dim_out}"
        )
    dim_src = pmap.dim_in
    # d(phi^i) as 1-forms on the source chart
    dphi = {}
    for i in range(pmap.dim_out):
        comp = pmap.components[i]
        coeffs = {(j,): comp.partial(j) for j in range(dim_src)}
        dphi[i] = Form(dim_src, 1, coeffs)
    out = Form.zero(dim_src, a.degree)
    parts = []
    for idx, f in a.coeffs.items():
        term = Form.from_function(compose_field(f, pmap))
        for i in idx:
            term = wedge(term, dphi[i])
        parts.append(term)
    if not parts:
        return out
    return Form.nsum(parts)


# -- complex frame and d^c ------------------------------------------------


def to_complex(a: Form) -> Form:
    """Rewrite a real-frame form over the dz/dzbar coframe."""
    if a.frame != "real":
        raise ValueError("form is already complex-frame")
    # dx_j = (dz_j + dzbar_j)/2 ; dy_j = -(i/2)(dz_j - dzbar_j)
    expansion = {}
    for j in range(a.dim // 2):
        expansion[2 * j] = [(2 * j, 0.5), (2 * j + 1, 0.5)]
        expansion[2 * j + 1] = [(2 * j, -0.5j), (2 * j + 1, 0.5j)]
    return _change_frame(a, expansion, "complex")


def to_real(a: Form, drop_imag=False) -> Form:
    """Rewrite a complex-frame form over the real coframe."""
    if a.frame != "complex":
        raise ValueError("form is already real-frame")
    # dz_j = dx_j + i dy_j ; dzbar_j = dx_j - i dy_j
    expansion = {}
    for j in range(a.dim // 2):
        expansion[2 * j] = [(2 * j, 1.0), (2 * j + 1, 1.0j)]
        expansion[2 * j + 1] = [(2 * j, 1.0), (2 * j + 1, -1.0j)]
    out = _change_frame(a, expansion, "real")
    if drop_imag:
        out = out.copy_with({i: f.real_part() for i, f in out.coeffs.items()})
    return out


def _change_frame(a: Form, expansion, new_frame) -> Form:
    acc: Dict[Index, list] = {}
    wts: Dict[Index, list] = {}
    if a.degree == 0:
        return Form(a.dim, 0, dict(a.coeffs), new_frame)
    for idx, f in a.coeffs.items():
        terms = [(1.0, ())]
        for i in idx:
            new_terms = []
            for w, sofar in terms:
                for tgt, coef in expansion[i]:
                    ins = _insert_index(sofar, tgt)
                    if ins is None:
                        continue
                    sign, nidx = ins
                    # the new factor enters to the right of len(sofar) placed
                    # ones; _insert_index signs a left insertion
                    new_terms.append((w * coef * sign * (-1) ** len(sofar), nidx))
            terms = new_terms
        for w, nidx in terms:
            acc.setdefault(nidx, []).append(f)
            wts.setdefault(nidx, []).append(w)
    coeffs = {idx: ScalarField.nsum(acc[idx], wts[idx]) for idx in acc}
    return Form(a.dim, a.degree, coeffs, new_frame)


def bidegree_parts(a_complex: Form):
    """Split a complex-frame form into its (p, q) components."""
    parts: Dict[Tuple[int, int], Form] = {}
    for idx, f in a_complex.coeffs.items():
        p = sum(1 for i in idx if i % 2 == 0)
        q = len(idx) - p
        part = parts.setdefault((p, q), Form.zero(a_complex.dim, a_complex.degree, "complex"))
        part.coeffs[idx] = part.coeffs[idx] + f if idx in part.coeffs else f
    return parts


def _wirtinger(f: ScalarField, j: int, conjugated: bool) -> ScalarField:
    """d/dz_j or d/dzbar_j of a coefficient field on the real chart."""
    fx = f.partial(2 * j)
    fy = f.partial(2 * j + 1)
    if conjugated:
        return (fx + fy * 1j) * 0.5
    return (fx - fy * 1j) * 0.5


def _del_operator(a: Form, conjugated: bool) -> Form:
    if a.frame != "complex":
        raise ValueError("del/delbar act on complex-frame forms")
    acc: Dict[Index, list] = {}
    wts: Dict[Index, list] = {}
    n = a.dim // 2
    for idx, f in a.coeffs.items():
        for j in range(n):
            tgt = 2 * j + (1 if conjugated else 0)
            ins = _insert_index(idx, tgt)
            if ins is None:
                continue
            sign, nidx = ins
            acc.setdefault(nidx, []).append(_wirtinger(f, j, conjugated))
            wts.setdefault(nidx, []).append(float(sign))
    coeffs = {idx: ScalarField.nsum(acc[idx], wts[idx]) for idx in acc}
    return Form(a.dim, a.degree + 1, coeffs, "complex")


def del_(a: Form) -> Form:
    return _del_operator(a, conjugated=False)


def del_bar(a: Form) -> Form:
    return _del_operator(a, conjugated=True)


def dc(a: Form) -> Form:
    """d^c = i(delbar - del), computed through the bidegree decomposition."""
    ca = to_complex(a)
    res = del_bar(ca).scale(1.0j) + del_(ca).scale(-1.0j)
    return to_real(res, drop_imag=True)


def twisted_d(a: Form, theta: Form, conjugated=False, check_pts=None, tol=1e-8) -> Form:
    """d_theta a = da - theta ^ a, or d^c_theta a = d^c a - J theta ^ a."""
    if theta.degree != 1:
        raise FormDegreeError("twisting form must be a 1-form")
    if check_pts is not None:
        r = exterior_d(theta).max_abs(check_pts)
        if r > tol:
            import warnings

            warnings.warn(
                f"twisting 1-form is not closed (|d theta| = {r:.2e}); "
                "the twisted differential no longer squares to zero",
                stacklevel=2,
            )
    if conjugated:
        return dc(a) - wedge(apply_J(theta), a)
    return exterior_d(a) - wedge(theta, a)


def dd_c(f: ScalarField) -> Form:
    return exterior_d(dc(Form.from_function(f)))


def twisted_potential_form(f: ScalarField, theta: Form, check_pts=None) -> Form:
    """d_theta d^c_theta f for a scalar potential f."""
    inner = twisted_d(Form.from_function(f), theta, conjugated=True, check_pts=check_pts)
    return twisted_d(inner, theta, conjugated=False)
