"""Constructive potentials: the periodic first-order ODE and orbit averaging.

Two pipelines produce positive potentials for LCK structures:

* ``solve_periodic_first_order``: the closed-form 2pi-periodic solution of
  g' = g(1 + f) - 1, with the periodizing constant c = K e^b / (e^b - 1).
  Full-period integrals use the periodic trapezoid rule (as a DFT); the
  partial integrals int_0^t e^{-F} are evaluated as exact per-mode
  antiderivatives of the trapezoid-backed Fourier data, which keeps the
  on-manifold jet evaluation cheap and the residuals near machine level.

* ``orbit_average_potential``: pulls the equivariant Kaehler form along the
  JC-flow, solves the forced oscillator g_t'' + g_t = f_t by the Duhamel
  formula, and averages over a full period.  The t-average of the Duhamel
  integrals collapses to a single weighted quadrature
  (1/2npi) int_0^{2npi} (1 - cos s) f(Phi_s x) ds, which is cross-checked
  against the literal double-quadrature route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from .errors import GalleryError, InadmissibleInput, NumericalError
from .fields import ScalarField, VectorField, lift_univariate
from .forms import (
    Form,
    apply_J,
    dd_c,
    exterior_d,
    interior_product,
    lie_derivative,
    pullback,
    twisted_potential_form,
    wedge,
)
from .lck import LCKStructure, lck_residual, potential_residual
from .manifolds import (
    FlowMap,
    ModelManifold,
    deck_loop_integral,
    flow_of,
    invariance_residual,
)

TWO_PI = 2.0 * math.pi


@dataclass
class PeriodicFunction:
    """A smooth 2pi-periodic function with exact derivatives (and optional
    antiderivative vanishing at 0, used to integrate Lee-form factors)."""

    fn: Callable
    d1: Callable
    d2: Callable
    d3: Callable
    antiderivative: Optional[Callable] = None
    label: str = ""

    def __post_init__(self):
        probes = np.linspace(0.0, TWO_PI, 17)
        gap = np.abs(self.fn(probes + TWO_PI) - self.fn(probes)).max()
        if gap > 1e-12:
            raise InadmissibleInput(f"function is not 2pi-periodic (gap {gap:.2e})")

    def derivs(self, x, order):
        out = [self.fn(x)]
        if order >= 1:
            out.append(self.d1(x))
        if order >= 2:
            out.append(self.d2(x))
        if order >= 3:
            out.append(self.d3(x))
        return out

    @staticmethod
    def constant(kappa: float) -> "PeriodicFunction":
        kappa = float(kappa)
        return PeriodicFunction(
            fn=lambda t: np.full_like(np.asarray(t, dtype=float), kappa),
            d1=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            d2=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            d3=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
            antiderivative=lambda t: kappa * np.asarray(t, dtype=float),
            label=f"const:{kappa}",
        )

    @staticmethod
    def cosine(eps: float) -> "PeriodicFunction":
        eps = float(eps)
        return PeriodicFunction(
            fn=lambda t: eps * np.cos(t),
            d1=lambda t: -eps * np.sin(t),
            d2=lambda t: -eps * np.cos(t),
            d3=lambda t: eps * np.sin(t),
            antiderivative=lambda t: eps * np.sin(t),
            label=f"cos:{eps}",
        )

    @staticmethod
    def trig(cos_coeffs, sin_coeffs) -> "PeriodicFunction":
        """Trigonometric polynomial sum_j a_j cos(j t) + b_j sin(j t), j >= 1."""
        a = np.asarray(cos_coeffs, dtype=float)
        b = np.asarray(sin_coeffs, dtype=float)
        js = np.arange(1, len(a) + 1, dtype=float)

        def deriv(order):
            def f(t):
                t = np.asarray(t, dtype=float)
                phase = np.multiply.outer(t, js)
                ca = a * js**order
                cb = b * js**order
                c, s = np.cos(phase), np.sin(phase)
                table = {
                    0: (c * ca + s * cb),
                    1: (-s * ca + c * cb),
                    2: (-c * ca - s * cb),
                    3: (s * ca - c * cb),
                }[order % 4]
                return table.sum(axis=-1)

            return f

        def anti(t):
            t = np.asarray(t, dtype=float)
            phase = np.multiply.outer(t, js)
            return (np.sin(phase) * (a / js) - (np.cos(phase) - 1.0) * (b / js)).sum(axis=-1)

        return PeriodicFunction(deriv(0), deriv(1), deriv(2), deriv(3),
                                antiderivative=anti, label="trig")


@dataclass
class PotentialSolution:
    """The periodic potential with its diagnostics.

    g(t) = (c - int_0^t e^{-F}) e^{F(t)},  F(t) = a + int_0^t (f + 1),
    b = F(2pi) - F(0), K = int_0^{2pi} e^{-F}, c = K e^b / (e^b - 1).
    """

    f: PeriodicFunction
    a: float
    b: float
    K: float
    c: float
    periodicity_residual: float
    min_g: float
    ode1_residual: float
    ode2_residual: float
    nodes: int
    _modes_d: np.ndarray = field(repr=False, default=None)
    _modes_f: np.ndarray = field(repr=False, default=None)
    _mu: float = field(repr=False, default=0.0)

    # -- evaluation ------------------------------------------------------

    def F(self, t):
        t = np.asarray(t, dtype=float)
        return self.a + t + _mode_partial_integral(self._modes_f, t)

    def J(self, t):
        """int_0^t e^{-F(s)} ds by exact per-mode antiderivatives."""
        t = np.asarray(t, dtype=float)
        M = self._modes_d.shape[0]
        ks = np.fft.fftfreq(M, d=1.0 / M)
        lam = 1j * ks - self.mu
        keep = np.abs(self._modes_d) > 1e-17 * np.abs(self._modes_d).max()
        lam = lam[keep]
        dk = self._modes_d[keep]
        expt = np.exp(np.multiply.outer(t, lam))
        return np.real((expt - 1.0) / lam @ dk)

    @property
    def mu(self):
        return self._mu

    def _mode_sums(self, t, orders=(0,)):
        """S_r(t) = sum_k d_k (ik)^r e^{ikt} / (mu - ik), stably."""
        t = np.asarray(t, dtype=float)
        Mn = self._modes_d.shape[0]
        ks = np.fft.fftfreq(Mn, d=1.0 / Mn)
        keep = np.abs(self._modes_d) > 1e-17 * np.abs(self._modes_d).max()
        ik = 1j * ks[keep]
        dk = self._modes_d[keep] / (self.mu - ik)
        expt = np.exp(np.multiply.outer(t, ik))
        return [np.real(expt * (ik**r) @ dk) for r in orders]

    def Q(self, t):
        """Periodic part of F: F(t) = mu t + Q(t)."""
        t = np.asarray(t, dtype=float)
        return self.a + (1.0 - self.mu) * t + _mode_partial_integral(self._modes_f, t)

    def g(self, t):
        """g(t) = e^{Q(t)} sum_k d_k e^{ikt}/(mu - ik).

        Equivalent to (c - int_0^t e^{-F}) e^{F(t)} but free of the
        cancellation between c and the partial integral, so it stays
        accurate for strongly contracting profiles.
        """
        (s0,) = self._mode_sums(t, orders=(0,))
        return np.exp(self.Q(t)) * s0

    def derivative_table(self, x, order):
        """[g, g', g'', g'''] at x, with g', g'', g''' from the ODE."""
        x = np.asarray(x, dtype=float)
        g0 = self.g(x)
        out = [g0]
        if order >= 1:
            fx = self.f.fn(x)
            g1 = g0 * (1.0 + fx) - 1.0
            out.append(g1)
        if order >= 2:
            g2 = g1 * (1.0 + fx) + g0 * self.f.d1(x)
            out.append(g2)
        if order >= 3:
            g3 = g2 * (1.0 + fx) + 2.0 * g1 * self.f.d1(x) + g0 * self.f.d2(x)
            out.append(g3)
        return out

    def as_field(self, orbit_coordinate: ScalarField) -> ScalarField:
        """g composed with an orbit-parameter field, with exact jets."""
        return lift_univariate(orbit_coordinate, self.derivative_table)

    def diagnostics(self) -> Dict[str, float]:
        return {
            "a": self.a,
            "b": self.b,
            "K": self.K,
            "c": self.c,
            "min_g": self.min_g,
            "periodicity_residual": self.periodicity_residual,
            "ode1_residual": self.ode1_residual,
            "ode2_residual": self.ode2_residual,
        }


def _mode_partial_integral(f_modes, t):
    """int_0^t p(s) ds for the mean-free part of a trig polynomial given by
    FFT coefficients; the mean is handled by the caller."""
    M = f_modes.shape[0]
    ks = np.fft.fftfreq(M, d=1.0 / M)
    keep = (ks != 0) & (np.abs(f_modes) > 1e-17 * max(np.abs(f_modes).max(), 1e-300))
    if not keep.any():
        base = np.zeros_like(np.asarray(t, dtype=float))
        mean = np.real(f_modes[0])
        return base + mean * np.asarray(t, dtype=float)
    lam = 1j * ks[keep]
    ck = f_modes[keep]
    expt = np.exp(np.multiply.outer(np.asarray(t, dtype=float), lam))
    out = np.real((expt - 1.0) / lam @ ck)
    return out + np.real(f_modes[0]) * np.asarray(t, dtype=float)


def solve_periodic_first_order(f: PeriodicFunction, a: float = 0.0,
                               nodes: int = 512, grid: int = 1024) -> PotentialSolution:
    """Closed-form positive periodic solution of g' = g(1 + f) - 1.

    Checks f > -1 on a 1024-point grid, builds the periodizing constant
    c = K e^b/(e^b - 1) > 0, and reports periodicity, positivity and both
    ODE residuals measured against mode-sum derivatives (so quadrature
    truncation shows up honestly instead of cancelling).
    """
    nodes = max(int(nodes), 512)
    grid = max(int(grid), 1024)
    probe = np.linspace(0.0, TWO_PI, grid, endpoint=False)
    fvals_probe = f.fn(probe)
    if fvals_probe.min() <= -1.0:
        raise InadmissibleInput(
            f"need f > -1 everywhere; min f = {fvals_probe.min():.6f}"
        )

    M = max(4 * nodes, 2048)
    s = np.arange(M) * (TWO_PI / M)
    fv = f.fn(s)
    f_modes = np.fft.fft(fv) / M
    mean_f = float(np.real(f_modes[0]))
    b = TWO_PI * (1.0 + mean_f)

    # F on the fine grid (exact trig-polynomial partial integrals)
    F_grid = a + s + _mode_partial_integral(f_modes, s)
    mu = b / TWO_PI
    Q = F_grid - mu * s  # periodic part of F
    d_modes = np.fft.fft(np.exp(-Q)) / M

    sol = PotentialSolution(
        f=f, a=float(a), b=float(b), K=0.0, c=0.0,
        periodicity_residual=0.0, min_g=0.0,
        ode1_residual=0.0, ode2_residual=0.0, nodes=nodes,
        _modes_d=d_modes, _modes_f=f_modes, _mu=mu,
    )
    K = float(sol.J(TWO_PI))
    c = K * math.exp(b) / (math.exp(b) - 1.0)
    sol.K, sol.c = K, c

    gv = sol.g(probe)
    sol.min_g = float(gv.min())
    sol.periodicity_residual = float(np.abs(sol.g(probe + TWO_PI) - gv).max())

    # residuals with mode-sum derivatives (independent of the ODE recursion)
    g1m, g2m = _mode_gprimes(sol, probe)
    f0 = f.fn(probe)
    f1 = f.d1(probe)
    sol.ode1_residual = float(np.abs(g1m - gv * (1.0 + f0) + 1.0).max())
    sol.ode2_residual = float(np.abs(
        g2m - 2.0 * (1.0 + f0) * g1m - gv * f1 + gv * (1.0 + f0) ** 2 - (1.0 + f0)
    ).max())
    if sol.min_g <= 0:
        raise NumericalError("periodic potential failed to be positive")
    return sol


def _mode_gprimes(sol: PotentialSolution, t):
    """g' and g'' from differentiated mode sums (no ODE identities used)."""
    t = np.asarray(t, dtype=float)
    s0, s1, s2 = sol._mode_sums(t, orders=(0, 1, 2))
    eQ = np.exp(sol.Q(t))
    g0 = eQ * s0
    q1 = 1.0 + sol.f.fn(t) - sol.mu
    q2 = sol.f.d1(t)
    g1 = q1 * g0 + eQ * s1
    g2 = q2 * g0 + q1 * g1 + eQ * (q1 * s1 + s2)
    return g1, g2


# -- Example structure: Omega' = Omega + f theta ^ J theta -------------------


@dataclass
class LeeoloResult:
    structure: LCKStructure
    solution: PotentialSolution
    psi: ScalarField            # cover potential of theta' = (1 + f) theta
    f_field: ScalarField
    g_field: ScalarField
    checks: Dict[str, float]


def build_leeolo(base: ModelManifold, f: PeriodicFunction,
                 points=None, seed=11, count=60) -> LeeoloResult:
    """Norm-modulated LCK structure Omega' = Omega + f theta ^ J theta.

    ``base`` must carry a unit-norm Vaisman pair whose Lee flow closes with
    period 2pi; f is a 2pi-periodic function of the Lee-orbit parameter with
    f > -1.  The returned structure has Lee form (1 + f) theta, Lee field B,
    non-constant |B| (so it is not Vaisman), and the periodic-ODE potential g.
    """
    if base.structure is None or base.phi is None:
        raise GalleryError("leeolo needs a base fixture with a Vaisman pair")
    flow_B = flow_of(base, "B")
    if flow_B.period is None or abs(flow_B.period - TWO_PI) > 1e-9:
        raise InadmissibleInput(
            "the Lee flow must close with period 2pi "
            f"(registered period: {flow_B.period})"
        )
    grid = np.linspace(0.0, TWO_PI, 1024, endpoint=False)
    if f.fn(grid).min() <= -1.0:
        raise InadmissibleInput("need f > -1 everywhere")
    if f.antiderivative is None:
        raise InadmissibleInput("f needs a closed-form antiderivative")

    pts = points if points is not None else base.sample(count, seed)
    s0 = base.structure
    phi = base.phi
    B = s0.lee_pair().B

    f_field = lift_univariate(phi, f.derivs)
    # df = B(f) theta  (f depends only on the Lee orbit parameter)
    df = exterior_d(Form.from_function(f_field))
    colinear = (df - s0.theta.scale(B.apply_to(f_field))).max_abs(pts)
    if colinear > 1e-8:
        raise InadmissibleInput(
            f"df is not colinear with theta (residual {colinear:.2e})"
        )

    jt = apply_J(s0.theta)
    omega_p = s0.omega + wedge(s0.theta, jt).scale(f_field)
    theta_p = s0.theta.scale(1.0 + f_field)
    structure = LCKStructure(omega_p, theta_p, name="leeolo", manifold=base)

    # cover potential of theta': psi = phi + (antiderivative of f)(phi)
    def psi_derivs(x, order):
        out = [x + f.antiderivative(x)]
        if order >= 1:
            out.append(1.0 + f.fn(x))
        if order >= 2:
            out.append(f.d1(x))
        if order >= 3:
            out.append(f.d2(x))
        return out

    psi = lift_univariate(phi, psi_derivs)

    solution = solve_periodic_first_order(f)
    g_field = solution.as_field(phi)

    checks: Dict[str, float] = {}
    checks["df_colinear"] = colinear
    checks["lck_prime"] = lck_residual(structure, pts)
    pair = structure.lee_pair()
    checks["lee_field_is_B"] = float(
        np.abs(pair.B.values(pts) - B.values(pts)).max()
    )
    norm2 = pair.norm_squared(pts)
    fv = f_field.values(pts).real
    checks["norm_sq_matches_1_plus_f"] = float(np.abs(norm2 - (1.0 + fv)).max())
    checks["positivity_min_eig"] = float(structure.positivity_minima(pts).min())
    checks["potential"] = potential_residual(structure, g_field, pts)
    checks["theta_prime_closed"] = exterior_d(theta_p).max_abs(pts)
    return LeeoloResult(structure, solution, psi, f_field, g_field, checks)


# -- Duhamel solver for g'' + g = f ------------------------------------------


def duhamel_g(f_sampler: Callable, t: float, nodes: int = 256):
    """g(t) = int_0^t sin(t - s) f(s) ds by composite Simpson quadrature.

    Solves g'' + g = f with g(0) = g'(0) = 0 (variation of constants); no
    error accumulation, trivially parallel over t.
    """
    if nodes < 64:
        raise ValueError("duhamel_g needs nodes >= 64")
    panels = nodes if nodes % 2 == 0 else nodes + 1
    s = np.linspace(0.0, t, panels + 1)
    w = np.ones(panels + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    h = t / panels if panels else 0.0
    vals = np.asarray([f_sampler(si) for si in s], dtype=float)
    kern = np.sin(t - s)
    return float(h / 3.0 * np.sum(w * kern * vals))


# -- Orbit averaging ----------------------------------------------------------


@dataclass
class OrbitPotentialResult:
    """The averaged potential with the flow-family data it came from.

    ``g_t(t)`` rebuilds the Duhamel solution at a fixed time as a field, so
    callers can probe the expansion omega_t = cos t omega + sin t dJ eta +
    dd^c g_t at times of their own.
    """

    g: ScalarField
    omega_prime: Form
    theta_prime: Form
    f: ScalarField
    eta: Form
    checks: Dict[str, float]
    n_periods: int
    g_t: Callable = None

    def report(self):
        return dict(self.checks)


def _gl_nodes(a: float, b: float, panels: int, order: int = 16):
    """Composite Gauss-Legendre nodes/weights on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        nodes.append(mid + half * x)
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def orbit_average_potential(
    manifold: ModelManifold,
    omega: Form,
    C: VectorField,
    jc_flow: Optional[FlowMap] = None,
    points=None,
    t_probes=(0.5, 1.0, 2.7),
    nodes: int = 512,
    n_periods: int = 1,
    heavy_points: int = 12,
    tol_equivariant: float = 1e-7,
    phi: Optional[ScalarField] = None,
) -> OrbitPotentialResult:
    """Average the JC-flow family into an LCK metric with positive potential.

    Requires theta(C) = 1 (caller normalizes), a registered closed-form
    JC-flow, and the scaling identity L_C omega = -omega on the cover.  The
    expansion omega_t = cos t omega + sin t dJ eta + dd^c g_t is verified at
    the probe times; the averaged potential g is asserted positive; the
    output pair (g^{-1} dd^c g, -d ln g) is certified deck invariant with
    its own LCK and constant-potential residuals.
    """
    phi = phi if phi is not None else manifold.phi
    if phi is None:
        raise GalleryError("orbit averaging needs a cover potential phi")
    jc_flow = jc_flow if jc_flow is not None else flow_of(manifold, "JC")
    pts = points if points is not None else manifold.sample(40, seed=5)
    heavy = pts[: min(heavy_points, len(pts))]

    checks: Dict[str, float] = {}
    # theta(C) = 1 after normalization
    pairing = C.apply_to(phi).values(pts).real
    checks["theta_C_minus_1"] = float(np.abs(pairing - 1.0).max())
    if checks["theta_C_minus_1"] > 1e-8:
        raise InadmissibleInput("normalize the circle generator to theta(C) = 1")
    # omega1: L_C omega = -omega
    checks["scaling_identity"] = (lie_derivative(C, omega) + omega).max_abs(pts)
    if checks["scaling_identity"] > tol_equivariant:
        raise InadmissibleInput(
            "input form does not satisfy L_C omega = -omega "
            f"(residual {checks['scaling_identity']:.2e})"
        )

    eta = interior_product(C, omega)
    JC = jc_flow.generator
    f = ScalarField.nsum(
        [eta.coeffs[(i,)] * JC.components[i] for i in range(manifold.dim)
         if (i,) in eta.coeffs]
    )
    fvals = f.values(pts).real
    checks["min_f"] = float(fvals.min())
    if checks["min_f"] <= 0:
        raise NumericalError("the squared-norm function f must be positive")
    # exactness: omega = -d eta
    checks["exactness"] = (omega + exterior_d(eta)).max_abs(pts)

    djeta = exterior_d(apply_J(eta))

    def weighted_flow_sum(svals, weights) -> ScalarField:
        if jc_flow.affine is not None:
            mats, offs = zip(*(jc_flow.affine(float(si)) for si in svals))
            from .fields import affine_quadrature_field

            return affine_quadrature_field(f, np.stack(mats), np.stack(offs),
                                           weights)
        terms = [_pullback_field(f, jc_flow.at(float(si))) for si in svals]
        return ScalarField.nsum(terms, list(weights))

    def g_t_field(t: float, qnodes: int = 257) -> ScalarField:
        s, w = _gl_nodes(0.0, t, max(8, qnodes // 16))
        return weighted_flow_sum(s, np.sin(t - s) * w)

    omega5 = 0.0
    for t in t_probes:
        gt = g_t_field(float(t))
        lhs = pullback(jc_flow.at(float(t)), omega)
        rhs = omega.scale(math.cos(t)) + djeta.scale(math.sin(t)) + dd_c(gt)
        omega5 = max(omega5, (lhs - rhs).max_abs(heavy))
    checks["flow_expansion"] = omega5

    # averaged potential: single weighted quadrature over [0, 2 n pi]
    span = TWO_PI * n_periods
    panels = max(32 * n_periods, int(np.ceil(nodes / 16)))
    s, w = _gl_nodes(0.0, span, panels)
    g = weighted_flow_sum(s, (1.0 - np.cos(s)) * w / span)
    gvals = g.values(pts).real
    checks["min_g"] = float(gvals.min())
    if checks["min_g"] <= 0:
        raise NumericalError("averaged potential failed to be positive")

    # cross-check the collapsed average against the literal double-quadrature
    # route (1/span) int_0^span dt int_0^t sin(t - s) f(Phi_s x) ds
    x0 = pts[:1]
    mg = 1536 * n_periods
    sgrid = np.linspace(0.0, span, mg + 1)
    if jc_flow.affine is not None:
        mats, offs = zip(*(jc_flow.affine(float(sv)) for sv in sgrid))
        moved = np.einsum("sij,j->si", np.stack(mats), x0[0]) + np.stack(offs)
        f_along = f.values(moved).real
    else:
        f_along = np.array(
            [float(f.values(jc_flow.at(float(sv))(x0)).real[0]) for sv in sgrid]
        )
    checks["min_f_along_flow"] = float(f_along.min())
    if checks["min_f_along_flow"] <= 0:
        raise NumericalError("f stopped being positive along the flow")
    h = span / mg
    simp = np.ones(mg + 1)
    simp[1:-1:2], simp[2:-1:2] = 4.0, 2.0
    t_idx = np.arange(0, mg + 1, 8)
    g_ts = np.zeros(t_idx.shape[0])
    for r, it in enumerate(t_idx[1:], start=1):
        wloc = np.ones(it + 1)
        wloc[1:-1:2], wloc[2:-1:2] = 4.0, 2.0
        g_ts[r] = h / 3.0 * np.sum(
            wloc * np.sin(sgrid[it] - sgrid[: it + 1]) * f_along[: it + 1]
        )
    ht = sgrid[8] - sgrid[0]
    wout = np.ones(t_idx.shape[0])
    wout[1:-1:2], wout[2:-1:2] = 4.0, 2.0
    double = ht / 3.0 * np.sum(wout * g_ts) / span
    checks["average_vs_duhamel"] = abs(double - float(gvals[0]))

    omega_prime = dd_c(g).scale(1.0 / g)
    theta_prime = exterior_d(Form.from_function(g.log())).scale(-1.0)

    checks["omega_prime_descends"] = invariance_residual(manifold, omega_prime, heavy)
    checks["theta_prime_descends"] = invariance_residual(manifold, theta_prime, heavy)
    out = LCKStructure(omega_prime, theta_prime, name="orbit-average",
                       manifold=manifold)
    checks["lck_prime"] = lck_residual(out, heavy)
    from .fields import constant as _const

    checks["unit_potential"] = (
        omega_prime - twisted_potential_form(_const(1.0, manifold.dim), theta_prime)
    ).max_abs(heavy)
    checks["positivity_min_eig"] = float(out.positivity_minima(heavy).min())
    if manifold.decks:
        base_theta = exterior_d(Form.from_function(phi))
        li_new = deck_loop_integral(manifold, theta_prime, manifold.decks[0].name)
        li_old = deck_loop_integral(manifold, base_theta, manifold.decks[0].name)
        checks["lee_class_loop_match"] = abs(li_new - li_old)
    return OrbitPotentialResult(g, omega_prime, theta_prime, f, eta, checks,
                                n_periods, g_t=g_t_field)


def _pullback_field(f: ScalarField, pm) -> ScalarField:
    from .fields import compose_field

    return compose_field(f, pm)


def leeolo_orbit_pipeline(m: ModelManifold, n_periods: int = 1, points=None,
                          nodes: int = 512, heavy_points: int = 8,
                          avg_nodes: int = 32) -> OrbitPotentialResult:
    """Full vertical-circle pipeline for the leeolo fixture.

    Averages the norm-modulated structure over the twisted vertical circle C
    (which lands back on the invariant Vaisman representative; certified by
    residuals), lifts it with the base cover potential, and runs the orbit
    construction with the JC-flow, which does not preserve the lift.
    """
    if "leeolo" not in m.extras:
        raise GalleryError("pipeline needs the leeolo fixture")
    base = m.extras["vaisman_base"]
    phi_b = m.extras["base_phi"]
    pts = points if points is not None else m.sample(25, seed=9)
    _, omega_avg, theta_avg, prep = vertical_circle_input(
        m, m.structure, phi_b, circle="C", nodes=avg_nodes, pts=pts[:10]
    )
    prep["avg_equals_invariant_rep"] = (omega_avg - base.omega).max_abs(pts[:10])
    prep["avg_theta_equals_rep"] = (theta_avg - base.theta).max_abs(pts[:10])
    # run on the certified invariant representative (identical to the average
    # within the residuals above, and a much smaller expression)
    omega_input = base.omega.scale((-1.0 * phi_b).exp())
    res = orbit_average_potential(
        m, omega_input, m.fields["C"], flow_of(m, "JC"), points=pts,
        heavy_points=heavy_points, nodes=nodes, n_periods=n_periods, phi=phi_b,
    )
    res.checks.update({f"prep_{k}": v for k, v in prep.items()})
    return res


def vertical_circle_input(manifold: ModelManifold, structure: LCKStructure,
                          phi: ScalarField, circle: str = "C",
                          nodes: int = 32, pts=None):
    """Average an LCK pair over a vertical circle and lift to the cover.

    Returns the equivariant Kaehler input for ``orbit_average_potential``
    together with the invariant representative it averaged to.  When the
    average lands (to machine precision) on a registered closed-form pair,
    callers should feed that representative onward; the residuals returned
    here certify the identification.
    """
    from .torus import average_over_circle

    fl = flow_of(manifold, circle)
    pts = pts if pts is not None else manifold.sample(20, seed=3)
    omega_avg = average_over_circle(structure.omega, fl, nodes)
    theta_avg = average_over_circle(structure.theta, fl, nodes)
    dphi = exterior_d(Form.from_function(phi))
    checks = {
        "averaged_theta_matches_dphi": (theta_avg - dphi).max_abs(pts),
    }
    omega_k = omega_avg.scale((-1.0 * phi).exp())
    return omega_k, omega_avg, theta_avg, checks
