"""Model manifolds: quotient charts, deck groups, samplers, flows.

Every fixture is a global chart (a domain of C^n or H x C) together with
explicit deck-group generators, so quotient objects are represented by
deck-invariant/equivariant tensors on the cover.  Flows and deck maps are
closed-form point maps with exact Jacobians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from .errors import GalleryError
from .fields import (
    PointMap,
    ScalarField,
    VectorField,
    apply_J_vector,
    as_batch,
    complex_coordinate,
    compose_field,
    constant,
    coordinate,
)
from .forms import Form, exterior_d, pullback, to_real
from .lck import LCKStructure


@dataclass
class DeckTransformation:
    """A deck-group generator with its Kaehler-lift homothety factor rho."""

    name: str
    map: PointMap
    rho: float  # gamma^* Omega_K = rho^{-1} Omega_K; 1 for isometries


@dataclass
class FlowMap:
    """A registered closed-form flow of a vector field.

    ``affine``, when present, returns (M, b) with Phi_t(x) = M x + b; the
    quadrature pipelines use it to batch flow pullbacks.
    """

    name: str
    generator: VectorField
    at: Callable[[float], PointMap]
    period: Optional[float] = None
    closes_via: Optional[str] = None  # "identity" or a deck generator name
    affine: Optional[Callable] = None


@dataclass
class LeeClass:
    """An invariant closed 1-form representing a Lee de Rham class.

    ``admits_lck`` records, as a hypothesis, that the underlying manifold is
    of LCK type even when no explicit metric is wired into the fixture.
    """

    theta: Form
    admits_lck: bool = True
    note: str = ""


class ModelManifold:
    def __init__(self, name, dim, contains, sampler, decks=None, phi=None,
                 structure=None, lee_class=None, loop_base=None, params=None):
        self.name = name
        self.dim = dim
        self.complex_dim = dim // 2
        self._contains = contains
        self._sampler = sampler
        self.decks: List[DeckTransformation] = decks or []
        self.phi: Optional[ScalarField] = phi
        self.structure: Optional[LCKStructure] = structure
        self.lee_class: Optional[LeeClass] = lee_class
        self.flows: Dict[str, FlowMap] = {}
        self.fields: Dict[str, VectorField] = {}
        self.extras: Dict[str, object] = {}
        self.loop_base = loop_base
        self.params = params or {}
        if structure is not None:
            structure.manifold = self

    def contains(self, pts):
        return self._contains(as_batch(pts, self.dim))

    def sample(self, count, seed):
        if count < 1:
            raise ValueError("count must be >= 1")
        return self._sampler(count, seed)

    def deck(self, name) -> DeckTransformation:
        for d in self.decks:
            if d.name == name:
                return d
        raise GalleryError(f"unknown deck generator {name!r} on {self.name}")

    def register_flow(self, flow: FlowMap):
        self.flows[flow.name] = flow
        self.fields[flow.name] = flow.generator

    def kahler_lift(self) -> Form:
        """e^{-phi} p^* Omega, the equivariant Kaehler form on the cover."""
        if self.structure is None or self.phi is None:
            raise GalleryError(f"fixture {self.name} carries no canonical structure")
        return self.structure.omega.scale((-1.0 * self.phi).exp())


# -- quotient diagnostics ---------------------------------------------------


def sample_points(m: ModelManifold, count: int, seed: int):
    return m.sample(count, seed)


def invariance_residual(m: ModelManifold, a: Form, pts) -> float:
    """max over deck generators of |gamma^* a - a|; zero means a descends."""
    return max((pullback(d.map, a) - a).max_abs(pts) for d in m.decks)


def equivariance_residual(m: ModelManifold, a: Form, pts) -> float:
    """max over generators of |gamma^* a - rho(gamma)^{-1} a|."""
    return max(
        (pullback(d.map, a) - a.scale(1.0 / d.rho)).max_abs(pts) for d in m.decks
    )


def deck_quotient_check(m: ModelManifold, X: VectorField, pts) -> float:
    """max over generators of |D gamma . X - X o gamma|; zero means X descends."""
    pts = as_batch(pts, m.dim)
    worst = 0.0
    xv = X.values(pts)
    for d in m.decks:
        jac = d.map.jacobian(pts)
        pushed = np.einsum("nij,nj->ni", jac, xv)
        there = X.values(d.map(pts))
        worst = max(worst, float(np.abs(pushed - there).max()))
    return worst


def flow_of(m: ModelManifold, name: str) -> FlowMap:
    if name not in m.flows:
        raise GalleryError(f"no registered flow {name!r} on fixture {m.name}")
    return m.flows[name]


def flow_group_residual(flow: FlowMap, s: float, t: float, pts) -> float:
    """|Phi_{s+t} - Phi_s o Phi_t| at the samples."""
    a = flow.at(s + t)(pts)
    b = flow.at(s)(flow.at(t)(pts))
    return float(np.abs(a - b).max())


def flow_generator_residual(flow: FlowMap, t: float, pts, h=2e-6) -> float:
    """Central-difference check that d/dt Phi_t = X o Phi_t (oracle only)."""
    fwd = flow.at(t + h)(pts)
    bwd = flow.at(t - h)(pts)
    vel = (fwd - bwd) / (2 * h)
    target = flow.generator.values(flow.at(t)(pts))
    return float(np.abs(vel - target).max())


def flow_closure_residual(m: ModelManifold, flow: FlowMap, pts) -> float:
    """|Phi_period - closure map| (identity or the registered deck word)."""
    if flow.period is None:
        raise GalleryError(f"flow {flow.name} has no registered period")
    end = flow.at(flow.period)(pts)
    if flow.closes_via in (None, "identity"):
        target = as_batch(pts, m.dim)
    else:
        target = m.deck(flow.closes_via).map(pts)
    return float(np.abs(end - target).max())


def deck_loop_integral(m: ModelManifold, a: Form, deck_name: str,
                       base=None, nodes=64) -> float:
    """Integral of a 1-form along the straight segment x -> gamma(x).

    For closed invariant 1-forms this is the pairing of the de Rham class
    with the deck loop.
    """
    if a.degree != 1:
        raise ValueError("loop integrals are for 1-forms")
    x0 = np.asarray(base if base is not None else m.loop_base, dtype=float)
    x1 = m.deck(deck_name).map(x0)[0]
    glx, glw = np.polynomial.legendre.leggauss(nodes)
    ts = 0.5 * (glx + 1.0)
    ws = 0.5 * glw
    path = x0[None, :] * (1 - ts)[:, None] + x1[None, :] * ts[:, None]
    tangent = np.broadcast_to(x1 - x0, path.shape)
    vals = a.evaluate(path, tangent)
    return float(np.real(np.sum(ws * vals)))


# -- fixture builders ---------------------------------------------------------


def _annulus_sampler(dim, r_lo, r_hi):
    def sampler(count, seed):
        rng = np.random.default_rng(seed)
        direction = rng.normal(size=(count, dim))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        r = np.exp(rng.uniform(math.log(r_lo), math.log(r_hi), size=count))
        return direction * r[:, None]

    return sampler


def _scaled_rotation_flow(dim, a: complex):
    """Phi_t(z) = e^{a t} z applied to every complex coordinate."""

    def at(t: float) -> PointMap:
        u = complex(np.exp(a * t))
        comps = []
        for j in range(dim // 2):
            x, y = coordinate(2 * j, dim), coordinate(2 * j + 1, dim)
            comps.append(x * u.real - y * u.imag)
            comps.append(x * u.imag + y * u.real)
        return PointMap(comps, name=f"rot{t:.3f}")

    return at


def _scaled_rotation_affine(dim, a: complex):
    def affine(t: float):
        u = complex(np.exp(a * t))
        M = np.zeros((dim, dim))
        for j in range(dim // 2):
            M[2 * j, 2 * j] = u.real
            M[2 * j, 2 * j + 1] = -u.imag
            M[2 * j + 1, 2 * j] = u.imag
            M[2 * j + 1, 2 * j + 1] = u.real
        return M, np.zeros(dim)

    return affine


def hopf_diag(n=2, beta=0.5):
    """Diagonal Hopf manifold (C^n - 0)/(z -> beta z) with its Vaisman pair.

    The fundamental form is normalized so the Lee field has unit norm:
    Omega = 2|z|^{-2} sum_j i dz_j ^ dzbar_j, theta = -d ln |z|^2.
    """
    n = int(n)
    beta = complex(beta)
    if n < 1:
        raise GalleryError("hopf_diag needs n >= 1")
    if not 0 < abs(beta) < 1:
        raise GalleryError("hopf_diag needs 0 < |beta| < 1")
    if beta.imag == 0:
        beta = complex(beta.real, 0.0)
    dim = 2 * n
    r2 = ScalarField.nsum([coordinate(i, dim) ** 2 for i in range(dim)])
    phi = -1.0 * r2.log()
    inv = 1.0 / r2
    omega = Form(dim, 2, {(2 * j, 2 * j + 1): 4.0 * inv for j in range(n)})
    theta = Form(dim, 1, {(i,): -2.0 * coordinate(i, dim) * inv for i in range(dim)})

    B = VectorField([-0.5 * coordinate(i, dim) for i in range(dim)], name="B")
    A = apply_J_vector(B)
    A.name = "A"
    rot = []
    for j in range(n):
        rot.append(-1.0 * coordinate(2 * j + 1, dim))
        rot.append(coordinate(2 * j, dim))
    R = VectorField(rot, name="R")
    C = B + R
    C.name = "C"
    JC = apply_J_vector(C)
    JC.name = "JC"

    deck = DeckTransformation("gamma", _beta_scaling_map(dim, beta),
                              rho=1.0 / abs(beta) ** 2)

    m = ModelManifold(
        name="hopf_diag",
        dim=dim,
        contains=lambda pts: np.linalg.norm(pts, axis=1) > 1e-9,
        sampler=_annulus_sampler(dim, abs(beta), 1.0),
        decks=[deck],
        phi=phi,
        structure=LCKStructure(omega, theta, name="hopf_diag", lee_B=B, lee_A=A),
        loop_base=np.array([0.9, 0.05, 0.3, -0.2] * n)[:dim],
        params={"n": n, "beta": beta},
    )

    b_period = None
    b_closes = None
    if beta.imag == 0 and beta.real > 0:
        b_period = -2.0 * math.log(beta.real)
        b_closes = "gamma"
    m.register_flow(FlowMap("B", B, _scaled_rotation_flow(dim, -0.5),
                            period=b_period, closes_via=b_closes,
                            affine=_scaled_rotation_affine(dim, -0.5)))
    m.register_flow(FlowMap("A", A, _scaled_rotation_flow(dim, -0.5j),
                            period=4 * math.pi, closes_via="identity",
                            affine=_scaled_rotation_affine(dim, -0.5j)))
    m.register_flow(FlowMap("R", R, _scaled_rotation_flow(dim, 1.0j),
                            period=2 * math.pi, closes_via="identity",
                            affine=_scaled_rotation_affine(dim, 1.0j)))
    c_period = None
    c_closes = None
    if abs(beta - math.exp(-math.pi)) < 1e-12:
        c_period = 2 * math.pi
        c_closes = "gamma"
    m.register_flow(FlowMap("C", C, _scaled_rotation_flow(dim, -0.5 + 1.0j),
                            period=c_period, closes_via=c_closes,
                            affine=_scaled_rotation_affine(dim, -0.5 + 1.0j)))
    m.register_flow(FlowMap("JC", JC, _scaled_rotation_flow(dim, -1.0 - 0.5j),
                            affine=_scaled_rotation_affine(dim, -1.0 - 0.5j)))
    return m


def _beta_scaling_map(dim, beta: complex) -> PointMap:
    comps = []
    for j in range(dim // 2):
        x, y = coordinate(2 * j, dim), coordinate(2 * j + 1, dim)
        comps.append(x * beta.real - y * beta.imag)
        comps.append(x * beta.imag + y * beta.real)
    return PointMap(comps, name="gamma")


def hopf_nondiag(beta=0.4 + 0.1j, lam=1.0, m=2):
    """Non-diagonal Hopf surface: deck (z1, z2) -> (b z1, b^m z2 + lam z1^m).

    Carries the purely-real maximal torus generated by xi1, xi2 and an
    invariant Lee-class representative built from a deck-weighted series
    potential (no explicit metric is wired in).
    """
    beta = complex(beta)
    lam = complex(lam)
    mm = int(m)
    if not 0 < abs(beta) < 1:
        raise GalleryError("hopf_nondiag needs 0 < |beta| < 1")
    if mm < 1:
        raise GalleryError("hopf_nondiag needs m >= 1")
    if lam == 0:
        raise GalleryError("hopf_nondiag needs lam != 0")
    dim = 4
    z1 = complex_coordinate(0, dim)
    z2 = complex_coordinate(1, dim)
    c = complex(np.log(beta))  # principal branch, e^c = beta
    b2 = lam / beta**mm

    gamma = PointMap.from_complex([beta * z1, (beta**mm) * z2 + lam * z1**mm],
                                  dim_in=dim, name="gamma")

    Z1_hol = [z1, float(mm) * z2]
    Z2_hol = [0.0 * z1, z1**mm]
    xi1 = VectorField.from_holomorphic([2j * math.pi * h for h in Z1_hol], dim, "xi1")
    xi2 = VectorField.from_holomorphic(
        [c * Z1_hol[0], c * Z1_hol[1] + b2 * Z2_hol[1]], dim, "xi2"
    )
    Z1_re = VectorField.from_holomorphic(Z1_hol, dim, "Z1_re")
    Z1_im = VectorField.from_holomorphic([1j * h for h in Z1_hol], dim, "Z1_im")
    Z2_re = VectorField.from_holomorphic(Z2_hol, dim, "Z2_re")
    Z2_im = VectorField.from_holomorphic([1j * h for h in Z2_hol], dim, "Z2_im")

    def complex_flow(a_coef: complex, b_coef: complex):
        """Flow map of a Z1 + b Z2 at complex time u."""

        def at(u: complex) -> PointMap:
            e1 = np.exp(a_coef * u)
            e2 = np.exp(a_coef * mm * u)
            return PointMap.from_complex(
                [e1 * z1, e2 * (z2 + (b_coef * u) * z1**mm)],
                dim_in=dim,
                name=f"flow{u}",
            )

        return at

    # deck-weighted series potential: w o gamma = |beta|^2 w, w > 0 smooth;
    # truncation chosen so the dropped tail is ~|beta|^{2K} ~ 1e-15, capped so
    # the far terms' jet intermediates stay inside double range
    K = int(np.clip(math.ceil(7.5 / -math.log10(abs(beta))) + 4, 8, 80))
    terms = []
    weights = []
    ab2 = abs(beta) ** 2
    for k in range(-K, K + 1):
        w1 = beta**k * z1
        w2 = beta ** (mm * k) * z2 + (k * lam * beta ** (mm * (k - 1))) * z1**mm
        nk = (w1 * w1.conjugate()).real_part() + (w2 * w2.conjugate()).real_part()
        # chi(n) = n^2/(1 + n^3) written as 1/(n + n^{-2}) to keep the jet
        # intermediates of the far terms inside double range
        terms.append(1.0 / (nk + (1.0 / nk) ** 2))
        weights.append(ab2 ** (-k))
    w_series = ScalarField.nsum(terms, weights)
    phi_nd = -1.0 * w_series.log()
    theta_nd = exterior_d(Form.from_function(phi_nd))

    mfd = ModelManifold(
        name="hopf_nondiag",
        dim=dim,
        contains=lambda pts: np.linalg.norm(pts, axis=1) > 1e-9,
        sampler=_annulus_sampler(dim, abs(beta), 1.0),
        decks=[DeckTransformation("gamma", gamma, rho=1.0 / ab2)],
        phi=phi_nd,
        structure=None,
        lee_class=LeeClass(theta_nd, admits_lck=True,
                           note="series potential; metric existence assumed"),
        loop_base=np.array([0.9, 0.05, 0.3, -0.2]),
        params={"beta": beta, "lam": lam, "m": mm, "c": c},
    )
    mfd.register_flow(FlowMap("xi1", xi1, complex_flow(2j * math.pi, 0.0),
                              period=1.0, closes_via="identity"))
    mfd.register_flow(FlowMap("xi2", xi2, complex_flow(c, b2),
                              period=1.0, closes_via="gamma"))
    for f in (Z1_re, Z1_im, Z2_re, Z2_im):
        mfd.fields[f.name] = f
    mfd.extras["holomorphic_flow"] = complex_flow
    return mfd


def inoue_splus(p=0, q=0, r=1, t=0.0, N=((2, 1), (1, 1))):
    """Inoue surface S^+: quotient of H x C by the affine group g0..g3.

    Constants are derived from the lattice data: alpha is the large
    eigenvalue of N, (a_i), (b_i) the eigenvectors normalized to leading
    entry 1, and (c1, c2) solves the displayed linear system.  The LCK pair
    (Omega, theta = d Im w / Im w) requires t real.
    """
    N = np.asarray(N, dtype=float)
    if N.shape != (2, 2) or abs(np.linalg.det(N) - 1.0) > 1e-12:
        raise GalleryError("inoue_splus needs an SL(2, Z) matrix")
    if int(r) == 0:
        raise GalleryError("inoue_splus needs r != 0")
    if isinstance(t, complex) and t.imag != 0:
        raise GalleryError("the Inoue LCK fixture needs t real")
    t = float(np.real(t))
    p, q, r = int(p), int(q), int(r)

    evals = np.linalg.eigvals(N).real
    alpha = float(evals.max())
    if alpha <= 1:
        raise GalleryError("inoue_splus needs a real eigenvalue alpha > 1")
    a2 = (alpha - N[0, 0]) / N[0, 1]
    b2 = (1.0 / alpha - N[0, 0]) / N[0, 1]
    a = np.array([1.0, a2])
    b = np.array([1.0, b2])
    e = np.zeros(2)
    for i in range(2):
        e[i] = (
            0.5 * N[i, 0] * (N[i, 0] - 1) * a[0] * b[0]
            + 0.5 * N[i, 1] * (N[i, 1] - 1) * a[1] * b[1]
            + N[i, 0] * N[i, 1] * b[0] * a[1]
        )
    lam0 = (b[0] * a[1] - b[1] * a[0]) / r
    rhs = e + lam0 * np.array([p, q])
    cvec = np.linalg.solve((np.eye(2) - N.T).T, rhs)  # row-vector system

    dim = 4
    x1, y1 = coordinate(0, dim), coordinate(1, dim)
    x2, y2 = coordinate(2, dim), coordinate(3, dim)

    g0 = PointMap([x1 * alpha, y1 * alpha, x2 + t, y2 * 1.0], name="g0")
    g1 = PointMap([x1 + a[0], y1 * 1.0, x2 + b[0] * x1 + cvec[0], y2 + b[0] * y1],
                  name="g1")
    g2 = PointMap([x1 + a[1], y1 * 1.0, x2 + b[1] * x1 + cvec[1], y2 + b[1] * y1],
                  name="g2")
    g3 = PointMap([x1 * 1.0, y1 * 1.0, x2 + lam0, y2 * 1.0], name="g3")
    decks = [
        DeckTransformation("g0", g0, rho=alpha),
        DeckTransformation("g1", g1, rho=1.0),
        DeckTransformation("g2", g2, rho=1.0),
        DeckTransformation("g3", g3, rho=1.0),
    ]

    inv_y1 = 1.0 / y1
    omega_c = Form(dim, 2, {
        (0, 1): (1.0 + y2**2) * inv_y1**2 * 1.0j,
        (0, 3): -1.0j * y2 * inv_y1,
        (1, 2): 1.0j * y2 * inv_y1,
        (2, 3): constant(1.0j, dim),
    }, frame="complex")
    omega = to_real(omega_c, drop_imag=True)
    theta = Form(dim, 1, {(1,): inv_y1})

    def sampler(count, seed):
        rng = np.random.default_rng(seed)
        out = np.empty((count, 4))
        out[:, 0] = rng.uniform(0.0, a[0], size=count)
        out[:, 1] = np.exp(rng.uniform(math.log(0.1), math.log(10.0), size=count))
        out[:, 2] = rng.uniform(0.0, abs(lam0), size=count)
        out[:, 3] = rng.uniform(-1.0, 1.0, size=count)
        return out

    xi = VectorField(
        [constant(0.0, dim), constant(0.0, dim), constant(lam0 / 2.0, dim),
         constant(0.0, dim)],
        name="xi",
    )

    def xi_flow(tt: float) -> PointMap:
        return PointMap([x1 * 1.0, y1 * 1.0, x2 + (lam0 / 2.0) * tt, y2 * 1.0],
                        name=f"xi{tt:.3f}")

    def xi_affine(tt: float):
        off = np.zeros(dim)
        off[2] = (lam0 / 2.0) * tt
        return np.eye(dim), off

    m = ModelManifold(
        name="inoue_splus",
        dim=dim,
        contains=lambda pts: pts[:, 1] > 0,
        sampler=sampler,
        decks=decks,
        phi=y1.log(),
        structure=LCKStructure(omega, theta, name="inoue_splus"),
        loop_base=np.array([0.2, 1.3, 0.4, 0.3]),
        params={"p": p, "q": q, "r": r, "t": t, "alpha": alpha,
                "a": a, "b": b, "c": cvec, "lam0": lam0},
    )
    m.register_flow(FlowMap("xi", xi, xi_flow, period=2.0, closes_via="g3",
                            affine=xi_affine))
    return m


def hxc_cover():
    """The bare cover H x C (no deck group, no canonical structure)."""
    dim = 4

    def sampler(count, seed):
        rng = np.random.default_rng(seed)
        out = rng.uniform(-1.0, 1.0, size=(count, 4))
        out[:, 1] = np.exp(rng.uniform(math.log(0.1), math.log(10.0), size=count))
        return out

    return ModelManifold(
        name="hxc_cover",
        dim=dim,
        contains=lambda pts: pts[:, 1] > 0,
        sampler=sampler,
        loop_base=np.array([0.0, 1.0, 0.0, 0.0]),
    )


def product(a: ModelManifold | str | None = None,
            b: ModelManifold | str | None = None):
    """Product chart of two fixtures with the product deck group."""
    if isinstance(a, str):
        a = gallery(a)
    if isinstance(b, str):
        b = gallery(b)
    a = a if a is not None else hopf_diag()
    b = b if b is not None else hopf_diag()
    dim = a.dim + b.dim
    proj1 = PointMap([coordinate(i, dim) for i in range(a.dim)], name="p1")
    proj2 = PointMap([coordinate(a.dim + i, dim) for i in range(b.dim)], name="p2")

    def embed_map(pm: PointMap, side: int) -> PointMap:
        if side == 0:
            comps = [compose_field(c, proj1) for c in pm.components]
            comps += [coordinate(a.dim + i, dim) for i in range(b.dim)]
        else:
            comps = [coordinate(i, dim) for i in range(a.dim)]
            comps += [compose_field(c, proj2) for c in pm.components]
        return PointMap(comps, name=f"{pm.name}x{side}")

    def embed_field(X: VectorField, side: int) -> VectorField:
        if side == 0:
            comps = [compose_field(c, proj1) for c in X.components]
            comps += [constant(0.0, dim) for _ in range(b.dim)]
        else:
            comps = [constant(0.0, dim) for _ in range(a.dim)]
            comps += [compose_field(c, proj2) for c in X.components]
        return VectorField(comps, name=f"{X.name}@{side}")

    decks = []
    for d in a.decks:
        decks.append(DeckTransformation(f"{d.name}@0", embed_map(d.map, 0), d.rho))
    for d in b.decks:
        decks.append(DeckTransformation(f"{d.name}@1", embed_map(d.map, 1), d.rho))

    def sampler(count, seed):
        return np.hstack([a.sample(count, seed), b.sample(count, seed + 1)])

    def contains(pts):
        return np.logical_and(
            a.contains(pts[:, : a.dim]), b.contains(pts[:, a.dim :])
        )

    m = ModelManifold(
        name=f"product({a.name},{b.name})",
        dim=dim,
        contains=contains,
        sampler=sampler,
        decks=decks,
        params={"factors": (a.name, b.name)},
    )
    for name, X in a.fields.items():
        m.fields[f"{name}@0"] = embed_field(X, 0)
    for name, X in b.fields.items():
        m.fields[f"{name}@1"] = embed_field(X, 1)
    for name, fl in a.flows.items():
        m.register_flow(FlowMap(
            f"{name}@0", embed_field(fl.generator, 0),
            lambda tt, _fl=fl: embed_map(_fl.at(tt), 0),
            period=fl.period,
            closes_via=None if fl.closes_via in (None, "identity")
            else f"{fl.closes_via}@0",
        ))
    for name, fl in b.flows.items():
        m.register_flow(FlowMap(
            f"{name}@1", embed_field(fl.generator, 1),
            lambda tt, _fl=fl: embed_map(_fl.at(tt), 1),
            period=fl.period,
            closes_via=None if fl.closes_via in (None, "identity")
            else f"{fl.closes_via}@1",
        ))
    if a.structure is not None and b.structure is not None:
        sum_omega = pullback(proj1, a.structure.omega) + pullback(proj2, b.structure.omega)
        sum_theta = pullback(proj1, a.structure.theta) + pullback(proj2, b.structure.theta)
        m.extras["sum_structure"] = LCKStructure(
            sum_omega, sum_theta, name="product-sum"
        )
    m.extras["projections"] = (proj1, proj2)
    # canonical torus: the Lee-plane circles of each factor when present,
    # otherwise every registered periodic circle of that factor
    torus_names = []
    for side, factor in ((0, a), (1, b)):
        preferred = [n for n in ("A", "B") if n in factor.flows
                     and factor.flows[n].period is not None]
        if not preferred:
            preferred = [n for n, fl in factor.flows.items()
                         if fl.period is not None]
        torus_names.extend(f"{n}@{side}" for n in preferred)
    m.extras["torus_flows"] = torus_names
    return m


def leeolo(eps=0.3, n=2):
    """Hopf base with B-flow period 2 pi carrying the norm-modulated
    structure Omega' = Omega + f theta ^ J theta, f = eps cos(orbit)."""
    from .potential import PeriodicFunction, build_leeolo

    base = hopf_diag(n=n, beta=math.exp(-math.pi))
    base.name = "leeolo"
    F = PeriodicFunction.cosine(float(eps))
    res = build_leeolo(base, F)
    base.extras["leeolo"] = res
    base.extras["vaisman_base"] = base.structure
    base.extras["base_phi"] = base.phi
    base.extras["periodic_f"] = F
    base.structure = res.structure
    base.structure.manifold = base
    base.phi = res.psi
    return base


_BUILDERS = {
    "hopf_diag": hopf_diag,
    "hopf_nondiag": hopf_nondiag,
    "inoue_splus": inoue_splus,
    "hxc_cover": hxc_cover,
    "product": product,
    "leeolo": leeolo,
}


def gallery(fixture_id: str, **params) -> ModelManifold:
    """Build a gallery fixture by id (see _BUILDERS for the catalog)."""
    if fixture_id not in _BUILDERS:
        raise GalleryError(f"unknown fixture {fixture_id!r}")
    return _BUILDERS[fixture_id](**params)
