"""Pointwise verification of the curvature identities for one named example.

Every check samples points (and random planes at each point) and records the
worst residual observed.  Quantities the theory leaves open are recorded as
observations rather than pass/fail checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import curvature as cv
from .connections import (
    AffineConnection,
    covariant_metric_derivative_at,
    expected_non_metricity_at,
    levi_civita,
    semi_symmetric_metric,
    semi_symmetric_non_metric,
    semi_symmetric_torsion_at,
    torsion_at,
)
from .diffcore import Point
from .examples import NamedExample
from .fstructure import f_basis, orthonormal_l_pair, random_orthonormal_frame, unit_l_vector
from .records import Check

RIEMANNIAN = "riemannian"
SSM = "ssm"
SSNM = "ssnm"
ALL_CONNECTIONS = (RIEMANNIAN, SSM, SSNM)

MIN_L_PAIRS = 50
SPACE_FORM_POINTS = 5

# fixed tolerances; everything else uses the run tolerance
TOL_TIGHT = 1e-9
TOL_KL_CONSTANT = 1e-7
TOL_TAU_SPHERE = 1e-6
TOL_TAU_FLAT = 1e-7
KL_SPREAD_FLOOR = 0.1
PAIR_VIOLATION_FLOOR = 0.5
NONCONSTANT_FLOOR = 0.5


@dataclass
class TheoremReport:
    example: str
    checks: list[Check]
    observations: dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def __getitem__(self, key: str | tuple[str, str]) -> Check:
        name, conn = key if isinstance(key, tuple) else (key, None)
        for c in self.checks:
            if c.name == name and (conn is None or c.connection == conn):
                return c
        raise KeyError(key)


class _Acc:
    """Running max of residuals (or min of witness values) per check."""

    def __init__(self):
        self.data: dict[tuple[str, str], dict] = {}

    def add(self, name, conn, value, tol, anchor, comparison="<", **detail):
        key = (name, conn)
        rec = self.data.get(key)
        value = float(value)
        if rec is None:
            self.data[key] = {"v": value, "tol": tol, "anchor": anchor, "cmp": comparison, "n": 1, "detail": detail}
            return
        rec["n"] += 1
        if comparison == "<":
            rec["v"] = max(rec["v"], value) if math.isfinite(value) else math.inf
        else:
            rec["v"] = min(rec["v"], value)

    def checks(self) -> list[Check]:
        out = []
        for (name, conn), r in self.data.items():
            detail = dict(r["detail"])
            detail["samples"] = r["n"]
            out.append(Check(name, r["v"], r["tol"], r["anchor"], conn, r["cmp"], detail))
        return out


def build_connections(ex: NamedExample) -> dict[str, AffineConnection]:
    S = ex.structure
    lc = levi_civita(S.g)
    return {RIEMANNIAN: lc, SSM: semi_symmetric_metric(S, lc), SSNM: semi_symmetric_non_metric(S, lc)}


def theorem_suite(
    ex: NamedExample,
    points: Sequence[Point],
    rng: np.random.Generator,
    connections: Iterable[str] = ALL_CONNECTIONS,
    planes_per_point: int = 10,
    tol: float = 1e-8,
) -> TheoremReport:
    selected = [c for c in ALL_CONNECTIONS if c in set(connections)]
    S = ex.structure
    n, s, c = S.n, S.s, ex.expected_c
    exp = ex.expected
    conns = build_connections(ex)
    acc = _Acc()
    obs: dict[str, object] = {}
    planes = max(planes_per_point, math.ceil(MIN_L_PAIRS / max(len(points), 1)))
    tau_tol = TOL_TAU_SPHERE if ex.tag == "sphere" else TOL_TAU_FLAT

    kl_values: list[float] = []
    kstar_sweep: list[float] = []
    tilde_dir: list[tuple[float, float]] = []
    star_pair_sym = 0.0
    tilde_frame_gap = 0.0

    for ip, p in enumerate(points):
        st = S.at(p)
        B = f_basis(S, p)
        frame = random_orthonormal_frame(st.G, rng)
        R = cv.riemann_tensor(conns[RIEMANNIAN], S.g, p)
        Rs = cv.riemann_tensor(conns[SSM], S.g, p) if SSM in selected else None
        Rt = cv.riemann_tensor(conns[SSNM], S.g, p) if SSNM in selected else None

        lpairs = [orthonormal_l_pair(S, p, rng) for _ in range(planes)]
        units = [unit_l_vector(S, p, rng) for _ in range(planes)]
        anyvecs = [rng.uniform(-1.0, 1.0, S.dim) for _ in range(planes)]
        K_L = [cv.l_sectional(R, st, X, Y) for X, Y in lpairs]

        # -- Riemannian connection ------------------------------------------
        if RIEMANNIAN in selected:
            conn = RIEMANNIAN
            for X in anyvecs:
                fX = st.F @ X
                for xi in st.xi:
                    acc.add("R(xi,X,X,xi)=g(fX,fX)", conn, abs(R(xi, X, X, xi) - fX @ st.G @ fX), tol,
                            "K(xi_a,X)=R(xi_a,X,X,xi_a)=g(fX,fX)")
            for X in units:
                for xi in st.xi:
                    acc.add("K(xi,X)=1", conn, abs(cv.sectional(R, xi, X) - 1.0), tol, "K(xi_a,X)=g(fX,fX)=1 for unit X in L")
                acc.add("f_sectional=c", conn, abs(cv.f_sectional(R, st, X) - c), tol, "constant f-sectional curvature c")
            if s >= 2:
                for a in range(s):
                    for b in range(s):
                        if a != b:
                            k_ab = cv.sectional(R, st.xi[a], st.xi[b])
                            acc.add("K(xi_a,xi_b)=0", conn, abs(k_ab), tol, "K(xi_a,xi_b)=0")
                            k_xi_x = cv.sectional(R, st.xi[a], units[0])
                            acc.add("nonconstant_sectional_witness", conn, abs(k_xi_x - k_ab), NONCONSTANT_FLOOR,
                                    "K(X,xi)=1 and K(xi_a,xi_b)=0: no constant sectional curvature for s>=2", ">")
            if ip < SPACE_FORM_POINTS:
                T = cv.space_form_tensor_array(c, s, st)
                acc.add("space_form_tensor", conn, np.max(np.abs(R.values - T)), tol,
                        "R of M(c) equals the S-space-form tensor", c=c)
            for (X, Y), k in zip(lpairs, K_L):
                acc.add("K_L=(c+3s)/4+3(c-s)/4*g(X,fY)^2", conn, abs(k - cv.kl_closed_form(c, s, st, X, Y)), tol,
                        "K_L(X,Y)=(c+3s)/4+3(c-s)/4 g(X,fY)^2")
            kl_values.extend(K_L)
            tau = cv.scalar_curvature(R, B)
            name = "tau_equals_ns(2n+1)" if ex.constant_kl else "tau_equals_space_form_value"
            anchor = "tau=ns(2n+1)" if ex.constant_kl else "tau=n(n-1)(c+3s)/2+n(c+2s)"
            acc.add(name, conn, abs(tau - exp["tau"]), tau_tol, anchor, expected=exp["tau"])
            acc.add("tau_frame_independent", conn, abs(tau - cv.scalar_curvature(R, frame)), tol,
                    "tau for any local orthonormal frame")
            acc.add("first_bianchi", conn, cv.first_bianchi_residual(R), tol, "R(X,Y)Z+R(Y,Z)X+R(Z,X)Y=0")
            acc.add("antisymmetry_first_pair", conn, cv.first_pair_antisymmetry_residual(R), TOL_TIGHT, "R(X,Y,Z,W)=-R(Y,X,Z,W)")
            acc.add("antisymmetry_last_pair", conn, cv.last_pair_antisymmetry_residual(R), tol, "R(X,Y,Z,W)=-R(X,Y,W,Z)")
            acc.add("pair_symmetry", conn, cv.pair_symmetry_residual(R), tol, "R(X,Y,Z,W)=R(Z,W,X,Y)")
            acc.add("metric_compatibility", conn, np.max(np.abs(covariant_metric_derivative_at(conns[conn], S.g, p))),
                    TOL_TIGHT, "nabla g = 0")
            acc.add("torsion_free", conn, np.max(np.abs(torsion_at(conns[conn], p))), TOL_TIGHT, "T = 0")

        # -- semi-symmetric metric connection --------------------------------
        if Rs is not None:
            conn = SSM
            acc.add("metric_compatibility", conn, np.max(np.abs(covariant_metric_derivative_at(conns[conn], S.g, p))),
                    TOL_TIGHT, "nabla* g = 0")
            T_exp = semi_symmetric_torsion_at(S, p)
            acc.add("torsion=sum(eta(Y)X-eta(X)Y)", conn, np.max(np.abs(torsion_at(conns[conn], p) - T_exp)), TOL_TIGHT,
                    "T*(X,Y)=sum_a eta^a(Y)X-eta^a(X)Y")
            for (X, Y), k in zip(lpairs, K_L):
                ks = cv.sectional(Rs, X, Y)
                acc.add("K*(X,Y)=K(X,Y)-s", conn, abs(ks - (k - s)), tol, "K*(X,Y)=K(X,Y)-s")
                acc.add("K*_L=(c-s)/4*(1+3g(X,fY)^2)", conn,
                        abs(ks - (c - s) / 4.0 * (1 + 3 * float(X @ st.G @ st.F @ Y) ** 2)), tol,
                        "K*_L(X,Y)=(c-s)/4 (1+3 g(X,fY)^2)")
            for X in units:
                for xi in st.xi:
                    v1, v2 = cv.sectional(Rs, X, xi), cv.sectional(Rs, xi, X)
                    acc.add("K*(X,xi)=K*(xi,X)=2-s", conn, max(abs(v1 - (2 - s)), abs(v2 - (2 - s))), tol,
                            "K*(X,xi_a)=K*(xi_a,X)=2-s")
                acc.add("f_sectional*=c-s", conn, abs(cv.f_sectional(Rs, st, X) - (c - s)), tol,
                        "f-sectional curvature of nabla* is c-s")
            for a in range(s):
                for b in range(s):
                    if a != b:
                        acc.add("K*(xi_a,xi_b)=2-s", conn, abs(cv.sectional(Rs, st.xi[a], st.xi[b]) - (2 - s)), tol,
                                "K*(xi_a,xi_b)=2-s")
            tau_s = cv.scalar_curvature(Rs, B)
            if ex.constant_kl:
                acc.add("tau*_equals_(4ns+s(s-1))(2-s)/2", conn, abs(tau_s - cv.tau_star_constant_kl(n, s)), tau_tol,
                        "tau*=(4ns+s(s-1))(2-s)/2", expected=cv.tau_star_constant_kl(n, s))
            acc.add("tau*_space_form", conn, abs(tau_s - cv.tau_star_space_form(n, s, c)), tau_tol,
                    "tau*=(n(n+1)(c-s)+(4ns+s(s-1))(2-s))/2", expected=cv.tau_star_space_form(n, s, c))
            acc.add("tau_frame_independent", conn, abs(tau_s - cv.scalar_curvature(Rs, frame)), tol,
                    "tau* for any local orthonormal frame")
            acc.add("antisymmetry_first_pair", conn, cv.first_pair_antisymmetry_residual(Rs), TOL_TIGHT, "R*(X,Y,Z,W)=-R*(Y,X,Z,W)")
            acc.add("antisymmetry_last_pair", conn, cv.last_pair_antisymmetry_residual(Rs), tol, "R*(X,Y,Z,W)=-R*(X,Y,W,Z)")
            star_pair_sym = max(star_pair_sym, cv.pair_symmetry_residual(Rs))
            for _ in range(planes):
                X, Y = rng.uniform(-1, 1, S.dim), rng.uniform(-1, 1, S.dim)
                kstar_sweep.append(cv.sectional(Rs, X, Y))

        # -- semi-symmetric non-metric connection ----------------------------
        if Rt is not None:
            conn = SSNM
            for X in units:
                for xi in st.xi:
                    acc.add("R~(xi,X,X,xi)=1", conn, abs(Rt(xi, X, X, xi) - 1.0), tol, "R~(xi_a,X,X,xi_a)=1")
                    acc.add("R~(X,xi,xi,X)=2", conn, abs(Rt(X, xi, xi, X) - 2.0), tol, "R~(X,xi_a,xi_a,X)=2")
                    acc.add("pair_symmetry_violation", conn, abs(Rt(X, xi, xi, X) - Rt(xi, X, X, xi)),
                            PAIR_VIOLATION_FLOOR, "R~(X,xi,xi,X) != R~(xi,X,X,xi)", ">=")
                    tilde_dir.append((cv.sectional(Rt, xi, X), cv.sectional(Rt, X, xi)))
            for a in range(s):
                for b in range(s):
                    if a != b:
                        xa, xb = st.xi[a], st.xi[b]
                        acc.add("R~(xi_a,xi_b,xi_b,xi_a)=1", conn, abs(Rt(xa, xb, xb, xa) - 1.0), tol,
                                "R~(xi_a,xi_b,xi_b,xi_a)=1")
            for (X, Y), k in zip(lpairs, K_L):
                acc.add("K~_L=K_L", conn, abs(cv.l_sectional(Rt, st, X, Y) - k), TOL_TIGHT, "K~_L(X,Y)=K_L(X,Y)")
            Q = covariant_metric_derivative_at(conns[conn], S.g, p)
            acc.add("non_metricity=-sum(eta(Y)g(X,Z)+eta(Z)g(X,Y))", conn,
                    np.max(np.abs(Q - expected_non_metricity_at(S, p))), TOL_TIGHT,
                    "(nabla~_X g)(Y,Z)=-sum_a eta^a(Y)g(X,Z)+eta^a(Z)g(X,Y)")
            xi0 = st.xi[0]
            acc.add("non_metric_witness", conn, abs(np.einsum("xyz,x,y,z->", Q, xi0, xi0, xi0)), 1.0,
                    "(nabla~_xi g)(xi,xi)=-2 != 0", ">")
            T_t = torsion_at(conns[conn], p)
            acc.add("torsion=sum(eta(Y)X-eta(X)Y)", conn, np.max(np.abs(T_t - semi_symmetric_torsion_at(S, p))),
                    TOL_TIGHT, "T~(X,Y)=sum_a eta^a(Y)X-eta^a(X)Y")
            if SSM in selected:
                acc.add("torsion_equals_ssm_torsion", conn, np.max(np.abs(T_t - torsion_at(conns[SSM], p))), 1e-10,
                        "T~ = T*")
            tau_t = cv.scalar_curvature(Rt, B)
            if ex.constant_kl:
                acc.add("tau~_equals_2ns(n+1)+s(s-1)/2", conn, abs(tau_t - cv.tau_tilde_constant_kl(n, s)), tau_tol,
                        "tau~=2ns(n+1)+s(s-1)/2", expected=cv.tau_tilde_constant_kl(n, s))
            acc.add("tau~_space_form", conn, abs(tau_t - cv.tau_tilde_space_form(n, s, c)), tau_tol,
                    "tau~=(n(n+1)(c+3s)+s(s-1))/2", expected=cv.tau_tilde_space_form(n, s, c))
            gap = abs(tau_t - cv.scalar_curvature(Rt, frame))
            tilde_frame_gap = max(tilde_frame_gap, gap)
            acc.add("tau_frame_independent", conn, gap, tol, "tau~ from ordered pairs, any orthonormal frame")
            acc.add("antisymmetry_first_pair", conn, cv.first_pair_antisymmetry_residual(Rt), TOL_TIGHT, "R~(X,Y,Z,W)=-R~(Y,X,Z,W)")

    if RIEMANNIAN in selected and kl_values:
        spread = max(kl_values) - min(kl_values)
        obs["K_L_range"] = [min(kl_values), max(kl_values)]
        if ex.constant_kl:
            worst = max(abs(k - exp["K_L"]) for k in kl_values)
            acc.add("K_L_constant_equals_s", RIEMANNIAN, max(worst, spread), TOL_KL_CONSTANT,
                    "K_L constant equal to c forces c=s", expected=exp["K_L"])
        elif n >= 2:
            acc.add("K_L_nonconstant_since_c!=s", RIEMANNIAN, spread, KL_SPREAD_FLOOR,
                    "K_L constant equal to c forces c=s; here c=-3s", ">")
        else:
            # n = 1: every L-plane is the f-section
            worst = max(abs(k - c) for k in kl_values)
            acc.add("K_L_is_f_sectional(n=1)", RIEMANNIAN, worst, tol, "n=1: K_L is the f-sectional curvature")
    if SSM in selected:
        obs["ssm_pair_symmetry_residual"] = star_pair_sym
        if kstar_sweep:
            obs["ssm_sectional_random_planes_range"] = [min(kstar_sweep), max(kstar_sweep)]
    if SSNM in selected:
        obs["ssnm_tau_frame_gap"] = tilde_frame_gap
        if tilde_dir:
            obs["ssnm_directional_sectional"] = {
                "directional": True,
                "K~(xi,X)_range": [min(a for a, _ in tilde_dir), max(a for a, _ in tilde_dir)],
                "K~(X,xi)_range": [min(b for _, b in tilde_dir), max(b for _, b in tilde_dir)],
            }

    checks = sorted(acc.checks(), key=lambda ch: (ch.name, ch.connection))
    return TheoremReport(ex.label, checks, obs)
