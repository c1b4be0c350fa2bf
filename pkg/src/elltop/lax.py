"""Lax pairs for every model family and numerical certification of the
zero-curvature / monodromy-preserving equations.

Loop-type families are represented by per-x-mode N x N matrices (so the
commutator is honest matrix algebra, independent of the structure-constant
tables); torus and dispersionless families live in coefficient
representation with the sin-algebra (resp. canonical Poisson) convolution.

The residual of a family with recipe (c_dt, c_dw, c_dx, bracket) is

    R = c_dt * dL/dtau - c_dw * dM/dw - c_dx * (dM/dx term) - bracket(L, M),

where dL/dtau = (explicit tau dependence, central finite differences, with
kbar advanced by its exact law) + (chain rule, L assembled from dS/dtau).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import algebra, dynamics, elliptic
from .algebra import StructureFamily, cross
from .dynamics import ModelFamily, lattice_point
from .elliptic import e
from .errors import FamilyMismatch, PoleAtLattice
from .fields import (CocenterPair, SpinField, ZVG_BLOCK_BITS, SIGMA_LABELS,
                     LABEL_OF_BITS)

TWO_PI_I = 2j * math.pi


@lru_cache(maxsize=4096)
def _tmat(alpha: tuple, N: int) -> np.ndarray:
    m = algebra.sine_basis(alpha, N)
    m.setflags(write=False)
    return m


@dataclass
class LaxSample:
    """One Lax operator evaluated at a spectral point.

    rep 'matrix': modes maps x-mode n -> N x N array (scalar part separate);
    rep 'coeff':  modes maps ((a1, a2), n) -> complex coefficient.
    """

    w: complex
    rep: str
    modes: dict
    scalar_part: complex = 0.0
    N: int = 0

    def norm(self) -> float:
        if self.rep == "matrix":
            s = sum(float(np.sum(np.abs(m) ** 2)) for m in self.modes.values())
        else:
            s = sum(abs(v) ** 2 for v in self.modes.values())
        return math.sqrt(s) + abs(self.scalar_part)

    def combo(self, other: "LaxSample", ca: complex, cb: complex) -> "LaxSample":
        out = {}
        for k, v in self.modes.items():
            out[k] = ca * v
        for k, v in other.modes.items():
            if k in out:
                out[k] = out[k] + cb * v
            else:
                out[k] = cb * v
        return LaxSample(self.w, self.rep, out,
                         ca * self.scalar_part + cb * other.scalar_part, self.N)


@dataclass
class ResidualReport:
    """Zero-curvature residual over spectral samples and interior modes."""

    max_abs: float
    rel: float
    scale: float
    per_sample: list
    interior: str

    def to_json_obj(self) -> dict:
        return {"max_abs": self.max_abs, "rel": self.rel, "scale": self.scale,
                "interior": self.interior,
                "per_sample": [[str(w), r] for w, r in self.per_sample]}


# -- assembly -----------------------------------------------------------------

def _matrix_modes(N: int) -> dict:
    return {}


def _add(modes: dict, key, mat):
    if key in modes:
        modes[key] = modes[key] + mat
    else:
        modes[key] = mat


def lax_pair(model: ModelFamily, S: SpinField, co: CocenterPair, tau: complex,
             w: complex, include_scalar: bool = True) -> tuple[LaxSample, LaxSample]:
    """Assemble (L, M) for the family at spectral point w."""
    nm = model.name
    kap = co.kappa
    if nm == "loop_elliptic" or nm == "loop_integrable":
        N = model.N
        tmod = model.tau_mod if nm == "loop_integrable" else tau
        kb = co.k * tau if nm == "loop_integrable" else co.kbar
        Lm: dict = {}
        Mm: dict = {}
        for (b, a, n), v in S.items():
            at = (a[0] + tmod * a[1]) / N
            u = -at + kb * n
            pref = e(-w * a[1] / N)
            X = pref * elliptic.kronecker_phi(u, w, tmod)
            Y = pref * elliptic.kronecker_f(u, w, tmod) / TWO_PI_I
            T = _tmat(a, N)
            _add(Lm, n, v * X * T)
            _add(Mm, n, v * Y * T)
        sL = sM = 0.0
        if include_scalar and nm == "loop_elliptic":
            sL = (kap / N) * elliptic.eisenstein(w, tau, 1)
            sM = (kap / N) * elliptic.dlog_theta_dtau(w, tau)
        return (LaxSample(w, "matrix", Lm, sL, N),
                LaxSample(w, "matrix", Mm, sM, N))
    if nm == "loop_trig":
        N = model.N
        Lm, Mm = {}, {}
        pi = math.pi
        for (b, a, n), v in S.items():
            at = (a[0] + tau * a[1]) / N
            u = -at + co.kbar * n
            pref = e(-w * a[1] / N)
            X = pref * pi * (1 / cmath.tan(pi * u) + 1 / cmath.tan(pi * w))
            Y = pref * (-pi * pi / cmath.sin(pi * u) ** 2) / TWO_PI_I
            _add(Lm, (a, n), v * X)
            _add(Mm, (a, n), v * Y)
        return (LaxSample(w, "coeff", Lm, 0.0, N),
                LaxSample(w, "coeff", Mm, 0.0, N))
    if nm == "loop_rational":
        N = model.N
        Lm, Mm = {}, {}
        for (b, a, n), v in S.items():
            at = (a[0] + tau * a[1]) / N
            u = -at + co.kbar * n
            pref = e(-w * a[1] / N)
            X = pref * (1.0 / u + 1.0 / w)
            Y = pref * (-1.0 / (u * u)) / TWO_PI_I
            _add(Lm, (a, n), v * X)
            _add(Mm, (a, n), v * Y)
        sL = (kap / N) / w if include_scalar else 0.0
        return (LaxSample(w, "coeff", Lm, sL, N),
                LaxSample(w, "coeff", Mm, 0.0, N))
    if nm == "loop_scaling_sl2":
        sq1 = cmath.exp(1j * math.pi * tau)  # q1^(1/2)
        q14 = cmath.exp(1j * math.pi * tau / 2)  # q1^(1/4)
        Lm, Mm = {}, {}
        pi = math.pi
        for (b, a, n), v in S.items():
            cn = cmath.cos(pi * co.kbar * n)
            sw = cmath.sin(pi * w + pi * co.kbar * n)
            cw = cmath.cos(pi * w + pi * co.kbar * n)
            L = np.zeros((2, 2), dtype=complex)
            M = np.zeros((2, 2), dtype=complex)
            if a == dynamics.KEY_S3:
                L[0, 0] = -1j * v / (4 * cn)
                L[1, 1] = 1j * v / (4 * cn)
                M[0, 0] = -v / cn ** 2
                M[1, 1] = v / cn ** 2
            elif a == dynamics.KEY_S1:
                L[0, 1] = sw * v * q14
                L[1, 0] = sw * v * q14
                M[0, 1] = 4 * e(-w / 2 - co.kbar * n) * v * q14
                M[1, 0] = 4 * e(-w / 2 - co.kbar * n) * v * q14
            elif a == dynamics.KEY_S2:
                L[0, 1] = -cw * v * q14
                L[1, 0] = cw * v * q14
                M[0, 1] = 4j * e(-w / 2 - co.kbar * n) * v * q14
                M[1, 0] = -4j * e(-w / 2 - co.kbar * n) * v * q14
            _add(Lm, n, 4 * pi * L)
            _add(Mm, n, pi * pi * M)
        return (LaxSample(w, "matrix", Lm, 0.0, 2),
                LaxSample(w, "matrix", Mm, 0.0, 2))
    if nm == "loop_scaling_slN":
        N = model.N
        q12N = cmath.exp(1j * math.pi * tau / N)  # q1^(1/(2N))
        Lm, Mm = {}, {}
        pi = math.pi
        for (b, (a1, s), n), v in S.items():
            T = _tmat((a1, s), N)
            if s == 0:
                d = cmath.sin(pi * (a1 / N - co.kbar * n))
                _add(Lm, n, -pi * v * e(a1 / (2 * N)) / d * T)
                _add(Mm, n, (1j * pi / 4) * v
                     * (e(co.kbar * n / 2) + e(a1 / N - co.kbar * n / 2)) / d ** 2 * T)
            elif s == 1:
                ph = e(a1 / N - w / N - co.kbar * n / 2) * q12N
                _add(Lm, n, 2j * pi * v * ph * T)
                _add(Mm, n, -1j * pi * v * ph * T)
            else:
                ph = e(co.kbar * n / 2 + w / N) * q12N
                _add(Lm, n, -2j * pi * v * ph * T)
                _add(Mm, n, -1j * pi * v * ph * T)
        return (LaxSample(w, "matrix", Lm, 0.0, N),
                LaxSample(w, "matrix", Mm, 0.0, N))
    if nm == "sl2_trig_special":
        sq1 = cmath.exp(1j * math.pi * tau)
        Lm, Mm = {}, {}
        pi = math.pi
        for (b, a, n), v in S.items():
            L = np.zeros((2, 2), dtype=complex)
            M = np.zeros((2, 2), dtype=complex)
            cn2 = cmath.cos(pi * co.kbar * n) ** 2
            if a == dynamics.KEY_S3:
                d = (1 / cmath.tan(pi * w) - cmath.tan(pi * co.kbar * n))
                L[0, 0] = d * v
                L[1, 1] = -d * v
                M[0, 0] = -v / cn2
                M[1, 1] = v / cn2
            elif a == dynamics.KEY_SM:
                L[0, 1] = 2 * v / cmath.sin(pi * w)
                L[1, 0] = 8 * sq1 * cmath.sin(pi * w + 2 * pi * co.kbar * n) * v
                M[1, 0] = 16 * sq1 * cmath.cos(pi * w + 2 * pi * co.kbar * n) * v
            elif a == dynamics.KEY_SP:
                L[1, 0] = 2 * v / cmath.sin(pi * w)
            _add(Lm, n, pi * L)
            _add(Mm, n, (pi / 2j) * M)
        sL = (pi * kap / 2) / cmath.tan(pi * w) if include_scalar else 0.0
        return (LaxSample(w, "matrix", Lm, sL, 2),
                LaxSample(w, "matrix", Mm, 0.0, 2))
    if nm == "sl2_rational_special":
        t1 = tau
        Lm, Mm = {}, {}
        for (b, a, n), v in S.items():
            L = np.zeros((2, 2), dtype=complex)
            M = np.zeros((2, 2), dtype=complex)
            wk = w + 2 * co.kbar * n
            if a == dynamics.KEY_S3:
                L[0, 0] = v / w
                L[1, 1] = -v / w
                L[1, 0] = -2 * wk * v
                M[1, 0] = v
            elif a == dynamics.KEY_SM:
                phiR = 8 * wk * t1 - 2 * (8 * co.kbar ** 3 * n ** 3
                                          + 8 * co.kbar ** 2 * n ** 2 * w
                                          + 4 * co.kbar * n * w ** 2 + w ** 3)
                L[0, 0] = -2 * wk * v
                L[1, 1] = 2 * wk * v
                L[0, 1] = 2 * v / w
                L[1, 0] = phiR * v
                M[0, 0] = v
                M[1, 1] = -v
                M[1, 0] = -2 * (2 * t1 - w ** 2 - 4 * w * co.kbar * n
                                - 6 * co.kbar ** 2 * n ** 2) * v
            elif a == dynamics.KEY_SP:
                L[1, 0] = 2 * v / w
            _add(Lm, n, L)
            _add(Mm, n, 2 * M)
        sL = (kap / (2 * w)) if include_scalar else 0.0
        return (LaxSample(w, "matrix", Lm, sL, 2),
                LaxSample(w, "matrix", Mm, 0.0, 2))
    if nm == "zvg":
        Lm, Mm = {}, {}
        for (b, a, n), v in S.items():
            bits = ZVG_BLOCK_BITS[b]
            om_b = (bits[0] + bits[1] * tau) / 2.0
            phiv, fv = elliptic.phi_shifted(a, co.kbar * n, w - om_b, tau,
                                            variant="half_period")
            pref = e(-n * co.kbar * bits[1] / 2.0)
            sig = _sigma_of_bits(a)
            _add(Lm, n, v * phiv * pref * sig)
            _add(Mm, n, v * pref * (fv / TWO_PI_I - (bits[1] / 2.0) * phiv) * sig)
        sL = sM = 0.0
        if include_scalar:
            sL = (kap / 2) * elliptic.eisenstein(w, tau, 1)
            sM = (kap / 2) * elliptic.dlog_theta_dtau(w, tau)
        return (LaxSample(w, "matrix", Lm, sL, 2),
                LaxSample(w, "matrix", Mm, sM, 2))
    if nm == "nct_elliptic":
        h, e1, e2 = model.hbar, model.eps1, model.eps2
        Lm, Mm = {}, {}
        for (b, a, n), v in S.items():
            phiv, fv = elliptic.phi_shifted(a, 0.0, w, tau, variant="nct",
                                            hbar=h, eps=(e1, e2))
            _add(Lm, (a, 0), v * phiv)
            _add(Mm, (a, 0), v * fv / TWO_PI_I)
        sL = -kap * h * elliptic.eisenstein(w, tau, 1) if include_scalar else 0.0
        sM = -kap * h * elliptic.dlog_theta_dtau(w, tau) if include_scalar else 0.0
        return (LaxSample(w, "coeff", Lm, sL, 0),
                LaxSample(w, "coeff", Mm, sM, 0))
    if nm in ("nct_trig", "disp_trig"):
        pi = math.pi
        Lm, Mm = {}, {}
        for (b, a, n), v in S.items():
            u = model.eps1 * a[0] + model.eps2 * a[1] * tau
            pref = e(model.eps2 * a[1] * w)
            _add(Lm, (a, 0), pi * v * pref * (1 / cmath.tan(pi * u) + 1j))
            # M = (1/2 pi i) e(.) f^tr, f^tr = -pi^2/sin^2 (the printed M
            # dropped the sign of f^tr; this is the drift-cancelling form)
            _add(Mm, (a, 0), v * pref * (-pi * pi / cmath.sin(pi * u) ** 2) / TWO_PI_I)
        return (LaxSample(w, "coeff", Lm, 0.0, 0),
                LaxSample(w, "coeff", Mm, 0.0, 0))
    if nm in ("nct_rational", "disp_rational"):
        Lm, Mm = {}, {}
        for (b, a, n), v in S.items():
            u = model.eps1 * a[0] + model.eps2 * a[1] * tau
            pref = e(model.eps2 * a[1] * w)
            _add(Lm, (a, 0), v * pref / u)
            # M = (1/2 pi i) e(.) f^r, f^r = -1/u^2
            _add(Mm, (a, 0), v * pref * (-1.0 / (u * u)) / TWO_PI_I)
        return (LaxSample(w, "coeff", Lm, 0.0, 0),
                LaxSample(w, "coeff", Mm, 0.0, 0))
    if nm == "disp_elliptic":
        e1, e2 = model.eps1, model.eps2
        Lm, Mm = {}, {}
        for (b, a, n), v in S.items():
            u = e1 * a[0] + e2 * a[1] * tau
            pref = e(e2 * a[1] * w)
            _add(Lm, (a, 0), v * pref * elliptic.kronecker_phi(u, w, tau))
            _add(Mm, (a, 0), v * pref * elliptic.kronecker_f(u, w, tau) / TWO_PI_I)
        return (LaxSample(w, "coeff", Lm, 0.0, 0),
                LaxSample(w, "coeff", Mm, 0.0, 0))
    if nm in ("nct_scaling", "disp_scaling"):
        pi = math.pi
        if nm == "nct_scaling":
            he1, he2 = model.hbar * model.eps1, model.hbar * model.eps2
        else:
            he1, he2 = model.eps1, model.eps2
        q1h = cmath.exp(1j * pi * tau * he2)  # q1^(he2/2)
        Lm, Mm = {}, {}
        for (b, (a1, s), n), v in S.items():
            if s == 0:
                d = cmath.sin(pi * he1 * a1)
                _add(Lm, ((a1, 0), 0), pi * v * e(-he1 * a1 / 2) / d)
                _add(Mm, ((a1, 0), 0),
                     -(pi * pi / 2) * v * (1 + e(-he1 * a1)) / d ** 2)
            elif s == 1:
                ph = q1h * e(he2 * w)
                _add(Lm, ((a1, 1), 0), -TWO_PI_I * v * ph)
                _add(Mm, ((a1, 1), 0), 2 * pi * pi * v * ph)
            else:
                ph = q1h * e(-he1 * a1 - he2 * w)
                _add(Lm, ((a1, -1), 0), TWO_PI_I * v * ph)
                _add(Mm, ((a1, -1), 0), 2 * pi * pi * v * ph)
        return (LaxSample(w, "coeff", Lm, 0.0, 0),
                LaxSample(w, "coeff", Mm, 0.0, 0))
    raise FamilyMismatch(f"no Lax pair for {nm!r}")


@lru_cache(maxsize=8)
def _sigma_of_bits(bits: tuple) -> np.ndarray:
    s0, s1, s2, s3 = algebra.sigma_matrices()
    m = {SIGMA_LABELS[1]: s1, SIGMA_LABELS[2]: s2, SIGMA_LABELS[3]: s3}[bits]
    m = m.copy()
    m.setflags(write=False)
    return m


# -- brackets -----------------------------------------------------------------

def bracket(model: ModelFamily, A: LaxSample, B: LaxSample) -> LaxSample:
    """[A, B] (matrix / sin-algebra) or {A, B} (dispersionless)."""
    nm = model.name
    if A.rep == "matrix":
        out: dict = {}
        for na, ma in A.modes.items():
            for nb, mb in B.modes.items():
                _add(out, na + nb, ma @ mb - mb @ ma)
        return LaxSample(A.w, "matrix", out, 0.0, A.N)
    out = {}
    if nm.startswith("disp"):
        # canonical Poisson bracket on Fourier modes; the scaling limit's
        # bracket is the hbar -> 0 limit of the sin-algebra commutator,
        # i.e. the PB normalized by -1/(4 pi^2)
        pb = 1.0 if nm == "disp_scaling" else -4 * math.pi ** 2
        for (ua, na), va in A.modes.items():
            for (ub, nb), vb in B.modes.items():
                c = -pb * cross(ua, ub) if nm == "disp_scaling" \
                    else pb * cross(ua, ub)
                if c == 0:
                    continue
                key = ((ua[0] + ub[0], ua[1] + ub[1]), na + nb)
                out[key] = out.get(key, 0.0) + c * va * vb
        return LaxSample(A.w, "coeff", out, 0.0, A.N)
    if nm.startswith("nct"):
        fam = StructureFamily("sin_hbar", hbar=model.hbar)
    elif nm == "loop_trig":
        fam = StructureFamily("loop_trig", N=model.N)
    elif nm == "loop_rational":
        fam = StructureFamily("loop_rat", N=model.N)
    else:
        raise FamilyMismatch(f"no coefficient bracket for {nm!r}")
    for (ua, na), va in A.modes.items():
        for (ub, nb), vb in B.modes.items():
            g = (ua[0] + ub[0], ua[1] + ub[1])
            if fam.family == "loop_trig":
                gr = (g[0] % fam.N, g[1])
            else:
                gr = g
            if gr == (0, 0):
                continue
            c = algebra.structure_constant(fam, ua, ub)
            if c == 0.0:
                continue
            key = (gr, na + nb)
            out[key] = out.get(key, 0.0) + c * va * vb
    return LaxSample(A.w, "coeff", out, 0.0, A.N)


# -- residual -----------------------------------------------------------------

_RECIPES = {
    # name: (c_dt is kappa?, c_dw factor, has k dx term, dw present)
    "loop_elliptic": ("kappa", "kappa", True, True),
    "loop_trig": ("kappa", "kappa", True, True),
    "loop_rational": ("kappa", "kappa", True, True),
    "loop_integrable": ("kappa", None, True, False),
    "loop_scaling_sl2": ("kappa", "kappa", True, True),
    "loop_scaling_slN": ("kappa", "kappa", True, True),
    "sl2_trig_special": ("kappa", "kappa", True, True),
    "sl2_rational_special": ("kappa", "kappa", True, True),
    "zvg": ("kappa", "kappa", True, True),
    "nct_elliptic": ("kappa", "kappa", False, True),
    "nct_trig": ("kappa", "kappa", False, True),
    "nct_rational": ("kappa", "kappa", False, True),
    "nct_scaling": ("one", "inv2pii", False, True),
    "disp_elliptic": ("one", "one", False, True),
    "disp_trig": ("one", "one", False, True),
    "disp_rational": ("one", "one", False, True),
    "disp_scaling": ("one", "inv2pii", False, True),
}


def _coef(tag: str, co: CocenterPair) -> complex:
    if tag == "kappa":
        return co.kappa
    if tag == "one":
        return 1.0
    if tag == "inv2pii":
        return 1.0 / TWO_PI_I
    raise ValueError(tag)


def _x_derivative(M: LaxSample) -> LaxSample:
    out = {}
    for k, v in M.modes.items():
        n = k if M.rep == "matrix" else k[1]
        if n == 0:
            continue
        out[k] = TWO_PI_I * n * v
    return LaxSample(M.w, M.rep, out, 0.0, M.N)


def zero_curvature_residual(model: ModelFamily, S: SpinField, co: CocenterPair,
                            tau: complex, w_samples, fd_step: float = 1e-5,
                            dS: SpinField | None = None) -> ResidualReport:
    """Max |R| over spectral samples; dS defaults to rhs(model) with the
    expanding window (exact convolutions, so every output mode is interior)."""
    if dS is None:
        dS, _ = dynamics.rhs(model, S, co, tau, window_policy="expand")
    h = fd_step
    rate = model.cocenter_rate(co)
    c_dt_tag, c_dw_tag, has_dx, has_dw = _RECIPES[model.name]
    worst = 0.0
    scale = 0.0
    per = []
    for w in w_samples:
        L, M = lax_pair(model, S, co, tau, w)
        # chain-rule part of dL/dtau: L is linear in S
        Ldot_chain, _ = lax_pair(model, dS, co, tau, w, include_scalar=False)
        # explicit tau dependence (special functions and kbar drift)
        co_p = CocenterPair(co.k, co.kbar + rate * h, co.lam, co.kappa)
        co_m = CocenterPair(co.k, co.kbar - rate * h, co.lam, co.kappa)
        Lp, _ = lax_pair(model, S, co_p, tau + h, w)
        Lmn, _ = lax_pair(model, S, co_m, tau - h, w)
        Ldot_exp = Lp.combo(Lmn, 1 / (2 * h), -1 / (2 * h))
        Ldot = Ldot_chain.combo(Ldot_exp, 1.0, 1.0)
        R = Ldot.combo(Ldot, _coef(c_dt_tag, co), 0.0)
        if has_dw:
            _, Mwp = lax_pair(model, S, co, tau, w + h)
            _, Mwm = lax_pair(model, S, co, tau, w - h)
            Mdw = Mwp.combo(Mwm, 1 / (2 * h), -1 / (2 * h))
            R = R.combo(Mdw, 1.0, -_coef(c_dw_tag, co))
        if has_dx:
            R = R.combo(_x_derivative(M), 1.0, -co.k)
        R = R.combo(bracket(model, L, M), 1.0, -1.0)
        mx = _max_entry(R)
        worst = max(worst, mx)
        scale = max(scale, L.norm() * M.norm())
        per.append((w, mx))
    rel = worst / scale if scale > 0 else worst
    return ResidualReport(worst, rel, scale, per, "full support (exact convolution)")


def _max_entry(R: LaxSample) -> float:
    mx = abs(R.scalar_part)
    for v in R.modes.values():
        if R.rep == "matrix":
            mx = max(mx, float(np.max(np.abs(v))))
        else:
            mx = max(mx, abs(v))
    return mx


# -- gyrostat ODE Lax pair (zero modes) ----------------------------------------

def nazvg_lax_pair(svec, nu_prime, tau: complex, w: complex):
    """(L, M) of the finite gyrostat: L = sum (S_al phi_al(w) + nu'_al / phi_al(w))
    sigma_al, M = -sum S_al (phi_1 phi_2 phi_3 / phi_al) sigma_al + E1(w) L."""
    s0, s1, s2, s3 = algebra.sigma_matrices()
    sig = (s1, s2, s3)
    phis = []
    for lbl in (1, 2, 3):
        bits = SIGMA_LABELS[lbl]
        phv, _ = elliptic.phi_shifted(bits, 0.0, w, tau, variant="half_period")
        phis.append(phv)
    L = np.zeros((2, 2), dtype=complex)
    Mt = np.zeros((2, 2), dtype=complex)
    prod = phis[0] * phis[1] * phis[2]
    for i in range(3):
        L = L + (svec[i] * phis[i] + nu_prime[i] / phis[i]) * sig[i]
        Mt = Mt - svec[i] * (prod / phis[i]) * sig[i]
    M = Mt + elliptic.eisenstein(w, tau, 1) * L
    return L, M


def nazvg_residual(svec, dsvec, nu_prime, tau: complex, w_samples,
                   fd_step: float = 1e-5) -> float:
    """|dL/dtau - dM/dw - [L, M]| for the gyrostat ODE pair."""
    h = fd_step
    worst = 0.0
    for w in w_samples:
        L, M = nazvg_lax_pair(svec, nu_prime, tau, w)
        Lp, _ = nazvg_lax_pair(svec, nu_prime, tau + h, w)
        Lm, _ = nazvg_lax_pair(svec, nu_prime, tau - h, w)
        Lc, _ = nazvg_lax_pair(dsvec, (0, 0, 0), tau, w)
        _, Mwp = nazvg_lax_pair(svec, nu_prime, tau, w + h)
        _, Mwm = nazvg_lax_pair(svec, nu_prime, tau, w - h)
        R = (Lp - Lm) / (2 * h) + Lc - (Mwp - Mwm) / (2 * h) - (L @ M - M @ L)
        worst = max(worst, float(np.max(np.abs(R))))
    return worst
