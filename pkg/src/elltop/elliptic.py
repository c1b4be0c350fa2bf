"""Elliptic special functions: odd theta, Eisenstein E1/E2, Weierstrass
functions, the Kronecker phi/f kernels, their shifted variants, and the
trigonometric/rational degenerations.

Everything is built on one q-series for the odd theta function

    theta(z|tau) = -2 q^(1/8) sum_{n>=0} (-1)^n q^(n(n+1)/2) sin((2n+1) pi z),

with q = e(tau) = exp(2 pi i tau), differentiated term-wise for all
derivative variants.  The normalization is fixed so that
z*phi(u,z) -> 1 as z -> 0; any global theta prefactor cancels in every
ratio used downstream.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

from .errors import NonConvergent, PoleAtLattice

TWO_PI_I = 2j * math.pi
MIN_IM_TAU = 0.05
POLE_RADIUS = 1e-8


def e(x: complex) -> complex:
    """e(x) = exp(2 pi i x)."""
    return cmath.exp(TWO_PI_I * x)


@dataclass(frozen=True)
class Modulus:
    """Modular parameter tau with the series convergence guard Im tau >= 0.05."""

    tau: complex

    def __post_init__(self):
        if complex(self.tau).imag < MIN_IM_TAU:
            raise ValueError(
                f"Im tau = {complex(self.tau).imag:g} below the series guard {MIN_IM_TAU}"
            )


@dataclass(frozen=True)
class SeriesPolicy:
    """Absolute term cutoff and term budget for q-series evaluation."""

    tol: float = 1e-14
    max_terms: int = 256

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_terms < 8:
            raise ValueError("max_terms must be at least 8")


DEFAULT_POLICY = SeriesPolicy()


def _tau_of(tau) -> complex:
    if isinstance(tau, Modulus):
        return complex(tau.tau)
    t = complex(tau)
    if t.imag < MIN_IM_TAU:
        raise ValueError(f"Im tau = {t.imag:g} below the series guard {MIN_IM_TAU}")
    return t


def lattice_reduce(z: complex, tau) -> tuple[complex, int, int]:
    """Reduce z modulo Z + tau*Z; returns (z - m - n*tau, m, n)."""
    t = _tau_of(tau)
    z = complex(z)
    n = round(z.imag / t.imag)
    m = round(z.real - n * t.real)
    return z - m - n * t, m, n


def distance_to_lattice(z: complex, tau) -> float:
    zr, _, _ = lattice_reduce(z, tau)
    return abs(zr)


def _check_off_lattice(z: complex, tau, radius: float = POLE_RADIUS) -> None:
    if distance_to_lattice(z, tau) < radius:
        raise PoleAtLattice(f"argument {z} within {radius:g} of the period lattice")


# -- theta and its term-wise derivatives -------------------------------------

@lru_cache(maxsize=1 << 16)
def _theta_core(z: complex, tau: complex, dz: int, dtau: int,
                tol: float, max_terms: int) -> complex:
    """d^dz/dz^dz d^dtau/dtau^dtau of the odd theta series."""
    y = abs(z.imag)
    total = 0.0 + 0.0j
    for n in range(max_terms):
        m = (2 * n + 1) * math.pi
        s = 0.125 + 0.5 * n * (n + 1)
        # coefficient -2 (-1)^n q^s, with d/dtau q^s = 2 pi i s q^s
        coef = -2.0 * (-1) ** n * cmath.exp(TWO_PI_I * s * tau) * (TWO_PI_I * s) ** dtau
        # d^k/dz^k sin(m z) = m^k sin(m z + k pi/2)
        term = coef * m ** dz * cmath.sin(m * z + dz * math.pi / 2)
        total += term
        # decay bound for the remaining terms (|sin w| <= e^{|Im w|})
        bound = (
            2.0
            * math.exp(-2 * math.pi * s * tau.imag + (2 * n + 1) * math.pi * y)
            * m ** dz
            * (2 * math.pi * s) ** dtau
        )
        if bound < tol:
            return total
    raise NonConvergent(
        f"theta series needs more than {max_terms} terms at z={z}, tau={tau}"
    )


def theta(z: complex, tau, policy: SeriesPolicy = DEFAULT_POLICY) -> complex:
    """Odd theta function theta(z|tau)."""
    t = _tau_of(tau)
    return _theta_core(complex(z), t, 0, 0, policy.tol, policy.max_terms)


def theta_dz(z: complex, tau, order: int = 1,
             policy: SeriesPolicy = DEFAULT_POLICY) -> complex:
    """order-th z-derivative of theta, term-wise."""
    t = _tau_of(tau)
    return _theta_core(complex(z), t, order, 0, policy.tol, policy.max_terms)


def theta_dtau(z: complex, tau, policy: SeriesPolicy = DEFAULT_POLICY) -> complex:
    """tau-derivative of theta, term-wise."""
    t = _tau_of(tau)
    return _theta_core(complex(z), t, 0, 1, policy.tol, policy.max_terms)


def log_theta_dz(z: complex, tau, order: int,
                 policy: SeriesPolicy = DEFAULT_POLICY) -> list[complex]:
    """[d^k/dz^k log theta](z) for k = 1..order (moment -> cumulant recursion)."""
    t = _tau_of(tau)
    th = [_theta_core(complex(z), t, k, 0, policy.tol, policy.max_terms)
          for k in range(order + 1)]
    if abs(th[0]) == 0.0:
        raise PoleAtLattice(f"log theta derivative at a theta zero, z={z}")
    r = [v / th[0] for v in th]
    g: list[complex] = [0.0]  # g[0] unused; g[k] = (log theta)^(k)
    for n in range(1, order + 1):
        acc = r[n]
        for k in range(1, n):
            acc -= math.comb(n - 1, k) * g[n - k] * r[k]
        g.append(acc)
    return g[1:]


def dlog_theta_dtau(w: complex, tau, policy: SeriesPolicy = DEFAULT_POLICY) -> complex:
    """d/dtau log theta(w|tau), term-wise."""
    return theta_dtau(w, tau, policy) / theta(w, tau, policy)


# -- Eisenstein and Weierstrass functions ------------------------------------

def eta1(tau, policy: SeriesPolicy = DEFAULT_POLICY) -> complex:
    """eta_1(tau) = -theta'''(0)/(6 theta'(0))."""
    t = _tau_of(tau)
    return -_theta_core(0j, t, 3, 0, policy.tol, policy.max_terms) / (
        6.0 * _theta_core(0j, t, 1, 0, policy.tol, policy.max_terms)
    )


def eisenstein(z: complex, tau, order: int,
               policy: SeriesPolicy = DEFAULT_POLICY) -> complex:
    """E1 = dz log theta, E2 = -dz E1, from analytic theta derivatives."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    t = _tau_of(tau)
    _check_off_lattice(z, t)
    g = log_theta_dz(z, t, order, policy)
    return g[0] if order == 1 else -g[1]


def eisenstein_dz(z: complex, tau, order: int, nderiv: int,
                  policy: SeriesPolicy = DEFAULT_POLICY) -> complex:
    """nderiv-th z-derivative of E_order, analytic (no finite differences)."""
    t = _tau_of(tau)
    _check_off_lattice(z, t)
    g = log_theta_dz(z, t, order + nderiv, policy)
    return g[nderiv] if order == 1 else -g[nderiv + 1]


def weierstrass(z: complex, tau, kind: str,
                policy: SeriesPolicy = DEFAULT_POLICY) -> complex:
    """Weierstrass zeta or p: zeta = E1 + 2 eta1 z, p = E2 - 2 eta1."""
    t = _tau_of(tau)
    if kind == "zeta":
        return eisenstein(z, t, 1, policy) + 2.0 * eta1(t, policy) * z
    if kind == "p":
        return eisenstein(z, t, 2, policy) - 2.0 * eta1(t, policy)
    raise ValueError(f"unknown kind {kind!r}")


def weierstrass_p_prime(z: complex, tau,
                        policy: SeriesPolicy = DEFAULT_POLICY) -> complex:
    """p'(z) = dz E2(z) (the eta1 constant drops)."""
    return eisenstein_dz(z, tau, 2, 1, policy)


# -- Kronecker kernels --------------------------------------------------------

def kronecker_phi(u: complex, z: complex, tau,
                  policy: SeriesPolicy = DEFAULT_POLICY) -> complex:
    """phi(u,z) = theta(u+z) theta'(0) / (theta(u) theta(z))."""
    t = _tau_of(tau)
    _check_off_lattice(u, t)
    _check_off_lattice(z, t)
    _check_off_lattice(u + z, t)
    tl = policy.tol
    mt = policy.max_terms
    return (
        _theta_core(complex(u + z), t, 0, 0, tl, mt)
        * _theta_core(0j, t, 1, 0, tl, mt)
        / (_theta_core(complex(u), t, 0, 0, tl, mt)
           * _theta_core(complex(z), t, 0, 0, tl, mt))
    )


def kronecker_f(u: complex, z: complex, tau,
                policy: SeriesPolicy = DEFAULT_POLICY) -> complex:
    """f(u,z) = d/du phi(u,z), by analytic differentiation of the theta ratio."""
    t = _tau_of(tau)
    _check_off_lattice(u, t)
    _check_off_lattice(z, t)
    _check_off_lattice(u + z, t)
    tl = policy.tol
    mt = policy.max_terms
    tu = _theta_core(complex(u), t, 0, 0, tl, mt)
    tuz = _theta_core(complex(u + z), t, 0, 0, tl, mt)
    duz = _theta_core(complex(u + z), t, 1, 0, tl, mt)
    du = _theta_core(complex(u), t, 1, 0, tl, mt)
    tz = _theta_core(complex(z), t, 0, 0, tl, mt)
    d0 = _theta_core(0j, t, 1, 0, tl, mt)
    return (duz * tu - tuz * du) * d0 / (tu * tu * tz)


def kronecker_f_via_e1(u: complex, z: complex, tau,
                       policy: SeriesPolicy = DEFAULT_POLICY) -> complex:
    """Independent route f = phi(u,z) (E1(u+z) - E1(u)); kept as a test oracle."""
    return kronecker_phi(u, z, tau, policy) * (
        eisenstein(u + z, tau, 1, policy) - eisenstein(u, tau, 1, policy)
    )


def _phi_raw(u: complex, z: complex, t: complex, policy: SeriesPolicy) -> complex:
    # phi without the u+z guard: theta(u+z) in the numerator may vanish freely
    _check_off_lattice(u, t)
    _check_off_lattice(z, t)
    tl, mt = policy.tol, policy.max_terms
    return (_theta_core(complex(u + z), t, 0, 0, tl, mt)
            * _theta_core(0j, t, 1, 0, tl, mt)
            / (_theta_core(complex(u), t, 0, 0, tl, mt)
               * _theta_core(complex(z), t, 0, 0, tl, mt)))


def _f_raw(u: complex, z: complex, t: complex, policy: SeriesPolicy) -> complex:
    _check_off_lattice(u, t)
    _check_off_lattice(z, t)
    tl, mt = policy.tol, policy.max_terms
    tu = _theta_core(complex(u), t, 0, 0, tl, mt)
    tuz = _theta_core(complex(u + z), t, 0, 0, tl, mt)
    duz = _theta_core(complex(u + z), t, 1, 0, tl, mt)
    du = _theta_core(complex(u), t, 1, 0, tl, mt)
    tz = _theta_core(complex(z), t, 0, 0, tl, mt)
    d0 = _theta_core(0j, t, 1, 0, tl, mt)
    return (duz * tu - tuz * du) * d0 / (tu * tu * tz)


def phi_shifted(alpha: tuple[int, int], u: complex, z: complex, tau,
                variant: str = "half_period", hbar: float | None = None,
                eps: tuple[float, float] | None = None,
                policy: SeriesPolicy = DEFAULT_POLICY) -> tuple[complex, complex]:
    """Shifted (phi, f) pair with the exponential prefactor of the variant.

    half_period:  varphi_al(u,z) = e(-al_2 z/2) phi(-om_al + u, z),
                  om_al = (al_1 + al_2 tau)/2, and the same for f.
    nct:          shift hbar(eps_1 al_1 + tau eps_2 al_2), prefactor
                  e(hbar eps_2 al_2 z); u is an extra additive shift.

    Only the true poles (u or z on the lattice) are guarded: the shifted
    combinations legitimately pass through zeros of theta(u+z).
    """
    t = _tau_of(tau)
    a1, a2 = alpha
    if variant == "half_period":
        om = (a1 + a2 * t) / 2.0
        pref = e(-a2 * z / 2.0)
        arg = -om + u
    elif variant == "nct":
        if hbar is None or eps is None:
            raise ValueError("nct variant needs hbar and eps=(eps1, eps2)")
        arg = hbar * (eps[0] * a1 + t * eps[1] * a2) + u
        pref = e(hbar * eps[1] * a2 * z)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return (pref * _phi_raw(arg, z, t, policy),
            pref * _f_raw(arg, z, t, policy))


# -- degenerations ------------------------------------------------------------

def _check_trig_pole(x: complex) -> None:
    if abs(x - round(x.real)) < POLE_RADIUS and abs(x.imag) < POLE_RADIUS:
        raise PoleAtLattice(f"argument {x} at a zero of sin(pi .)")


def _check_rat_pole(x: complex) -> None:
    if abs(x) < POLE_RADIUS:
        raise PoleAtLattice(f"argument {x} at the rational-limit pole 0")


def degenerate(kind: str, function: str, u: complex, z: complex) -> complex:
    """Closed-form trig / rational limits of E1, E2, phi, f."""
    pi = math.pi
    if kind == "trig":
        if function == "E1":
            _check_trig_pole(z)
            return pi / cmath.tan(pi * z)
        if function == "E2":
            _check_trig_pole(z)
            return pi * pi / cmath.sin(pi * z) ** 2
        if function == "phi":
            _check_trig_pole(u)
            _check_trig_pole(z)
            return pi * (1.0 / cmath.tan(pi * u) + 1.0 / cmath.tan(pi * z))
        if function == "f":
            _check_trig_pole(u)
            return -pi * pi / cmath.sin(pi * u) ** 2
    elif kind == "rational":
        if function == "E1":
            _check_rat_pole(z)
            return 1.0 / z
        if function == "E2":
            _check_rat_pole(z)
            return 1.0 / (z * z)
        if function == "phi":
            _check_rat_pole(u)
            _check_rat_pole(z)
            return 1.0 / u + 1.0 / z
        if function == "f":
            _check_rat_pole(u)
            return -1.0 / (u * u)
    raise ValueError(f"unknown degeneration {kind!r}/{function!r}")


def e2_shifted_asymptotic(u: complex, g: float, tau) -> complex:
    """Leading q -> 0 behaviour of E2(u - g*tau), branched on the
    fractional part {g} in [0,1) (floor toward -infinity)."""
    t = _tau_of(tau)
    q = e(t)
    gf = g - math.floor(g)
    pi2 = -4.0 * math.pi ** 2
    if gf == 0.0:
        eu = e(u)
        return pi2 * eu / (1.0 - eu) ** 2
    if gf < 0.5:
        return pi2 * e(-u) * q ** gf
    if gf == 0.5:
        return pi2 * cmath.sqrt(q) * (e(-u) + e(u))
    return pi2 * e(u) * q ** (1.0 - gf)
