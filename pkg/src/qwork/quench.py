"""Closed forms for a sudden frequency quench of a thermal harmonic oscillator.

A quench ``lambda0 -> lambda0 + delta_lambda`` of an oscillator with thermal
occupation ``nbar`` produces work atoms at ``(n + 1/2) delta_lambda`` with
Bose-Einstein weights ``nbar^n / (1 + nbar)^(n+1)``.  Everything below is a
different face of that one distribution: its characteristic function (series
and resummed), the ancilla state it maps to, and the finite-window Fourier
inversion ``I(eps) = (1/2pi) int_{-eps}^{eps} chi(u) e^{-iWu} du`` which tends
to the distribution as ``eps -> inf``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import NoConvergence, OnPeak, PoleHit, QuadratureFailure
from .states import thermal_weight
from .tpm import WorkDistribution

HYP_RTOL = 1e-14
HYP_MAX_TERMS = 10**6
PEAK_GUARD = 1e-9
QUAD_ATOL = 1e-9


@dataclass(frozen=True)
class QuenchParams:
    delta_lambda: float
    nbar: float

    def __post_init__(self):
        if not self.nbar >= 0:
            raise ValueError("nbar must be >= 0")
        if not math.isfinite(self.delta_lambda):
            raise ValueError("delta_lambda must be finite")

    @property
    def ratio(self) -> float:
        """Geometric ratio ``nbar / (1 + nbar)`` of the thermal weights."""
        return self.nbar / (1.0 + self.nbar)


def chi_closed(u, p: QuenchParams):
    """``e^{i u dl / 2} / (1 + nbar (1 - e^{i u dl}))``; accepts scalar or array ``u``."""
    x = np.asarray(u, dtype=float) * p.delta_lambda
    out = np.exp(0.5j * x) / (1.0 + p.nbar * (1.0 - np.exp(1j * x)))
    return complex(out) if out.ndim == 0 else out


def chi_series(u, p: QuenchParams, nmax: int):
    """Partial sum of the thermal-weight series through level ``nmax``."""
    if nmax < 0:
        raise ValueError("nmax must be >= 0")
    n = np.arange(nmax + 1)
    w = thermal_weight(n, p.nbar)
    x = np.asarray(u, dtype=float)
    out = np.exp(1j * np.multiply.outer(x, (n + 0.5) * p.delta_lambda)) @ w
    return complex(out) if out.ndim == 0 else out


def chi_re_im_closed(u, p: QuenchParams):
    """Real and imaginary parts of chi in their rational-trigonometric form."""
    x = np.asarray(u, dtype=float) * p.delta_lambda
    nb = p.nbar
    den = 1.0 + 2.0 * nb * (1.0 + nb) * (1.0 - np.cos(x))
    re = np.cos(0.5 * x) / den
    im = (1.0 + 2.0 * nb) * np.sin(0.5 * x) / den
    if re.ndim == 0:
        return float(re), float(im)
    return re, im


def ancilla_state_closed(u: float, p: QuenchParams) -> np.ndarray:
    re, im = chi_re_im_closed(u, p)
    return 0.5 * np.array([[1 + re, -1j * im], [1j * im, 1 - re]], dtype=complex)


@dataclass(frozen=True)
class Hyp2F1Params:
    """Arguments of ``2F1(1, a; 1 + a; z)``."""

    a: float
    z: complex

    def __post_init__(self):
        if not abs(self.z) < 1:
            raise ValueError("|z| must be < 1")

    @classmethod
    def for_inversion(cls, eps: float, w: float, p: QuenchParams, conjugate: bool = False):
        a = 0.5 - w / p.delta_lambda
        z = np.exp(-1j * eps * p.delta_lambda) * p.ratio
        return cls(a, complex(np.conj(z) if conjugate else z))


def hyp2f1_special(params: Hyp2F1Params, tol: float = HYP_RTOL,
                   max_terms: int = HYP_MAX_TERMS) -> tuple[complex, float]:
    """``2F1(1, a; 1+a; z) = sum_n a/(a+n) z^n`` and an estimate of the truncation error.

    Summation stops once ``|term| < tol * |partial sum|`` and the geometric bound
    on the remaining tail is below the same threshold, so slowly converging
    series (``|z|`` near 1) are not cut early.
    """
    a, z = params.a, params.z
    if a <= 0 and float(a).is_integer():
        raise PoleHit(f"a = {a} is a non-positive integer")
    if z == 0:
        return complex(1.0), 0.0
    total = 0j
    zn = 1.0 + 0j
    absz = abs(z)
    for n in range(max_terms):
        term = a / (a + n) * zn
        total += term
        if abs(term) < tol * abs(total):
            # |a/(a+k)| decreases once a + k > 0, so the tail is bounded geometrically
            k = n + 1
            tail = abs(a / (a + k)) * absz**k / (1.0 - absz)
            if a + k > 0 and tail < tol * abs(total):
                return total, tail
        zn *= z
    raise NoConvergence(f"2F1 series did not converge in {max_terms} terms")


def peak_positions(p: QuenchParams, count: int) -> np.ndarray:
    return (np.arange(count) + 0.5) * p.delta_lambda


def _check_off_peak(w: float, p: QuenchParams) -> None:
    dl = p.delta_lambda
    if dl == 0:
        raise OnPeak("delta_lambda = 0: the whole distribution sits at W = 0")
    x = w / dl - 0.5
    n = round(x)
    if n >= 0 and abs(w - (n + 0.5) * dl) < PEAK_GUARD * abs(dl):
        raise OnPeak(f"W = {w} is within the guard band of the peak at {(n + 0.5) * dl}")


def partial_inversion_formula(eps: float, w: float, p: QuenchParams) -> complex:
    """Closed form of ``I(eps)`` through the ``2F1(1, a; 1+a; z)`` series.

    ``I(eps) = -i e^{-iW eps} / (pi (1+nbar)(2W - dl))
               * [e^{i eps (4W - dl)/2} F(z) - e^{i eps dl/2} F(z*)]``
    with ``a = 1/2 - W/dl`` and ``z = e^{-i eps dl} nbar/(1+nbar)``.
    """
    _check_off_peak(w, p)
    dl = p.delta_lambda
    f_z, _ = hyp2f1_special(Hyp2F1Params.for_inversion(eps, w, p))
    f_zc, _ = hyp2f1_special(Hyp2F1Params.for_inversion(eps, w, p, conjugate=True))
    pref = -1j * np.exp(-1j * w * eps) / (math.pi * (1.0 + p.nbar) * (2.0 * w - dl))
    return complex(pref * (np.exp(0.5j * eps * (4.0 * w - dl)) * f_z
                           - np.exp(0.5j * eps * dl) * f_zc))


def partial_inversion_zero_temperature(eps: float, w: float, delta_lambda: float) -> float:
    """``I(eps)`` at ``nbar = 0``: ``2 sin(eps (W - dl/2)) / (pi (2W - dl))``.

    This is the Dirichlet kernel centred at ``dl/2``.
    """
    x = w - 0.5 * delta_lambda
    if x == 0:
        return eps / math.pi
    return math.sin(eps * x) / (math.pi * x)


def partial_inversion_quadrature(eps: float, w: float, chi_fn: Callable[[float], complex],
                                 atol: float = QUAD_ATOL, panels: int | None = None,
                                 max_freq: float | None = None) -> complex:
    """``(1/2pi) int_{-eps}^{eps} chi(u) e^{-iWu} du`` by panelled adaptive Gauss-Kronrod.

    The interval is cut into panels of about one oscillation each (set by
    ``max_freq``, default ``|W| + 1``) so each adaptive call sees a smooth
    integrand.  Raises ``QuadratureFailure`` if the summed error estimate
    exceeds ``atol``.
    """
    if not eps > 0:
        raise ValueError("eps must be > 0")
    if panels is None:
        freq = max_freq if max_freq is not None else abs(w) + 1.0
        panels = max(4, int(math.ceil(2 * eps * freq / math.pi)))
    edges = np.linspace(-eps, eps, panels + 1)
    per_panel = atol * 2 * math.pi / (4 * panels)

    def re_f(u):
        return (complex(chi_fn(u)) * np.exp(-1j * w * u)).real

    def im_f(u):
        return (complex(chi_fn(u)) * np.exp(-1j * w * u)).imag

    total = 0j
    err = 0.0
    with warnings.catch_warnings():
        # an unmet tolerance surfaces as QuadratureFailure below
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(edges[:-1], edges[1:]):
            for part, f in ((1.0, re_f), (1j, im_f)):
                val, e = integrate.quad(f, lo, hi, epsabs=per_panel, epsrel=0.0, limit=200)
                total += part * val
                err += e
    err /= 2 * math.pi
    if err > atol:
        raise QuadratureFailure(f"estimated error {err:.2e} exceeds {atol:.2e}")
    return total / (2 * math.pi)


def peak_weights(p: QuenchParams, count: int) -> WorkDistribution:
    """The first ``count`` delta peaks ``((n + 1/2) dl, nbar^n / (1+nbar)^(n+1))``.

    At ``nbar = 0`` only the ground-state peak carries weight and a single atom
    is returned.  ``delta_lambda = 0`` collapses everything onto ``W = 0``.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if p.nbar == 0:
        count = 1
    if p.delta_lambda == 0:
        return WorkDistribution(np.array([0.0]), np.array([float(np.sum(thermal_weight(np.arange(count), p.nbar)))]))
    w = peak_positions(p, count)
    wt = thermal_weight(np.arange(count), p.nbar)
    order = np.argsort(w)
    return WorkDistribution(w[order], wt[order])


def average_work_closed(p: QuenchParams) -> float:
    return p.delta_lambda * (p.nbar + 0.5)
