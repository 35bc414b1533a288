"""Two-point-measurement ground truth for work statistics.

Energies are measured before and after the protocol; the work is the
difference of the outcomes.  Degenerate levels are handled through spectral
projectors (eigenvalues closer than ``DEGENERACY_TOL`` form one level), so
nothing here depends on the arbitrary basis inside a degenerate eigenspace.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import linalg
from .errors import DimensionMismatch
from .states import QuenchProtocol, SpectralHamiltonian

DEGENERACY_TOL = 1e-10
MERGE_RTOL = 1e-9
# weights below this are rounding noise (e.g. |<M|n>|^2 ~ 1e-33 for U = I)
WEIGHT_FLOOR = 1e-15


@dataclass(frozen=True)
class JointProbabilityTable:
    """``p[n, M]``: probability of initial level ``n`` and final level ``M``."""

    p: np.ndarray
    spectra_i: np.ndarray
    spectra_f: np.ndarray

    @property
    def initial_populations(self) -> np.ndarray:
        return self.p.sum(axis=1)

    def conditional(self) -> np.ndarray:
        """``p(M | n)``; rows with zero initial population are left at zero."""
        pn = self.initial_populations
        out = np.zeros_like(self.p)
        nz = pn > 0
        out[nz] = self.p[nz] / pn[nz, None]
        return out

    def work_values(self) -> np.ndarray:
        return self.spectra_f[None, :] - self.spectra_i[:, None]


@dataclass(frozen=True)
class WorkDistribution:
    """Discrete work distribution as atoms ``(w_k, p_k)`` with ``w`` strictly ascending."""

    w: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if w.shape != p.shape or w.ndim != 1:
            raise ValueError("w and p must be 1-d arrays of equal length")
        if np.any(np.diff(w) <= 0):
            raise ValueError("atoms must be strictly ascending in w")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "p", p)

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.w.tolist(), self.p.tolist()))

    def __len__(self) -> int:
        return len(self.w)

    def total(self) -> float:
        return float(self.p.sum())

    def char_fn(self, u) -> np.ndarray | complex:
        """Fourier sum ``sum_k p_k e^{i u w_k}``."""
        u_arr = np.asarray(u, dtype=float)
        out = np.exp(1j * np.multiply.outer(u_arr, self.w)) @ self.p
        return complex(out) if out.ndim == 0 else out

    @classmethod
    def from_samples(cls, w, p, merge_tol: float | None = None,
                     min_weight: float = 0.0) -> "WorkDistribution":
        """Sort, merge values closer than ``merge_tol`` and drop weights ``<= min_weight``.

        Default ``merge_tol`` is ``1e-9 * max|w|``.
        """
        w = np.asarray(w, dtype=float).ravel()
        p = np.asarray(p, dtype=float).ravel()
        keep = p > min_weight
        w, p = w[keep], p[keep]
        if w.size == 0:
            return cls(np.empty(0), np.empty(0))
        if merge_tol is None:
            merge_tol = MERGE_RTOL * max(float(np.max(np.abs(w))), 1e-300)
        order = np.argsort(w, kind="stable")
        w, p = w[order], p[order]
        # a new cluster starts wherever the gap to the previous value exceeds the tolerance
        starts = np.concatenate(([True], np.diff(w) >= merge_tol))
        labels = np.cumsum(starts) - 1
        psum = np.bincount(labels, weights=p)
        # cluster location: probability-weighted mean (plain mean if weights vanish)
        wsum = np.bincount(labels, weights=w * p)
        wmean = np.bincount(labels, weights=w) / np.bincount(labels)
        wc = np.where(psum > 0, wsum / np.where(psum > 0, psum, 1.0), wmean)
        return cls(wc, psum)


def level_labels(energies: np.ndarray, tol: float = DEGENERACY_TOL):
    """Group ascending eigenvalues into levels; returns ``(levels, labels)``."""
    e = np.asarray(energies, dtype=float)
    starts = np.concatenate(([True], np.diff(e) > tol))
    labels = np.cumsum(starts) - 1
    levels = np.bincount(labels, weights=e) / np.bincount(labels)
    return levels, labels


def eigenspace_projectors(h: SpectralHamiltonian, tol: float = DEGENERACY_TOL):
    """Distinct levels of ``h`` and the projector onto each eigenspace."""
    levels, labels = level_labels(h.energies, tol)
    projectors = []
    for k in range(len(levels)):
        vk = h.vectors[:, labels == k]
        projectors.append(vk @ vk.conj().T)
    return levels, projectors


def off_diagonal_weight(rho: np.ndarray, h: SpectralHamiltonian, tol: float = DEGENERACY_TOL) -> float:
    """Frobenius weight of ``rho`` between different eigenspaces of ``h``."""
    _, labels = level_labels(h.energies, tol)
    r = h.vectors.conj().T @ rho @ h.vectors
    mask = labels[:, None] != labels[None, :]
    return float(np.linalg.norm(r[mask]))


def _coerce_h(h) -> SpectralHamiltonian:
    return h if isinstance(h, SpectralHamiltonian) else SpectralHamiltonian.from_matrix(h)


def _slices(schedule, steps: int):
    """``(dt, lam)`` pairs of the midpoint slicing of a piecewise schedule."""
    for seg in schedule:
        dur = seg[0]
        lam_a = seg[1]
        lam_b = seg[2] if len(seg) == 3 else seg[1]
        if dur == 0:
            continue
        dt = dur / steps
        for k in range(steps):
            s = (k + 0.5) / steps
            yield dt, lam_a + (lam_b - lam_a) * s


def propagator(schedule: QuenchProtocol, h_of_lambda: Callable[[float], object],
               steps_per_segment: int = 1) -> np.ndarray:
    """Time-ordered propagator as a product of slice exponentials.

    Each segment is split into ``steps_per_segment`` slices; the work parameter
    on a slice is taken at the slice midpoint.  Constant segments are therefore
    exact for any slicing.  The sudden quench returns the identity.
    """
    if steps_per_segment < 1:
        raise ValueError("steps_per_segment must be >= 1")
    if schedule.is_sudden:
        d = _coerce_h(h_of_lambda(schedule.lambda0)).dim
        return np.eye(d, dtype=complex)
    u = None
    for dt, lam in _slices(schedule.schedule, steps_per_segment):
        step = _coerce_h(h_of_lambda(lam)).evolution(dt)
        u = step if u is None else step @ u
    if u is None:
        d = _coerce_h(h_of_lambda(schedule.lambda0)).dim
        return np.eye(d, dtype=complex)
    return u


def joint_probabilities(rho_s, u_tau, h_i, h_f) -> JointProbabilityTable:
    """``p(n, M) = Tr[Q_M U P_n rho P_n U^dag]`` over eigenspace projectors."""
    rho_s = linalg.as_matrix(rho_s)
    u_tau = linalg.as_matrix(u_tau)
    h_i, h_f = _coerce_h(h_i), _coerce_h(h_f)
    if len({rho_s.shape[0], u_tau.shape[0], h_i.dim, h_f.dim}) != 1:
        raise DimensionMismatch("rho_s, u_tau, h_i, h_f must share one dimension")
    e_i, lab_i = level_labels(h_i.energies)
    e_f, lab_f = level_labels(h_f.energies)
    # work in eigenbasis coordinates: rho' = V_i^dag rho V_i, U' = V_f^dag U V_i
    r = h_i.vectors.conj().T @ rho_s @ h_i.vectors
    uu = h_f.vectors.conj().T @ u_tau @ h_i.vectors
    p = np.empty((len(e_i), len(e_f)))
    for n in range(len(e_i)):
        idx = np.flatnonzero(lab_i == n)
        un = uu[:, idx]
        diag = np.einsum("ai,ij,aj->a", un, r[np.ix_(idx, idx)], un.conj()).real
        p[n] = np.bincount(lab_f, weights=diag, minlength=len(e_f))
    return JointProbabilityTable(p, e_i, e_f)


def work_distribution(table: JointProbabilityTable, merge_tol: float | None = None,
                      min_weight: float = WEIGHT_FLOOR) -> WorkDistribution:
    """Atoms at the distinct ``E'_M - E_n``; weights ``<= min_weight`` are dropped."""
    return WorkDistribution.from_samples(table.work_values(), table.p,
                                         merge_tol=merge_tol, min_weight=min_weight)


def char_fn_direct(rho_s, u_tau, h_i, h_f, u: float) -> complex:
    """``Tr[U^dag e^{i u H_f} U e^{-i u H_i} rho]``.

    Agreement with the two-point-measurement sum needs ``rho`` to be diagonal in
    the ``H_i`` eigenbasis; a warning is emitted otherwise.
    """
    rho_s = linalg.as_matrix(rho_s)
    u_tau = linalg.as_matrix(u_tau)
    h_i, h_f = _coerce_h(h_i), _coerce_h(h_f)
    if len({rho_s.shape[0], u_tau.shape[0], h_i.dim, h_f.dim}) != 1:
        raise DimensionMismatch("rho_s, u_tau, h_i, h_f must share one dimension")
    off = off_diagonal_weight(rho_s, h_i)
    if off > 1e-10:
        warnings.warn(f"rho_s has {off:.2e} weight off the H_i eigenbasis diagonal; "
                      "chi will differ from the TPM definition", stacklevel=2)
    m = linalg.dagger(u_tau) @ h_f.expm(1j * u) @ u_tau @ h_i.expm(-1j * u) @ rho_s
    return complex(np.trace(m))


def char_fn_tpm(table: JointProbabilityTable, u) -> complex:
    """``sum p(n,M) e^{iu(E'_M - E_n)}`` straight from the joint table."""
    return complex(np.sum(table.p * np.exp(1j * u * table.work_values())))


def average_work(dist: WorkDistribution) -> float:
    return float(np.dot(dist.w, dist.p))


def average_work_from_chi(chi: Callable[[float], complex], du: float) -> float:
    """``<W> = -i chi'(0)`` by central difference with one Richardson step.

    ``du`` is the coarse step; a reasonable choice is ``1e-4 / max|E|``.
    """
    if not du > 0:
        raise ValueError("du must be > 0")

    def central(h: float) -> float:
        return (complex(chi(h)) - complex(chi(-h))).imag / (2 * h)

    d1 = central(du)
    d2 = central(du / 2)
    return (4 * d2 - d1) / 3


def default_du(*hamiltonians) -> float:
    emax = max(float(np.max(np.abs(_coerce_h(h).energies))) for h in hamiltonians)
    return 1e-4 / max(emax, 1e-300)


def jarzynski_check(dist: WorkDistribution, beta: float, z_i: float, z_f: float):
    """``(<e^{-beta W}>, Z_f/Z_i, |difference|)``."""
    if not beta > 0:
        raise ValueError("beta must be > 0")
    lhs = float(np.dot(dist.p, np.exp(-beta * dist.w)))
    rhs = z_f / z_i
    return lhs, rhs, abs(lhs - rhs)


def free_energy_difference(beta: float, z_i: float, z_f: float) -> float:
    return -(math.log(z_f) - math.log(z_i)) / beta
