"""Hamiltonians, thermal states, qubit constants and the Fock truncation policy.

Units: hbar = 1.  Frequencies (``lambda``, ``omega``) are angular frequencies,
the conjugate variable ``u`` is an inverse frequency and work is a frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from . import linalg
from .errors import InvalidDimension, NotDensityMatrix, TailTooHeavy

EPS_TAIL = 1e-12
NMAX_CAP = 4096
DENSITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SpectralHamiltonian:
    """A Hermitian operator stored together with its eigendecomposition."""

    matrix: np.ndarray
    eigensystem: linalg.Eigensystem = field(repr=False)

    @classmethod
    def from_matrix(cls, h) -> "SpectralHamiltonian":
        hs = linalg.check_hermitian(h)
        return cls(hs, linalg.eig_hermitian(hs))

    @classmethod
    def diagonal(cls, energies) -> "SpectralHamiltonian":
        e = np.asarray(energies, dtype=float)
        order = np.argsort(e, kind="stable")
        vecs = np.eye(len(e), dtype=complex)[:, order]
        return cls(np.diag(e).astype(complex), linalg.Eigensystem(e[order], vecs))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def energies(self) -> np.ndarray:
        return self.eigensystem.eigenvalues

    @property
    def vectors(self) -> np.ndarray:
        return self.eigensystem.vectors

    def expm(self, c: complex) -> np.ndarray:
        """``exp(c H)`` from the stored spectrum."""
        return linalg.expm_hermitian(self.eigensystem, c)

    def evolution(self, t: float) -> np.ndarray:
        """``exp(-i H t)``."""
        return self.expm(-1j * t)


def nbar_from_beta(beta: float, lambda0: float) -> float:
    if beta == math.inf:
        return 0.0
    return 1.0 / math.expm1(beta * lambda0)


def beta_from_nbar(nbar: float, lambda0: float) -> float:
    """Inverse temperature whose oscillator thermal occupation at ``lambda0`` is ``nbar``.

    ``nbar = 0`` maps to ``math.inf`` (ground state).
    """
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    if lambda0 <= 0:
        raise ValueError("lambda0 must be > 0 for the nbar <-> beta conversion")
    if nbar == 0:
        return math.inf
    return math.log1p(1.0 / nbar) / lambda0


@dataclass(frozen=True)
class ThermalSpec:
    """Initial temperature given either as ``beta`` or as oscillator occupation ``nbar``."""

    lambda0: float
    beta: float | None = None
    nbar: float | None = None

    def __post_init__(self):
        if (self.beta is None) == (self.nbar is None):
            raise ValueError("give exactly one of beta or nbar")
        if self.beta is not None and not self.beta > 0:
            raise ValueError("beta must be > 0")
        if self.nbar is not None and self.nbar < 0:
            raise ValueError("nbar must be >= 0")

    def resolved_beta(self) -> float:
        if self.beta is not None:
            return self.beta
        return beta_from_nbar(self.nbar, self.lambda0)

    def resolved_nbar(self) -> float:
        if self.nbar is not None:
            return self.nbar
        return nbar_from_beta(self.beta, self.lambda0)


@dataclass(frozen=True)
class QuenchProtocol:
    """Work-parameter schedule from ``lambda0`` to ``lambda_tau``.

    ``schedule`` is a tuple of segments ``(duration, lam)`` (constant) or
    ``(duration, lam_start, lam_end)`` (linear ramp).  ``None`` is the sudden
    quench: an instantaneous jump with an identity propagator.
    """

    lambda0: float
    lambda_tau: float
    schedule: tuple | None = None

    def __post_init__(self):
        if self.schedule is None:
            return
        segs = tuple(tuple(float(x) for x in s) for s in self.schedule)
        if not segs:
            raise ValueError("empty schedule; use schedule=None for a sudden quench")
        for s in segs:
            if len(s) not in (2, 3) or s[0] < 0:
                raise ValueError(f"bad segment {s}")
        if not math.isclose(segs[0][1], self.lambda0) or not math.isclose(segs[-1][-1], self.lambda_tau):
            raise ValueError("schedule must start at lambda0 and end at lambda_tau")
        object.__setattr__(self, "schedule", segs)

    @property
    def is_sudden(self) -> bool:
        return self.schedule is None

    @property
    def delta_lambda(self) -> float:
        return self.lambda_tau - self.lambda0

    @property
    def duration(self) -> float:
        return 0.0 if self.schedule is None else sum(s[0] for s in self.schedule)

    def integral(self) -> float:
        """Time integral of the work parameter over the protocol."""
        if self.schedule is None:
            return 0.0
        return sum(s[0] * (s[1] if len(s) == 2 else 0.5 * (s[1] + s[2])) for s in self.schedule)


def number_operator(nmax: int) -> np.ndarray:
    return np.diag(np.arange(nmax + 1, dtype=float)).astype(complex)


def annihilation(nmax: int) -> np.ndarray:
    """Truncated ``a`` with ``a|n> = sqrt(n)|n-1>`` on levels ``0..nmax``."""
    return np.diag(np.sqrt(np.arange(1, nmax + 1, dtype=float)), k=1).astype(complex)


def oscillator_hamiltonian(lam: float, nmax: int) -> SpectralHamiltonian:
    """``lam (a^dag a + 1/2)`` on Fock levels ``0..nmax``."""
    if int(nmax) != nmax or nmax < 1:
        raise InvalidDimension(f"nmax must be an integer >= 1, got {nmax}")
    if lam < 0:
        raise ValueError("oscillator frequency must be >= 0")
    return SpectralHamiltonian.diagonal(lam * (np.arange(int(nmax) + 1) + 0.5))


def partition_function(h: SpectralHamiltonian, beta: float) -> float:
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if beta == 0:
        return float(h.dim)
    return float(np.sum(np.exp(-beta * h.energies)))


def boltzmann_populations(energies: np.ndarray, beta: float) -> np.ndarray:
    """Normalized ``exp(-beta E)`` weights, stable for large ``beta`` (incl. ``inf``)."""
    e = np.asarray(energies, dtype=float)
    if beta < 0 or math.isnan(beta):
        raise ValueError("beta must be >= 0")
    shifted = e - e.min()
    if math.isinf(beta):
        w = (shifted <= 1e-12 * max(1.0, abs(e.min()))).astype(float)
    else:
        w = np.exp(-beta * shifted)
    return w / w.sum()


def thermal_state(h: SpectralHamiltonian, beta: float) -> np.ndarray:
    """Gibbs state ``exp(-beta H)/Z`` on the (possibly truncated) space of ``h``."""
    p = boltzmann_populations(h.energies, beta)
    v = h.vectors
    rho = (v * p) @ v.conj().T
    return 0.5 * (rho + rho.conj().T)


def thermal_state_nbar(h: SpectralHamiltonian, nbar: float, lambda0: float) -> np.ndarray:
    return thermal_state(h, beta_from_nbar(nbar, lambda0))


def thermal_weight(n, nbar: float):
    """Bose-Einstein occupation probability ``nbar^n / (1+nbar)^(n+1)``."""
    n = np.asarray(n, dtype=float)
    if nbar == 0:
        return np.where(n == 0, 1.0, 0.0)
    return np.exp(n * math.log(nbar) - (n + 1) * math.log1p(nbar))


def truncation_dim(nbar: float, eps_tail: float = EPS_TAIL, cap: int = NMAX_CAP) -> int:
    """Smallest ``nmax`` whose discarded thermal tail ``(nbar/(1+nbar))^(nmax+1)`` is below ``eps_tail``."""
    if nbar < 0:
        raise ValueError("nbar must be >= 0")
    if not 0 < eps_tail < 1:
        raise ValueError("eps_tail must lie in (0, 1)")
    if nbar == 0:
        return 0
    log_r = math.log(nbar) - math.log1p(nbar)
    log_eps = math.log(eps_tail)

    def tail_ok(n: int) -> bool:
        return (n + 1) * log_r < log_eps

    nmax = max(0, math.ceil(log_eps / log_r) - 1)
    while nmax > 0 and tail_ok(nmax - 1):
        nmax -= 1
    while not tail_ok(nmax):
        nmax += 1
    if nmax > cap:
        raise TailTooHeavy(f"nbar={nbar} needs nmax={nmax} > cap {cap} for eps_tail={eps_tail}")
    return nmax


def tail_weight(nbar: float, nmax: int) -> float:
    if nbar == 0:
        return 0.0
    return (nbar / (1.0 + nbar)) ** (nmax + 1)


def check_density_matrix(rho, tol: float = DENSITY_TOL) -> np.ndarray:
    rho = linalg.as_matrix(rho)
    if linalg.hermiticity_defect(rho) > tol * max(1, rho.shape[0]):
        raise NotDensityMatrix("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol * max(1, rho.shape[0]):
        raise NotDensityMatrix(f"trace {tr!r} != 1")
    wmin = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    if wmin < -tol * max(1, rho.shape[0]):
        raise NotDensityMatrix(f"negative eigenvalue {wmin:.3e}")
    return rho


def density_matrix_defects(rho: np.ndarray) -> tuple[float, float]:
    """``(|trace - 1|, max(0, -lambda_min))``; used by the invariant checks."""
    rho = np.asarray(rho)
    tr = abs(np.trace(rho).real - 1.0)
    wmin = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
    return tr, max(0.0, -float(wmin))


def _qubit_constants():
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    had = (sx + sz) / math.sqrt(2)
    p0 = np.array([[1, 0], [0, 0]], dtype=complex)
    p1 = np.array([[0, 0], [0, 1]], dtype=complex)
    plus = np.full((2, 2), 0.5, dtype=complex)
    for m in (sx, sy, sz, had, p0, p1, plus):
        m.setflags(write=False)
    return MappingProxyType(
        dict(pauli_x=sx, pauli_y=sy, pauli_z=sz, hadamard=had,
             ket0_proj=p0, ket1_proj=p1, plus_proj=plus)
    )


QUBIT = _qubit_constants()


def qubit_constants():
    """Read-only Pauli matrices, Hadamard and the projectors ``|0><0|``, ``|1><1|``, ``|+><+|``."""
    return QUBIT
