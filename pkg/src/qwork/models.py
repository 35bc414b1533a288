"""Ready-made simulation instances: the oscillator quench and random test systems."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import linalg
from .open_system import OpenSetup
from .states import (EPS_TAIL, SpectralHamiltonian, beta_from_nbar, oscillator_hamiltonian,
                     thermal_state, truncation_dim)


class ClosedInstance(NamedTuple):
    h_i: SpectralHamiltonian
    h_f: SpectralHamiltonian
    u_tau: np.ndarray
    rho: np.ndarray
    beta: float


class QuenchModel(NamedTuple):
    h_i: SpectralHamiltonian
    h_f: SpectralHamiltonian
    u_tau: np.ndarray
    rho: np.ndarray
    beta: float
    nmax: int
    lambda0: float
    lambda_tau: float


def sudden_quench_model(delta_lambda: float, nbar: float, lambda0: float = 1.0,
                        eps_tail: float = EPS_TAIL, nmax: int | None = None) -> QuenchModel:
    """Truncated oscillator with a sudden frequency jump ``lambda0 -> lambda0 + delta_lambda``.

    ``nmax`` defaults to the smallest truncation whose thermal tail is below
    ``eps_tail`` (at least 1).  The thermal state is renormalized on the kept levels.
    """
    lambda_tau = lambda0 + delta_lambda
    if lambda0 <= 0 or lambda_tau < 0:
        raise ValueError("need lambda0 > 0 and lambda0 + delta_lambda >= 0")
    if nmax is None:
        nmax = max(1, truncation_dim(nbar, eps_tail))
    h_i = oscillator_hamiltonian(lambda0, nmax)
    h_f = oscillator_hamiltonian(lambda_tau, nmax)
    beta = beta_from_nbar(nbar, lambda0)
    rho = thermal_state(h_i, beta)
    return QuenchModel(h_i, h_f, np.eye(nmax + 1, dtype=complex), rho, beta, nmax,
                       lambda0, lambda_tau)


def random_closed_instance(dim: int, rng: np.random.Generator, beta: float | None = None,
                           commuting: bool = False) -> ClosedInstance:
    """Random Hamiltonians, Haar propagator and thermal state of ``h_i``.

    With ``commuting=True`` both Hamiltonians share a random eigenbasis.
    """
    if beta is None:
        beta = float(rng.uniform(0.1, 5.0))
    if commuting:
        v = linalg.random_unitary(dim, rng)
        h_i = SpectralHamiltonian.from_matrix((v * rng.normal(size=dim)) @ v.conj().T)
        h_f = SpectralHamiltonian.from_matrix((v * rng.normal(size=dim)) @ v.conj().T)
    else:
        h_i = SpectralHamiltonian.from_matrix(linalg.random_hermitian(dim, rng))
        h_f = SpectralHamiltonian.from_matrix(linalg.random_hermitian(dim, rng))
    u = linalg.random_unitary(dim, rng)
    return ClosedInstance(h_i, h_f, u, thermal_state(h_i, beta), beta)


def random_open_setup(dim_s: int, dim_e: int, rng: np.random.Generator, coupling: float = 0.3,
                      tau: float = 2.0, beta_s: float | None = None, beta_e: float | None = None):
    """Random open setup with ``||H_SE||_F = coupling`` and thermal ``rho_S``, ``rho_E``."""
    beta_s = float(rng.uniform(0.2, 2.0)) if beta_s is None else beta_s
    beta_e = float(rng.uniform(0.2, 2.0)) if beta_e is None else beta_e
    h_i = SpectralHamiltonian.from_matrix(linalg.random_hermitian(dim_s, rng))
    h_f = SpectralHamiltonian.from_matrix(linalg.random_hermitian(dim_s, rng))
    h_e = SpectralHamiltonian.from_matrix(linalg.random_hermitian(dim_e, rng))
    h_se = linalg.random_hermitian(dim_s * dim_e, rng)
    h_se = coupling * h_se / np.linalg.norm(h_se)
    return OpenSetup(h_i=h_i, h_f=h_f, h_se=h_se, rho_s=thermal_state(h_i, beta_s),
                     rho_e=thermal_state(h_e, beta_e), tau=tau)
