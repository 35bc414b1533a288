"""Work statistics of a system S that also exchanges energy with an auxiliary system E.

Energies are still measured on S only, at the start and at the end of a joint
evolution ``U_SE`` generated by ``H_S(lambda_t) (x) I_E + H_SE``.  Tracing out E
turns the evolution into a channel on S with Kraus operators

    K_(j,l) = sqrt(p_l) <j|_E U_SE |l>_E,

where ``rho_E = sum_l p_l |l><l|``.  Ordering is S (x) E, with the ancilla
appended last when the interferometer is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import linalg
from .errors import DiagonalityViolation, DimensionMismatch
from .interferometer import AncillaReadout, branch_gate, run_protocol
from .states import SpectralHamiltonian, check_density_matrix
from .tpm import JointProbabilityTable, level_labels, off_diagonal_weight

DIAGONAL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class OpenSetup:
    """Everything needed to define the open-system work statistics.

    ``h_path`` optionally gives the system Hamiltonian as a function of time on
    ``[0, tau]``; when omitted the work parameter jumps to its final value at
    ``t = 0`` and ``H_f`` acts for the whole duration.  ``allow_nondiagonal``
    skips the check that ``rho_s`` is diagonal in the ``H_i`` basis; results for
    such states no longer equal the two-point-measurement statistics.
    """

    h_i: SpectralHamiltonian
    h_f: SpectralHamiltonian
    h_se: np.ndarray
    rho_s: np.ndarray
    rho_e: np.ndarray
    tau: float
    h_path: Callable[[float], np.ndarray] | None = None
    allow_nondiagonal: bool = False

    def __post_init__(self):
        h_i = self.h_i if isinstance(self.h_i, SpectralHamiltonian) else SpectralHamiltonian.from_matrix(self.h_i)
        h_f = self.h_f if isinstance(self.h_f, SpectralHamiltonian) else SpectralHamiltonian.from_matrix(self.h_f)
        object.__setattr__(self, "h_i", h_i)
        object.__setattr__(self, "h_f", h_f)
        rho_s = check_density_matrix(self.rho_s)
        rho_e = check_density_matrix(self.rho_e)
        object.__setattr__(self, "rho_s", rho_s)
        object.__setattr__(self, "rho_e", rho_e)
        ds, de = rho_s.shape[0], rho_e.shape[0]
        if h_i.dim != ds or h_f.dim != ds:
            raise DimensionMismatch("system Hamiltonians and rho_s differ in dimension")
        h_se = linalg.check_hermitian(self.h_se, "h_se")
        if h_se.shape[0] != ds * de:
            raise DimensionMismatch(f"h_se has dim {h_se.shape[0]}, expected {ds * de}")
        object.__setattr__(self, "h_se", h_se)
        if self.tau < 0:
            raise ValueError("tau must be >= 0")
        if not self.allow_nondiagonal:
            off = off_diagonal_weight(rho_s, h_i)
            if off > DIAGONAL_TOL:
                raise DiagonalityViolation(
                    f"rho_s has {off:.2e} weight off the H_i eigenbasis diagonal")

    @property
    def dim_s(self) -> int:
        return self.rho_s.shape[0]

    @property
    def dim_e(self) -> int:
        return self.rho_e.shape[0]

    def total_hamiltonian(self, t: float | None = None) -> np.ndarray:
        hs = self.h_f.matrix if (self.h_path is None or t is None) else linalg.as_matrix(self.h_path(t))
        return np.kron(hs, np.eye(self.dim_e)) + self.h_se

    def embed_s(self, op: np.ndarray) -> np.ndarray:
        return np.kron(op, np.eye(self.dim_e))


@dataclass(frozen=True)
class KrausSet:
    operators: list
    labels: list

    def completeness_defect(self) -> float:
        d = self.operators[0].shape[1]
        acc = sum(k.conj().T @ k for k in self.operators)
        return float(np.linalg.norm(acc - np.eye(d)))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.operators)


def u_se(setup: OpenSetup, steps: int = 1) -> np.ndarray:
    """Propagator of ``H_S(lambda_t) (x) I_E + H_SE`` over ``[0, tau]``.

    Without ``h_path`` the generator is constant and a single exponential is
    returned.  Otherwise the interval is cut into ``steps`` midpoint slices.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    d = setup.dim_s * setup.dim_e
    if setup.tau == 0:
        return np.eye(d, dtype=complex)
    if setup.h_path is None:
        return linalg.expm_hermitian(setup.total_hamiltonian(), -1j * setup.tau)
    dt = setup.tau / steps
    u = np.eye(d, dtype=complex)
    for k in range(steps):
        u = linalg.expm_hermitian(setup.total_hamiltonian((k + 0.5) * dt), -1j * dt) @ u
    return u


def kraus_from_use(u: np.ndarray, rho_e: np.ndarray, drop_tol: float = 0.0) -> KrausSet:
    """Kraus operators ``sqrt(p_l) <j|U|l>`` over the eigenbasis of ``rho_e``.

    Both ``j`` and ``l`` run over that eigenbasis.  Terms with ``p_l <= drop_tol``
    are omitted.
    """
    u = linalg.as_matrix(u)
    rho_e = check_density_matrix(rho_e)
    de = rho_e.shape[0]
    if u.shape[0] % de:
        raise DimensionMismatch(f"U dim {u.shape[0]} is not a multiple of dim E = {de}")
    ds = u.shape[0] // de
    p, v = np.linalg.eigh(0.5 * (rho_e + rho_e.conj().T))
    # rotate E into the eigenbasis of rho_e on both sides
    w = np.kron(np.eye(ds), v)
    ue = (w.conj().T @ u @ w).reshape(ds, de, ds, de)
    ops, labels = [], []
    for l in range(de):
        if p[l] <= drop_tol:
            continue
        for j in range(de):
            ops.append(np.sqrt(p[l]) * ue[:, j, :, l])
            labels.append((j, l))
    return KrausSet(ops, labels)


def kraus_set(setup: OpenSetup, steps: int = 1) -> KrausSet:
    return kraus_from_use(u_se(setup, steps), setup.rho_e)


def char_fn_open_direct(setup: OpenSetup, u: float, kraus: KrausSet | None = None,
                        steps: int = 1) -> complex:
    """``Tr_S[e^{iu H_f} sum_k K_k rho_S e^{-iu H_i} K_k^dag]``."""
    kraus = kraus if kraus is not None else kraus_set(setup, steps)
    fwd = setup.h_f.expm(1j * u)
    back = setup.rho_s @ setup.h_i.expm(-1j * u)
    return complex(sum(np.trace(fwd @ k @ back @ k.conj().T) for k in kraus.operators))


def char_fn_open_trace(setup: OpenSetup, u: float, u_total: np.ndarray | None = None,
                       steps: int = 1) -> complex:
    """``Tr_SE[e^{iu H_f} U (rho_S e^{-iu H_i} (x) rho_E) U^dag]`` on the joint space."""
    ut = u_total if u_total is not None else u_se(setup, steps)
    fwd = setup.embed_s(setup.h_f.expm(1j * u))
    init = np.kron(setup.rho_s @ setup.h_i.expm(-1j * u), setup.rho_e)
    return complex(np.trace(fwd @ ut @ init @ ut.conj().T))


def joint_prob_open(setup: OpenSetup, u_total: np.ndarray | None = None,
                    steps: int = 1) -> JointProbabilityTable:
    """``p_S(n, M) = Tr_SE[Q_M U (P_n rho_S P_n (x) rho_E) U^dag]``."""
    ut = u_total if u_total is not None else u_se(setup, steps)
    ds, de = setup.dim_s, setup.dim_e
    e_i, lab_i = level_labels(setup.h_i.energies)
    e_f, lab_f = level_labels(setup.h_f.energies)
    vi, vf = setup.h_i.vectors, setup.h_f.vectors
    p = np.empty((len(e_i), len(e_f)))
    for n in range(len(e_i)):
        vn = vi[:, lab_i == n]
        pn = vn @ vn.conj().T
        evolved = ut @ np.kron(pn @ setup.rho_s @ pn, setup.rho_e) @ ut.conj().T
        reduced = linalg.partial_trace(evolved, [ds, de], keep=0)
        pops = np.real(np.einsum("am,ab,bm->m", vf.conj(), reduced, vf))
        p[n] = np.bincount(lab_f, weights=pops, minlength=len(e_f))
    return JointProbabilityTable(p, e_i, e_f)


def gate_se(setup: OpenSetup, u: float, u_total: np.ndarray | None = None,
            steps: int = 1) -> np.ndarray:
    """``U_SE (e^{-iu H_i} (x) I_E) (x) |0><0| + (e^{-iu H_f} (x) I_E) U_SE (x) |1><1|``.

    System exponentials act as identity on E; the ancilla is the last factor.
    """
    ut = u_total if u_total is not None else u_se(setup, steps)
    b0 = ut @ setup.embed_s(setup.h_i.evolution(u))
    b1 = setup.embed_s(setup.h_f.evolution(u)) @ ut
    return branch_gate(b0, b1)


def run_protocol_open(setup: OpenSetup, u: float, u_total: np.ndarray | None = None,
                      steps: int = 1, **readout) -> AncillaReadout:
    """Interferometer on S (x) E (x) A; the readout encodes the open-system chi."""
    return run_protocol(gate_se(setup, u, u_total, steps), np.kron(setup.rho_s, setup.rho_e), **readout)
