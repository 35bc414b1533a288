"""Qubit dispersively coupled to a harmonic mode as a self-contained interferometer.

The oscillator is the system S and the coupled qubit doubles as the ancilla A
(ordering S (x) A).  With ``N = a^dag a + 1/2`` the effective Hamiltonian is

    H_SA(lam) = omega N (x) I + delta I (x) sz + lam N (x) sz,

so every ``H_SA(lam)`` is diagonal in the Fock (x) {|0>, |1>} basis.  The
effective system Hamiltonians seen by the interferometer are
``H_i = (omega + lambda0) N`` and ``H_f = (omega + lambda_tau) N``.

Composing ``G1 = exp(-i H_SA(lambda_tau) u/2)`` and
``G2 = exp(-i H_SA(lambda0) u/2)`` as ``X G2 X G1`` (``X = I (x) sx``) gives

    G(u) = [e^{-i D u/2} (x) |0><0| + e^{+i D u/2} (x) |1><1|] e^{-i omega N u},

``D = (lambda_tau - lambda0) N``; the qubit splitting ``delta`` cancels between
the two halves.  Conjugating by ``X`` and applying the system-local phase
``exp(-i (lambda0 + lambda_tau) N u / 2)`` turns it into the simple gate
``e^{-i H_i u} (x) |0><0| + e^{-i H_f u} (x) |1><1|``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import linalg
from .errors import InvalidDimension
from .interferometer import SX, SY, SZ, ancilla_op, ancilla_state, branch_gate
from .states import SpectralHamiltonian, annihilation, oscillator_hamiltonian, thermal_weight


@dataclass(frozen=True)
class DispersiveParams:
    """Parameters of the full qubit-resonator model.

    The dispersive reduction assumes ``delta >> omega``, ``g << delta`` and
    ``epsilon0 = 0``; none of this is enforced.
    """

    delta: float
    omega: float
    g: float
    nmax: int
    epsilon0: float = 0.0

    @property
    def work_parameter(self) -> float:
        """Dispersive shift ``g^2 / delta``."""
        return self.g**2 / self.delta


def _check_nmax(nmax: int) -> int:
    if int(nmax) != nmax or nmax < 1:
        raise InvalidDimension(f"nmax must be an integer >= 1, got {nmax}")
    return int(nmax)


def shifted_number(nmax: int) -> np.ndarray:
    """``a^dag a + 1/2`` on levels ``0..nmax``."""
    return np.diag(np.arange(nmax + 1) + 0.5).astype(complex)


def full_hamiltonian(p: DispersiveParams) -> np.ndarray:
    """``eps0/2 sz + delta sx + omega (a^dag a + 1/2) + g (a + a^dag) sz`` on S (x) A."""
    nmax = _check_nmax(p.nmax)
    a = annihilation(nmax)
    eye_s = np.eye(nmax + 1)
    return (0.5 * p.epsilon0 * np.kron(eye_s, SZ)
            + p.delta * np.kron(eye_s, SX)
            + p.omega * np.kron(shifted_number(nmax), np.eye(2))
            + p.g * np.kron(a + a.conj().T, SZ))


def dispersive_hamiltonian(omega: float, delta: float, lam: float, nmax: int) -> SpectralHamiltonian:
    """``omega N (x) I + delta I (x) sz + lam N (x) sz``; diagonal, built with its spectrum."""
    nmax = _check_nmax(nmax)
    n = np.arange(nmax + 1) + 0.5
    s = np.array([1.0, -1.0])
    diag = (omega * n[:, None] + delta * s[None, :] + lam * n[:, None] * s[None, :]).ravel()
    return SpectralHamiltonian.diagonal(diag)


def system_hamiltonians(omega: float, lambda0: float, lambda_tau: float, nmax: int):
    """``(H_i, H_f) = ((omega + lambda0) N, (omega + lambda_tau) N)``."""
    nmax = _check_nmax(nmax)
    return oscillator_hamiltonian(omega + lambda0, nmax), oscillator_hamiltonian(omega + lambda_tau, nmax)


def _diag_phase(values: np.ndarray, c: complex) -> np.ndarray:
    return np.diag(np.exp(c * values))


def usa_propagator(schedule: Sequence, omega: float, delta: float, nmax: int) -> np.ndarray:
    """Factorized propagator ``e^{-i H_S tau} e^{-i H_A tau} e^{-i (int lam dt) N (x) sz}``.

    ``schedule`` lists ``(duration, lam)`` or ``(duration, lam_start, lam_end)``
    segments.  All terms commute, so this is exact.
    """
    nmax = _check_nmax(nmax)
    tau, lam_int = _schedule_totals(schedule)
    n = np.arange(nmax + 1) + 0.5
    free_s = np.kron(_diag_phase(n, -1j * omega * tau), np.eye(2))
    free_a = np.kron(np.eye(nmax + 1), _diag_phase(np.array([delta, -delta]), -1j * tau))
    inter = _diag_phase(np.kron(n, [1.0, -1.0]), -1j * lam_int)
    return free_s @ free_a @ inter


def _schedule_totals(schedule: Sequence) -> tuple[float, float]:
    tau = 0.0
    lam_int = 0.0
    for seg in schedule:
        seg = tuple(float(x) for x in seg)
        if len(seg) not in (2, 3) or seg[0] < 0:
            raise ValueError(f"bad segment {seg}")
        tau += seg[0]
        lam_int += seg[0] * (seg[1] if len(seg) == 2 else 0.5 * (seg[1] + seg[2]))
    return tau, lam_int


def usa_sliced(schedule: Sequence, omega: float, delta: float, nmax: int,
               steps_per_segment: int = 1) -> np.ndarray:
    """Direct time-ordered product of ``exp(-i H_SA(lam) dt)`` slices (midpoint rule)."""
    nmax = _check_nmax(nmax)
    d = 2 * (nmax + 1)
    u = np.eye(d, dtype=complex)
    for seg in schedule:
        seg = tuple(float(x) for x in seg)
        dur, la = seg[0], seg[1]
        lb = seg[2] if len(seg) == 3 else la
        if dur == 0:
            continue
        dt = dur / steps_per_segment
        for k in range(steps_per_segment):
            lam = la + (lb - la) * (k + 0.5) / steps_per_segment
            u = dispersive_hamiltonian(omega, delta, lam, nmax).evolution(dt) @ u
    return u


def usa_branches(schedule: Sequence, omega: float, delta: float, nmax: int) -> np.ndarray:
    """Branch form ``(e^{-iL} (x) |0><0| + e^{+iL} (x) |1><1|) e^{-i (H_S + H_A) tau}``, ``L = int lam dt N``."""
    nmax = _check_nmax(nmax)
    tau, lam_int = _schedule_totals(schedule)
    n = np.arange(nmax + 1) + 0.5
    branches = branch_gate(_diag_phase(n, -1j * lam_int), _diag_phase(n, 1j * lam_int))
    free = dispersive_hamiltonian(omega, delta, 0.0, nmax).evolution(tau)
    return branches @ free


def usa_cos_sin(schedule: Sequence, nmax: int) -> np.ndarray:
    """Interaction factor as ``cos(L) (x) I - i sin(L) (x) sz``."""
    nmax = _check_nmax(nmax)
    _, lam_int = _schedule_totals(schedule)
    n = np.arange(nmax + 1) + 0.5
    return (np.kron(np.diag(np.cos(lam_int * n)), np.eye(2))
            - 1j * np.kron(np.diag(np.sin(lam_int * n)), SZ))


class CalGates(NamedTuple):
    full: np.ndarray
    first: np.ndarray
    second: np.ndarray


def gate_cal(u: float, omega: float, delta: float, lambda0: float, lambda_tau: float,
             nmax: int) -> CalGates:
    """Half-time evolutions at the final and initial work parameter and their composition.

    ``first = exp(-i H_SA(lambda_tau) u/2)``, ``second = exp(-i H_SA(lambda0) u/2)``
    and ``full = X second X first``.
    """
    nmax = _check_nmax(nmax)
    g1 = dispersive_hamiltonian(omega, delta, lambda_tau, nmax).evolution(u / 2)
    g2 = dispersive_hamiltonian(omega, delta, lambda0, nmax).evolution(u / 2)
    x = ancilla_op(SX, nmax + 1)
    return CalGates(x @ g2 @ x @ g1, g1, g2)


def gate_cal_branch_form(u: float, omega: float, lambda0: float, lambda_tau: float,
                         nmax: int) -> np.ndarray:
    """``[e^{-i D u/2} (x) |0><0| + e^{i D u/2} (x) |1><1|] e^{-i omega N u}``."""
    nmax = _check_nmax(nmax)
    n = np.arange(nmax + 1) + 0.5
    d = (lambda_tau - lambda0) * n
    branches = branch_gate(_diag_phase(d, -0.5j * u), _diag_phase(d, 0.5j * u))
    return branches @ np.kron(_diag_phase(n, -1j * omega * u), np.eye(2))


def gate_simple(u: float, omega: float, lambda0: float, lambda_tau: float, nmax: int) -> np.ndarray:
    """``e^{-i H_i u} (x) |0><0| + e^{-i H_f u} (x) |1><1|`` for the dispersive system Hamiltonians."""
    h_i, h_f = system_hamiltonians(omega, lambda0, lambda_tau, nmax)
    return branch_gate(h_i.evolution(u), h_f.evolution(u))


def free_qubit_phase(u: float, delta: float, nmax: int, sign: float = 1.0) -> np.ndarray:
    """``exp(sign * i H_A u)`` with ``H_A = delta sz``, embedded on S (x) A."""
    return np.kron(np.eye(nmax + 1), _diag_phase(np.array([delta, -delta]), sign * 1j * u))


def gate_simple_from_cal(u: float, omega: float, delta: float, lambda0: float,
                         lambda_tau: float, nmax: int, qubit_phase: float = 0.0) -> np.ndarray:
    """``X G(u) X  exp(i qubit_phase H_A u)  exp(-i (H(lambda0) + H(lambda_tau)) u/2)``.

    With ``qubit_phase = 0`` this reproduces :func:`gate_simple` exactly.
    ``qubit_phase = 1`` inserts the extra ``exp(i H_A u)`` factor, which does not
    belong there: the composed gate carries no ``H_A`` dependence to undo.
    """
    nmax = _check_nmax(nmax)
    g = gate_cal(u, omega, delta, lambda0, lambda_tau, nmax).full
    x = ancilla_op(SX, nmax + 1)
    n = np.arange(nmax + 1) + 0.5
    k_s = np.kron(_diag_phase((lambda0 + lambda_tau) * n, -0.5j * u), np.eye(2))
    out = x @ g @ x
    if qubit_phase:
        out = out @ free_qubit_phase(u, delta, nmax, sign=qubit_phase)
    return out @ k_s


def thermal_input(omega: float, lambda0: float, nbar: float, nmax: int) -> np.ndarray:
    """Oscillator thermal state of ``H_i = (omega + lambda0) N`` with occupation ``nbar``."""
    w = thermal_weight(np.arange(nmax + 1), nbar)
    return np.diag(w / w.sum()).astype(complex)


def protocol_equivalence(u_grid, omega: float, delta: float, lambda0: float, lambda_tau: float,
                         nmax: int, rho_th) -> tuple[float, list[complex]]:
    """Compare the ancilla states of the simple-gate circuit and the dispersive circuit.

    The dispersive circuit applies ``X G(u) X``: the composed half-time
    evolutions with ancilla flips around them.  The system-local phase that
    separates it from the simple gate commutes with the thermal input and so
    never reaches the ancilla.  Returns the maximum Frobenius deviation over
    the grid and the chi values read from the dispersive circuit.
    """
    nmax = _check_nmax(nmax)
    x = ancilla_op(SX, nmax + 1)
    worst = 0.0
    chis = []
    for u in u_grid:
        u = float(u)
        rho_simple = ancilla_state(gate_simple(u, omega, lambda0, lambda_tau, nmax), rho_th)
        g = gate_cal(u, omega, delta, lambda0, lambda_tau, nmax).full
        rho_cal = ancilla_state(x @ g @ x, rho_th)
        worst = max(worst, float(np.linalg.norm(rho_cal - rho_simple)))
        chis.append(_chi_of(rho_cal))
    return worst, chis


def bare_cal_chi(u: float, omega: float, delta: float, lambda0: float, lambda_tau: float,
                 nmax: int, rho_th) -> complex:
    """chi read from a circuit using ``G(u)`` itself, without the ancilla flips.

    Swapping the ancilla branches conjugates the readout: this returns
    ``chi(-u) = conj(chi(u))``.
    """
    g = gate_cal(u, omega, delta, lambda0, lambda_tau, nmax).full
    return _chi_of(ancilla_state(g, rho_th))


def _chi_of(rho_a: np.ndarray) -> complex:
    return complex(np.trace(rho_a @ SZ).real, np.trace(rho_a @ SY).real)


def commutator_norm(h1: SpectralHamiltonian, h2: SpectralHamiltonian) -> float:
    return float(np.linalg.norm(linalg.commutator(h1.matrix, h2.matrix)))
