"""Conditional system-ancilla gates and the Ramsey-like readout of chi(u).

Tensor ordering is fixed everywhere: the system (and, for open setups, the
environment) comes first and the ancilla qubit is the LAST factor, so a gate
``A (x) |0><0| + B (x) |1><1|`` is ``kron(A, P0) + kron(B, P1)``.

The circuit is: ancilla |0> -> Hadamard -> gate -> Hadamard -> trace out all
but the ancilla.  The final ancilla state is ``(I + Re chi sz + Im chi sy)/2``.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import linalg
from .errors import DimensionMismatch
from .states import QUBIT, SpectralHamiltonian, check_density_matrix

P0 = QUBIT["ket0_proj"]
P1 = QUBIT["ket1_proj"]
SX = QUBIT["pauli_x"]
SY = QUBIT["pauli_y"]
SZ = QUBIT["pauli_z"]
HADAMARD = QUBIT["hadamard"]
PLUS = QUBIT["plus_proj"]

COMMUTATOR_WARN_TOL = 1e-10


@dataclass(frozen=True)
class AncillaReadout:
    """Ancilla magnetizations; ``sz = Re chi(u)``, ``sy = Im chi(u)``."""

    sz: float
    sy: float
    sx: float = 0.0
    rho_a: np.ndarray | None = None

    @property
    def chi(self) -> complex:
        return complex(self.sz, self.sy)


class CharSample(NamedTuple):
    u: float
    re: float
    im: float

    @property
    def chi(self) -> complex:
        return complex(self.re, self.im)


def branch_gate(branch0: np.ndarray, branch1: np.ndarray) -> np.ndarray:
    """``branch0 (x) |0><0| + branch1 (x) |1><1|`` with the ancilla last."""
    return np.kron(branch0, P0) + np.kron(branch1, P1)


def ancilla_op(op: np.ndarray, dim_rest: int) -> np.ndarray:
    """Embed a single-qubit operator as ``I_rest (x) op``."""
    return np.kron(np.eye(dim_rest), op)


def extract_block(gate: np.ndarray, a: int, b: int) -> np.ndarray:
    """``<a|_A gate |b>_A`` as an operator on the rest of the space."""
    d = gate.shape[0] // 2
    return gate.reshape(d, 2, d, 2)[:, a, :, b]


def _coerce_h(h) -> SpectralHamiltonian:
    return h if isinstance(h, SpectralHamiltonian) else SpectralHamiltonian.from_matrix(h)


def _check_dims(*mats) -> int:
    dims = {m.shape[0] for m in mats}
    if len(dims) != 1:
        raise DimensionMismatch(f"operand dimensions differ: {sorted(dims)}")
    return dims.pop()


def gate_general(u: float, u_tau, h_i, h_f) -> np.ndarray:
    """``U e^{-i H_i u} (x) |0><0| + e^{-i H_f u} U (x) |1><1|``.

    ``u_tau`` must be unitary; ``h_i`` and ``h_f`` may be matrices or
    ``SpectralHamiltonian`` instances.
    """
    u_tau = linalg.check_unitary(u_tau, "u_tau")
    h_i, h_f = _coerce_h(h_i), _coerce_h(h_f)
    _check_dims(u_tau, h_i.matrix, h_f.matrix)
    return branch_gate(u_tau @ h_i.evolution(u), h_f.evolution(u) @ u_tau)


def gate_sequence(u: float, u_tau, h_i, h_f) -> list[np.ndarray]:
    """Controlled-gate factorization ``[G1, X, G2, X]`` in order of application.

    ``X`` is ``I (x) sigma_x``; the product ``X @ G2 @ X @ G1`` equals
    :func:`gate_general`.
    """
    u_tau = linalg.check_unitary(u_tau, "u_tau")
    h_i, h_f = _coerce_h(h_i), _coerce_h(h_f)
    d = _check_dims(u_tau, h_i.matrix, h_f.matrix)
    eye = np.eye(d)
    g1 = branch_gate(eye, h_f.evolution(u) @ u_tau)
    g2 = branch_gate(eye, u_tau @ h_i.evolution(u))
    x = ancilla_op(SX, d)
    return [g1, x, g2, x]


def compose(sequence: Sequence[np.ndarray]) -> np.ndarray:
    """Product of gates listed in order of application (first applied is rightmost)."""
    out = np.eye(sequence[0].shape[0], dtype=complex)
    for g in sequence:
        out = g @ out
    return out


def _warn_if_noncommuting(h_i: SpectralHamiltonian, h_f: SpectralHamiltonian) -> None:
    c = np.linalg.norm(linalg.commutator(h_i.matrix, h_f.matrix))
    if c >= COMMUTATOR_WARN_TOL:
        warnings.warn(f"[H_i, H_f] is not zero (||.||_F = {c:.3e}); the commuting gate "
                      "does not reproduce the general protocol", stacklevel=3)


def gate_commuting(u: float, h_i, h_f) -> np.ndarray:
    """Simplified gate ``e^{-i H_i u} (x) |0><0| + e^{-i H_f u} (x) |1><1|``.

    Valid as a replacement of :func:`gate_general` when the Hamiltonians commute
    with each other and with the protocol propagator; a warning is emitted
    (not an error) when ``[H_i, H_f] != 0``.
    """
    h_i, h_f = _coerce_h(h_i), _coerce_h(h_f)
    _check_dims(h_i.matrix, h_f.matrix)
    _warn_if_noncommuting(h_i, h_f)
    return branch_gate(h_i.evolution(u), h_f.evolution(u))


def gate_commuting_sequence(u: float, h_i, h_f) -> list[np.ndarray]:
    """``[G1, X, G2, X]`` split of :func:`gate_commuting`."""
    h_i, h_f = _coerce_h(h_i), _coerce_h(h_f)
    d = _check_dims(h_i.matrix, h_f.matrix)
    eye = np.eye(d)
    x = ancilla_op(SX, d)
    return [branch_gate(eye, h_f.evolution(u)), x, branch_gate(eye, h_i.evolution(u)), x]


def ancilla_state(gate, rho_rest) -> np.ndarray:
    """Final 2x2 ancilla state of the Hadamard-gate-Hadamard circuit."""
    rho_rest = check_density_matrix(rho_rest)
    gate = linalg.as_matrix(gate)
    d = rho_rest.shape[0]
    if gate.shape[0] != 2 * d:
        raise DimensionMismatch(f"gate dim {gate.shape[0]} != 2 * {d}")
    linalg.check_unitary(gate, "gate")
    had = ancilla_op(HADAMARD, d)
    w = had @ gate
    state = w @ np.kron(rho_rest, PLUS) @ linalg.dagger(w)
    rho_a = linalg.partial_trace(state, [d, 2], keep=1)
    return 0.5 * (rho_a + linalg.dagger(rho_a))


def readout_from_state(rho_a: np.ndarray, shots: int | None = None,
                       rng: np.random.Generator | None = None) -> AncillaReadout:
    sz = float(np.trace(rho_a @ SZ).real)
    sy = float(np.trace(rho_a @ SY).real)
    sx = float(np.trace(rho_a @ SX).real)
    if shots is not None:
        if shots < 1:
            raise ValueError("shots must be >= 1")
        rng = rng if rng is not None else np.random.default_rng()
        # each axis measured on its own batch of projective shots
        sz, sy, sx = (2.0 * rng.binomial(shots, np.clip(0.5 * (1 + s), 0, 1)) / shots - 1.0
                      for s in (sz, sy, sx))
    return AncillaReadout(sz, sy, sx, rho_a)


def run_protocol(gate, rho_rest, shots: int | None = None,
                 rng: np.random.Generator | None = None) -> AncillaReadout:
    """Run the interferometer and return ``(<sigma_z>, <sigma_y>)`` of the ancilla.

    By default the expectation values are exact.  Passing ``shots`` emulates a
    finite number of projective measurements per axis.
    """
    return readout_from_state(ancilla_state(gate, rho_rest), shots=shots, rng=rng)


def readout_chi(gate, rho_rest) -> complex:
    return run_protocol(gate, rho_rest).chi


def verify_generalized_gate(gate, k_s, l_a, rho_s) -> float:
    """Frobenius distance between ancilla states from ``gate (K_S (x) L_A)`` and from ``gate``.

    ``k_s`` acts on the system, ``l_a`` on the ancilla.  The distance vanishes
    when ``k_s`` commutes with ``rho_s`` and ``l_a`` leaves ``|+><+|`` invariant
    up to a global phase (for a diagonal ``l_a``: equal phases on both branches).
    A relative phase ``phi`` between the branches rotates chi by ``e^{i phi}``.
    """
    gate = linalg.as_matrix(gate)
    k_s = linalg.check_unitary(k_s, "k_s")
    l_a = linalg.check_unitary(l_a, "l_a")
    if l_a.shape[0] != 2 or 2 * k_s.shape[0] != gate.shape[0]:
        raise DimensionMismatch("k_s / l_a do not match the gate")
    dressed = gate @ np.kron(k_s, l_a)
    return float(np.linalg.norm(ancilla_state(dressed, rho_s) - ancilla_state(gate, rho_s)))


def sweep_char_fn(gate_builder: Callable[[float], np.ndarray], rho, u_grid,
                  workers: int = 1) -> list[CharSample]:
    """One :class:`CharSample` per ``u`` in ``u_grid``, in grid order."""
    grid = [float(u) for u in u_grid]
    if not all(np.isfinite(grid)):
        raise ValueError("u_grid must be finite")
    rho = check_density_matrix(rho)

    def one(u: float) -> CharSample:
        r = run_protocol(gate_builder(u), rho)
        return CharSample(u, r.sz, r.sy)

    if workers <= 1:
        return [one(u) for u in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, grid))
