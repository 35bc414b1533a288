"""Interferometric reconstruction of quantum work statistics.

An ancilla qubit, coupled to a driven system through conditional gates, ends
up in the state ``(I + Re chi(u) sz + Im chi(u) sy)/2`` where ``chi`` is the
characteristic function of the work distribution.  The package simulates that
circuit and checks it against the two-point-measurement definition, the
closed forms for a sudden oscillator quench, a dispersive qubit-resonator
realization and an open-system (Kraus) generalization.
"""

from .errors import *  # noqa: F401,F403
from .interferometer import (AncillaReadout, CharSample, gate_commuting, gate_general,
                             gate_sequence, run_protocol, sweep_char_fn)
from .models import random_closed_instance, sudden_quench_model
from .quench import QuenchParams, chi_closed, peak_weights
from .states import (EPS_TAIL, SpectralHamiltonian, oscillator_hamiltonian, thermal_state,
                     truncation_dim)
from .tpm import WorkDistribution, char_fn_direct, joint_probabilities, work_distribution

__version__ = "0.1.0"
