"""Named numerical checks tying the interferometer to its independent references.

Each check returns a :class:`Check` holding the measured deviation and the
threshold it is held to.  :func:`run_all` executes the whole suite from a
single seed, so repeated runs with the same seed produce identical reports.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import dispersive as dm
from . import open_system as osys
from . import quench as qa
from . import tpm
from .interferometer import (compose, gate_commuting, gate_commuting_sequence, gate_general,
                             gate_sequence, readout_chi)
from .models import random_closed_instance, random_open_setup, sudden_quench_model
from .states import EPS_TAIL, partition_function, truncation_dim

DEFAULT_SEED = 42


@dataclass(frozen=True)
class Check:
    name: str
    deviation: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(self.deviation < self.threshold)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _quench_protocol_vs_closed(rng, eps_tail):
    worst = 0.0
    u = np.linspace(0, 40, 100)
    for dl, nbar in ((0.3, 0.0), (0.3, 1.5), (2.0, 1.5), (0.0, 1.5)):
        m = sudden_quench_model(dl, nbar, eps_tail=eps_tail)
        p = qa.QuenchParams(dl, nbar)
        chi = np.array([readout_chi(gate_general(x, m.u_tau, m.h_i, m.h_f), m.rho) for x in u])
        worst = max(worst, float(np.max(np.abs(chi - qa.chi_closed(u, p)))))
    return worst, 1e-9


def _re_im_forms(rng, eps_tail):
    u = np.linspace(0, 40, 1000)
    worst = 0.0
    for dl, nbar in ((0.3, 0.0), (0.3, 1.5), (0.3, 5.0), (0.5, 1.5), (2.0, 1.5)):
        p = qa.QuenchParams(dl, nbar)
        re, im = qa.chi_re_im_closed(u, p)
        chi = qa.chi_closed(u, p)
        worst = max(worst, float(np.max(np.abs(re - chi.real))), float(np.max(np.abs(im - chi.imag))))
    return worst, 1e-13


def _series_vs_closed(rng, eps_tail):
    u = np.linspace(0, 40, 400)
    worst = 0.0
    for nbar in (0.5, 1.5, 5.0):
        p = qa.QuenchParams(0.3, nbar)
        diff = qa.chi_series(u, p, truncation_dim(nbar, 1e-12)) - qa.chi_closed(u, p)
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst, 1e-11


def _periodicity(rng, eps_tail):
    u = np.linspace(0, 40, 400)
    worst = 0.0
    for dl in (0.3, 0.5, 2.0):
        p = qa.QuenchParams(dl, 1.5)
        worst = max(worst, float(np.max(np.abs(qa.chi_closed(u + 2 * math.pi / dl, p) + qa.chi_closed(u, p)))))
    return worst, 1e-12


def _tpm_atoms(rng, eps_tail):
    worst = 0.0
    for nbar in (1.0, 10.0):
        m = sudden_quench_model(1.0, nbar, eps_tail=eps_tail)
        dist = tpm.work_distribution(tpm.joint_probabilities(m.rho, m.u_tau, m.h_i, m.h_f))
        peaks = qa.peak_weights(qa.QuenchParams(1.0, nbar), len(dist))
        worst = max(worst, float(np.max(np.abs(dist.p - peaks.p))), float(np.max(np.abs(dist.w - peaks.w))))
    return worst, 1e-10


def _average_work(rng, eps_tail):
    worst = 0.0
    for nbar in (1.0, 10.0):
        m = sudden_quench_model(1.0, nbar, eps_tail=eps_tail)
        dist = tpm.work_distribution(tpm.joint_probabilities(m.rho, m.u_tau, m.h_i, m.h_f))
        target = nbar + 0.5
        fd = tpm.average_work_from_chi(dist.char_fn, tpm.default_du(m.h_i, m.h_f))
        worst = max(worst, abs(tpm.average_work(dist) - target), abs(fd - target))
    return worst, 1e-8


def _protocol_vs_direct(rng, eps_tail):
    worst = 0.0
    for k in range(20):
        inst = random_closed_instance((2, 3, 4, 6)[k % 4], rng)
        for u in rng.uniform(-10, 10, size=5):
            chi = readout_chi(gate_general(u, inst.u_tau, inst.h_i, inst.h_f), inst.rho)
            worst = max(worst, abs(chi - tpm.char_fn_direct(inst.rho, inst.u_tau, inst.h_i, inst.h_f, u)))
    return worst, 1e-10


def _direct_vs_tpm_sum(rng, eps_tail):
    worst = 0.0
    for _ in range(10):
        inst = random_closed_instance(int(rng.integers(2, 7)), rng)
        table = tpm.joint_probabilities(inst.rho, inst.u_tau, inst.h_i, inst.h_f)
        for u in rng.uniform(-10, 10, size=5):
            direct = tpm.char_fn_direct(inst.rho, inst.u_tau, inst.h_i, inst.h_f, u)
            worst = max(worst, abs(direct - tpm.char_fn_tpm(table, u)))
    return worst, 1e-12


def _gate_sequences(rng, eps_tail):
    worst = 0.0
    for _ in range(20):
        inst = random_closed_instance(int(rng.integers(2, 7)), rng)
        u = float(rng.uniform(-10, 10))
        g = gate_general(u, inst.u_tau, inst.h_i, inst.h_f)
        worst = max(worst, float(np.linalg.norm(compose(gate_sequence(u, inst.u_tau, inst.h_i, inst.h_f)) - g)))
        c = random_closed_instance(int(rng.integers(2, 7)), rng, commuting=True)
        gc = gate_commuting(u, c.h_i, c.h_f)
        worst = max(worst, float(np.linalg.norm(compose(gate_commuting_sequence(u, c.h_i, c.h_f)) - gc)))
    return worst, 1e-12


def _hermitian_symmetry(rng, eps_tail):
    worst = 0.0
    for _ in range(10):
        inst = random_closed_instance(4, rng)
        for u in rng.uniform(0, 10, size=3):
            plus = readout_chi(gate_general(u, inst.u_tau, inst.h_i, inst.h_f), inst.rho)
            minus = readout_chi(gate_general(-u, inst.u_tau, inst.h_i, inst.h_f), inst.rho)
            worst = max(worst, abs(minus - np.conj(plus)), max(0.0, abs(plus) - 1.0))
    return worst, 1e-12


def _jarzynski(rng, eps_tail):
    worst = 0.0
    for nbar in (0.5, 1.0, 5.0):
        m = sudden_quench_model(1.0, nbar, eps_tail=eps_tail)
        dist = tpm.work_distribution(tpm.joint_probabilities(m.rho, m.u_tau, m.h_i, m.h_f))
        _, _, dev = tpm.jarzynski_check(dist, m.beta, partition_function(m.h_i, m.beta),
                                        partition_function(m.h_f, m.beta))
        worst = max(worst, dev)
    return worst, 1e-10 + eps_tail


DISPERSIVE = dict(omega=1.0, delta=20.0, lambda0=0.2, lambda_tau=0.5)


def _dispersive_equivalence(rng, eps_tail):
    nbar = 1.5
    nmax = truncation_dim(nbar, eps_tail)
    rho = dm.thermal_input(DISPERSIVE["omega"], DISPERSIVE["lambda0"], nbar, nmax)
    dev, _ = dm.protocol_equivalence(np.linspace(0, 40, 25), nmax=nmax, rho_th=rho, **DISPERSIVE)
    return dev, 1e-10


def _dispersive_identity(rng, eps_tail):
    nmax = truncation_dim(1.5, eps_tail)
    d = DISPERSIVE
    worst = 0.0
    for u in np.linspace(0, 40, 25):
        lhs = dm.gate_simple(u, d["omega"], d["lambda0"], d["lambda_tau"], nmax)
        rhs = dm.gate_simple_from_cal(u, d["omega"], d["delta"], d["lambda0"], d["lambda_tau"], nmax)
        worst = max(worst, float(np.linalg.norm(lhs - rhs, 2)))
    return worst, 1e-12


def _inversion_formula(rng, eps_tail):
    worst = 0.0
    for nbar in (0.0, 1.0):
        p = qa.QuenchParams(1.0, nbar)
        for _ in range(5):
            w = float(rng.uniform(-0.5, 3.0))
            if abs(w - round(w - 0.5) - 0.5) < 0.05:
                w += 0.2
            eps = float(rng.uniform(1.0, 15.0))
            formula = qa.partial_inversion_formula(eps, w, p)
            quad = qa.partial_inversion_quadrature(eps, w, lambda x: qa.chi_closed(x, p))
            worst = max(worst, abs(formula - quad))
    return worst, 1e-6


def _zero_temperature_sinc(rng, eps_tail):
    p = qa.QuenchParams(1.0, 0.0)
    worst = 0.0
    for eps, w in ((5.0, 0.2), (12.0, 1.3), (3.0, -0.4)):
        quad = qa.partial_inversion_quadrature(eps, w, lambda x: qa.chi_closed(x, p))
        worst = max(worst, abs(qa.partial_inversion_zero_temperature(eps, w, 1.0) - quad))
    return worst, 1e-6


def _open_three_way(rng, eps_tail):
    worst = 0.0
    for _ in range(5):
        s = random_open_setup(3, 4, rng)
        ut = osys.u_se(s)
        ks = osys.kraus_from_use(ut, s.rho_e)
        table = osys.joint_prob_open(s, ut)
        for u in np.linspace(0, 20, 6):
            a = osys.run_protocol_open(s, u, ut).chi
            b = osys.char_fn_open_direct(s, u, ks)
            c = tpm.char_fn_tpm(table, u)
            worst = max(worst, abs(a - b), abs(b - c), abs(a - c))
    return worst, 1e-10


def _kraus_completeness(rng, eps_tail):
    worst = 0.0
    for _ in range(5):
        s = random_open_setup(3, 4, rng)
        worst = max(worst, osys.kraus_set(s).completeness_defect())
    return worst, 1e-11


CHECKS: dict[str, Callable] = {
    "quench_protocol_vs_closed_form": _quench_protocol_vs_closed,
    "re_im_closed_forms": _re_im_forms,
    "series_vs_closed_form": _series_vs_closed,
    "half_period_sign_flip": _periodicity,
    "tpm_atoms_vs_peak_weights": _tpm_atoms,
    "average_work": _average_work,
    "protocol_vs_direct_definition": _protocol_vs_direct,
    "direct_vs_tpm_sum": _direct_vs_tpm_sum,
    "gate_decompositions": _gate_sequences,
    "hermitian_symmetry_and_bound": _hermitian_symmetry,
    "jarzynski_sudden_quench": _jarzynski,
    "dispersive_ancilla_equivalence": _dispersive_equivalence,
    "dispersive_gate_identity": _dispersive_identity,
    "inversion_formula_vs_quadrature": _inversion_formula,
    "zero_temperature_sinc_vs_quadrature": _zero_temperature_sinc,
    "open_system_three_way": _open_three_way,
    "kraus_completeness": _kraus_completeness,
}


def run_all(seed: int = DEFAULT_SEED, eps_tail: float = EPS_TAIL,
            force_tol: float | None = None) -> list[Check]:
    """Run every check in a fixed order from one seeded generator.

    ``force_tol`` replaces every threshold; it exists to exercise the failure path.
    """
    rng = np.random.default_rng(seed)
    out = []
    for name, fn in CHECKS.items():
        dev, thr = fn(rng, eps_tail)
        out.append(Check(name, float(dev), float(thr if force_tol is None else force_tol)))
    return out
