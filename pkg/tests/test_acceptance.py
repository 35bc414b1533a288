"""Acceptance criteria at their stated tolerances and runtime budgets.

Each test records one PASS/FAIL line, printed in the session summary.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from qwork import dispersive as dm
from qwork import open_system as osys
from qwork import quench as qa
from qwork import tpm
from qwork.interferometer import (compose, gate_commuting, gate_commuting_sequence, gate_general,
                                  gate_sequence, run_protocol)
from qwork.models import random_closed_instance, random_open_setup, sudden_quench_model
from qwork.states import EPS_TAIL, partition_function, truncation_dim

pytestmark = pytest.mark.acceptance

# invariant violations seen by any circuit run in this module
VIOLATIONS: list[str] = []
CIRCUIT_RUNS = [0]


def circuit(gate, rho):
    """Run the interferometer and record density-matrix and |chi| violations."""
    r = run_protocol(gate, rho)
    CIRCUIT_RUNS[0] += 1
    rho_a = r.rho_a
    if abs(np.trace(rho_a) - 1) > 1e-12:
        VIOLATIONS.append(f"trace {np.trace(rho_a)}")
    if np.linalg.eigvalsh(rho_a).min() < -1e-12:
        VIOLATIONS.append(f"negative eigenvalue {np.linalg.eigvalsh(rho_a).min()}")
    if abs(r.chi) > 1 + 1e-10:
        VIOLATIONS.append(f"|chi| = {abs(r.chi)}")
    if abs(r.sx) > 1e-12:
        VIOLATIONS.append(f"<sx> = {r.sx}")
    return r.chi


def record(label, ok, detail):
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")


FIG_GRID = [(0.3, 0.0), (0.3, 1.5), (0.3, 5.0), (0.5, 1.5), (2.0, 1.5), (0.0, 1.5)]


def test_criterion_01_closed_form_reproduction():
    t0 = time.perf_counter()
    u = np.linspace(0, 40, 400)
    worst = 0.0
    for dl, nbar in FIG_GRID:
        p = qa.QuenchParams(dl, nbar)
        m = sudden_quench_model(dl, nbar, eps_tail=1e-12)
        chi = np.array([circuit(gate_general(x, m.u_tau, m.h_i, m.h_f), m.rho) for x in u])
        re, im = qa.chi_re_im_closed(u, p)
        worst = max(worst, float(np.max(np.abs(chi - qa.chi_closed(u, p)))),
                    float(np.max(np.abs(chi.real - re))), float(np.max(np.abs(chi.imag - im))))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 30
    record("1 closed-form reproduction", ok, f"max dev {worst:.2e} < 1e-9, {elapsed:.1f} s < 30 s")
    assert worst < 1e-9
    assert elapsed < 30


def _quench_distribution(nbar):
    m = sudden_quench_model(1.0, nbar, eps_tail=EPS_TAIL)
    return m, tpm.work_distribution(tpm.joint_probabilities(m.rho, m.u_tau, m.h_i, m.h_f))


def test_criterion_02_work_distribution():
    t0 = time.perf_counter()
    weight_err, total_err, pos_err = 0.0, 0.0, 0.0
    for nbar in (1.0, 10.0):
        _, dist = _quench_distribution(nbar)
        n = np.arange(len(dist))
        pos_err = max(pos_err, float(np.max(np.abs(dist.w - (n + 0.5)))))
        weight_err = max(weight_err, float(np.max(np.abs(dist.p - nbar ** n / (1 + nbar) ** (n + 1)))))
        total_err = max(total_err, abs(dist.total() - 1))
    elapsed = time.perf_counter() - t0
    ok = weight_err < 1e-10 and total_err <= EPS_TAIL and pos_err < 1e-10 and elapsed < 5
    record("2 work distribution", ok, f"weight err {weight_err:.2e} < 1e-10, |total-1| {total_err:.2e} "
           f"<= eps_tail, atom pos err {pos_err:.2e}, {elapsed:.1f} s < 5 s")
    assert weight_err < 1e-10 and pos_err < 1e-10
    assert total_err <= EPS_TAIL
    assert elapsed < 5


def test_criterion_03_average_work():
    worst = 0.0
    for nbar in (1.0, 10.0):
        m, dist = _quench_distribution(nbar)
        target = 1.0 * (nbar + 0.5)

        def chi(u):
            return circuit(gate_general(u, m.u_tau, m.h_i, m.h_f), m.rho)

        fd = tpm.average_work_from_chi(chi, tpm.default_du(m.h_i, m.h_f))
        worst = max(worst, abs(tpm.average_work(dist) - target), abs(fd - target))
    record("3 average work", worst < 1e-8, f"max dev {worst:.2e} < 1e-8 (atoms and -i chi'(0) from the circuit)")
    assert worst < 1e-8


def test_criterion_04_protocol_definition_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    for k in range(50):
        inst = random_closed_instance(int(rng.integers(2, 7)), rng)
        assert np.linalg.norm(inst.h_i.matrix @ inst.h_f.matrix - inst.h_f.matrix @ inst.h_i.matrix) > 1e-3
        for u in rng.uniform(-10, 10, size=10):
            chi = circuit(gate_general(u, inst.u_tau, inst.h_i, inst.h_f), inst.rho)
            worst = max(worst, abs(chi - tpm.char_fn_direct(inst.rho, inst.u_tau, inst.h_i, inst.h_f, u)))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and elapsed < 20
    record("4 protocol = definition", ok, f"max |chi_protocol - chi_direct| {worst:.2e} < 1e-10, "
           f"{elapsed:.1f} s < 20 s")
    assert worst < 1e-10
    assert elapsed < 20


def test_criterion_05_gate_decompositions():
    rng = np.random.default_rng(5)
    worst_general, worst_commuting = 0.0, 0.0
    for _ in range(20):
        inst = random_closed_instance(int(rng.integers(2, 7)), rng)
        u = float(rng.uniform(-10, 10))
        g = gate_general(u, inst.u_tau, inst.h_i, inst.h_f)
        worst_general = max(worst_general, float(np.linalg.norm(
            compose(gate_sequence(u, inst.u_tau, inst.h_i, inst.h_f)) - g)))
    for _ in range(20):
        inst = random_closed_instance(int(rng.integers(2, 7)), rng, commuting=True)
        u = float(rng.uniform(-10, 10))
        g = gate_commuting(u, inst.h_i, inst.h_f)
        worst_commuting = max(worst_commuting, float(np.linalg.norm(
            compose(gate_commuting_sequence(u, inst.h_i, inst.h_f)) - g)))
    ok = worst_general < 1e-12 and worst_commuting < 1e-12
    record("5 gate decompositions", ok, f"general {worst_general:.2e}, commuting {worst_commuting:.2e} < 1e-12")
    assert worst_general < 1e-12 and worst_commuting < 1e-12


DISP = dict(omega=1.0, delta=20.0, lambda0=0.2, lambda_tau=0.5)
DISP_NBAR = 1.5


@pytest.mark.xfail(strict=True, reason="the printed identity carries an extra exp(i H_A u) factor that the "
                   "composed gate does not cancel; see the decisions ledger")
def test_criterion_06a_literal_unitary_identity():
    nmax = truncation_dim(DISP_NBAR, EPS_TAIL)
    worst = 0.0
    for u in np.linspace(0, 40, 25):
        lhs = dm.gate_simple(u, DISP["omega"], DISP["lambda0"], DISP["lambda_tau"], nmax)
        rhs = dm.gate_simple_from_cal(u, DISP["omega"], DISP["delta"], DISP["lambda0"], DISP["lambda_tau"],
                                      nmax, qubit_phase=1.0)
        worst = max(worst, float(np.linalg.norm(lhs - rhs, 2)))
    # without the qubit factor the same identity holds
    fixed = max(float(np.linalg.norm(
        dm.gate_simple(u, DISP["omega"], DISP["lambda0"], DISP["lambda_tau"], nmax)
        - dm.gate_simple_from_cal(u, DISP["omega"], DISP["delta"], DISP["lambda0"], DISP["lambda_tau"], nmax),
        2)) for u in np.linspace(0, 40, 25))
    record("6a dispersive unitary identity (as stated, with exp(i H_A u))", worst < 1e-12,
           f"max operator-norm dev {worst:.2e} vs 1e-12; without exp(i H_A u): {fixed:.2e}")
    assert worst < 1e-12


def test_criterion_06b_dispersive_ancilla_equivalence():
    t0 = time.perf_counter()
    nmax = truncation_dim(DISP_NBAR, EPS_TAIL)
    rho = dm.thermal_input(DISP["omega"], DISP["lambda0"], DISP_NBAR, nmax)
    x = np.kron(np.eye(nmax + 1), dm.SX)
    grid = np.linspace(0, 40, 25)
    worst, closed_dev = 0.0, 0.0
    p = qa.QuenchParams(DISP["lambda_tau"] - DISP["lambda0"], DISP_NBAR)
    for u in grid:
        g = dm.gate_cal(u, nmax=nmax, **DISP).full
        simple = dm.gate_simple(u, DISP["omega"], DISP["lambda0"], DISP["lambda_tau"], nmax)
        chi_cal = circuit(x @ g @ x, rho)
        chi_simple = circuit(simple, rho)
        # rho_A = (I + Re chi sz + Im chi sy)/2, so ||d rho_A||_F = |d chi| / sqrt(2)
        worst = max(worst, abs(chi_cal - chi_simple) / math.sqrt(2))
        closed_dev = max(closed_dev, abs(chi_cal - qa.chi_closed(u, p)))
    dev_lib, _ = dm.protocol_equivalence(grid, nmax=nmax, rho_th=rho, **DISP)
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and dev_lib < 1e-10 and elapsed < 60
    record("6b dispersive rho_A equivalence", ok, f"max ||rho_A diff||_F {max(worst, dev_lib):.2e} < 1e-10, "
           f"chi vs closed form {closed_dev:.2e}, {elapsed:.1f} s < 60 s")
    assert worst < 1e-10 and dev_lib < 1e-10
    assert closed_dev < 1e-10 + EPS_TAIL
    assert elapsed < 60


def _off_peak_pairs(rng, count):
    pairs = []
    while len(pairs) < count:
        w = float(rng.uniform(-1.0, 4.0))
        # keep clear of the peaks at (n + 1/2), where the formula has poles
        if w > 0 and abs(w - 0.5 - round(w - 0.5)) < 0.05:
            continue
        pairs.append((w, float(rng.uniform(1.0, 20.0))))
    return pairs


def test_criterion_07_partial_inversion():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0
    for nbar in (0.0, 1.0):
        p = qa.QuenchParams(1.0, nbar)
        for w, eps in _off_peak_pairs(rng, 20):
            formula = qa.partial_inversion_formula(eps, w, p)
            quad = qa.partial_inversion_quadrature(eps, w, lambda u: qa.chi_closed(u, p))
            worst = max(worst, abs(formula - quad))
    # zero-temperature display: the quadrature decides between the two printed denominators
    p0 = qa.QuenchParams(1.0, 0.0)
    sinc_dev, printed_dev = 0.0, 0.0
    for w, eps in _off_peak_pairs(rng, 5):
        quad = qa.partial_inversion_quadrature(eps, w, lambda u: qa.chi_closed(u, p0)).real
        sinc_dev = max(sinc_dev, abs(qa.partial_inversion_zero_temperature(eps, w, 1.0) - quad))
        printed_dev = max(printed_dev, abs(2 * math.sin(eps * (w - 0.5)) / (math.pi * (w - 1.0)) - quad))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-6 and sinc_dev < 1e-6 and elapsed < 30
    record("7 partial inversion", ok, f"formula vs quadrature {worst:.2e} < 1e-6 (40 pairs); n=0 sinc with "
           f"(2W - dl) {sinc_dev:.2e}, with (W - dl) {printed_dev:.2e}; {elapsed:.1f} s < 30 s")
    assert worst < 1e-6
    assert sinc_dev < 1e-6 and printed_dev > 1e-2
    assert elapsed < 30


def test_criterion_08_open_system():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    worst, completeness = 0.0, 0.0
    for _ in range(10):
        s = random_open_setup(3, 4, rng, coupling=0.3, tau=2.0)
        ut = osys.u_se(s)
        ks = osys.kraus_from_use(ut, s.rho_e)
        completeness = max(completeness, ks.completeness_defect())
        table = osys.joint_prob_open(s, ut)
        for u in np.linspace(0, 20, 15):
            a = circuit(osys.gate_se(s, u, ut), np.kron(s.rho_s, s.rho_e))
            b = osys.char_fn_open_direct(s, u, ks)
            c = tpm.char_fn_tpm(table, u)
            worst = max(worst, abs(a - b), abs(b - c), abs(a - c))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and completeness < 1e-11 and elapsed < 60
    record("8 open system", ok, f"three-way max dev {worst:.2e} < 1e-10, completeness {completeness:.2e} "
           f"< 1e-11, {elapsed:.1f} s < 60 s")
    assert worst < 1e-10
    assert completeness < 1e-11
    assert elapsed < 60


def test_criterion_09_fluctuation_relation():
    worst = 0.0
    for dl in (0.3, 1.0):
        for nbar in (0.5, 1.0, 5.0):
            m = sudden_quench_model(dl, nbar, eps_tail=EPS_TAIL)
            dist = tpm.work_distribution(tpm.joint_probabilities(m.rho, m.u_tau, m.h_i, m.h_f))
            _, _, dev = tpm.jarzynski_check(dist, m.beta, partition_function(m.h_i, m.beta),
                                            partition_function(m.h_f, m.beta))
            worst = max(worst, dev)
    ok = worst < 1e-10 + EPS_TAIL
    record("9 fluctuation relation", ok, f"max |<e^(-beta W)> - Z_f/Z_i| {worst:.2e} < 1e-10 + eps_tail")
    assert ok


def test_criterion_10_property_suite():
    violations = []
    rng = np.random.default_rng(10)
    u = np.linspace(0, 40, 400)
    for dl, nbar in FIG_GRID:
        p = qa.QuenchParams(dl, nbar)
        chi = qa.chi_closed(u, p)
        if abs(qa.chi_closed(0.0, p) - 1) > 1e-12:
            violations.append(f"chi(0) != 1 for {p}")
        if np.any(np.abs(chi) > 1 + 1e-12):
            violations.append(f"|chi| > 1 for {p}")
        if np.max(np.abs(qa.chi_closed(-u, p) - np.conj(chi))) > 1e-12:
            violations.append(f"chi(-u) != conj chi(u) for {p}")
        if dl != 0 and np.max(np.abs(qa.chi_closed(u + 2 * math.pi / dl, p) + chi)) > 1e-12:
            violations.append(f"half-period sign flip fails for {p}")
    for _ in range(10):
        inst = random_closed_instance(int(rng.integers(2, 7)), rng)
        if abs(circuit(gate_general(0.0, inst.u_tau, inst.h_i, inst.h_f), inst.rho) - 1) > 1e-12:
            violations.append("protocol chi(0) != 1")
        for x in rng.uniform(0.1, 10, size=3):
            plus = circuit(gate_general(x, inst.u_tau, inst.h_i, inst.h_f), inst.rho)
            minus = circuit(gate_general(-x, inst.u_tau, inst.h_i, inst.h_f), inst.rho)
            if abs(minus - np.conj(plus)) > 1e-12:
                violations.append("protocol chi(-u) != conj chi(u)")
    # circuit runs from every criterion above, plus the ones made here
    violations += VIOLATIONS
    record("10 property suite", not violations,
           f"{len(violations)} violations over {CIRCUIT_RUNS[0]} circuit runs and the closed-form grid")
    assert violations == []
