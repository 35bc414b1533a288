import numpy as np
import pytest

from qwork import linalg, open_system as osys
from qwork.errors import DiagonalityViolation, DimensionMismatch
from qwork.interferometer import extract_block, gate_general, run_protocol
from qwork.models import random_open_setup
from qwork.states import SpectralHamiltonian, thermal_state
from qwork.tpm import char_fn_direct, char_fn_tpm, joint_probabilities


def _decoupled(rng, ds=3, de=4):
    s = random_open_setup(ds, de, rng)
    return osys.OpenSetup(h_i=s.h_i, h_f=s.h_f, h_se=np.zeros((ds * de, ds * de)),
                          rho_s=s.rho_s, rho_e=s.rho_e, tau=s.tau)


def printed_single_index_kraus(u, rho_e, ds):
    """``K_j = sum_l sqrt(p_l) <j|U|l>``: a single sum over the environment label."""
    de = rho_e.shape[0]
    p, v = np.linalg.eigh(rho_e)
    w = np.kron(np.eye(ds), v)
    ue = (w.conj().T @ u @ w).reshape(ds, de, ds, de)
    p = np.where(p < 1e-14, 0.0, p)  # eigh returns ~1e-17 for null eigenvalues
    return [sum(np.sqrt(p[l]) * ue[:, j, :, l] for l in range(de)) for j in range(de)]


def test_setup_rejects_coherent_state(rng):
    s = random_open_setup(3, 2, rng)
    rho = linalg.random_density_matrix(3, rng)
    with pytest.raises(DiagonalityViolation):
        osys.OpenSetup(h_i=s.h_i, h_f=s.h_f, h_se=s.h_se, rho_s=rho, rho_e=s.rho_e, tau=1.0)
    ok = osys.OpenSetup(h_i=s.h_i, h_f=s.h_f, h_se=s.h_se, rho_s=rho, rho_e=s.rho_e, tau=1.0,
                        allow_nondiagonal=True)
    assert ok.dim_s == 3


def test_setup_dimension_checks(rng):
    s = random_open_setup(3, 2, rng)
    with pytest.raises(DimensionMismatch):
        osys.OpenSetup(h_i=s.h_i, h_f=s.h_f, h_se=np.zeros((5, 5)), rho_s=s.rho_s, rho_e=s.rho_e, tau=1.0)
    with pytest.raises(DimensionMismatch):
        osys.kraus_from_use(np.eye(7), s.rho_e)


def test_u_se_decoupled_and_trivial(rng):
    s = _decoupled(rng)
    expected = np.kron(s.h_f.evolution(s.tau), np.eye(4))
    assert np.linalg.norm(osys.u_se(s) - expected) < 1e-12
    s0 = random_open_setup(3, 4, rng, tau=0.0)
    np.testing.assert_array_equal(osys.u_se(s0), np.eye(12))


def test_u_se_sliced_time_independent(rng):
    s = random_open_setup(3, 4, rng)
    const = osys.OpenSetup(h_i=s.h_i, h_f=s.h_f, h_se=s.h_se, rho_s=s.rho_s, rho_e=s.rho_e, tau=s.tau,
                           h_path=lambda t: s.h_f.matrix)
    exact = osys.u_se(s)
    assert np.linalg.norm(osys.u_se(const, steps=13) - exact) < 1e-12
    assert linalg.unitarity_defect(exact) < 1e-12


def test_u_se_driven_path_refines(rng):
    s = random_open_setup(2, 3, rng)
    path = lambda t: s.h_i.matrix + (t / s.tau) * (s.h_f.matrix - s.h_i.matrix)  # noqa: E731
    driven = osys.OpenSetup(h_i=s.h_i, h_f=s.h_f, h_se=s.h_se, rho_s=s.rho_s, rho_e=s.rho_e,
                            tau=s.tau, h_path=path)
    ref = osys.u_se(driven, 4000)
    errs = [np.linalg.norm(osys.u_se(driven, n) - ref) for n in (4, 40)]
    assert errs[1] < errs[0] / 10


def test_kraus_trivial_channel(rng):
    us = linalg.random_unitary(3, rng)
    rho_e = np.diag([1.0, 0.0, 0.0, 0.0])
    ks = osys.kraus_from_use(np.kron(us, np.eye(4)), rho_e, drop_tol=1e-14)
    norms = [np.linalg.norm(k) for k in ks.operators]
    assert sum(n > 1e-12 for n in norms) == 1
    k0 = ks.operators[int(np.argmax(norms))]
    assert np.linalg.norm(k0 - us) < 1e-12


def test_kraus_completeness_and_trace_preservation(rng):
    s = random_open_setup(3, 4, rng)
    ks = osys.kraus_set(s)
    assert len(ks.operators) == 16
    assert ks.completeness_defect() < 1e-11
    for _ in range(20):
        rho = linalg.random_density_matrix(3, rng)
        out = ks.apply(rho)
        assert abs(np.trace(out) - 1) < 1e-12
        assert np.linalg.eigvalsh(0.5 * (out + out.conj().T)).min() > -1e-12


def test_kraus_channel_equals_partial_trace(rng):
    s = random_open_setup(3, 4, rng)
    u = osys.u_se(s)
    ks = osys.kraus_from_use(u, s.rho_e)
    rho = linalg.random_density_matrix(3, rng)
    direct = linalg.partial_trace(u @ np.kron(rho, s.rho_e) @ u.conj().T, [3, 4], keep=0)
    assert np.linalg.norm(ks.apply(rho) - direct) < 1e-12


def test_kraus_swap_replacement_channel():
    d = 2
    swap = np.zeros((d * d, d * d))
    for a in range(d):
        for b in range(d):
            swap[b * d + a, a * d + b] = 1
    rho_e = np.eye(d) / d
    ks = osys.kraus_from_use(swap, rho_e)
    # index oracle in the computational basis of E (rho_e is degenerate, any basis works)
    v = np.linalg.eigh(rho_e)[1]
    for k, (j, l) in zip(ks.operators, ks.labels):
        oracle = np.zeros((d, d), dtype=complex)
        for s_out in range(d):
            for s_in in range(d):
                for e_out in range(d):
                    for e_in in range(d):
                        oracle[s_out, s_in] += (np.conj(v[e_out, j]) * swap[s_out * d + e_out, s_in * d + e_in]
                                                * v[e_in, l])
        assert np.linalg.norm(k - oracle / np.sqrt(d)) < 1e-14
    rng = np.random.default_rng(11)
    for _ in range(5):
        rho = linalg.random_density_matrix(d, rng)
        assert np.linalg.norm(ks.apply(rho) - np.eye(d) / d) < 1e-14


def test_char_fn_open_forms_agree(rng):
    s = random_open_setup(3, 4, rng)
    ut = osys.u_se(s)
    ks = osys.kraus_from_use(ut, s.rho_e)
    assert abs(osys.char_fn_open_direct(s, 0.0, ks) - 1) < 1e-12
    for u in rng.uniform(-10, 10, size=8):
        a = osys.char_fn_open_direct(s, u, ks)
        b = osys.char_fn_open_trace(s, u, ut)
        assert abs(a - b) < 1e-12
        assert abs(a) <= 1 + 1e-12


def test_char_fn_open_decoupled_reduces_to_closed(rng):
    s = _decoupled(rng)
    u_tau = s.h_f.evolution(s.tau)
    for u in (0.5, 3.0, -7.0):
        closed = char_fn_direct(s.rho_s, u_tau, s.h_i, s.h_f, u)
        assert abs(osys.char_fn_open_direct(s, u) - closed) < 1e-12


def test_joint_prob_open(rng):
    s = random_open_setup(3, 4, rng)
    ut = osys.u_se(s)
    table = osys.joint_prob_open(s, ut)
    assert abs(table.p.sum() - 1) < 1e-12
    assert table.p.min() > -1e-14
    pops = np.diag(s.h_i.vectors.conj().T @ s.rho_s @ s.h_i.vectors).real
    np.testing.assert_allclose(table.initial_populations, pops, atol=1e-12)
    ks = osys.kraus_from_use(ut, s.rho_e)
    for u in rng.uniform(-10, 10, size=8):
        assert abs(char_fn_tpm(table, u) - osys.char_fn_open_direct(s, u, ks)) < 1e-12


def test_joint_prob_open_decoupled(rng):
    s = _decoupled(rng)
    closed = joint_probabilities(s.rho_s, s.h_f.evolution(s.tau), s.h_i, s.h_f)
    assert np.max(np.abs(osys.joint_prob_open(s).p - closed.p)) < 1e-12


def test_gate_se_structure(rng):
    s = random_open_setup(3, 4, rng)
    ut = osys.u_se(s)
    np.testing.assert_allclose(osys.gate_se(s, 0.0, ut), np.kron(ut, np.eye(2)), atol=1e-14)
    u = 1.9
    g = osys.gate_se(s, u, ut)
    e_i = np.kron(s.h_i.evolution(u), np.eye(4))
    e_f = np.kron(s.h_f.evolution(u), np.eye(4))
    assert np.linalg.norm(extract_block(g, 0, 0) - ut @ e_i) < 1e-12
    assert np.linalg.norm(extract_block(g, 1, 1) - e_f @ ut) < 1e-12
    assert np.linalg.norm(extract_block(g, 0, 1)) == 0
    assert linalg.unitarity_defect(g) < 1e-12


def test_gate_se_decoupled_matches_closed_gate(rng):
    s = _decoupled(rng, 2, 3)
    u = 2.2
    closed = gate_general(u, s.h_f.evolution(s.tau), s.h_i, s.h_f)
    rho = run_protocol(closed, s.rho_s)
    open_r = osys.run_protocol_open(s, u)
    assert abs(rho.chi - open_r.chi) < 1e-12


def test_run_protocol_open_matches_direct(rng):
    s = random_open_setup(3, 4, rng, coupling=0.3, tau=2.0)
    ut = osys.u_se(s)
    ks = osys.kraus_from_use(ut, s.rho_e)
    r0 = osys.run_protocol_open(s, 0.0, ut)
    assert abs(r0.chi - 1) < 1e-12
    for u in np.linspace(0, 20, 15):
        r = osys.run_protocol_open(s, u, ut)
        assert abs(r.chi - osys.char_fn_open_direct(s, u, ks)) < 1e-10
        assert abs(np.trace(r.rho_a) - 1) < 1e-12
        assert np.linalg.eigvalsh(r.rho_a).min() > -1e-12


def test_printed_single_index_kraus_needs_pure_environment(rng):
    s = random_open_setup(3, 4, rng)
    ut = osys.u_se(s)
    table = osys.joint_prob_open(s, ut)
    ks = printed_single_index_kraus(ut, s.rho_e, 3)
    # still complete: cross terms cancel in sum_j K_j^dag K_j
    assert np.linalg.norm(sum(k.conj().T @ k for k in ks) - np.eye(3)) < 1e-11
    u = 2.5
    fwd = s.h_f.expm(1j * u)
    back = s.rho_s @ s.h_i.expm(-1j * u)
    single = sum(np.trace(fwd @ k @ back @ k.conj().T) for k in ks)
    assert abs(single - char_fn_tpm(table, u)) > 1e-4

    # pure environment: the single and double sums coincide
    psi = linalg.random_unitary(4, rng)[:, 0]
    pure = osys.OpenSetup(h_i=s.h_i, h_f=s.h_f, h_se=s.h_se, rho_s=s.rho_s,
                          rho_e=np.outer(psi, psi.conj()), tau=s.tau)
    ks_pure = printed_single_index_kraus(ut, pure.rho_e, 3)
    single = sum(np.trace(fwd @ k @ back @ k.conj().T) for k in ks_pure)
    assert abs(single - char_fn_tpm(osys.joint_prob_open(pure, ut), u)) < 1e-12


def test_commuting_environment_leaves_chi_closed(rng):
    ds, de = 3, 4
    e_i = np.array([0.0, 0.7, 1.9])
    e_f = np.array([0.2, 1.1, 2.0])
    h_i = SpectralHamiltonian.diagonal(e_i)
    h_f = SpectralHamiltonian.diagonal(e_f)
    # block diagonal in the shared S eigenbasis: commutes with H_i (x) I and H_f (x) I
    h_se = sum(np.kron(np.diag(np.eye(ds)[k]), 0.3 * linalg.random_hermitian(de, rng)) for k in range(ds))
    rho_s = thermal_state(h_i, 0.8)
    rho_e = thermal_state(SpectralHamiltonian.from_matrix(linalg.random_hermitian(de, rng)), 1.0)
    s = osys.OpenSetup(h_i=h_i, h_f=h_f, h_se=h_se, rho_s=rho_s, rho_e=rho_e, tau=2.0)
    for u in (0.4, 3.0, 12.0):
        closed = char_fn_direct(rho_s, h_f.evolution(2.0), h_i, h_f, u)
        assert abs(osys.char_fn_open_direct(s, u) - closed) < 1e-12
