import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpfsim.ensembles import materialize, mixture_mean, s2_hat_ensemble
from mpfsim.operators import exact_evolution, hamiltonian, pauli_string, spectral_distance
from mpfsim.schedules import (
    alpha_sums,
    merge_adjacent,
    merged_count,
    remainder_bound,
    repeat_schedule,
    s1_schedule,
    s2_schedule,
    schedule_matrices,
    schedule_matrix,
    suzuki_constant,
    suzuki_merged_count,
    suzuki_schedule,
)

X = pauli_string("X")
Y = pauli_string("Y")


@pytest.fixture(scope="module")
def toy():
    return hamiltonian([X, Y], label="toy")


def expm_pauli(p, theta):
    # closed form exp(-i theta P) = cos(theta) I - i sin(theta) P for P^2 = I
    return np.cos(theta) * np.eye(2) - 1j * np.sin(theta) * p


def test_s1_unrolled():
    assert s1_schedule(1).steps == ((0, 1.0),)
    assert s1_schedule(3).steps == ((0, 1.0), (1, 1.0), (2, 1.0))


def test_s2_unrolled_and_merged():
    s = s2_schedule(2)
    assert s.steps == ((0, 0.5), (1, 0.5), (1, 0.5), (0, 0.5))
    merged = merge_adjacent(s)
    assert merged.steps == ((0, 0.5), (1, 1.0), (0, 0.5))


def test_suzuki_constant_value():
    # evaluate the defining formula at chi = 1
    assert suzuki_constant(1) == pytest.approx(1.0 / (4.0 - 4.0 ** (1.0 / 3.0)), abs=1e-15)
    assert suzuki_constant(1) == pytest.approx(0.414491, abs=1e-6)


def test_suzuki_reduces_to_s2():
    assert suzuki_schedule(1, 4).steps == s2_schedule(4).steps


@pytest.mark.parametrize("chi", [1, 2, 3])
@pytest.mark.parametrize("L", [2, 3, 4, 5, 6])
def test_suzuki_merged_counts(chi, L):
    assert merged_count(suzuki_schedule(chi, L)) == suzuki_merged_count(chi, L)
    assert suzuki_merged_count(chi, L) == 2 * 5 ** (chi - 1) * (L - 1) + 1


@pytest.mark.parametrize("chi,L", [(1, 2), (2, 3), (3, 2), (2, 5)])
def test_alpha_sums_are_one(chi, L):
    sums = alpha_sums(suzuki_schedule(chi, L))
    assert np.allclose(sums, 1.0, atol=1e-14)


def test_repeat_identity_and_seam_merge():
    s = s2_schedule(2)
    assert repeat_schedule(s, 1).steps == merge_adjacent(s).steps
    rep = repeat_schedule(s, 2)
    assert len(rep.steps) == 2 * (2 * 2 - 1) - 1  # 5 after the seam fuse
    assert np.allclose(alpha_sums(rep), 1.0, atol=1e-14)


def test_repeat_improves_error_quadratically(toy):
    t = 0.05
    exact = exact_evolution(toy, t)
    d1 = spectral_distance(exact, schedule_matrix(s2_schedule(2), toy, t))
    d4 = spectral_distance(exact, schedule_matrix(repeat_schedule(s2_schedule(2), 4), toy, t))
    assert d1 / d4 == pytest.approx(16.0, rel=0.2)


def test_schedule_matrix_zero_time(toy):
    assert np.allclose(schedule_matrix(s2_schedule(2), toy, 0.0), np.eye(2), atol=1e-15)


def test_schedule_matrix_single_term():
    H = hamiltonian([X])
    t = 0.31
    assert np.allclose(schedule_matrix(s1_schedule(1), H, t), expm_pauli(X, t), atol=1e-14)


def test_schedule_matrix_s2_brute_force(toy):
    # hand-multiplied 2x2 exponentials, independent of herm_expm
    t = 0.37
    expected = expm_pauli(X, t / 2) @ expm_pauli(Y, t) @ expm_pauli(X, t / 2)
    got = schedule_matrix(merge_adjacent(s2_schedule(2)), toy, t)
    assert spectral_distance(got, expected) < 1e-14


def test_schedule_matrix_term_count_mismatch(toy):
    with pytest.raises(ValueError):
        schedule_matrix(s1_schedule(3), toy, 0.1)


@settings(max_examples=20, deadline=None)
@given(t=st.floats(-2.0, 2.0, allow_nan=False), chi=st.integers(1, 2))
def test_schedule_matrix_unitary(toy, t, chi):
    u = schedule_matrix(suzuki_schedule(chi, 2), toy, t)
    assert np.linalg.norm(u @ u.conj().T - np.eye(2), 2) <= 1e-11


def test_merge_preserves_matrix(toy):
    s = suzuki_schedule(2, 2)
    t = 0.6
    assert spectral_distance(
        schedule_matrix(s, toy, t), schedule_matrix(merge_adjacent(s), toy, t)
    ) < 1e-13
    assert len(merge_adjacent(s).steps) <= len(s.steps)


def test_schedule_matrices_batch_agrees(toy):
    ts = np.array([0.0, 0.2, 0.9])
    batch = schedule_matrices(suzuki_schedule(2, 2), toy, ts)
    for i, t in enumerate(ts):
        assert spectral_distance(batch[i], schedule_matrix(suzuki_schedule(2, 2), toy, t)) < 1e-13


def test_s2_order_three_slope(toy):
    # log-log slope of the S2 error on the anticommuting pair
    ts = np.logspace(-3, -1, 12)
    dists = [
        spectral_distance(exact_evolution(toy, t), schedule_matrix(s2_schedule(2), toy, t))
        for t in ts
    ]
    slope = np.polyfit(np.log10(ts), np.log10(dists), 1)[0]
    assert slope == pytest.approx(3.0, abs=0.15)


def test_s2_hat_entries_and_mixture(toy):
    ens = s2_hat_ensemble(2)
    layer = ens.branches[0].layers[0]
    assert layer.entries[0].schedule.steps == ((0, 1.0), (1, 1.0))
    assert layer.entries[1].schedule.steps == ((1, 1.0), (0, 1.0))
    t = 0.4
    s1f = schedule_matrix(s1_schedule(2), toy, t)
    s1_rev_dag = schedule_matrix(s1_schedule(2), toy, -t).conj().T
    expected = 0.5 * (s1f + s1_rev_dag)
    got = mixture_mean(materialize(ens, toy, t))
    assert spectral_distance(got, expected) < 1e-12


def test_s2_hat_single_term_degenerates():
    H = hamiltonian([X])
    ens = s2_hat_ensemble(1)
    t = 0.8
    got = mixture_mean(materialize(ens, H, t))
    assert spectral_distance(got, schedule_matrix(s1_schedule(1), H, t)) < 1e-14


def test_remainder_bound_values(toy):
    s = s2_schedule(2)
    assert remainder_bound(s, toy, 0.0, 3) == 0.0
    single = s1_schedule(1)
    H1 = hamiltonian([X])
    assert remainder_bound(single, H1, 1.0, 0) == pytest.approx(1.0)
    # s2 on two unit-norm terms: sum |alpha| * norm = 2, so (0.2)^3 / 3!
    assert remainder_bound(s, toy, 0.1, 2) == pytest.approx((0.2) ** 3 / 6, rel=1e-12)
    assert remainder_bound(s, toy, 0.1, 2) == pytest.approx(1.3333e-3, rel=1e-4)
