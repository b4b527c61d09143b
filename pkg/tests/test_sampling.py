import numpy as np
import pytest

from mpfsim.bounds import hoeffding_shots
from mpfsim.ensembles import (
    EnsembleBranch,
    EnsembleEntry,
    EnsembleLayer,
    SamplingEnsemble,
    materialize,
)
from mpfsim.mpf import cw_coefficients, mpf_ensemble, mpf_matrix
from mpfsim.operators import (
    QuantumState,
    expectation,
    hamiltonian,
    observable,
    pauli_string,
)
from mpfsim.sampling import (
    coverage_experiment,
    expected_value,
    hadamard_test_expectation,
    prepare_sampler,
    run_estimator,
    shot_rng,
    single_shot,
)
from mpfsim.schedules import s1_schedule

Z1 = pauli_string("Z")


@pytest.fixture(scope="module")
def toy2q():
    return hamiltonian([pauli_string("XI"), pauli_string("ZZ")], label="toy2q")


@pytest.fixture(scope="module")
def cw_setup(toy2q):
    spec = cw_coefficients(1, 1)
    t = 0.3
    mat = materialize(mpf_ensemble(spec, toy2q.L), toy2q, t)
    O = observable(pauli_string("ZI"))
    rho = QuantumState.basis(toy2q.dim, 0)
    return spec, t, mat, O, rho


def identity_ensemble(dim_terms):
    """Single deterministic entry realizing the identity at t = 0."""
    layer = EnsembleLayer((EnsembleEntry(1.0, +1, s1_schedule(dim_terms), 1.0),))
    return SamplingEnsemble((EnsembleBranch(1.0, (layer,)),), resolution=1.0)


def test_hadamard_test_collapses_to_expectation():
    rng = np.random.default_rng(0)
    V = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    O = observable(Z1)
    rho = QuantumState.basis(2, 0)
    assert hadamard_test_expectation(V, V, rho, O) == pytest.approx(
        expectation(O, rho, V), abs=1e-12
    )


def test_hadamard_test_sign_linearity():
    O = observable(Z1)
    rho = QuantumState.basis(2, 0)
    val = hadamard_test_expectation(np.eye(2), -np.eye(2), rho, O)
    assert val == pytest.approx(-expectation(O, rho, np.eye(2)), abs=1e-12)


def test_hadamard_test_i_z_example():
    # (1/2) tr(Z (rho Z + Z rho)) with rho = |0><0| equals 1, by 2x2 arithmetic
    O = observable(Z1)
    rho = QuantumState.basis(2, 0)
    assert hadamard_test_expectation(np.eye(2), Z1, rho, O) == pytest.approx(1.0, abs=1e-12)


def test_hadamard_test_density_path_agrees():
    rng = np.random.default_rng(3)
    Vo = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    Vb = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    O = observable(Z1)
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    pure = hadamard_test_expectation(Vo, Vb, QuantumState.pure(v), O)
    dm = hadamard_test_expectation(Vo, Vb, QuantumState.mixed(np.outer(v, v.conj())), O)
    assert pure == pytest.approx(dm, abs=1e-12)


def test_single_shot_outcomes_in_spectrum(cw_setup):
    _, _, mat, O, rho = cw_setup
    sampler = prepare_sampler(mat, rho, O)
    values = set(np.round(np.abs(O.eigenvalues), 12))
    for j in range(200):
        rec = single_shot(sampler, shot_rng(1, 0, j))
        assert round(abs(rec.outcome), 12) in values
        assert rec.sign_product in (-1, 1)


def test_single_shot_deterministic_case(toy2q):
    # identity circuit on an eigenstate: outcome has zero variance
    mat = materialize(identity_ensemble(toy2q.L), toy2q, 0.0)
    O = observable(pauli_string("ZI"))
    rho = QuantumState.basis(toy2q.dim, 0)
    sampler = prepare_sampler(mat, rho, O)
    outcomes = {single_shot(sampler, shot_rng(0, 0, j)).outcome for j in range(50)}
    assert outcomes == {1.0}


def test_single_shot_empirical_mean(cw_setup):
    _, _, mat, O, rho = cw_setup
    sampler = prepare_sampler(mat, rho, O)
    n = 100_000
    total = 0.0
    for j in range(n):
        rec = single_shot(sampler, shot_rng(42, 0, j))
        total += rec.sign_product * rec.outcome
    mean = total / n
    target = expected_value(mat, rho, O)
    sigma = 1.0 / np.sqrt(n)  # outcomes bounded by 1
    assert abs(mean - target) <= 3 * sigma


def test_expected_value_single_entry(toy2q):
    mat = materialize(identity_ensemble(toy2q.L), toy2q, 0.17)
    O = observable(pauli_string("ZI"))
    rho = QuantumState.basis(toy2q.dim, 0)
    V = mat.branches[0].layer_matrices[0][0]
    assert expected_value(mat, rho, O) == pytest.approx(expectation(O, rho, V), abs=1e-12)


def test_expected_value_matches_mpf_sandwich(cw_setup):
    spec, t, mat, O, rho = cw_setup
    M = mpf_matrix(spec, hamiltonian([pauli_string("XI"), pauli_string("ZZ")]), t)
    direct = np.trace(O.matrix @ M @ rho.as_density() @ M.conj().T).real
    assert mat.resolution**2 * expected_value(mat, rho, O) == pytest.approx(direct, abs=1e-10)


def test_expected_value_linear_in_observable(cw_setup):
    _, _, mat, O, rho = cw_setup
    neg = observable(-pauli_string("ZI"))
    assert expected_value(mat, rho, neg) == pytest.approx(-expected_value(mat, rho, O), abs=1e-12)


def test_run_estimator_seeded_repeatability(cw_setup):
    _, _, mat, O, rho = cw_setup
    e1, s1 = run_estimator(mat, rho, O, 500, seed=9)
    e2, s2 = run_estimator(mat, rho, O, 500, seed=9)
    e3, _ = run_estimator(mat, rho, O, 500, seed=10)
    assert e1 == e2 and s1.signed_sum == s2.signed_sum
    assert e1 != e3


def test_run_estimator_hoeffding_convergence(toy2q):
    # resolution-one ensemble of the exact unitary itself
    mat = materialize(identity_ensemble(toy2q.L), toy2q, 0.9)
    O = observable(pauli_string("ZI"))
    rho = QuantumState.basis(toy2q.dim, 0)
    V = mat.branches[0].layer_matrices[0][0]
    truth = expectation(O, rho, V)
    eps, delta = 0.1, 0.05
    n = hoeffding_shots(eps, delta).N
    est, _ = run_estimator(mat, rho, O, n, seed=5)
    assert abs(est - truth) <= eps


def test_estimator_rescales_large_observables(toy2q):
    mat = materialize(identity_ensemble(toy2q.L), toy2q, 0.4)
    rho = QuantumState.basis(toy2q.dim, 0)
    O1 = observable(pauli_string("ZI"))
    O3 = observable(3.0 * pauli_string("ZI"))
    assert O3.scale == pytest.approx(3.0)
    e1, _ = run_estimator(mat, rho, O1, 4000, seed=3)
    e3, _ = run_estimator(mat, rho, O3, 4000, seed=3)
    assert e3 == pytest.approx(3.0 * e1, rel=1e-12)


def test_variance_sanity_pauli_observable(cw_setup):
    # O^2 = I: single-shot signed outcomes are +-1, so var = 1 - E[o]^2
    _, _, mat, O, rho = cw_setup
    sampler = prepare_sampler(mat, rho, O)
    n = 20_000
    vals = np.empty(n)
    for j in range(n):
        rec = single_shot(sampler, shot_rng(7, 0, j))
        vals[j] = rec.sign_product * rec.outcome
    target = expected_value(mat, rho, O)
    assert np.var(vals) == pytest.approx(1 - target**2, abs=5 / np.sqrt(n))


def test_coverage_deterministic_ensemble(toy2q):
    mat = materialize(identity_ensemble(toy2q.L), toy2q, 0.0)
    O = observable(pauli_string("ZI"))
    rho = QuantumState.basis(toy2q.dim, 0)
    assert coverage_experiment(mat, rho, O, 0.2, 0.1, trials=60, seed=0) == 1.0


def test_coverage_requires_enough_trials(cw_setup):
    _, _, mat, O, rho = cw_setup
    with pytest.raises(ValueError):
        coverage_experiment(mat, rho, O, 0.2, 0.1, trials=10, seed=0)


def test_mixed_state_expected_value_agrees_with_pure_average(cw_setup):
    spec, t, mat, O, _ = cw_setup
    dim = 4
    rng = np.random.default_rng(8)
    v1 = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    v1 /= np.linalg.norm(v1)
    v2 = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    v2 /= np.linalg.norm(v2)
    dm = 0.35 * np.outer(v1, v1.conj()) + 0.65 * np.outer(v2, v2.conj())
    mixed = expected_value(mat, QuantumState.mixed(dm), O)
    split = 0.35 * expected_value(mat, QuantumState.pure(v1), O) + 0.65 * expected_value(
        mat, QuantumState.pure(v2), O
    )
    assert mixed == pytest.approx(split, abs=1e-12)


def test_mixed_state_shots_unbiased(cw_setup):
    _, _, mat, O, _ = cw_setup
    dm = np.diag([0.5, 0.2, 0.2, 0.1]).astype(complex)
    rho = QuantumState.mixed(dm)
    sampler = prepare_sampler(mat, rho, O)
    n = 40_000
    total = 0.0
    for j in range(n):
        rec = single_shot(sampler, shot_rng(21, 0, j))
        total += rec.sign_product * rec.outcome
    assert total / n == pytest.approx(expected_value(mat, rho, O), abs=3 / np.sqrt(n))


def test_doubling_shots_improves_mean_abs_error(cw_setup):
    _, _, mat, O, rho = cw_setup
    target = expected_value(mat, rho, O)
    sampler = prepare_sampler(mat, rho, O)

    def mean_abs_err(n, trials=40):
        errs = []
        for s in range(trials):
            total = 0.0
            for j in range(n):
                rec = single_shot(sampler, shot_rng(33, s, j))
                total += rec.sign_product * rec.outcome
            errs.append(abs(total / n - target))
        return np.mean(errs)

    assert mean_abs_err(300) < mean_abs_err(150)


def test_density_path_dimension_cap():
    from mpfsim.operators import hamiltonian as _ham

    big = 128
    H = _ham([np.diag(np.arange(big, dtype=float))])
    mat = materialize(identity_ensemble(H.L), H, 0.0)
    O = observable(np.diag(np.linspace(-1, 1, big)))
    rho = QuantumState.mixed(np.eye(big) / big)
    with pytest.raises(ValueError, match="capped"):
        prepare_sampler(mat, rho, O)


def test_shot_rng_rejects_negative_seed():
    with pytest.raises(ValueError):
        shot_rng(-1, 0, 0)
