import csv
import json
import math
import warnings

import numpy as np
import pytest

from randtensor import simulation as sim
from randtensor.combinatorics import beta_eval
from randtensor.errors import DomainError, ResourceGuardError
from randtensor.moments import MomentKind, MomentQuery, ensemble_moment, repeated_moment
from randtensor.simulation import EnsembleKind, EnsembleSpec, StateKind


def rng(seed=0):
    return np.random.default_rng(seed)


def test_unit_state_norm():
    v = sim.sample_state(7, StateKind.UNIT, rng())
    assert abs(np.linalg.norm(v) - 1) < 1e-12
    many = sim.sample_state(5, StateKind.UNIT, rng(), size=100)
    assert np.allclose(np.linalg.norm(many, axis=1), 1, atol=1e-12)


def test_gaussian_norm_expectation():
    d, n = 6, 10 ** 4
    sq = np.sum(np.abs(sim.sample_state(d, StateKind.GAUSSIAN_NORM, rng(1), size=n)) ** 2, axis=1)
    se = sq.std(ddof=1) / math.sqrt(n)
    assert abs(sq.mean() - 1) <= 5 * se
    # |v|^2 ~ chi^2_{2d}/2d: variance 1/d and E|v|^4 = (d+1)/d
    assert abs(sq.var(ddof=1) - 1 / d) < 0.01
    assert abs(np.mean(sq ** 2) - (d + 1) / d) <= 5 * np.std(sq ** 2, ddof=1) / math.sqrt(n)


def test_gaussian_entry_variance():
    d = 4
    v = sim.sample_state(d, StateKind.GAUSSIAN_NORM, rng(2), size=20000)
    assert abs(v.real.var() - 1 / (2 * d)) < 0.005
    assert abs(v.imag.var() - 1 / (2 * d)) < 0.005
    assert abs(v.real.mean()) < 0.01


def test_rank_one():
    for kind in (EnsembleKind.NORMALIZED, EnsembleKind.REPEATED):
        s = sim.spectrum(EnsembleSpec(kind, 1, 4, 1, 3))
        assert s.eigenvalues[0] == pytest.approx(1, abs=1e-12)
        assert np.all(np.abs(s.eigenvalues[1:]) < 1e-12)
        assert len(s.eigenvalues) == 4


def test_trace_and_psd():
    for p, d, k in ((3, 4, 1), (20, 3, 2), (50, 10, 1)):
        s = sim.spectrum(EnsembleSpec(EnsembleKind.NORMALIZED, p, d, k, 11))
        assert abs(s.eigenvalues.sum() - p) <= 1e-8 * p
        assert s.eigenvalues.min() >= -1e-8 * max(1, s.lambda_max)
        assert list(s.eigenvalues) == sorted(s.eigenvalues, reverse=True)
        assert s.rank <= min(p, d ** k)
        assert s.residual <= 1e-8


@pytest.mark.parametrize("kind", list(EnsembleKind))
def test_hermitian_and_rank(kind):
    spec = EnsembleSpec(kind, 4, 3, 2, 5, d_a=3, d_b=2)
    phi = sim.factor_matrix(spec, rng(3))
    m = phi @ phi.conj().T
    assert np.max(np.abs(m - m.conj().T)) <= 1e-12 * np.linalg.norm(m, 2)
    s = sim.spectrum(spec, 0)
    assert s.rank <= spec.max_rank
    if kind is not EnsembleKind.PARTIAL_TRACE:
        assert spec.max_rank == min(spec.p, spec.dim)


def test_gram_equivalence():
    spec = EnsembleSpec(EnsembleKind.NORMALIZED, 5, 3, 2, 0)
    phi = sim.factor_matrix(spec, rng(4))
    big = np.linalg.eigvalsh(phi @ phi.conj().T)[::-1]
    small = np.linalg.eigvalsh(phi.conj().T @ phi)[::-1]
    assert np.allclose(big[:5], small, atol=1e-8)
    assert np.all(np.abs(big[5:]) < 1e-8)


def test_gaussian_chiral_identity():
    spec = EnsembleSpec(EnsembleKind.GAUSSIAN, 7, 3, 2, 0)
    r, _ = sim.trial_rng(spec.master_seed, 0)
    phi = sim.factor_matrix(spec, r)
    sv = np.linalg.svd(phi, compute_uv=False)
    s = sim.spectrum(spec, 0)
    assert np.allclose(s.eigenvalues[:7], sv ** 2, atol=1e-8)


def test_determinism_and_seeds():
    spec = EnsembleSpec(EnsembleKind.NORMALIZED, 6, 3, 2, 42)
    a = sim.run_trials(spec, 4, threads=1)
    b = sim.run_trials(spec, 4, threads=3)
    for x, y in zip(a, b):
        assert x.eigenvalues.tobytes() == y.eigenvalues.tobytes()
        assert x.seed_used == y.seed_used
    assert a[0].seed_used != a[1].seed_used
    assert not np.array_equal(a[0].eigenvalues, a[1].eigenvalues)
    other = sim.run_trials(EnsembleSpec(EnsembleKind.NORMALIZED, 6, 3, 2, 43), 1)
    assert not np.array_equal(a[0].eigenvalues, other[0].eigenvalues)
    with pytest.raises(DomainError):
        sim.run_trials(spec, 0)


def test_guards():
    with pytest.raises(ResourceGuardError):
        sim.spectrum(EnsembleSpec(EnsembleKind.NORMALIZED, 2, 65, 2))
    with pytest.raises(ResourceGuardError):
        sim.spectrum(EnsembleSpec(EnsembleKind.NORMALIZED, 10 ** 6 + 1, 2, 1))
    with pytest.raises(DomainError):
        EnsembleSpec(EnsembleKind.REPEATED, 5, 2, 2)
    with pytest.raises(DomainError):
        EnsembleSpec(EnsembleKind.NORMALIZED, 5, 2, 1, master_seed=-1)


def test_empirical_moment_basics():
    spec = EnsembleSpec(EnsembleKind.NORMALIZED, 7, 3, 1, 0)
    samples = sim.run_trials(spec, 5)
    mean, se = sim.empirical_moment(samples, 1)
    assert mean == pytest.approx(7 / 3, abs=1e-12) and se < 1e-12
    assert sim.empirical_moment(samples, 0) == (1.0, 0.0)
    with pytest.raises(DomainError):
        sim.empirical_moment([], 1)


@pytest.mark.parametrize("kind,p,d,k,extra", [
    (EnsembleKind.GAUSSIAN, 3, 3, 2, {}),
    (EnsembleKind.REPEATED, 16, 4, 2, {}),
    (EnsembleKind.PARTIAL_TRACE, 3, 4, 2, {"d_a": 4, "d_b": 2}),
])
def test_variant_moments_against_exact(kind, p, d, k, extra):
    spec = EnsembleSpec(kind, p, d, k, 9, **extra)
    samples = sim.run_trials(spec, 1500)
    mkind = {EnsembleKind.GAUSSIAN: MomentKind.GAUSSIAN, EnsembleKind.REPEATED: MomentKind.REPEATED,
             EnsembleKind.PARTIAL_TRACE: MomentKind.PARTIAL_TRACE}[kind]
    for m in (2, 3):
        q = MomentQuery(p, d, k, m, mkind, extra.get("d_a"), extra.get("d_b"))
        exact = repeated_moment(q) if mkind is MomentKind.REPEATED else ensemble_moment(q).total_E
        mean, se = sim.empirical_moment(samples, m)
        assert abs(mean - float(exact) / spec.dim) <= 5 * se


def test_normalized_gaussian_coupling():
    # if every Gaussian product norm lies in [1 - eps, 1 + 2 eps] then so does the lambda_max ratio
    spec = EnsembleSpec(EnsembleKind.NORMALIZED, 40, 400, 1, 0)
    checked = 0
    for trial in range(5):
        r, _ = sim.trial_rng(spec.master_seed, trial)
        phi, phi_hat, sq = sim.coupled_factor_matrices(spec, r)
        assert np.allclose(np.linalg.norm(phi, axis=0), 1, atol=1e-12)
        eps = max(1 - sq.min(), (sq.max() - 1) / 2, 0.0)
        lmax = sim.spectrum_from_factors(phi, spec).lambda_max
        lhat = sim.spectrum_from_factors(phi_hat, spec).lambda_max
        assert 1 - eps - 1e-12 <= lhat / lmax <= 1 + 2 * eps + 1e-12
        checked += 1
    assert checked == 5


def test_mp_density_examples():
    assert sim.mp_density(1, 2) == pytest.approx(1 / (2 * math.pi), abs=1e-12)
    assert sim.mp_density(0.25, 0.1) == 0 and sim.mp_density(0.25, 2.3) == 0
    assert sim.mp_density_nonzero(0.25, 1.0) == pytest.approx(math.sqrt((2.25 - 1) * (1 - 0.25)) / (2 * math.pi * 0.25))
    assert sim.mp_atom(0.25) == 0.75 and sim.mp_atom(4) == 0


@pytest.mark.parametrize("x", [0.25, 0.5, 1.0, 2.0, 4.0])
def test_mp_moments(x):
    assert sim.mp_moment(x, 0) == pytest.approx(1, abs=1e-8)
    assert sim.mp_moment(x, 1) == pytest.approx(x, abs=1e-7)
    assert sim.mp_moment(x, 2) == pytest.approx(x + x * x, abs=1e-7)
    for m in range(3, 7):
        assert sim.mp_moment(x, m) == pytest.approx(float(beta_eval(m, x)), abs=1e-6)
    with pytest.raises(DomainError):
        sim.mp_moment(-1, 2)


def test_mp_cdf_and_self_consistency():
    for x in (0.25, 1.0, 9.0):
        lo, hi = sim.mp_edges(x)
        assert sim.mp_cdf(x, lo - 1) == 0 and sim.mp_cdf(x, hi + 1) == 1
        draws = sim.mp_sample(x, 10 ** 5, rng(5))
        assert sim.ks_distance(draws, x) <= 0.01
        assert np.mean(draws) == pytest.approx(max(1.0, x), rel=0.01)


def test_ks_degenerate_and_empty():
    s = sim.spectrum(EnsembleSpec(EnsembleKind.NORMALIZED, 1, 4, 1, 0))
    with pytest.warns(RuntimeWarning):
        ks = sim.ks_distance([s], s.spec.x)
    assert 0.3 < ks < 1
    with pytest.raises(DomainError):
        sim.ks_distance(np.array([]), 0.5)


def test_extreme_stats_rank_one():
    st = sim.extreme_stats(sim.run_trials(EnsembleSpec(EnsembleKind.NORMALIZED, 1, 5, 1, 2), 3))
    assert st.lambda_max_mean == pytest.approx(1, abs=1e-12)
    assert st.lambda_min_mean == pytest.approx(1, abs=1e-12)  # only nonzero eigenvalue when x < 1
    with pytest.raises(DomainError):
        sim.extreme_stats([])


def test_concentration_shape():
    rows = sim.concentration_experiment(EnsembleKind.NORMALIZED, 1.0, [5, 8, 12], 1, 3)
    assert [r[0] for r in rows] == [5, 8, 12] and [r[1] for r in rows] == [5, 8, 12]
    with pytest.raises(DomainError):
        sim.concentration_experiment(EnsembleKind.NORMALIZED, 1.0, [5], 1, 1)


def test_csv_and_json(tmp_path):
    spec = EnsembleSpec(EnsembleKind.NORMALIZED, 3, 2, 1, 1)
    samples = sim.run_trials(spec, 2)
    path = tmp_path / "e.csv"
    sim.write_eigen_csv(path, samples)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["trial", "index", "eigenvalue"]
    assert len(rows) == 1 + 2 * 2
    assert float(rows[1][2]) == samples[0].eigenvalues[0]  # 17 significant digits round-trip
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rec = sim.stats_record(spec, samples, 3)
    assert set(rec) == {"spec", "trials", "lambda_max", "lambda_min", "ks", "moments"}
    assert [m["m"] for m in rec["moments"]] == [1, 2, 3]
    json.dumps(rec)
