import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from npsteer import (
    JointPhaseDensity,
    PhaseDensity,
    SampleSet,
    default_grid_size,
    estimate_relative_dispersion,
    exp_phase_relative,
    joint_local_phase_density,
    linear_phase_variance,
    mixture_over_sectors,
    number_phase_state,
    nyquist_minimum,
    phase_grid,
    poissonian_distribution,
    relative_marginal_from_joint,
    relative_phase_density,
    sample_local_phases,
    split_fock_state,
    thermal_distribution,
    two_mode_squeezed_state,
    wrap_angle,
    write_density_csv,
    write_samples_csv,
)

from oracles import oracle_joint_density, oracle_relative_density, rand_mixture, rand_pure


FAMILY_STATES = [
    ("number_phase", lambda: number_phase_state(7, 0.4)),
    ("split_fock", lambda: split_fock_state(6, -0.2, 0.5)),
    ("tmss", lambda: two_mode_squeezed_state(0.7, cutoff=28)),
    (
        "poissonian_mixture",
        lambda: mixture_over_sectors(
            poissonian_distribution(3.0), lambda n: number_phase_state(n, 0.1)
        ),
    ),
    (
        "thermal_mixture",
        lambda: mixture_over_sectors(
            thermal_distribution(1.0), lambda n: split_fock_state(n, 0.0, 0.5)
        ),
    ),
]


class TestGridRules:
    def test_default_grid_is_even_power_of_two_above_nyquist(self):
        k = default_grid_size(30)
        assert k >= nyquist_minimum(30)
        assert k % 2 == 0
        assert k & (k - 1) == 0

    def test_small_cutoffs_use_the_floor(self):
        assert default_grid_size(3) == 64

    def test_odd_grid_rejected(self):
        with pytest.raises(ValueError, match="even"):
            relative_phase_density(number_phase_state(2, 0.0), grid_size=65)

    def test_undersized_grid_rejected_with_required_minimum(self):
        state = two_mode_squeezed_state(0.7, cutoff=40)
        with pytest.raises(ValueError, match="82"):
            relative_phase_density(state, grid_size=80)

    def test_canonical_grid_spans_half_open_interval(self):
        phis = phase_grid(64)
        assert phis[0] == -math.pi
        assert phis[-1] < math.pi
        assert np.allclose(np.diff(phis), 2 * math.pi / 64)


class TestPhaseDensity:
    def test_requires_canonical_grid(self):
        k = 64
        with pytest.raises(ValueError, match="canonical"):
            PhaseDensity(np.linspace(0, 2 * math.pi, k), np.full(k, 1 / (2 * math.pi)))

    def test_rejects_unnormalized_values(self):
        k = 64
        with pytest.raises(ValueError, match="integrates"):
            PhaseDensity(phase_grid(k), np.full(k, 1.0))

    def test_clips_tiny_negative_values(self):
        k = 64
        vals = np.full(k, 1 / (2 * math.pi))
        vals[1] += vals[0] + 5e-15
        vals[0] = -5e-15
        d = PhaseDensity(phase_grid(k), vals)
        assert d.values.min() == 0.0

    def test_rejects_genuinely_negative_values(self):
        k = 64
        vals = np.full(k, 1 / (2 * math.pi))
        vals[0] = -1e-3
        with pytest.raises(ValueError, match="negative"):
            PhaseDensity(phase_grid(k), vals)

    @pytest.mark.parametrize("name,make", FAMILY_STATES)
    def test_density_normalized_for_every_family(self, name, make):
        density = relative_phase_density(make())
        assert density.integrate() == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("name,make", FAMILY_STATES)
    def test_first_moment_equals_phase_coherence(self, name, make):
        state = make()
        density = relative_phase_density(state)
        assert density.moment(1) == pytest.approx(exp_phase_relative(state), abs=1e-12)

    def test_density_values_match_direct_sum(self):
        state = number_phase_state(3, 0.7)
        density = relative_phase_density(state)
        for k in (0, 5, 17, 40, 63):
            want = oracle_relative_density(state, float(density.phis[k]))
            assert density.values[k] == pytest.approx(want, abs=1e-12)

    def test_mixture_density_values_match_direct_sum(self, rng):
        mix = rand_mixture(rng, max_total=6, n_sectors=4)
        density = relative_phase_density(mix)
        for k in (3, 31, 50):
            want = oracle_relative_density(mix, float(density.phis[k]))
            assert density.values[k] == pytest.approx(want, abs=1e-12)

    def test_density_is_invariant_under_global_phase(self, rng):
        from npsteer import PureTwoModeState

        base = rand_pure(rng, 5)
        rotated = PureTwoModeState(base.coeffs * np.exp(0.77j))
        a = relative_phase_density(base)
        b = relative_phase_density(rotated)
        np.testing.assert_allclose(a.values, b.values, atol=1e-13)


class TestJointDensity:
    def test_requires_pure_state(self, rng):
        mix = rand_mixture(rng, max_total=4, n_sectors=2)
        with pytest.raises(ValueError, match="pure"):
            joint_local_phase_density(mix)

    def test_normalization(self):
        j = joint_local_phase_density(split_fock_state(4, 0.0, 0.5))
        assert j.integrate() == pytest.approx(1.0, abs=1e-12)

    def test_values_match_direct_sum(self, rng):
        state = rand_pure(rng, 4)
        j = joint_local_phase_density(state)
        for a, b in ((0, 0), (9, 40), (33, 17)):
            want = oracle_joint_density(state, float(j.phis[a]), float(j.phis[b]))
            assert j.values[a, b] == pytest.approx(want, abs=1e-12)

    def test_marginalization_reproduces_relative_density(self, rng):
        for _ in range(5):
            state = rand_pure(rng, 6)
            joint = joint_local_phase_density(state)
            marg = relative_marginal_from_joint(joint)
            rel = relative_phase_density(state, grid_size=joint.grid_size)
            np.testing.assert_allclose(marg.values, rel.values, atol=1e-10)

    def test_difference_moment_matches_phase_coherence(self, rng):
        state = rand_pure(rng, 5)
        j = joint_local_phase_density(state)
        h = j.spacing
        phase = np.exp(1j * (j.phis[:, None] - j.phis[None, :]))
        moment = complex(np.sum(phase * j.values) * h * h)
        assert moment == pytest.approx(exp_phase_relative(state), abs=1e-12)


class TestLinearPhaseVariance:
    def test_uniform_density_gives_pi_squared_over_three(self):
        density = relative_phase_density(number_phase_state(0, 0.0))
        want = math.pi**2 / 3.0
        # rectangle rule on the non-band-limited integrand: error -pi^2/(3K^2)
        assert linear_phase_variance(density) == pytest.approx(want, abs=1.5e-3)

    def test_uniform_density_error_shrinks_with_grid(self):
        density = relative_phase_density(number_phase_state(0, 0.0), grid_size=1024)
        assert linear_phase_variance(density) == pytest.approx(
            math.pi**2 / 3.0, abs=1e-5
        )

    def test_narrow_density_approaches_dispersion(self):
        state = split_fock_state(50, 0.0, 0.5)
        lpv = linear_phase_variance(relative_phase_density(state))
        d2 = 1.0 - abs(exp_phase_relative(state)) ** 2
        assert lpv == pytest.approx(d2, rel=0.1)

    def test_recentring_makes_result_phase_independent(self):
        # the grid-placement part of the rectangle-rule error is O(h^2), so
        # shifting the peak off a grid point moves the value only at that order
        a = linear_phase_variance(
            relative_phase_density(split_fock_state(8, 0.0, 0.5), grid_size=512)
        )
        b = linear_phase_variance(
            relative_phase_density(split_fock_state(8, 2.5, 0.5), grid_size=512)
        )
        assert a == pytest.approx(b, abs=1e-6)


class TestSampling:
    def test_fixed_seed_pins_the_stream(self):
        s1, s2 = sample_local_phases(number_phase_state(3, 0.0), 4, seed=123)
        np.testing.assert_allclose(
            s1.phis,
            [0.0945752184793136, -0.8742227717631881, 1.4123571385178888, 1.1953058911302499],
            rtol=0, atol=0,
        )
        np.testing.assert_allclose(
            s2.phis,
            [-0.46746071849233983, -1.6026108049822432, -2.1977374306545525, 1.6783073725241273],
            rtol=0, atol=0,
        )

    def test_fixed_seed_pins_the_mixture_stream(self):
        mix = mixture_over_sectors(
            poissonian_distribution(2.0), lambda n: number_phase_state(n, 0.0)
        )
        m1, m2 = sample_local_phases(mix, 4, seed=7)
        np.testing.assert_allclose(
            m1.phis,
            [-0.7724729946202404, -0.05631392695092252, -2.3859702513100682, 1.6946485983051165],
            rtol=0, atol=0,
        )
        np.testing.assert_allclose(
            m2.phis,
            [-0.5020410924128353, -1.2795229825177354, 2.1070696716270376, 0.8564140215575646],
            rtol=0, atol=0,
        )

    def test_same_seed_reproduces_exactly(self, rng):
        state = rand_pure(rng, 5)
        a = sample_local_phases(state, 257, seed=9)
        b = sample_local_phases(state, 257, seed=9)
        np.testing.assert_array_equal(a[0].phis, b[0].phis)
        np.testing.assert_array_equal(a[1].phis, b[1].phis)

    @pytest.mark.parametrize("make", [lambda: split_fock_state(4, 0.3, 0.5),
                                      lambda: mixture_over_sectors(
                                          poissonian_distribution(2.0),
                                          lambda n: number_phase_state(n, 0.0))])
    def test_batches_partition_the_sequential_stream(self, make):
        state = make()
        full = sample_local_phases(state, 40, seed=11)
        head = sample_local_phases(state, 25, seed=11)
        tail = sample_local_phases(state, 15, seed=11, start_shot=25)
        for i in (0, 1):
            np.testing.assert_array_equal(
                full[i].phis, np.concatenate([head[i].phis, tail[i].phis])
            )

    def test_angles_live_in_principal_interval(self, rng):
        state = rand_pure(rng, 6)
        s1, s2 = sample_local_phases(state, 2000, seed=3)
        for s in (s1, s2):
            assert s.phis.min() >= -math.pi
            assert s.phis.max() < math.pi

    def test_empirical_difference_matches_density(self):
        state = number_phase_state(2, 0.0)
        s1, s2 = sample_local_phases(state, 60_000, seed=21)
        est = estimate_relative_dispersion(s1, s2)
        exact = 1.0 - (2.0 / 3.0) ** 2
        assert abs(est.d2_hat - exact) < 5.0 * est.std_error

    def test_empirical_marginal_matches_single_mode_density(self):
        # phi1 of a fixed-N flat-superposition state is uniform by symmetry
        state = number_phase_state(4, 0.0)
        s1, _ = sample_local_phases(state, 50_000, seed=2)
        hist, _ = np.histogram(s1.phis, bins=16, range=(-math.pi, math.pi))
        expected = 50_000 / 16
        chi2 = float(((hist - expected) ** 2 / expected).sum())
        assert chi2 < 45.0  # 15 dof, p ~ 1e-4 cushion

    def test_shot_and_seed_validation(self):
        state = number_phase_state(1, 0.0)
        with pytest.raises(ValueError, match="shots"):
            sample_local_phases(state, 0, seed=1)
        with pytest.raises(ValueError, match="non-negative"):
            sample_local_phases(state, 5, seed=-1)

    def test_sample_grid_floor_is_enforced(self):
        state = number_phase_state(1, 0.0)
        with pytest.raises(ValueError, match="256"):
            sample_local_phases(state, 5, seed=1, grid_size=128)

    def test_sample_set_rejects_out_of_range_angles(self):
        with pytest.raises(ValueError, match="pi"):
            SampleSet(np.array([0.0, 4.0]), shots=2, seed=0)


class TestEstimator:
    def test_requires_matching_shot_counts(self):
        a = SampleSet(np.zeros(3), shots=3, seed=0)
        b = SampleSet(np.zeros(4), shots=4, seed=0)
        with pytest.raises(ValueError, match="equal"):
            estimate_relative_dispersion(a, b)

    def test_bootstrap_and_jackknife_agree_on_scale(self):
        state = split_fock_state(3, 0.0, 0.5)
        s1, s2 = sample_local_phases(state, 4000, seed=13)
        boot = estimate_relative_dispersion(s1, s2)
        jack = estimate_relative_dispersion(s1, s2, method="jackknife")
        assert boot.d2_hat == jack.d2_hat
        assert 0.5 < boot.std_error / jack.std_error < 2.0

    def test_bootstrap_is_deterministic_given_sample_seeds(self):
        state = number_phase_state(2, 0.0)
        s1, s2 = sample_local_phases(state, 500, seed=17)
        a = estimate_relative_dispersion(s1, s2)
        b = estimate_relative_dispersion(s1, s2)
        assert a == b

    def test_explicit_estimator_seed_changes_only_the_error_stream(self):
        state = number_phase_state(2, 0.0)
        s1, s2 = sample_local_phases(state, 500, seed=17)
        a = estimate_relative_dispersion(s1, s2, seed=1)
        b = estimate_relative_dispersion(s1, s2, seed=2)
        assert a.d2_hat == b.d2_hat
        assert a.std_error != b.std_error

    def test_unknown_method_rejected(self):
        s = SampleSet(np.zeros(4), shots=4, seed=0)
        with pytest.raises(ValueError, match="method"):
            estimate_relative_dispersion(s, s, method="parametric")

    def test_small_sample_bias_is_minus_d2_over_shots(self):
        # uniform relative phase: plug-in estimate averages to 1 - 1/n
        vac = number_phase_state(0, 0.0)
        n = 50
        values = []
        for k in range(400):
            s1, s2 = sample_local_phases(vac, n, seed=1000 + k)
            z = np.exp(1j * (s1.phis - s2.phis))
            values.append(1.0 - abs(z.mean()) ** 2)
        assert np.mean(values) == pytest.approx(1.0 - 1.0 / n, abs=5e-3)


class TestCsvWriters:
    def test_samples_csv_layout(self, tmp_path):
        state = number_phase_state(2, 0.0)
        s1, s2 = sample_local_phases(state, 3, seed=4)
        path = tmp_path / "samples.csv"
        write_samples_csv(path, s1, s2)
        lines = path.read_text().splitlines()
        assert lines[0] == "shot_index,phi1,phi2"
        assert len(lines) == 4
        idx, phi1, phi2 = lines[1].split(",")
        assert idx == "0"
        assert float(phi1) == s1.phis[0]
        assert float(phi2) == s2.phis[0]

    def test_samples_csv_carries_batch_offsets(self, tmp_path):
        state = number_phase_state(2, 0.0)
        s1, s2 = sample_local_phases(state, 2, seed=4, start_shot=10)
        path = tmp_path / "batch.csv"
        write_samples_csv(path, s1, s2)
        lines = path.read_text().splitlines()
        assert lines[1].split(",")[0] == "10"

    def test_density_csv_roundtrip(self, tmp_path):
        density = relative_phase_density(number_phase_state(3, 0.2))
        path = tmp_path / "density.csv"
        write_density_csv(path, density)
        rows = path.read_text().splitlines()
        assert rows[0] == "phi,p"
        data = np.array([[float(x) for x in line.split(",")] for line in rows[1:]])
        np.testing.assert_array_equal(data[:, 0], density.phis)
        np.testing.assert_array_equal(data[:, 1], density.values)


@given(seed=st.integers(0, 2**32 - 1), cutoff=st.integers(0, 8))
@settings(max_examples=40)
def test_density_always_normalized_and_nonnegative(seed, cutoff):
    rng = np.random.default_rng(seed)
    state = rand_pure(rng, cutoff)
    density = relative_phase_density(state)
    assert density.values.min() >= 0.0
    assert density.integrate() == pytest.approx(1.0, abs=1e-10)
    assert abs(density.moment(1)) <= 1.0 + 1e-12


@given(x=st.floats(-50.0, 50.0, allow_nan=False))
def test_wrap_angle_lands_in_principal_interval(x):
    w = float(wrap_angle(x))
    assert -math.pi <= w < math.pi
    assert math.cos(w) == pytest.approx(math.cos(x), abs=1e-9)
    assert math.sin(w) == pytest.approx(math.sin(x), abs=1e-9)
