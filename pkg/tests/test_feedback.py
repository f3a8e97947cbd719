import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uncertain_eval import (
    FeedbackDataset,
    FeedbackKey,
    InputError,
    ObservationSet,
    RatingObservation,
    RatingScale,
    SigmaFallback,
    UnavailableError,
    UncertainFeedback,
    fit_uncertainty,
    pooled_sigma,
)

SCALE = RatingScale(1.0, 5.0)
WIDE = RatingScale(-1000.0, 1000.0)


def make_obs(groups: dict[str, list[float]], scale: RatingScale = WIDE) -> ObservationSet:
    observations = []
    for name, values in groups.items():
        key = FeedbackKey(user_id=name, item_id="i1")
        observations.extend(
            RatingObservation(key=key, trial=t, value=v) for t, v in enumerate(values)
        )
    return ObservationSet(scale=scale, observations=tuple(observations))


class TestRatingScale:
    def test_rejects_inverted_bounds(self):
        with pytest.raises(InputError):
            RatingScale(5.0, 1.0)

    def test_rejects_bad_step(self):
        with pytest.raises(InputError):
            RatingScale(1.0, 5.0, discrete_step=-1.0)
        with pytest.raises(InputError):
            RatingScale(1.0, 5.0, discrete_step=0.3)

    def test_accepts_valid_step(self):
        assert RatingScale(1.0, 5.0, discrete_step=0.5).span == 4.0


class TestFitUncertainty:
    def test_zero_spread_group(self):
        data = fit_uncertainty(make_obs({"u": [3, 3, 3, 3, 3]}, SCALE))
        (entry,) = data.entries
        assert entry.mu == 3.0
        assert entry.sigma == 0.0
        assert entry.n_trials == 5

    def test_two_value_group(self):
        (entry,) = fit_uncertainty(make_obs({"u": [2, 4]}, SCALE)).entries
        assert entry.mu == pytest.approx(3.0, abs=0)
        assert entry.sigma == pytest.approx(1.4142135623730951, abs=1e-12)

    def test_five_value_group(self):
        (entry,) = fit_uncertainty(make_obs({"u": [4, 5, 4, 3, 4]}, SCALE)).entries
        assert entry.mu == pytest.approx(4.0, abs=0)
        assert entry.sigma == pytest.approx(0.7071067811865476, abs=1e-12)

    def test_output_counts_distinct_keys(self):
        data = fit_uncertainty(make_obs({"a": [1, 2], "b": [3, 4], "c": [5, 5]}, SCALE))
        assert data.N == 3

    def test_empty_input_rejected(self):
        with pytest.raises(InputError):
            fit_uncertainty(ObservationSet(scale=SCALE, observations=()))

    def test_non_finite_value_rejected(self):
        with pytest.raises(InputError):
            RatingObservation(FeedbackKey("u", "i"), 0, math.nan)

    def test_duplicate_trial_rejected(self):
        key = FeedbackKey("u", "i")
        with pytest.raises(InputError):
            ObservationSet(
                scale=SCALE,
                observations=(
                    RatingObservation(key, 0, 3.0),
                    RatingObservation(key, 0, 4.0),
                ),
            )


class TestSigmaFallback:
    def test_zero_policy(self):
        data = fit_uncertainty(make_obs({"solo": [4.0]}, SCALE), SigmaFallback.zero())
        assert data.entries[0].sigma == 0.0

    def test_fixed_policy(self):
        data = fit_uncertainty(
            make_obs({"solo": [4.0]}, SCALE), SigmaFallback.fixed(0.7)
        )
        assert data.entries[0].sigma == 0.7

    def test_pooled_policy_borrows_from_multi_trial_pairs(self):
        data = fit_uncertainty(make_obs({"solo": [4.0], "multi": [2.0, 4.0]}, SCALE))
        by_user = {e.key.user_id: e for e in data.entries}
        assert by_user["solo"].sigma == pytest.approx(
            by_user["multi"].sigma, abs=1e-12
        )

    def test_pooled_policy_unavailable_without_multi_trial_pairs(self):
        with pytest.raises(UnavailableError):
            fit_uncertainty(make_obs({"a": [4.0], "b": [2.0]}, SCALE))

    def test_parse(self):
        assert SigmaFallback.parse("pooled") == SigmaFallback.pooled()
        assert SigmaFallback.parse("zero") == SigmaFallback.zero()
        assert SigmaFallback.parse("fixed:0.25") == SigmaFallback.fixed(0.25)
        with pytest.raises(InputError):
            SigmaFallback.parse("median")
        with pytest.raises(InputError):
            SigmaFallback.parse("fixed:abc")

    def test_fixed_requires_non_negative_value(self):
        with pytest.raises(InputError):
            SigmaFallback.fixed(-1.0)


class TestPooledSigma:
    def _dataset(self, sigmas, n_trials=5):
        entries = tuple(
            UncertainFeedback(FeedbackKey(f"u{i}", "i1"), 3.0, s, n_trials=n_trials)
            for i, s in enumerate(sigmas)
        )
        return FeedbackDataset(scale=SCALE, entries=entries)

    def test_all_zero(self):
        assert pooled_sigma(self._dataset([0.0, 0.0, 0.0])) == 0.0

    def test_uniform(self):
        assert pooled_sigma(self._dataset([1.0, 1.0])) == pytest.approx(1.0, abs=1e-12)

    def test_mixed(self):
        assert pooled_sigma(self._dataset([0.5, 1.5])) == pytest.approx(
            1.118033988749895, abs=1e-12
        )

    def test_unavailable_without_multi_trial_entries(self):
        with pytest.raises(UnavailableError):
            pooled_sigma(self._dataset([0.5, 1.5], n_trials=1))
        with pytest.raises(UnavailableError):
            pooled_sigma(self._dataset([0.5], n_trials=None))


group_values = st.lists(
    st.floats(min_value=-100, max_value=100, allow_nan=False, allow_infinity=False),
    min_size=1,
    max_size=12,
)


class TestFitProperties:
    @given(group_values)
    def test_mu_within_observed_range(self, values):
        (entry,) = fit_uncertainty(
            make_obs({"u": values}), SigmaFallback.zero()
        ).entries
        assert min(values) - 1e-9 <= entry.mu <= max(values) + 1e-9

    @given(group_values, st.randoms(use_true_random=False))
    def test_sigma_permutation_invariant(self, values, rnd):
        shuffled = list(values)
        rnd.shuffle(shuffled)
        fit_a = fit_uncertainty(make_obs({"u": values}), SigmaFallback.zero())
        fit_b = fit_uncertainty(make_obs({"u": shuffled}), SigmaFallback.zero())
        assert fit_a.entries[0].sigma == pytest.approx(
            fit_b.entries[0].sigma, abs=1e-9
        )

    @given(group_values, st.floats(min_value=-50, max_value=50, allow_nan=False))
    @settings(max_examples=60)
    def test_constant_shift_moves_mu_only(self, values, c):
        base = fit_uncertainty(make_obs({"u": values}), SigmaFallback.zero()).entries[0]
        shifted = fit_uncertainty(
            make_obs({"u": [v + c for v in values]}), SigmaFallback.zero()
        ).entries[0]
        assert shifted.mu == pytest.approx(base.mu + c, abs=1e-7)
        assert shifted.sigma == pytest.approx(base.sigma, abs=1e-7)

    @given(group_values, st.integers(min_value=2, max_value=4))
    def test_replicated_groups_fit_identically(self, values, copies):
        groups = {f"u{j}": values for j in range(copies)}
        data = fit_uncertainty(make_obs(groups), SigmaFallback.zero())
        mus = {e.mu for e in data.entries}
        sigmas = {e.sigma for e in data.entries}
        assert len(mus) == 1 and len(sigmas) == 1
