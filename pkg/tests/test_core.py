import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from crstatus.core import (
    Dataset,
    GroupingScheme,
    Interval,
    Observation,
    StepEstimate,
    TallyTable,
    classify_regular,
    tally_discrete,
    tally_grouped,
)
from crstatus.simulation import (
    GammaLaw,
    ObservationModel,
    SimulationConfig,
    default_grid_suite,
    generate_dataset,
)


def test_tally_discrete_basic():
    tally = tally_discrete([(2.0, 1), (2.0, 0), (3.0, 2)], K=2)
    assert_array_equal(tally.support, [2.0, 3.0])
    assert_array_equal(tally.counts, [[1, 0, 1], [0, 1, 0]])
    assert tally.n == 3
    assert tally.K == 2


def test_tally_discrete_all_censored():
    tally = tally_discrete([(5.0, 0)] * 10, K=1)
    assert_array_equal(tally.support, [5.0])
    assert_array_equal(tally.counts, [[0, 10]])
    assert tally.n == 10


def test_tally_discrete_errors():
    with pytest.raises(ValueError, match="no observations"):
        tally_discrete([], K=2)
    with pytest.raises(ValueError, match="invalid cause label"):
        tally_discrete([(1.0, 3)], K=2)


def test_tally_discrete_accepts_observation_objects():
    obs = [Observation(1.5, 1), Observation(1.5, 0)]
    tally = tally_discrete(obs, K=1)
    assert_array_equal(tally.counts, [[1, 1]])


def test_tally_counts_sum_to_n():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(1, 50))
        times = rng.choice([1.0, 2.0, 5.5], size=n)
        statuses = rng.integers(0, 3, size=n)
        tally = tally_discrete(Dataset(times, statuses), K=2)
        assert tally.counts.sum() == n


def test_tally_discrete_gap10_multinomial():
    # 1000 draws with inspections uniform on {10, 20, 30}: each point's total
    # is Binomial(1000, 1/3); check within 4 standard errors
    config = SimulationConfig(
        cause_probabilities=(0.6, 0.4),
        event_time_laws=(GammaLaw(5, 3), GammaLaw(9, 2)),
        observation=ObservationModel("discrete", grid=default_grid_suite()["gap10"]),
        n=1000,
        replications=1,
        seed=11,
    )
    tally = tally_discrete(generate_dataset(config, 0), K=2)
    assert set(tally.support) <= {10.0, 20.0, 30.0}
    sd = np.sqrt(1000 * (1 / 3) * (2 / 3))
    for total in tally.totals:
        assert abs(total - 1000 / 3) < 4 * sd


def menopause_style_scheme():
    return GroupingScheme(
        [Interval(25, 30, "oc"), Interval(30, 35, "oc")],
        [27.5, 32.5],
    )


def test_tally_grouped_rounds_to_representative():
    scheme = menopause_style_scheme()
    tally = tally_grouped([(30.7, 0)], scheme, K=2)
    assert_array_equal(tally.support, [32.5])
    assert_array_equal(tally.counts, [[0, 0, 1]])


def test_tally_grouped_uncovered_time_errors():
    scheme = menopause_style_scheme()
    with pytest.raises(ValueError, match="not covered"):
        tally_grouped([(24.9, 0)], scheme, K=2)


def test_tally_grouped_pass_through_when_times_match_representatives():
    scheme = menopause_style_scheme()
    tally = tally_grouped([(27.5, 1), (32.5, 0)], scheme, K=1)
    assert_array_equal(tally.support, [27.5, 32.5])
    assert_array_equal(tally.counts, [[1, 0], [0, 1]])


def test_tally_grouped_singleton_atoms_equals_discrete():
    rng = np.random.default_rng(5)
    times = rng.choice([1.0, 2.0, 4.0, 7.0], size=40)
    statuses = rng.integers(0, 3, size=40)
    data = Dataset(times, statuses)
    discrete = tally_discrete(data, K=2)
    atoms = np.unique(times)
    gap = np.min(np.diff(atoms)) / 3
    scheme = GroupingScheme(
        [Interval(a - gap, a + gap, "oo") for a in atoms],
        atoms,
    )
    grouped = tally_grouped(data, scheme, K=2)
    assert_array_equal(grouped.support, discrete.support)
    assert_array_equal(grouped.counts, discrete.counts)
    assert grouped.n == discrete.n


def test_interval_closure_membership():
    oc = Interval(0.0, 1.0, "oc")
    assert not oc.contains(0.0)
    assert oc.contains(1.0)
    co = Interval(0.0, 1.0, "co")
    assert co.contains(0.0)
    assert not co.contains(1.0)
    assert_array_equal(Interval(0, 1, "oo").contains(np.array([0.0, 0.5, 1.0])), [False, True, False])


def test_grouping_scheme_validation():
    with pytest.raises(ValueError, match="disjoint"):
        GroupingScheme([Interval(0, 2, "cc"), Interval(1, 3, "cc")], [1.0, 2.0])
    with pytest.raises(ValueError, match="strictly increasing"):
        GroupingScheme([Interval(0, 1, "co"), Interval(1, 2, "co")], [0.5, 0.5])
    with pytest.raises(ValueError, match="outside"):
        GroupingScheme([Interval(0, 1, "oo")], [1.0])
    # touching endpoints are fine when not both closed
    GroupingScheme([Interval(0, 1, "oc"), Interval(1, 2, "oc")], [0.5, 1.5])


def test_grouping_scheme_regular_cells():
    scheme = GroupingScheme.regular_cells(5.0, 35.0, 2.0)
    assert len(scheme) == 15
    assert_allclose(scheme.representatives, np.arange(6.0, 35.0, 2.0))
    assert scheme.intervals[0].lower == 5.0
    assert scheme.intervals[-1].upper == 35.0


def test_tally_table_validation():
    with pytest.raises(ValueError, match="strictly increasing"):
        TallyTable([2.0, 1.0], [[1, 0], [0, 1]], 2, 1)
    with pytest.raises(ValueError, match="sum to n"):
        TallyTable([1.0], [[1, 1]], 3, 1)
    with pytest.raises(KeyError):
        TallyTable([1.0], [[1, 1]], 2, 1).index_of(2.0)


def test_dataset_behaves_as_sequence():
    data = Dataset([1.0, 2.0], [0, 1])
    assert len(data) == 2
    assert data[1] == Observation(2.0, 1)
    assert [o.status for o in data] == [0, 1]
    srt = Dataset([2.0, 1.0], [1, 0]).sorted()
    assert_array_equal(srt.times, [1.0, 2.0])


def test_step_estimate_invariants():
    with pytest.raises(ValueError, match="sum"):
        StepEstimate([1.0], [[0.7, 0.7]], kind="mle")
    # naive components may exceed one jointly
    StepEstimate([1.0], [[0.7, 0.7]], kind="naive")
    with pytest.raises(ValueError, match="nondecreasing"):
        StepEstimate([1.0, 2.0], [[0.5], [0.4]], kind="naive")
    est = StepEstimate([1.0, 2.0], [[0.2, 0.1], [0.4, 0.3]], kind="mle")
    assert est.value_at(0.5, 1) == 0.0
    assert est.value_at(1.5, 1) == 0.2
    assert_allclose(est.value_at(2.5), [0.4, 0.3])


def test_classify_regular_interior_strict_increase():
    values = np.array([[0.1, 0.05], [0.3, 0.2], [0.5, 0.4]])
    flags = classify_regular([1.0, 2.0, 3.0], values)
    assert flags.regular.all()
    assert flags.reasons[1] == "interior"


def test_classify_regular_all_zero():
    values = np.array([[0.0, 0.0], [0.0, 0.2], [0.1, 0.4]])
    flags = classify_regular([1.0, 2.0, 3.0], values)
    assert flags.regular[0]
    assert flags.reasons[0] == "all_zero"


def test_classify_regular_saturated_endpoint():
    # endpoint with component sum one and strict increase from the left
    values = np.array([[0.2, 0.1], [0.6, 0.4]])
    flags = classify_regular([1.0, 2.0], values)
    assert flags.regular[1]
    assert flags.reasons[1] == "boundary"


def test_classify_regular_duplicate_makes_nonregular():
    values = np.array([[0.1], [0.3], [0.5]])
    assert classify_regular([1.0, 2.0, 3.0], values).regular.all()
    dup = np.array([[0.3], [0.3], [0.5]])
    flags = classify_regular([0.5, 1.0, 2.0], dup)
    assert not flags.regular[0]
    assert not flags.regular[1]
    assert flags.reasons[1] == "violation"


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(min_value=0.01, max_value=0.99), min_size=2, max_size=6),
    st.floats(min_value=0.1, max_value=10.0),
    st.floats(min_value=-5.0, max_value=5.0),
)
def test_classify_regular_invariant_under_relabeling(raw, scale, shift):
    values = np.sort(np.asarray(raw))[:, None]
    support = np.arange(len(raw), dtype=float)
    relabeled = support * scale + shift  # strictly increasing map
    a = classify_regular(support, values)
    b = classify_regular(relabeled, values)
    assert_array_equal(a.regular, b.regular)
    assert a.reasons == b.reasons
