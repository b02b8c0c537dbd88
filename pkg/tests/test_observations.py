import pytest
from hypothesis import given, strategies as st

from kgcomplete.observations import (
    DEFAULT_PERIOD_LENGTH,
    FrequencyHistogram,
    Mention,
    PeriodizedObservations,
    bucket_mentions,
    default_origin,
    histogram_at,
    series_histograms,
)
from kgcomplete.simulator import naive_frequency_count

P = 100


def H(k, D, n, f):
    return FrequencyHistogram(k=k, D=D, n=n, f=f)


def test_bucketing_example():
    ms = [Mention("A", "c", 0), Mention("B", "c", 0), Mention("A", "c", P), Mention("C", "c", P)]
    out = bucket_mentions(ms, origin=0, period_length=P)
    assert list(out) == ["c"]
    assert out["c"].periods == [frozenset("AB"), frozenset("AC")]


def test_dedup_within_period():
    ms = [Mention("A", "c", t) for t in (0, 1, 2)]
    assert bucket_mentions(ms, origin=0, period_length=P)["c"].periods == [frozenset("A")]


def test_empty_stream():
    assert bucket_mentions([], origin=0, period_length=P) == {}
    assert bucket_mentions([]) == {}


def test_pre_origin_skipped_and_counted(caplog):
    counters = {}
    ms = [Mention("A", "c", 5), Mention("B", "c", 500)]
    out = bucket_mentions(ms, origin=100, period_length=P, counters=counters)
    assert counters == {"pre_origin": 1}
    assert out["c"].periods[-1] == frozenset("B")
    assert out["c"].k == 5
    assert "skipped 1" in caplog.text


def test_default_origin_is_midnight():
    day = 86_400
    assert default_origin([3 * day + 500, 5 * day]) == 3 * day
    ms = [Mention("A", "c", 3 * day + 500)]
    assert bucket_mentions(ms)["c"].origin == 3 * day


def test_same_entity_in_two_classes():
    ms = [Mention("A", "c", 0), Mention("A", "d", 0)]
    out = bucket_mentions(ms, origin=0, period_length=P)
    assert out["c"].periods == out["d"].periods == [frozenset("A")]


def test_gap_periods_materialized():
    ms = [Mention("A", "c", 0), Mention("A", "c", 2 * P)]
    obs = bucket_mentions(ms, origin=0, period_length=P)["c"]
    assert obs.periods == [frozenset("A"), frozenset(), frozenset("A")]


def test_histogram_at_examples():
    obs = PeriodizedObservations("c", 0, P, [set("AB"), set("AC")])
    assert histogram_at(obs, 1) == H(2, 3, 4, {1: 2, 2: 1})
    assert histogram_at(obs, 0) == H(1, 2, 2, {1: 2})
    assert histogram_at(PeriodizedObservations("c", 0, P, [set()]), 0) == H(1, 0, 0, {})
    with pytest.raises(IndexError):
        histogram_at(obs, 2)


def test_series_examples():
    obs = PeriodizedObservations("c", 0, P, [set("AB"), set("AC")])
    assert series_histograms(obs) == [H(1, 2, 2, {1: 2}), H(2, 3, 4, {1: 2, 2: 1})]
    assert series_histograms(PeriodizedObservations("c", 0, P, [set("A")])) == [H(1, 1, 1, {1: 1})]
    gap = series_histograms(PeriodizedObservations("c", 0, P, [{"A"}, set(), {"A"}]))
    assert [(h.k, h.D, h.n) for h in gap] == [(1, 1, 1), (2, 1, 1), (3, 1, 2)]
    assert series_histograms(PeriodizedObservations("c", 0, P, [])) == []


def test_histogram_invariants_enforced():
    with pytest.raises(ValueError):
        H(2, 3, 5, {1: 2, 2: 1})
    with pytest.raises(ValueError):
        H(2, 4, 4, {1: 2, 2: 1})
    with pytest.raises(ValueError):
        H(1, 1, 2, {2: 1})


def test_mention_validation():
    with pytest.raises(ValueError):
        Mention("", "c", 0)
    with pytest.raises(ValueError):
        Mention("A", "c", -1)


def test_default_period_is_thirty_days():
    assert DEFAULT_PERIOD_LENGTH == 2_592_000


mention_lists = st.lists(
    st.builds(
        Mention,
        st.sampled_from("ABCDEFGHIJ"),
        st.sampled_from(["c", "d"]),
        st.integers(0, 5 * P - 1),
    ),
    max_size=40,
)


@given(mention_lists, st.randoms(use_true_random=False))
def test_permutation_invariance(ms, rnd):
    shuffled = list(ms)
    rnd.shuffle(shuffled)
    a = bucket_mentions(ms, origin=0, period_length=P)
    b = bucket_mentions(shuffled, origin=0, period_length=P)
    assert a.keys() == b.keys()
    for c in a:
        assert series_histograms(a[c]) == series_histograms(b[c])


@given(mention_lists, st.data())
def test_duplicate_mention_changes_nothing(ms, data):
    if not ms:
        return
    m = data.draw(st.sampled_from(ms))
    dup = Mention(m.entity_id, m.class_id, m.timestamp - m.timestamp % P + data.draw(st.integers(0, P - 1)))
    a = bucket_mentions(ms, origin=0, period_length=P)
    b = bucket_mentions(ms + [dup], origin=0, period_length=P)
    assert {c: series_histograms(o) for c, o in a.items()} == {c: series_histograms(o) for c, o in b.items()}


@given(mention_lists)
def test_series_monotone_and_matches_histogram_at(ms):
    for obs in bucket_mentions(ms, origin=0, period_length=P).values():
        series = series_histograms(obs)
        assert len(series) == obs.k
        for i, h in enumerate(series):
            assert h == histogram_at(obs, i)
            assert h.k == i + 1
            if i:
                assert h.D >= series[i - 1].D


@given(mention_lists)
def test_matches_naive_recount(ms):
    for c, obs in bucket_mentions(ms, origin=0, period_length=P).items():
        assert series_histograms(obs)[-1] == naive_frequency_count(ms, 0, P, class_id=c)


@given(mention_lists, mention_lists, mention_lists)
def test_merge_associative_commutative(a, b, c):
    def obs(ms):
        got = bucket_mentions(ms, origin=0, period_length=P).get("c")
        return got or PeriodizedObservations("c", 0, P, [])

    x, y, z = obs(a), obs(b), obs(c)
    assert x.merge(y).periods == y.merge(x).periods
    assert x.merge(y).merge(z).periods == x.merge(y.merge(z)).periods
    assert x.merge(y).periods == obs(a + b).periods


def test_merge_rejects_different_grid():
    with pytest.raises(ValueError):
        PeriodizedObservations("c", 0, P).merge(PeriodizedObservations("c", 0, 2 * P))


def test_from_counts():
    assert FrequencyHistogram.from_counts([1, 1, 2, 0], k=2) == H(2, 3, 4, {1: 2, 2: 1})
