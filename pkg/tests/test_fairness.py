import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hfm.approx import ApproxParams
from hfm.errors import ConfigError, DataError, DimensionMismatchError, MissingPredictionsError, ZeroDistanceError
from hfm.fairness import BaselineConfig, discriminative_risk, fairness_report, group_fairness, hfm, hfm_prev
from hfm.model import Dataset, Method, build_dataset
from hfm.synth import random_dataset


def test_hfm_examples():
    assert hfm(0.7, 0.7) == 0.0
    assert hfm(0.4, 0.8) == pytest.approx(0.3010300, abs=1e-7)
    assert hfm(0.8, 0.4) == pytest.approx(-0.3010300, abs=1e-7)


@pytest.mark.parametrize("args", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0)])
def test_hfm_zero_distance(args):
    with pytest.raises(ZeroDistanceError, match="zero distance"):
        hfm(*args)


def test_hfm_prev_examples():
    assert hfm_prev(0.3, 0.3) == 0.0
    assert hfm_prev(0.3, 0.0) == -1.0
    assert hfm_prev(0.4, 0.6) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(ZeroDistanceError):
        hfm_prev(0.0, 0.5)


@given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6), st.floats(1e-3, 1e3))
def test_hfm_scale_invariant(d, m, c):
    assert hfm(c * d, c * m) == pytest.approx(hfm(d, m), abs=1e-9)


def _toy8(pred, labels, groups):
    return build_dataset(np.zeros((8, 1)), np.array(groups)[:, None], labels, pred)


def test_dp_equal_rates():
    ds = _toy8([1, 0, 1, 0, 1, 0, 1, 0], [0] * 8, [1, 1, 1, 1, 2, 2, 2, 2])
    assert group_fairness(ds, 0).dp == 0.0


def test_dp_three_vs_one():
    ds = _toy8([1, 1, 1, 0, 1, 0, 0, 0], [0] * 8, [1, 1, 1, 1, 2, 2, 2, 2])
    assert group_fairness(ds, 0).dp == pytest.approx(0.5, abs=1e-15)


def test_eo_zero_when_predictions_exact():
    labels = [1, 1, 0, 0, 1, 1, 0, 0]
    ds = _toy8(labels, labels, [1, 1, 1, 1, 2, 2, 2, 2])
    gf = group_fairness(ds, 0)
    assert gf.eo == 0.0 and gf.pqp == 0.0 and gf.dp == 0.0


def test_pqp_by_hand():
    # privileged: predicted positive rows 0,1 -> true positives 1 of 2
    # others: predicted positive rows 4 -> true positive 1 of 1
    ds = _toy8([1, 1, 0, 0, 1, 0, 0, 0], [1, 0, 1, 0, 1, 1, 0, 0], [1, 1, 1, 1, 2, 2, 2, 2])
    gf = group_fairness(ds, 0)
    assert gf.pqp == pytest.approx(0.5)
    # true positives: privileged rows 0,2 predicted 1 of 2; others rows 4,5 predicted 1 of 2
    assert gf.eo == 0.0


def test_undefined_measures_marked():
    # no predicted positives anywhere: pqp undefined, dp still defined
    ds = _toy8([0] * 8, [1, 0, 1, 0, 1, 0, 1, 0], [1, 1, 1, 1, 2, 2, 2, 2])
    gf = group_fairness(ds, 0)
    assert gf.pqp is None and gf.dp == 0.0 and gf.eo == 0.0
    # no true positives on the privileged side: eo undefined
    ds = _toy8([1] * 8, [0, 0, 0, 0, 1, 0, 1, 0], [1, 1, 1, 1, 2, 2, 2, 2])
    assert group_fairness(ds, 0).eo is None


def test_group_fairness_multivalue_binarises():
    ds = build_dataset(np.zeros((6, 1)), [[1], [1], [2], [2], [3], [3]], [0] * 6, [1, 1, 1, 0, 0, 0])
    # privileged code 1 rate 1.0 vs rest 1/4
    assert group_fairness(ds, 0, privileged_value=1).dp == pytest.approx(0.75)
    # code 2 rate 0.5 vs rest 0.5
    assert group_fairness(ds, 0, privileged_value=2).dp == pytest.approx(0.0)
    with pytest.raises(DataError):
        group_fairness(ds, 0, privileged_value=4)


def test_group_fairness_swap_invariant():
    for seed in range(10):
        ds = random_dataset(50, 2, (2,), seed=seed)
        a = group_fairness(ds, 0, privileged_value=1)
        b = group_fairness(ds, 0, privileged_value=2)
        for x, y in zip((a.dp, a.eo, a.pqp), (b.dp, b.eo, b.pqp)):
            assert (x is None and y is None) or x == pytest.approx(y, abs=1e-15)


def test_group_fairness_needs_predictions():
    ds = random_dataset(10, 2, flip=None)
    with pytest.raises(MissingPredictionsError):
        group_fairness(ds, 0)


def test_dr_examples():
    assert discriminative_risk([1, 0, 1], [1, 0, 1]) == 0.0
    assert discriminative_risk([1, 0, 1], [0, 0, 1]) == pytest.approx(0.3333333, abs=1e-7)
    assert discriminative_risk([1, 1], [0, 0]) == 1.0
    with pytest.raises(DimensionMismatchError):
        discriminative_risk([1, 0], [1])


@given(st.data())
def test_dr_pseudometric(data):
    n = data.draw(st.integers(1, 30))
    seq = st.lists(st.integers(0, 2), min_size=n, max_size=n)
    a, b, c = data.draw(seq), data.draw(seq), data.draw(seq)
    assert discriminative_risk(a, a) == 0.0
    assert discriminative_risk(a, b) == discriminative_risk(b, a)
    assert discriminative_risk(a, c) <= discriminative_risk(a, b) + discriminative_risk(b, c) + 1e-15
    assert 0.0 <= discriminative_risk(a, b) <= 1.0


@pytest.mark.parametrize("method", [Method.EXACT, Method.APPROX])
def test_null_case(method):
    ds = random_dataset(80, 3, (2, 3), seed=1)
    ds = ds.with_predictions(ds.labels)
    rep = fairness_report(ds, method, ApproxParams(m1=4, m2=3, master_seed=9))
    assert rep.df == 0.0 and rep.df_avg == 0.0 and rep.df_prev == 0.0
    assert all(a.df == 0.0 and a.df_avg == 0.0 for a in rep.per_attribute)


def test_single_attribute_per_attribute_matches_top():
    ds = random_dataset(60, 3, (3,), seed=2)
    rep = fairness_report(ds)
    assert rep.per_attribute[0].df == rep.df
    assert rep.per_attribute[0].df_avg == rep.df_avg


@pytest.mark.parametrize("seed", range(4))
def test_exact_and_full_scan_approx_agree(seed):
    ds = random_dataset(70, 3, (2, 4), seed=seed)
    exact = fairness_report(ds, Method.EXACT)
    approx = fairness_report(ds, Method.APPROX, ApproxParams(m1=2, m2=ds.n))
    assert approx.df == exact.df and approx.df_avg == exact.df_avg


def test_report_values_match_components():
    ds = random_dataset(60, 2, (2, 2), seed=3)
    rep = fairness_report(ds)
    assert rep.df == pytest.approx(math.log10(rep.model_distance.aggregate_max / rep.data_distance.aggregate_max))
    assert rep.data_distance.channel.value == "true"
    assert rep.model_distance.channel.value == "pred"
    assert rep.log_base == 10


def test_baselines_and_dr_avg():
    ds = random_dataset(60, 2, (2, 3), seed=4)
    flipped = 1 - ds.predictions
    cfg = BaselineConfig(privileged=[1, 2], perturbed=[ds.predictions, flipped])
    rep = fairness_report(ds, baseline_config=cfg)
    assert rep.per_attribute[0].dr == 0.0
    assert rep.per_attribute[1].dr == 1.0
    assert rep.dr_avg == 0.5
    assert rep.per_attribute[1].dp == group_fairness(ds, 1, privileged_value=2).dp
    doc = rep.to_dict()
    assert {"df", "df_avg", "df_prev", "dr_avg", "per_attribute", "data_distance", "model_distance"} <= doc.keys()


def test_baselines_without_perturbed_note_it():
    ds = random_dataset(40, 2, (2,), seed=4)
    rep = fairness_report(ds, baseline_config=BaselineConfig())
    assert rep.dr_avg is None and rep.per_attribute[0].dp is not None and rep.notes


def test_baseline_config_length_checked():
    ds = random_dataset(40, 2, (2, 2), seed=4)
    with pytest.raises(ConfigError):
        fairness_report(ds, baseline_config=BaselineConfig(privileged=[1]))


def test_zero_model_distance_reported_as_null():
    # predictions identical across groups at identical features: model distance 0
    ds = Dataset(np.zeros((4, 1)), np.array([[1], [2], [1], [2]]), np.array([0, 1, 0, 1]), np.zeros(4, dtype=np.int64), (2,), 2)
    rep = fairness_report(ds)
    assert rep.df is None and rep.df_prev == -1.0 and rep.notes


def test_fairness_report_needs_predictions():
    with pytest.raises(MissingPredictionsError):
        fairness_report(random_dataset(10, 2, flip=None))
