import numpy as np
import pytest
from sklearn.base import clone

from oracles import lfm, radial
from sktdlvt import AxisMismatch, simulate_compressed_echo
from sktdlvt.estimators import DlvtEstimator, KeystoneTransformer, SceneEstimator
from sktdlvt.sigmodel import RowAxis


@pytest.fixture(scope="module")
def echo(small_radar):
    return simulate_compressed_echo(small_radar, [radial(small_radar, 10.0, 0.92)])


@pytest.mark.parametrize("cls", [KeystoneTransformer, DlvtEstimator, SceneEstimator])
def test_clone_and_params(cls, small_radar):
    est = cls(radar=small_radar, P=64)
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    twin.set_params(a2_max=30.0)
    assert twin.a2_max == 30.0 and est.a2_max == 61.33


@pytest.mark.parametrize("bad", [np.ones(5), np.ones((2, 2, 2)), np.empty((0, 4)),
                                 np.array([["a", "b"]]), np.full((1024, 64), np.nan)])
def test_input_validation(bad, small_radar):
    with pytest.raises(ValueError):
        KeystoneTransformer(radar=small_radar, P=64).fit(bad)


def test_wrong_shape(small_radar):
    with pytest.raises(ValueError, match="shape"):
        SceneEstimator(radar=small_radar, P=64).fit(np.ones((1024, 32)))
    with pytest.raises(ValueError, match="pulses"):
        DlvtEstimator(radar=small_radar, P=64).fit(np.ones((2, 100)))


def test_keystone_transformer(small_radar, echo):
    kt = KeystoneTransformer(radar=small_radar, P=64).fit(echo)
    out = kt.transform(echo)
    assert out.shape == echo.shape and kt.plan_.num_segments == 64
    # bare arrays need the near range to match
    bare = KeystoneTransformer(radar=small_radar, P=64, near_range=echo.near_range).fit(echo.data)
    np.testing.assert_allclose(bare.transform(echo.data), out, atol=1e-9)
    with pytest.raises(AxisMismatch):
        kt.transform(echo.with_data(echo.data, row_axis=RowAxis.INTRA_SEG_TIME))


def test_unfitted_raises(small_radar, echo):
    from sklearn.exceptions import NotFittedError
    with pytest.raises(NotFittedError):
        KeystoneTransformer(radar=small_radar, P=64).transform(echo)


def test_dlvt_estimator(small_radar):
    t = small_radar.slow_time()
    nt = small_radar.aperture_time
    rows = np.stack([lfm(t, 100.0, -61.38), lfm(t, -300.0, 20.0)])
    pred = DlvtEstimator(radar=small_radar, P=64).fit(rows).predict(rows)
    assert pred.shape == (2, 2)
    np.testing.assert_allclose(pred[:, 1], [-61.38, 20.0], atol=1.01 / (2 * nt))
    span = 64 / (2 * nt)
    f_true = np.array([100.0 - 61.38 * nt, -300.0 + 20.0 * nt])
    err = (pred[:, 0] - f_true + span / 2) % span - span / 2
    assert np.all(np.abs(err) <= 1.01 / nt)


def test_scene_estimator(small_radar, echo):
    est = SceneEstimator(radar=small_radar, P=64, k_max=1)
    table = est.fit_predict(echo)
    assert table.shape == (1, 3)
    assert table[0, 1] == pytest.approx(10.0, abs=0.05)
    assert table[0, 2] == pytest.approx(0.92, abs=0.05)
    assert len(est.estimates_) == 1 and est.fold_scan_.best_k == 0
    np.testing.assert_array_equal(est.predict(echo), table)
