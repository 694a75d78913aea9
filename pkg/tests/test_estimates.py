"""Ratio checks: determinism, seed nesting, homogeneity, hypothesis gates."""

import numpy as np
import pytest

from gkdvlab.estimates import ESTIMATE_IDS, EstimateSpec, lip_norm_estimate, verify
from gkdvlab.solver import NonlinearityG

# small grid/ensemble so each call stays well under a second
FAST = dict(ensemble=8, size=128, half_length=32.0)


def test_spec_validation():
    with pytest.raises(ValueError, match="known ids"):
        EstimateSpec("fourier_restriction")
    with pytest.raises(ValueError):
        EstimateSpec("kato", ensemble=0)
    with pytest.raises(ValueError):
        EstimateSpec("kato", interval=(1.0, 1.0))
    with pytest.raises(ValueError):
        EstimateSpec("kato", amplitude=0.0)
    with pytest.raises(ValueError):
        EstimateSpec("kato", decays=())


def test_reports_are_reproducible():
    spec = EstimateSpec("stein_tomas", seed=7, **FAST)
    first = verify(spec)
    second = verify(spec)
    assert first.to_json() == second.to_json()  # wall time is excluded
    assert first.wall_time != second.wall_time or first.wall_time >= 0.0


def test_growing_the_ensemble_keeps_early_samples():
    small = verify(EstimateSpec("kato", ensemble=4, size=128, half_length=32.0))
    large = verify(EstimateSpec("kato", ensemble=8, size=128, half_length=32.0))
    assert large.ratios[:4] == small.ratios


def test_ratios_are_amplitude_invariant():
    base = verify(EstimateSpec("stein_tomas", **FAST))
    scaled = verify(EstimateSpec("stein_tomas", amplitude=2.0, **FAST))
    for a, b in zip(base.ratios, scaled.ratios):
        assert b == pytest.approx(a, rel=1e-12)
    ql = verify(EstimateSpec("nonlinear_i", ensemble=4, size=128, half_length=32.0))
    qs = verify(EstimateSpec("nonlinear_i", amplitude=2.0, ensemble=4, size=128,
                             half_length=32.0))
    for a, b in zip(ql.ratios, qs.ratios):
        assert b == pytest.approx(a, rel=1e-10)


@pytest.mark.parametrize("estimate_id,params", [
    ("stein_tomas", {"r": 4.0}),
    ("kato", {"q": 1.5}),
    ("strichartz", {"s": 2.0, "r": 2.0}),
    ("inhom_linf", {"r": 4.0}),
    ("chain_rule", {"s": 6.0}),
    ("counterexample", {"family": "log_tail", "p": 0.4}),
])
def test_out_of_hypothesis_parameters_are_refused(estimate_id, params):
    with pytest.raises(ValueError):
        verify(EstimateSpec(estimate_id, params=params, ensemble=1))


def test_restriction_and_smoothing_routes_coincide():
    # r = 6 on one side and (s, r) = (1/6, 2) on the other are the same
    # inequality written through different norms; on matched draws the
    # sampled ratios must agree
    a = verify(EstimateSpec("stein_tomas", seed=3, **FAST))
    b = verify(EstimateSpec("strichartz", seed=3, **FAST))
    assert len(a.ratios) == len(b.ratios)
    for x, y in zip(a.ratios, b.ratios):
        assert y == pytest.approx(x, rel=1e-12)


def test_interpolation_ratio_is_order_one():
    report = verify(EstimateSpec("interpolation", ensemble=6, size=128,
                                 half_length=32.0))
    assert 0.0 < report.max_ratio < 4.0
    assert all(np.isfinite(report.ratios))


def test_refinement_trace_shape():
    plain = verify(EstimateSpec("stein_tomas", ensemble=4, size=128, half_length=32.0))
    assert len(plain.refinement) == 3
    assert all("interval" not in entry for entry in plain.refinement)
    widened = verify(EstimateSpec("inhom_linf", ensemble=2, size=64,
                                  half_length=16.0, samples_per_unit=32))
    assert len(widened.refinement) == 4
    assert "interval" in widened.refinement[-1]
    assert all("interval" not in e for e in widened.refinement[:-1])


def test_counterexample_sharp_band_closed_forms():
    report = verify(EstimateSpec("counterexample",
                                 params={"family": "sharp_band", "n": (4, 16)}))
    table = report.extras["table"]
    assert [row["n"] for row in table] == [4, 16]
    for row in table:
        assert row["lhat"] == pytest.approx(1.0, abs=1e-10)
        assert row["sobolev"] == pytest.approx(row["predicted_sobolev"], rel=0.05)
    # the stacked-frequency family keeps the critical norm pinned while the
    # polynomial-scale norm grows without bound
    assert table[1]["sobolev"] > table[0]["sobolev"]


def test_counterexample_log_tail_growth():
    report = verify(EstimateSpec("counterexample",
                                 params={"family": "log_tail", "n": (8, 64)}))
    table = report.extras["table"]
    lhats = [row["lhat"] for row in table]
    assert lhats == sorted(lhats) and lhats[0] < lhats[-1]
    assert table[-1]["sobolev"] / table[0]["sobolev"] < 1.5


def test_csv_round_trip(tmp_path):
    report = verify(EstimateSpec("stein_tomas", ensemble=6, size=128,
                                 half_length=32.0))
    path = tmp_path / "samples.csv"
    report.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "sample,decay,ratio"
    assert len(lines) == 1 + len(report.samples)
    decays = {float(line.split(",")[1]) for line in lines[1:]}
    assert decays == {0.6, 1.0, 1.6}


def test_every_estimate_id_dispatches():
    for estimate_id in ESTIMATE_IDS:
        spec = EstimateSpec(estimate_id, ensemble=1, size=64, half_length=16.0,
                            samples_per_unit=16)
        report = verify(spec)
        assert report.estimate_id == estimate_id
        assert np.isfinite(report.max_ratio)


def test_lip_seminorm_known_values():
    linear = NonlinearityG(alpha=2.0, rule="custom", func=lambda v: v)
    assert lip_norm_estimate(linear, 1.0) == 1.0
    quintic = NonlinearityG(alpha=5.0)
    assert lip_norm_estimate(quintic, 5.0) == pytest.approx(120.0, rel=1e-10)


def test_lip_seminorm_flags_unbounded_quotients():
    rough = NonlinearityG(alpha=2.0, rule="custom", func=lambda v: np.abs(v) ** 0.5)
    coarse = lip_norm_estimate(rough, 1.0, samples=200)
    fine = lip_norm_estimate(rough, 1.0, samples=400)
    assert fine > 10.0 * coarse  # diverges as the sample grid deepens


def test_lip_seminorm_validation():
    quintic = NonlinearityG(alpha=5.0)
    with pytest.raises(ValueError):
        lip_norm_estimate(quintic, 0.0)
    with pytest.raises(ValueError):
        lip_norm_estimate(quintic, 5.0, samples=4)
