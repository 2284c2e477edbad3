import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from weakmdr import circuits as cc
from weakmdr import estimator as est
from weakmdr.emulator import calibrate_noise

import oracles

S_GRID = np.linspace(0, 1, 21)


def stats(cond_plus, cond_minus=(0.5, 0.5), p_final=(0.5, 0.5)):
    return est.PostSelectedStats(np.array(p_final), np.array([cond_plus, cond_minus]))


def oracle_table(w, s, which, coherence=1.0):
    """(p_plus2, p_zero, p_minus2) from Margenau-Hill quasi-probabilities."""
    basis = "Z" if which == "precision" else "X"
    rho = oracles.post_weak_state(w, basis, coherence=coherence)
    m = oracles.margenau_hill(rho, s, basis, basis, on_probe=which == "precision")
    return np.array([m[1, 0], m[0, 0] + m[1, 1], m[0, 1]])


# -- weak expectation --------------------------------------------------------

@pytest.mark.parametrize("strength", [0.1, 0.5, 1.0])
def test_symmetric_probe_gives_zero(strength):
    assert est.weak_expectation(stats((0.5, 0.5)), 1, strength) == 0.0


def test_direct_substitution():
    assert est.weak_expectation(stats((0.6, 0.4)), 1, 0.5) == pytest.approx(0.4)


def test_weak_value_matches_oracle():
    w = 0.39
    spec = est.settings(w, 1.0)["disturbance"]
    ps = cc.simulate(spec).postselected()
    got = est.weak_expectation(est.stats_from_postselected(ps, "Xf"), 1, w)
    rho = oracles.post_weak_state(w, "X")
    m = oracles.margenau_hill(rho, 1.0, "X", "X", on_probe=False)
    expected = (m[0, 0] - m[1, 0]) / (m[0, 0] + m[1, 0])
    assert got == pytest.approx(expected, abs=1e-10)


def test_weak_value_can_leave_unit_interval():
    theta, w = 0.6, 1e-3
    i = np.array([np.cos(theta), np.sin(theta)])
    f = np.array([1, -1]) / np.sqrt(2)
    pure = (f @ oracles.Z @ i) / (f @ i)
    assert pure > 5
    spec = cc.CircuitSpec.make(w, 0.0, alpha=i[0], beta=i[1], final_basis="X")
    ps = cc.simulate(spec).postselected()
    with pytest.warns(est.NoiseAmplificationWarning):
        got = est.weak_expectation(est.stats_from_postselected(ps, "Xf"), -1, w)
    rho = oracles.post_weak_state(w, "Z", oracles.input_state(*i))
    m = oracles.margenau_hill(rho, 0.0, "Z", "X", on_probe=False)
    assert got == pytest.approx((m[0, 1] - m[1, 1]) / (m[0, 1] + m[1, 1]), abs=1e-10)
    assert got == pytest.approx(pure, rel=1e-5)


def test_strength_must_be_positive():
    for bad in (0.0, -0.1):
        with pytest.raises(ValueError, match="positive"):
            est.weak_expectation(stats((0.6, 0.4)), 1, bad)


def test_low_strength_warns():
    with pytest.warns(est.NoiseAmplificationWarning):
        est.weak_expectation(stats((0.51, 0.49)), 1, 0.01)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        est.weak_expectation(stats((0.51, 0.49)), 1, 0.01, floor=0.0)


def test_bad_final_outcome():
    with pytest.raises(ValueError):
        est.weak_expectation(stats((0.6, 0.4)), 0, 0.5)


def test_empty_post_selection():
    joint = np.array([[10.0, 0.0], [5.0, 0.0]])
    with pytest.raises(est.EmptyPostSelectionError, match="-1"):
        est.PostSelectedStats.from_joint(joint)
    lax = est.PostSelectedStats.from_joint(joint, strict=False)
    assert np.all(np.isnan(lax.cond[1]))


# -- quasi-probability tables ------------------------------------------------

@pytest.mark.parametrize("w", [0.05, 0.39, 0.9])
def test_strong_ma_disturbance_table(w):
    table = est.exact_run(w, 1.0).disturbance_table.as_array()
    np.testing.assert_allclose(table, oracle_table(w, 1.0, "disturbance"), atol=1e-12)
    np.testing.assert_allclose(table, [0.25, 0.5, 0.25], atol=1e-12)


def test_ma_off_disturbance_table():
    table = est.exact_run(0.39, 0.0).disturbance_table.as_array()
    np.testing.assert_allclose(table, [0, 1, 0], atol=1e-12)


@pytest.mark.parametrize("which", ["precision", "disturbance"])
@pytest.mark.parametrize("s", [0.0, 0.3, 0.6, 0.95])
@pytest.mark.parametrize("noisy", [False, True])
def test_tables_match_oracle(which, s, noisy):
    noise = calibrate_noise() if noisy else None
    w = 0.3
    run = est.exact_run(w, s, noise, variant=cc.Variant.LOGICAL)
    table = getattr(run, f"{which}_table").as_array()
    if noisy:
        # Margenau-Hill has no readout-flip term; run the oracle joint through the estimator
        spec = est.settings(w, s)[which]
        joint = oracles.brute_joint(w, s, spec.weak.basis,
                                    coherence=noise.source_coherence
                                    * noise.interferometer_visibility,
                                    readout_visibility=noise.interferometer_visibility)
        fn = est.precision_table if which == "precision" else est.disturbance_table
        expected = fn(joint, w).as_array()
    else:
        expected = oracle_table(w, s, which)
    np.testing.assert_allclose(table, expected, atol=1e-12)
    assert table.sum() == pytest.approx(1.0, abs=est.NORMALIZATION_TOL)


joints = hnp.arrays(np.float64, (2, 2, 2), elements=st.floats(0.01, 1.0))


@settings(max_examples=100, deadline=None)
@given(joints, st.floats(0.05, 1.0))
def test_table_normalised_for_any_joint(joint, w):
    joint = joint / joint.sum()
    for fn in (est.precision_table, est.disturbance_table):
        assert float(fn(joint, w).total()) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(hnp.arrays(np.float64, (5, 2, 2, 2), elements=st.floats(0.01, 1.0)), st.floats(0.05, 1.0))
def test_batched_tables_match_loop(batch, w):
    whole = est.precision_table(batch, w).as_array()
    for k in range(batch.shape[0]):
        np.testing.assert_allclose(whole[k], est.precision_table(batch[k], w).as_array(),
                                   rtol=1e-12)


def test_negative_entries_survive():
    # heavily biased probe counts at low strength push a weak value past 1
    s = stats((0.9, 0.1), (0.5, 0.5))
    t = est.weak_prob_table(s, 0.2, floor=0.0)
    assert t.p_plus2 < 0
    assert float(t.total()) == pytest.approx(1.0)


# -- RMS ---------------------------------------------------------------------

def test_rms_examples():
    assert est.rms_from_table(est.QuasiProbTable(0.25, 0.5, 0.25)) == pytest.approx(np.sqrt(2))
    assert est.rms_from_table(est.QuasiProbTable(0.0, 1.0, 0.0)) == 0.0


def test_precision_at_half_strength():
    assert est.rms_from_table(est.exact_run(0.3, 0.5).precision_table) == pytest.approx(1.0,
                                                                                       abs=1e-12)


def test_imaginary_rms_reported_not_clamped():
    t = est.QuasiProbTable(-0.2, 1.15, 0.05)
    with pytest.raises(est.ImaginaryRMSError) as info:
        est.rms_from_table(t)
    assert info.value.squared == pytest.approx(-0.6)
    assert np.isnan(est.rms_values(est.QuasiProbTable(np.array([-0.2, 0.25]),
                                                      np.array([1.15, 0.5]),
                                                      np.array([0.05, 0.25])))[0])


# -- closed forms and reports ------------------------------------------------

@pytest.mark.parametrize("s", S_GRID)
def test_closed_forms_confirmed_by_oracle(s):
    rho = oracles.input_state()
    assert oracles.ozawa_precision_sq(rho, s) == pytest.approx(2 * (1 - s), abs=1e-12)
    assert oracles.ozawa_disturbance_sq(rho, s) == pytest.approx(
        2 * (1 - np.sqrt(1 - s * s)), abs=1e-12)
    for which, closed in (("precision", est.closed_form_precision),
                          ("disturbance", est.closed_form_disturbance)):
        t = oracle_table(0.3, s, which)
        assert 4 * (t[0] + t[2]) == pytest.approx(float(closed(s)) ** 2, abs=1e-12)


@pytest.mark.parametrize("w", [0.05, 0.2, 0.39, 0.7, 0.95])
def test_ideal_values_independent_of_weak_strength(w):
    for s in (0.0, 0.35, 0.8, 1.0):
        r = est.exact_report(w, s)
        assert r.epsilon == pytest.approx(float(est.closed_form_precision(s)), abs=1e-10)
        assert r.eta == pytest.approx(float(est.closed_form_disturbance(s)), abs=1e-10)
        assert r.bound == pytest.approx(np.sqrt(1 - w * w), abs=1e-12)


def test_report_example_s06():
    r = est.exact_report(0.05, 0.6)
    assert r.epsilon == pytest.approx(np.sqrt(0.8), abs=1e-10)
    assert r.eta == pytest.approx(np.sqrt(0.4), abs=1e-10)
    assert r.heisenberg_lhs == pytest.approx(0.566, abs=1e-3)
    assert r.ozawa_lhs == pytest.approx(2.09, abs=5e-3)
    assert r.violated_heisenberg and r.satisfied_ozawa
    assert r.delta_x == pytest.approx(1.0) and r.delta_z == pytest.approx(1.0)


def test_report_strong_ma():
    r = est.exact_report(0.3, 1.0)
    assert r.epsilon == 0.0
    assert r.heisenberg_lhs == 0.0
    assert r.violated_heisenberg


def test_report_ma_off_is_guessing_limit():
    r = est.exact_report(0.3, 0.0)
    assert r.epsilon == pytest.approx(np.sqrt(2), abs=1e-12)
    assert r.eta == 0.0


def test_assemble_report_arithmetic():
    r = est.assemble_report(0.5, 0.4, 0.9, 0.8, 0.3)
    assert r.heisenberg_lhs == pytest.approx(0.2)
    assert r.ozawa_lhs == pytest.approx(0.2 + 0.45 + 0.32)
    assert r.violated_heisenberg and r.satisfied_ozawa


@pytest.mark.parametrize("s", np.linspace(0, 1, 11))
def test_noise_only_increases_precision_and_disturbance(s):
    noise = calibrate_noise()
    for w in (0.1, 0.39, 0.8):
        ideal, noisy = est.exact_report(w, s), est.exact_report(w, s, noise)
        assert noisy.epsilon >= ideal.epsilon - 1e-12
        assert noisy.eta >= ideal.eta - 1e-12
