"""Self-check suites run by ``weakmdr verify``.

The two hooks are negative controls: each must make exactly one suite fail.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from . import circuits as cc
from . import estimator as est
from . import qstate as qs
from .emulator import SETTINGS, ShotConfig, calibrate_noise, exact_bins, sample_experiment

EQUIVALENCE_TOL = 1e-12
CLOSED_FORM_TOL = 1e-10
ROBERTSON_TOL = 1e-10
GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class VerifyHooks:
    clamp_quasi_probabilities: bool = False
    skip_hadamard: bool = False


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str


def _random_input(rng: np.random.Generator) -> tuple[complex, complex]:
    psi = qs.random_pure_state((qs.Role.SYS_POL1,), rng).amplitudes
    return complex(psi[0]), complex(psi[1])


def circuit_equivalence(hooks: VerifyHooks, n_inputs: int = 20, seed: int = 7) -> SuiteResult:
    rng = np.random.default_rng(seed)
    inputs = [_random_input(rng) for _ in range(n_inputs)]
    worst = 0.0
    for (w, s), (a, b), basis in itertools.product(itertools.product(GRID, GRID), inputs, "ZX"):
        spec = cc.CircuitSpec.make(w, s, weak_basis=basis, alpha=a, beta=b)
        logical = cc.simulate(spec)
        phys = cc.run_circuit(cc.build_physical_circuit(spec.replace(variant=cc.Variant.PHYSICAL),
                                                        _skip_hadamard=hooks.skip_hadamard))
        diffs = [np.abs(logical.postselected() - phys.postselected()).max(),
                 np.abs(logical.post_weak_state.matrix - phys.post_weak_state.matrix).max(),
                 np.abs(logical.post_ma_state.matrix - phys.post_ma_state.matrix).max()]
        for zm in cc.OUTCOMES:
            (pl, sl), (pp, sp) = logical.post_ma_conditional[zm], phys.post_ma_conditional[zm]
            diffs.append(abs(pl - pp))
            if sl is not None and sp is not None:
                diffs.append(np.abs(sl.matrix - sp.matrix).max())
        worst = max(worst, *diffs)
    n = len(GRID) ** 2 * n_inputs * 2
    return SuiteResult("circuit-equivalence", bool(worst <= EQUIVALENCE_TOL),
                       f"{n} configurations, max deviation {worst:.2e}")


def _clamp(t: est.QuasiProbTable) -> est.QuasiProbTable:
    return est.QuasiProbTable(*(np.clip(np.asarray(x), 0.0, None) for x in
                                (t.p_plus2, t.p_zero, t.p_minus2)))


def quasi_normalization(hooks: VerifyHooks, seed: int = 11) -> SuiteResult:
    tables = []
    noisy = calibrate_noise()
    for w, s, noise in itertools.product((0.1, 0.39, 0.9), GRID, (None, noisy)):
        run = est.exact_run(w, s, noise)
        tables += [run.precision_table, run.disturbance_table]
    # low-strength finite samples produce weak values outside [-1, 1]
    cfg = ShotConfig(2000, seed, 2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", est.NoiseAmplificationWarning)
        for i, s in enumerate(GRID):
            counts = sample_experiment(exact_bins(0.03, s, noisy), cfg, point=i)
            joints = {k: counts[k].as_joint()[0] for k in SETTINGS}
            tables.append(est.precision_table(joints["precision"], 0.03, strict=False))
            tables.append(est.disturbance_table(joints["disturbance"], 0.03, strict=False))
    if hooks.clamp_quasi_probabilities:
        tables = [_clamp(t) for t in tables]
    arr = np.array([t.as_array() for t in tables])
    worst = float(np.nanmax(np.abs(arr.sum(axis=-1) - 1)))
    negatives = int((arr < 0).sum())
    return SuiteResult("quasi-probability-normalization", bool(worst <= est.NORMALIZATION_TOL),
                       f"{len(tables)} tables, {negatives} negative entries, "
                       f"max |sum - 1| = {worst:.2e}")


def robertson(n_states: int = 1000, seed: int = 3) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(n_states):
        psi = qs.random_pure_state((qs.Role.SYS_POL1,), rng)
        lhs = qs.std_uncertainty(psi, qs.PAULI_X) * qs.std_uncertainty(psi, qs.PAULI_Z)
        worst = min(worst, lhs - abs(qs.expectation(psi, qs.PAULI_Y)))
    return SuiteResult("robertson-bound", bool(worst >= -ROBERTSON_TOL),
                       f"{n_states} random states, min(dX dZ - |<Y>|) = {worst:.2e}")


def closed_forms() -> SuiteResult:
    s_grid = np.linspace(0, 1, 21)
    worst = 0.0
    for w in (0.1, 0.3, 0.5):
        for s in s_grid:
            r = est.exact_report(w, s)
            worst = max(worst, abs(r.epsilon - est.closed_form_precision(s)),
                        abs(r.eta - est.closed_form_disturbance(s)))
    return SuiteResult("closed-forms", bool(worst <= CLOSED_FORM_TOL),
                       f"21 MA strengths x 3 weak strengths, max deviation {worst:.2e}")


def noise_monotonicity() -> SuiteResult:
    noisy = calibrate_noise()
    worst = np.inf
    for w, s in itertools.product((0.1, 0.39, 0.75), GRID):
        ideal, bad = est.exact_report(w, s), est.exact_report(w, s, noisy)
        worst = min(worst, bad.epsilon - ideal.epsilon, bad.eta - ideal.eta)
    return SuiteResult("noise-monotonicity", bool(worst >= -1e-12),
                       f"min(noisy - ideal) over eps and eta = {worst:.2e}")


def run_all(hooks: VerifyHooks = VerifyHooks()) -> list[SuiteResult]:
    return [
        circuit_equivalence(hooks),
        quasi_normalization(hooks),
        robertson(),
        closed_forms(),
        noise_monotonicity(),
    ]
