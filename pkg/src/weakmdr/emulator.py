"""Noise calibration and finite-count emulation of the coincidence data.

One MDR data point needs five measurement settings on the physical circuit:

``precision``    weak Z probe, post-select on the MA probe readout
``disturbance``  weak X probe, post-select on the final system X readout
``tomo_X/Y/Z``   weak Z probe, MA off, photon 2 read out in X, Y or Z

Every setting is sampled independently with its own generator derived from
``(seed, point, setting)``, so results do not depend on evaluation order.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import optimize

from . import circuits as cc
from . import estimator as est
from . import qstate as qs
from .noise import NoiseModel
from .qstate import Role

log = logging.getLogger(__name__)

SETTINGS = ("precision", "disturbance", "tomo_X", "tomo_Y", "tomo_Z")
PAPER_ENTANGLED_FIDELITY = 0.959
PAPER_TELEPORTED_FIDELITY = 0.934
PAPER_BOUND = 0.80
CALIBRATION_XTOL = 1e-6

Y_PLUS = (1 / np.sqrt(2), 1j / np.sqrt(2))


class UnreachableTargetError(ValueError):
    pass


# -- calibration -------------------------------------------------------------

def entangled_fidelity(coherence: float) -> float:
    """Fidelity of the dephased source pair with (|HH> + i|VV>)/sqrt(2)."""
    roles = (Role.SYS_POL1, Role.SYS_POL2)
    ideal = qs.PureState([Y_PLUS[0], 0, 0, Y_PLUS[1]], roles)
    slot = cc.NoiseSlot("source", Role.SYS_POL1, "Z")
    ch = slot.channel(NoiseModel(coherence, 1.0))
    rho = ideal.to_density() if ch is None else qs.apply_channel(ideal, ch, (Role.SYS_POL1,))
    return qs.fidelity(rho, ideal)


def teleported_fidelity(noise: NoiseModel) -> float:
    """Fidelity of the teleported photon-2 state with the ideal input.

    Both probes are switched off (zero strength) and only the x1 = +1
    branch is kept.
    """
    spec = cc.CircuitSpec.make(0.0, 0.0, alpha=Y_PLUS[0], beta=Y_PLUS[1],
                               variant=cc.Variant.PHYSICAL)
    dist = cc.simulate(spec, noise)
    return qs.fidelity(dist.post_weak_state, qs.qubit(*Y_PLUS, Role.SYS_POL2))


def _bisect(fn, target: float, what: str) -> float:
    lo, hi = fn(0.0) - target, fn(1.0) - target
    if abs(hi) <= CALIBRATION_XTOL:
        return 1.0
    if abs(lo) <= CALIBRATION_XTOL:
        return 0.0
    if lo * hi > 0:
        raise UnreachableTargetError(
            f"{what} target {target} not reachable: range [{lo + target:.6f}, {hi + target:.6f}]")
    return float(optimize.bisect(lambda x: fn(x) - target, 0.0, 1.0, xtol=CALIBRATION_XTOL))


def calibrate_noise(f_ent_target: float = PAPER_ENTANGLED_FIDELITY,
                    f_tel_target: float = PAPER_TELEPORTED_FIDELITY) -> NoiseModel:
    """Solve for source coherence, then interferometer visibility."""
    for name, val in (("entangled", f_ent_target), ("teleported", f_tel_target)):
        if not 0.5 < val <= 1.0:
            raise ValueError(f"{name} fidelity target {val} outside (0.5, 1]")
    c = _bisect(entangled_fidelity, f_ent_target, "entangled-state fidelity")
    v = _bisect(lambda v: teleported_fidelity(NoiseModel(c, v)), f_tel_target,
                "teleported-state fidelity")
    return NoiseModel(c, v)


def post_weak_bound(weak_strength: float, noise: NoiseModel | None = None) -> float:
    """|<Y>| of the teleported state just after the weak Z probe."""
    spec = cc.CircuitSpec.make(weak_strength, 0.0, variant=cc.Variant.PHYSICAL)
    return abs(qs.expectation(cc.simulate(spec, noise).post_weak_state, qs.PAULI_Y))


def default_weak_strength(noise: NoiseModel | None = None, bound: float = PAPER_BOUND) -> float:
    """Weak strength at which the simulated bound equals ``bound``."""
    noise = noise or NoiseModel.ideal()
    top = post_weak_bound(0.0, noise)
    if top < bound:
        raise UnreachableTargetError(f"noise caps the bound at {top:.4f} < {bound}")
    return float(optimize.brentq(lambda w: post_weak_bound(w, noise) - bound, 0.0, 1.0,
                                 xtol=1e-12))


# -- settings and sampling ---------------------------------------------------

def experiment_settings(weak_strength: float, ma_strength: float, *,
                        feed_forward: bool = False) -> dict[str, cc.CircuitSpec]:
    base = est.settings(weak_strength, ma_strength, feed_forward=feed_forward)
    tomo = base["precision"].replace(ma=cc.ProbeCoupling.from_strength(0.0))
    out = dict(base)
    for b in "XYZ":
        out[f"tomo_{b}"] = tomo.replace(final_basis=b)
    return out


def exact_bins(weak_strength: float, ma_strength: float, noise: NoiseModel | None = None,
               feed_forward: bool = False) -> dict[str, dict[str, float]]:
    """Named 16-bin probability tables for every setting of one data point."""
    specs = experiment_settings(weak_strength, ma_strength, feed_forward=feed_forward)
    return {name: cc.detector_bins(cc.simulate(spec, noise)) for name, spec in specs.items()}


@dataclass(frozen=True)
class ShotConfig:
    total_pairs: int = 30000
    seed: int = 0
    bootstrap_resamples: int = 1000

    def __post_init__(self):
        if self.total_pairs <= 0:
            raise ValueError("total_pairs must be positive")
        if self.bootstrap_resamples < 2:
            raise ValueError("need at least two bootstrap resamples")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def generator(self, *key: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, *key]))


@dataclass(frozen=True)
class CountsTable:
    counts: dict
    total_pairs: int
    seed: int
    setting: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(int(n) < 0 for n in self.counts.values()):
            raise ValueError("negative counts")
        if sum(self.counts.values()) != self.total_pairs:
            raise ValueError("counts do not add up to total_pairs")

    def as_joint(self, detectors: cc.DetectorMap = cc.DEFAULT_DETECTORS) -> np.ndarray:
        return cc.bins_to_joint(self.counts, detectors)

    def records(self, detectors: cc.DetectorMap = cc.DEFAULT_DETECTORS) -> list[dict]:
        rows = []
        for outcome, name in detectors.bins():
            x1, zp, final, zm = outcome
            d1, d2 = name.split("&")
            rows.append(dict(setting=self.setting, bin=name, photon1=d1, photon2=d2,
                             x1=x1, zp=zp, final=final, zm=zm, count=int(self.counts[name])))
        return rows


def _validated(dist: Mapping[str, float]) -> tuple[list[str], np.ndarray]:
    names = list(dist)
    p = np.array([dist[n] for n in names], dtype=float)
    if np.any(p < 0):
        raise ValueError("negative probability in sampling distribution")
    total = p.sum()
    if abs(total - 1) > 1e-9:
        raise ValueError(f"probabilities sum to {total}, expected 1")
    return names, p / total


def sample_counts(dist: Mapping[str, float], cfg: ShotConfig, key: tuple[int, ...] = (0,),
                  setting: str = "") -> CountsTable:
    """Multinomial draw of ``cfg.total_pairs`` coincidences."""
    names, p = _validated(dist)
    draw = cfg.generator(*key).multinomial(cfg.total_pairs, p)
    return CountsTable(dict(zip(names, (int(n) for n in draw))), cfg.total_pairs, cfg.seed,
                       setting, {"key": list(key)})


def sample_experiment(bins: Mapping[str, Mapping[str, float]], cfg: ShotConfig,
                      point: int = 0) -> dict[str, CountsTable]:
    return {name: sample_counts(bins[name], cfg, (point, i, 0), name)
            for i, name in enumerate(SETTINGS)}


# -- estimation --------------------------------------------------------------

@dataclass(frozen=True)
class ErrorEstimate:
    value: float
    stderr: float
    method: str = "bootstrap"
    n_valid: int = 0


@dataclass(frozen=True)
class MdrEstimate:
    report: est.MdrReport
    errors: dict
    issues: dict

    def stderr(self, name: str) -> float:
        e = self.errors.get(name)
        return float("nan") if e is None else e.stderr


QUANTITIES = ("epsilon", "eta", "delta_x", "delta_z", "bound", "heisenberg_lhs", "ozawa_lhs")


def _retained(joint: np.ndarray, feed_forward: bool) -> np.ndarray:
    return joint.sum(axis=-4) if feed_forward else joint[..., 0, :, :, :]


def _pauli_mean(joint: np.ndarray, feed_forward: bool) -> np.ndarray:
    kept = _retained(joint, feed_forward).sum(axis=(-3, -1))
    with np.errstate(invalid="ignore", divide="ignore"):
        return (kept[..., 0] - kept[..., 1]) / kept.sum(axis=-1)


def estimate_arrays(joints: Mapping[str, np.ndarray], weak_strength: float,
                    feed_forward: bool = False) -> dict[str, np.ndarray]:
    """All report quantities from (possibly batched) joint count tables.

    A zero weak strength leaves precision and disturbance undefined (NaN).
    """
    batch = joints["precision"].shape[:-4]
    if weak_strength > 0:
        prec = est.precision_table(_retained(joints["precision"], feed_forward), weak_strength,
                                   strict=False)
        dist = est.disturbance_table(_retained(joints["disturbance"], feed_forward),
                                     weak_strength, strict=False)
        eps, eta = est.rms_values(prec), est.rms_values(dist)
        eps_sq, eta_sq = est.rms_squared(prec), est.rms_squared(dist)
    else:
        eps = eta = eps_sq = eta_sq = np.full(batch, np.nan)
    mx, my, mz = (_pauli_mean(joints[f"tomo_{b}"], feed_forward) for b in "XYZ")
    dx = np.sqrt(np.clip(1 - mx**2, 0.0, None))
    dz = np.sqrt(np.clip(1 - mz**2, 0.0, None))
    heis = eps * eta
    return dict(epsilon=eps, eta=eta, delta_x=dx, delta_z=dz, bound=np.abs(my),
                heisenberg_lhs=heis, ozawa_lhs=heis + eps * dx + eta * dz,
                _eps_sq=eps_sq, _eta_sq=eta_sq)


def _issues(values: Mapping[str, np.ndarray], joints, feed_forward,
            weak_strength: float) -> dict[str, str]:
    out = {}
    for name, setting, final in (("epsilon", "precision", "Zm"), ("eta", "disturbance", "Xf")):
        if weak_strength <= 0:
            out[name] = "undefined at zero weak strength"
            continue
        ps = _retained(joints[setting], feed_forward)
        try:
            est.stats_from_postselected(ps, final)
        except est.EmptyPostSelectionError as exc:
            out[name] = f"empty post-selection: {exc}"
            continue
        sq = float(values[f"_{name[:3]}_sq"])
        if not np.isfinite(values[name]):
            out[name] = f"imaginary RMS: squared value {sq:.6g}"
    for b, name in (("X", "delta_x"), ("Y", "bound"), ("Z", "delta_z")):
        if not np.isfinite(values[name]):
            out[name] = f"no retained events in tomo_{b}"
    if not np.isfinite(values["heisenberg_lhs"]):
        out.setdefault("heisenberg_lhs", "depends on an unavailable estimate")
    if not np.isfinite(values["ozawa_lhs"]):
        out.setdefault("ozawa_lhs", "depends on an unavailable estimate")
    return out


def estimate_from_counts(counts: Mapping[str, CountsTable], spec: cc.CircuitSpec,
                         resamples: int | None = 1000, seed: int | None = None,
                         point: int = 0) -> MdrEstimate:
    """Frequencies to an MDR report with bootstrap standard errors.

    ``spec`` supplies the weak strength and the feed-forward mode. Each
    bootstrap replicate redraws every setting from its observed frequencies
    with the same number of pairs. ``resamples=None`` skips the bootstrap.
    """
    joints = {name: counts[name].as_joint().astype(float) for name in SETTINGS}
    w, ff = spec.weak.strength, spec.feed_forward
    central = estimate_arrays(joints, w, ff)
    issues = _issues(central, joints, ff, w)
    report = est.assemble_report(*(float(central[q]) for q in QUANTITIES[:5]))
    errors = {}
    if resamples:
        seed = counts[SETTINGS[0]].seed if seed is None else seed
        cfg = ShotConfig(1, seed, resamples)
        boot = {}
        for i, name in enumerate(SETTINGS):
            n = int(joints[name].sum())
            p = (joints[name] / n).ravel()
            draws = cfg.generator(point, i, 1).multinomial(n, p, size=resamples)
            boot[name] = draws.reshape((resamples, 2, 2, 2, 2)).astype(float)
        values = estimate_arrays(boot, w, ff)
        for q in QUANTITIES:
            v = values[q]
            ok = np.isfinite(v)
            se = float(np.std(v[ok], ddof=1)) if ok.sum() > 1 else float("nan")
            errors[q] = ErrorEstimate(float(central[q]), se, "bootstrap", int(ok.sum()))
            if ok.sum() < resamples:
                log.warning("%s: %d of %d bootstrap replicates undefined", q,
                            resamples - ok.sum(), resamples)
    return MdrEstimate(report, errors, issues)


def estimate_from_probabilities(bins: Mapping[str, Mapping[str, float]],
                                spec: cc.CircuitSpec) -> est.MdrReport:
    """Infinite-count limit: exact probabilities used as frequencies."""
    joints = {name: cc.bins_to_joint(bins[name]) for name in SETTINGS}
    central = estimate_arrays(joints, spec.weak.strength, spec.feed_forward)
    return est.assemble_report(*(float(central[q]) for q in QUANTITIES[:5]))


def run_point(weak_strength: float, ma_strength: float, noise: NoiseModel | None = None,
              shots: ShotConfig | None = None, point: int = 0,
              feed_forward: bool = False) -> MdrEstimate:
    """One data point, exact (``shots=None``) or Monte Carlo."""
    spec = experiment_settings(weak_strength, ma_strength, feed_forward=feed_forward)["precision"]
    if shots is None:
        if weak_strength > 0:
            report = est.exact_report(weak_strength, ma_strength, noise,
                                      feed_forward=feed_forward)
            return MdrEstimate(report, {}, {})
        state = cc.simulate(spec, noise).post_weak_state
        report = est.mdr_report(float("nan"), float("nan"), state)
        issues = {q: "undefined at zero weak strength" for q in ("epsilon", "eta")}
        return MdrEstimate(report, {}, issues)
    bins = exact_bins(weak_strength, ma_strength, noise, feed_forward)
    counts = sample_experiment(bins, shots, point)
    return estimate_from_counts(counts, spec, shots.bootstrap_resamples, shots.seed, point)


def with_seed(cfg: ShotConfig, seed: int) -> ShotConfig:
    return dataclasses.replace(cfg, seed=seed)
