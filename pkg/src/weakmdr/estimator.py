"""Weak values, weak-valued probabilities, precision/disturbance and MDR reports.

Everything below :func:`weak_expectation` accepts numpy arrays with leading
batch dimensions, so the bootstrap can push thousands of resampled tables
through the same code path as a single exact distribution.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import qstate as qs
from .circuits import CircuitSpec, OutcomeDistribution, ProbeCoupling, Variant, simulate
from .noise import NoiseModel

STRENGTH_FLOOR = 0.05
NORMALIZATION_TOL = 1e-10
# squared RMS values this close to zero are roundoff, not signal
RMS_ZERO_TOL = 1e-12


class NoiseAmplificationWarning(UserWarning):
    """Weak strength below the floor; the 1/S division amplifies shot noise."""


class EmptyPostSelectionError(ZeroDivisionError):
    """A post-selected outcome was never observed."""


class ImaginaryRMSError(ValueError):
    """The weighted sum of squared changes came out negative."""

    def __init__(self, squared):
        self.squared = squared
        super().__init__(f"mean squared change is negative ({squared!r}); RMS is imaginary")


@dataclass(frozen=True)
class PostSelectedStats:
    """Probe statistics conditioned on a final outcome ``f``.

    ``p_final[..., i]`` is P(f) and ``cond[..., i, j]`` is P(probe | f) with
    index 0 for +1 and 1 for -1 on both axes. ``final`` names the
    post-selection observable: ``"Xf"`` (disturbance) or ``"Zm"`` (precision).
    """

    p_final: np.ndarray
    cond: np.ndarray
    final: str = "Xf"

    @classmethod
    def from_joint(cls, joint, final: str = "Xf", strict: bool = True) -> "PostSelectedStats":
        """Build from a joint table indexed ``[..., probe, final]``.

        ``joint`` may hold counts or probabilities. With ``strict`` an empty
        post-selection column raises; otherwise it yields NaN conditionals.
        """
        joint = np.asarray(joint, dtype=float)
        total = joint.sum(axis=(-2, -1))
        col = joint.sum(axis=-2)
        if strict and np.any(col <= 0):
            raise EmptyPostSelectionError(f"no events with {final} = " +
                                          ("+1" if np.any(col[..., 0] <= 0) else "-1"))
        with np.errstate(invalid="ignore", divide="ignore"):
            p_final = col / total[..., None]
            cond = np.swapaxes(joint, -1, -2) / col[..., None]
        return cls(p_final, cond, final)

    def check(self, tol: float = 1e-12) -> None:
        if np.any(np.abs(self.cond.sum(axis=-1) - 1) > tol):
            raise ValueError("conditional probe probabilities do not sum to 1")
        if np.any(np.abs(self.p_final.sum(axis=-1) - 1) > tol):
            raise ValueError("final-outcome probabilities do not sum to 1")


@dataclass(frozen=True)
class QuasiProbTable:
    """Weak-valued probabilities for a change of +2, 0 and -2.

    Entries are not clamped: they can be negative or exceed one.
    """

    p_plus2: np.ndarray | float
    p_zero: np.ndarray | float
    p_minus2: np.ndarray | float

    def total(self):
        return self.p_plus2 + self.p_zero + self.p_minus2

    def as_array(self) -> np.ndarray:
        return np.stack([np.asarray(self.p_plus2), np.asarray(self.p_zero),
                         np.asarray(self.p_minus2)], axis=-1)


def _check_strength(strength: float, floor: float) -> None:
    if not strength > 0:
        raise ValueError(f"weak strength must be positive, got {strength}")
    if strength < floor:
        warnings.warn(f"weak strength {strength:g} below {floor:g}: estimates "
                      f"amplify noise by {1 / strength:.0f}x", NoiseAmplificationWarning,
                      stacklevel=3)


def weak_expectation(stats: PostSelectedStats, f: int, strength: float,
                     floor: float = STRENGTH_FLOOR):
    """Weak expectation of the probed observable given final outcome ``f``.

    ``[P(probe=+1|f) - P(probe=-1|f)] / strength``; not restricted to [-1, 1].
    """
    if f not in (1, -1):
        raise ValueError(f"f must be +1 or -1, got {f}")
    _check_strength(strength, floor)
    i = 0 if f == 1 else 1
    return (stats.cond[..., i, 0] - stats.cond[..., i, 1]) / strength


def weak_prob_table(stats: PostSelectedStats, strength: float,
                    floor: float = STRENGTH_FLOOR) -> QuasiProbTable:
    plus = weak_expectation(stats, 1, strength, floor)
    minus = weak_expectation(stats, -1, strength, floor=0.0)
    p_plus2 = 0.5 * (1 - plus) * stats.p_final[..., 0]
    p_minus2 = 0.5 * (1 + minus) * stats.p_final[..., 1]
    return QuasiProbTable(p_plus2, 1 - p_plus2 - p_minus2, p_minus2)


def rms_squared(t: QuasiProbTable):
    return 4 * (np.asarray(t.p_plus2) + np.asarray(t.p_minus2))


def rms_from_table(t: QuasiProbTable) -> float:
    """Root-mean-square change; raises :class:`ImaginaryRMSError` if negative."""
    sq = float(rms_squared(t))
    if sq < -RMS_ZERO_TOL:
        raise ImaginaryRMSError(sq)
    return 0.0 if sq <= RMS_ZERO_TOL else float(np.sqrt(sq))


def rms_values(t: QuasiProbTable) -> np.ndarray:
    """Vectorised RMS; imaginary entries come back as NaN."""
    sq = rms_squared(t)
    out = np.full(np.shape(sq), np.nan)
    out[np.abs(sq) <= RMS_ZERO_TOL] = 0.0
    big = sq > RMS_ZERO_TOL
    out[big] = np.sqrt(sq[big])
    return out


# -- from circuit distributions ---------------------------------------------

def stats_from_postselected(ps, final: str, strict: bool = True) -> PostSelectedStats:
    """Extract probe-vs-final statistics from ``[..., zp, final, zm]`` tables.

    ``final="Xf"`` post-selects on the system readout (the MA probe is summed
    out); ``final="Zm"`` post-selects on the MA probe readout.
    """
    ps = np.asarray(ps, dtype=float)
    if final == "Xf":
        joint = ps.sum(axis=-1)
    elif final == "Zm":
        joint = ps.sum(axis=-2)
    else:
        raise ValueError(f"final must be 'Xf' or 'Zm', got {final!r}")
    return PostSelectedStats.from_joint(joint, final, strict=strict)


def precision_table(ps, weak_strength: float, **kw) -> QuasiProbTable:
    return weak_prob_table(stats_from_postselected(ps, "Zm", **kw), weak_strength)


def disturbance_table(ps, weak_strength: float, **kw) -> QuasiProbTable:
    return weak_prob_table(stats_from_postselected(ps, "Xf", **kw), weak_strength)


@dataclass(frozen=True)
class MdrReport:
    epsilon: float
    eta: float
    delta_x: float
    delta_z: float
    bound: float
    heisenberg_lhs: float
    ozawa_lhs: float
    violated_heisenberg: bool
    satisfied_ozawa: bool


def assemble_report(epsilon: float, eta: float, delta_x: float, delta_z: float,
                    bound: float) -> MdrReport:
    heis = epsilon * eta
    ozawa = heis + epsilon * delta_x + eta * delta_z
    return MdrReport(float(epsilon), float(eta), float(delta_x), float(delta_z),
                     float(bound), float(heis), float(ozawa),
                     bool(heis < bound), bool(ozawa >= bound))


def mdr_report(eps: float, eta: float, state_before_ma: qs.State) -> MdrReport:
    """Report for Z precision ``eps`` and X disturbance ``eta``.

    Uncertainties and the bound |<Y>| are evaluated on the system state just
    after the weak measurement.
    """
    return assemble_report(
        eps, eta,
        qs.std_uncertainty(state_before_ma, qs.PAULI_X),
        qs.std_uncertainty(state_before_ma, qs.PAULI_Z),
        abs(qs.expectation(state_before_ma, qs.PAULI_Y)),
    )


# -- exact pipeline ----------------------------------------------------------

@dataclass(frozen=True)
class ExactRun:
    precision: OutcomeDistribution
    disturbance: OutcomeDistribution
    report: MdrReport
    precision_table: QuasiProbTable
    disturbance_table: QuasiProbTable


def settings(weak_strength: float, ma_strength: float, *, variant=Variant.PHYSICAL,
             alpha: complex = 1 / np.sqrt(2), beta: complex = 1j / np.sqrt(2),
             feed_forward: bool = False) -> dict[str, CircuitSpec]:
    """The two weak-measurement configurations behind one MDR data point."""
    base = CircuitSpec.make(weak_strength, ma_strength, alpha=alpha, beta=beta,
                            variant=variant, feed_forward=feed_forward)
    return {
        "precision": base,
        "disturbance": base.replace(weak=ProbeCoupling(base.weak.gamma, "X")),
    }


def exact_run(weak_strength: float, ma_strength: float, noise: NoiseModel | None = None,
              **kw) -> ExactRun:
    """Exact precision, disturbance and bound for one (weak, MA) setting."""
    cfg = settings(weak_strength, ma_strength, **kw)
    prec = simulate(cfg["precision"], noise)
    dist = simulate(cfg["disturbance"], noise)
    pt = precision_table(prec.postselected(), weak_strength)
    dt = disturbance_table(dist.postselected(), weak_strength)
    report = mdr_report(rms_from_table(pt), rms_from_table(dt), prec.post_weak_state)
    return ExactRun(prec, dist, report, pt, dt)


def exact_report(weak_strength: float, ma_strength: float,
                 noise: NoiseModel | None = None, **kw) -> MdrReport:
    return exact_run(weak_strength, ma_strength, noise, **kw).report


def closed_form_precision(s):
    return np.sqrt(2 * (1 - np.asarray(s, dtype=float)))


def closed_form_disturbance(s):
    s = np.asarray(s, dtype=float)
    return np.sqrt(2 * (1 - np.sqrt(1 - s**2)))
