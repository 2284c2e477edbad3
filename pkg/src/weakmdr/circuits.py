"""Logical and physical realisations of the two-probe weak measurement circuit.

Joint outcome arrays are indexed ``[x1, zp, final, zm]`` where index 0 is
the +1 outcome and index 1 the -1 outcome:

``x1``     photon-1 polarisation in X (teleportation readout)
``zp``     weak probe path in Z
``final``  system polarisation after the measurement apparatus
``zm``     measurement-apparatus probe path in Z

The logical circuit has no teleportation; its ``x1 = -1`` slice is zero.
"""

from __future__ import annotations

import dataclasses
import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import qstate as qs
from .noise import NoiseModel
from .qstate import Role

OUTCOMES = (1, -1)
GAMMA_MIN = 1 / np.sqrt(2)
_GAMMA_TOL = 1e-12


def outcome_index(value: int) -> int:
    if value not in OUTCOMES:
        raise ValueError(f"outcome must be +1 or -1, got {value}")
    return 0 if value == 1 else 1


class Variant(str, enum.Enum):
    LOGICAL = "logical"
    PHYSICAL = "physical"


@dataclass(frozen=True)
class ProbeCoupling:
    """Variable-strength probe: amplitude ``gamma`` and the measured basis."""

    gamma: float
    basis: str = "Z"

    def __post_init__(self):
        if self.basis not in ("Z", "X"):
            raise ValueError(f"probe basis must be 'Z' or 'X', got {self.basis!r}")
        if not GAMMA_MIN - _GAMMA_TOL <= self.gamma <= 1 + _GAMMA_TOL:
            raise ValueError(f"gamma={self.gamma} outside [1/sqrt(2), 1]")
        object.__setattr__(self, "gamma", float(min(max(self.gamma, GAMMA_MIN), 1.0)))

    @classmethod
    def from_strength(cls, strength: float, basis: str = "Z") -> "ProbeCoupling":
        if not 0.0 <= strength <= 1.0:
            raise ValueError(f"strength={strength} outside [0, 1]")
        return cls(float(np.sqrt((1 + strength) / 2)), basis)

    @property
    def gamma_bar(self) -> float:
        return float(np.sqrt(max(1 - self.gamma**2, 0.0)))

    @property
    def strength(self) -> float:
        s = 2 * self.gamma**2 - 1
        # undo the sqrt/square roundoff at the endpoints
        if abs(s) < 1e-12:
            return 0.0
        if abs(s - 1) < 1e-12:
            return 1.0
        return s

    @property
    def coherence(self) -> float:
        """Overlap <A|B> of the two probe pointer states, sqrt(1 - S^2)."""
        return 2 * self.gamma * self.gamma_bar


def coupling_unitary(p: ProbeCoupling) -> qs.Operator:
    """Two-qubit unitary on (system, probe path).

    Acting on ``|sys>|P0>`` it prepares the probe in ``gamma|P0> + gbar|P1>``
    and then flips the path if the system is ``|V>``, so the pointer states
    are ``|A> = gamma|P0> + gbar|P1>`` and ``|B> = gbar|P0> + gamma|P1>``.
    An X-basis probe wraps the control in Hadamards.
    """
    g, gb = p.gamma, p.gamma_bar
    prep = qs.Operator([[g, -gb], [gb, g]], "R")
    U = qs.CNOT @ qs.IDENTITY.kron(prep)
    if p.basis == "X":
        HI = qs.HADAMARD.kron(qs.IDENTITY)
        U = HI @ U @ HI
    return qs.Operator(U.matrix, f"couple{p.basis}({p.strength:.3g})")


@dataclass(frozen=True)
class CircuitSpec:
    alpha: complex
    beta: complex
    weak: ProbeCoupling
    ma: ProbeCoupling
    variant: Variant = Variant.LOGICAL
    feed_forward: bool = False
    final_basis: str = "X"

    def __post_init__(self):
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1) > 1e-10:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {norm}, expected 1")
        if self.ma.basis != "Z":
            raise ValueError("the measurement apparatus probes Z")
        if self.final_basis not in ("X", "Y", "Z"):
            raise ValueError(f"final basis must be X, Y or Z, got {self.final_basis!r}")
        object.__setattr__(self, "variant", Variant(self.variant))

    @classmethod
    def make(cls, weak_strength: float, ma_strength: float, *, weak_basis: str = "Z",
             alpha: complex = 1 / np.sqrt(2), beta: complex = 1j / np.sqrt(2),
             **kwargs) -> "CircuitSpec":
        """Spec from strengths; the default input is the Y = +1 eigenstate."""
        return cls(alpha, beta, ProbeCoupling.from_strength(weak_strength, weak_basis),
                   ProbeCoupling.from_strength(ma_strength, "Z"), **kwargs)

    def replace(self, **changes) -> "CircuitSpec":
        return dataclasses.replace(self, **changes)


# -- executable circuits -----------------------------------------------------

@dataclass(frozen=True)
class Gate:
    op: qs.Operator
    targets: tuple[Role, ...]


@dataclass(frozen=True)
class NoiseSlot:
    """Placeholder filled from a :class:`NoiseModel` at run time.

    ``kind`` selects the knob: ``"source"`` (c), ``"visibility"`` (v),
    ``"combined"`` (c*v) or ``"readout"`` (v, as a bit-flip on a probe path).
    """

    kind: str
    target: Role
    basis: str = "Z"

    def channel(self, noise: NoiseModel) -> qs.KrausChannel | None:
        c, v = noise.source_coherence, noise.interferometer_visibility
        factor = {"source": c, "visibility": v, "combined": c * v, "readout": v}[self.kind]
        if factor == 1.0:
            return None
        basis = "X" if self.kind == "readout" else self.basis
        return qs.KrausChannel.dephasing(factor, basis)


@dataclass(frozen=True)
class Snapshot:
    name: str
    system: Role


@dataclass(frozen=True)
class Circuit:
    spec: CircuitSpec
    initial: qs.PureState
    steps: tuple
    terminal: tuple[tuple[Role, str], ...]
    # (role, basis, outcome) conditioning the snapshots; None keeps every branch
    postselect: tuple[Role, str, int] | None = None


def _final_terminals(spec: CircuitSpec, system: Role) -> list[tuple[Role, str]]:
    return [(Role.WEAK_PATH, "Z"), (system, spec.final_basis), (Role.MA_PATH, "Z")]


def build_logical_circuit(spec: CircuitSpec) -> Circuit:
    """Weak probe, then the measurement apparatus, then terminal readouts."""
    if spec.variant is not Variant.LOGICAL:
        raise ValueError("build_logical_circuit needs a logical spec")
    sys_ = Role.SYS_POL1
    roles = (sys_, Role.WEAK_PATH, Role.MA_PATH)
    initial = qs.tensor_all(qs.qubit(spec.alpha, spec.beta, sys_),
                            qs.basis_state("0", (Role.WEAK_PATH,)),
                            qs.basis_state("0", (Role.MA_PATH,)))
    assert initial.roles == roles
    steps = (
        NoiseSlot("combined", sys_, spec.weak.basis),
        Gate(coupling_unitary(spec.weak), (sys_, Role.WEAK_PATH)),
        Snapshot("post_weak", sys_),
        Gate(coupling_unitary(spec.ma), (sys_, Role.MA_PATH)),
        Snapshot("post_ma", sys_),
        NoiseSlot("readout", Role.WEAK_PATH),
        NoiseSlot("readout", Role.MA_PATH),
    )
    return Circuit(spec, initial, steps, tuple(_final_terminals(spec, sys_)))


def build_physical_circuit(spec: CircuitSpec, *, _skip_hadamard: bool = False) -> Circuit:
    """Two-photon line cluster, weak probe on photon 1, teleport, MA on photon 2.

    An X-basis weak probe cannot be realised by Hadamards on photon 1 alone,
    because logical X on ``alpha|HH> + beta|VV>`` is X1*X2. The leading
    Hadamard is folded into the prepared amplitudes and the trailing one acts
    on photon 2 after teleportation. ``_skip_hadamard`` drops both and exists
    only as a negative control for the verification suite.
    """
    if spec.variant is not Variant.PHYSICAL:
        raise ValueError("build_physical_circuit needs a physical spec")
    p1, p2 = Role.SYS_POL1, Role.SYS_POL2
    x_probe = spec.weak.basis == "X" and not _skip_hadamard
    alpha, beta = spec.alpha, spec.beta
    if x_probe:
        alpha, beta = (alpha + beta) / np.sqrt(2), (alpha - beta) / np.sqrt(2)
    pair = qs.PureState([alpha, 0, 0, beta], (p1, p2))
    initial = qs.tensor_all(pair, qs.basis_state("0", (Role.WEAK_PATH,)),
                            qs.basis_state("0", (Role.MA_PATH,)))
    z_probe = ProbeCoupling(spec.weak.gamma, "Z")

    steps: list = [
        NoiseSlot("source", p1, "Z"),
        Gate(coupling_unitary(z_probe), (p1, Role.WEAK_PATH)),
        NoiseSlot("visibility", p1, "Z"),
    ]
    if spec.feed_forward:
        # classically controlled Z on photon 2 for x1 = -1, deferred to a quantum control
        plus = np.array([[1, 1], [1, 1]]) / 2
        minus = np.eye(2) - plus
        correction = np.kron(plus, np.eye(2)) + np.kron(minus, qs.PAULI_Z.matrix)
        steps.append(Gate(qs.Operator(correction, "FF"), (p1, p2)))
    if x_probe:
        steps.append(Gate(qs.HADAMARD, (p2,)))
    steps += [
        Snapshot("post_weak", p2),
        Gate(coupling_unitary(spec.ma), (p2, Role.MA_PATH)),
        Snapshot("post_ma", p2),
        NoiseSlot("readout", Role.WEAK_PATH),
        NoiseSlot("readout", Role.MA_PATH),
    ]
    terminal = ((p1, "X"), *_final_terminals(spec, p2))
    post = None if spec.feed_forward else (p1, "X", 1)
    return Circuit(spec, initial, tuple(steps), terminal, post)


def build_circuit(spec: CircuitSpec) -> Circuit:
    if spec.variant is Variant.LOGICAL:
        return build_logical_circuit(spec)
    return build_physical_circuit(spec)


# -- running -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Exact joint outcome probabilities plus conditional system states.

    ``joint`` has shape (2, 2, 2, 2) over ``[x1, zp, final, zm]`` and sums to
    one before post-selection. ``retained_mass`` is the probability of the
    kept teleportation branch. ``post_ma_conditional`` maps each MA readout
    ``zm`` to ``(probability, system state)`` within the retained branch.
    """

    joint: np.ndarray
    retained_mass: float
    post_weak_state: qs.DensityState
    post_ma_state: qs.DensityState
    post_ma_conditional: dict
    feed_forward: bool = False
    spec: CircuitSpec | None = None

    def postselected(self) -> np.ndarray:
        """Normalised (2, 2, 2) distribution over ``[zp, final, zm]``."""
        if self.feed_forward:
            return self.joint.sum(axis=0)
        return self.joint[0] / self.retained_mass


def _condition(state: qs.DensityState, post) -> qs.DensityState:
    if post is None:
        return state
    role, basis, outcome = post
    _, cond = qs.project_postselect(state, qs.PAULIS[basis], outcome, (role,))
    return cond


def _measure_joint(state: qs.DensityState, terminal) -> np.ndarray:
    rho = state
    for role, basis in terminal:
        rho = qs.apply_unitary(rho, qs.basis_change(basis), (role,))
    probs = np.clip(np.real(np.diag(rho.matrix)), 0.0, None)
    probs = probs.reshape((2,) * rho.n_qubits)
    order = [rho.index(role) for role, _ in terminal]
    return np.transpose(probs, order)


def run_circuit(circuit: Circuit, noise: NoiseModel | None = None) -> OutcomeDistribution:
    """Density-matrix evolution of ``circuit`` followed by terminal readout."""
    noise = noise or NoiseModel.ideal()
    state = circuit.initial.to_density()
    snaps = {}
    for step in circuit.steps:
        if isinstance(step, Gate):
            state = qs.apply_unitary(state, step.op, step.targets)
        elif isinstance(step, NoiseSlot):
            ch = step.channel(noise)
            if ch is not None:
                state = qs.apply_channel(state, ch, (step.target,))
        elif isinstance(step, Snapshot):
            snaps[step.name] = (_condition(state, circuit.postselect), step.system)
        else:
            raise TypeError(f"unknown circuit step {step!r}")

    joint = _measure_joint(state, circuit.terminal)
    if joint.ndim == 3:
        joint = np.stack([joint, np.zeros_like(joint)])
    joint = joint / joint.sum()

    ff = circuit.spec.feed_forward
    retained = 1.0 if (circuit.postselect is None) else float(joint[0].sum())
    if retained <= 1e-15:
        raise qs.ZeroProbabilityError("post-selected branch has zero probability")

    weak_state, sys_role = snaps["post_weak"]
    ma_state, _ = snaps["post_ma"]
    conditional = {}
    for zm in OUTCOMES:
        try:
            p, cond = qs.project_postselect(ma_state, qs.PAULI_Z, zm, (Role.MA_PATH,))
        except qs.ZeroProbabilityError:
            conditional[zm] = (0.0, None)
            continue
        conditional[zm] = (p, qs.partial_trace(cond, (sys_role,)))
    return OutcomeDistribution(
        joint=joint,
        retained_mass=retained,
        post_weak_state=qs.partial_trace(weak_state, (sys_role,)),
        post_ma_state=qs.partial_trace(ma_state, (sys_role,)),
        post_ma_conditional=conditional,
        feed_forward=ff,
        spec=circuit.spec,
    )


def simulate(spec: CircuitSpec, noise: NoiseModel | None = None) -> OutcomeDistribution:
    return run_circuit(build_circuit(spec), noise)


# -- detectors ---------------------------------------------------------------

@dataclass(frozen=True)
class DetectorMap:
    """Assignment of outcomes to the eight detectors.

    Photon 1: D1/D2 on the transmitted port of PBS1 (x1 = +1) and D3/D4 on
    the reflected port; the odd detector of each pair sees weak-probe path
    ``zp = +1``. Photon 2 likewise with D5/D6 (final = +1) and D7/D8, split
    by the MA probe path ``zm``. Which reflected detector is which is a
    convention.
    """

    photon1: dict = field(default_factory=lambda: {
        (1, 1): "D1", (1, -1): "D2", (-1, 1): "D3", (-1, -1): "D4"})
    photon2: dict = field(default_factory=lambda: {
        (1, 1): "D5", (1, -1): "D6", (-1, 1): "D7", (-1, -1): "D8"})

    def __post_init__(self):
        keys = set(itertools.product(OUTCOMES, OUTCOMES))
        for side in (self.photon1, self.photon2):
            if set(side) != keys:
                raise ValueError("detector map must cover all four outcome pairs")
        names = list(self.photon1.values()) + list(self.photon2.values())
        if len(set(names)) != 8:
            raise ValueError("detector names must be distinct")

    def bin_name(self, x1: int, zp: int, final: int, zm: int) -> str:
        try:
            return f"{self.photon1[(x1, zp)]}&{self.photon2[(final, zm)]}"
        except KeyError:
            raise ValueError(f"unmapped outcome {(x1, zp, final, zm)}") from None

    def bins(self) -> list[tuple[tuple[int, int, int, int], str]]:
        """The 16 coincidence bins in ``[x1, zp, final, zm]`` order."""
        return [(o, self.bin_name(*o)) for o in itertools.product(OUTCOMES, repeat=4)]

    def group_label(self, x1: int, final: int) -> str:
        """Label of the four bins sharing a PBS1 port and a PBS2 port."""
        d1 = "|".join(self.photon1[(x1, zp)] for zp in OUTCOMES)
        d2 = "|".join(self.photon2[(final, zm)] for zm in OUTCOMES)
        return f"({d1})×({d2})"

    def outcome_of(self, name: str) -> tuple[int, int, int, int]:
        for o, n in self.bins():
            if n == name:
                return o
        raise ValueError(f"unknown bin {name!r}")


DEFAULT_DETECTORS = DetectorMap()


def detector_bins(dist: OutcomeDistribution | np.ndarray,
                  detectors: DetectorMap = DEFAULT_DETECTORS) -> dict[str, float]:
    """Named probabilities of the 16 coincidence bins (before post-selection)."""
    joint = dist.joint if isinstance(dist, OutcomeDistribution) else np.asarray(dist)
    out = {}
    for o, name in detectors.bins():
        out[name] = float(joint[tuple(outcome_index(v) for v in o)])
    return out


def bins_to_joint(table: dict[str, float], detectors: DetectorMap = DEFAULT_DETECTORS) -> np.ndarray:
    joint = np.zeros((2, 2, 2, 2))
    seen = set()
    for name, value in table.items():
        o = detectors.outcome_of(name)
        joint[tuple(outcome_index(v) for v in o)] = value
        seen.add(name)
    if len(seen) != 16:
        raise ValueError(f"expected 16 coincidence bins, got {len(seen)}")
    return joint
