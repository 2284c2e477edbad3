"""Dense state algebra for small labelled qubit registers.

Every state carries an ordered tuple of :class:`Role` labels. Operators are
always placed by label, and the axis bookkeeping lives here so callers never
do index arithmetic on Kronecker products.

Conventions: ``|H> = |P0> = |0>`` and ``|V> = |P1> = |1>``; Pauli
observables have eigenvalues +1 and -1, with ``Z|H> = +|H>``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

MAX_QUBITS = 4
NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = -1e-10
IMAG_TOL = 1e-10


class Role(str, enum.Enum):
    """Physical identity of a qubit in the experiment."""

    SYS_POL1 = "SysPol1"
    SYS_POL2 = "SysPol2"
    WEAK_PATH = "WeakPath"
    MA_PATH = "MaPath"


class StateError(ValueError):
    """Raised when a state or operator violates its invariants."""


class ZeroProbabilityError(StateError):
    """Post-selection onto an outcome that has zero probability."""


RoleLike = Union[Role, str]


def _as_roles(roles: Iterable[RoleLike]) -> tuple[Role, ...]:
    out = tuple(Role(r) for r in roles)
    if len(set(out)) != len(out):
        raise StateError(f"duplicate qubit labels in {[r.value for r in out]}")
    if not 0 < len(out) <= MAX_QUBITS:
        raise StateError(f"register size {len(out)} outside 1..{MAX_QUBITS}")
    return out


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QubitLabel:
    role: Role
    index: int


class _Register:
    roles: tuple[Role, ...]

    @property
    def n_qubits(self) -> int:
        return len(self.roles)

    @property
    def labels(self) -> tuple[QubitLabel, ...]:
        return tuple(QubitLabel(r, i) for i, r in enumerate(self.roles))

    def index(self, role: RoleLike) -> int:
        try:
            return self.roles.index(Role(role))
        except ValueError:
            raise StateError(f"label {Role(role).value} not in register") from None

    def axes(self, targets: Sequence[RoleLike]) -> list[int]:
        axes = [self.index(t) for t in targets]
        if len(set(axes)) != len(axes):
            raise StateError("repeated target labels")
        return axes


@dataclass(frozen=True, eq=False)
class PureState(_Register):
    amplitudes: np.ndarray
    roles: tuple[Role, ...]

    def __post_init__(self):
        roles = _as_roles(self.roles)
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.shape != (2 ** len(roles),):
            raise StateError(f"{amps.size} amplitudes for {len(roles)} qubits")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise StateError(f"state norm {norm!r} differs from 1")
        object.__setattr__(self, "roles", roles)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_unnormalized(cls, amplitudes, roles) -> "PureState":
        amps = np.asarray(amplitudes, dtype=np.complex128).ravel()
        return cls(amps / np.linalg.norm(amps), roles)

    def to_density(self) -> "DensityState":
        return DensityState(np.outer(self.amplitudes, self.amplitudes.conj()), self.roles)


@dataclass(frozen=True, eq=False)
class DensityState(_Register):
    matrix: np.ndarray
    roles: tuple[Role, ...]

    def __post_init__(self):
        roles = _as_roles(self.roles)
        rho = _frozen(self.matrix)
        dim = 2 ** len(roles)
        if rho.shape != (dim, dim):
            raise StateError(f"matrix shape {rho.shape} for {len(roles)} qubits")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
            raise StateError("density matrix is not Hermitian")
        tr = np.trace(rho)
        if abs(tr - 1.0) > TRACE_TOL:
            raise StateError(f"trace {tr!r} differs from 1")
        lowest = np.linalg.eigvalsh(rho)[0]
        if lowest < POSITIVITY_TOL:
            raise StateError(f"negative eigenvalue {lowest:.3e}")
        object.__setattr__(self, "roles", roles)
        object.__setattr__(self, "matrix", rho)

    @classmethod
    def maximally_mixed(cls, roles) -> "DensityState":
        roles = _as_roles(roles)
        dim = 2 ** len(roles)
        return cls(np.eye(dim) / dim, roles)

    def to_density(self) -> "DensityState":
        return self

    def bloch(self) -> np.ndarray:
        """Bloch vector (<X>, <Y>, <Z>) of a single-qubit state."""
        if self.n_qubits != 1:
            raise StateError("Bloch vector needs a single-qubit state")
        return np.array([expectation(self, P) for P in (PAULI_X, PAULI_Y, PAULI_Z)])


State = Union[PureState, DensityState]


@dataclass(frozen=True, eq=False)
class Operator:
    """Square matrix acting on ``k`` qubits, placed onto labels at use."""

    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        m = _frozen(self.matrix)
        k = int(round(np.log2(m.shape[0]))) if m.ndim == 2 and m.shape[0] else -1
        if m.ndim != 2 or m.shape[0] != m.shape[1] or 2**k != m.shape[0]:
            raise StateError(f"operator shape {m.shape} is not 2^k x 2^k")
        object.__setattr__(self, "matrix", m)

    @property
    def n_qubits(self) -> int:
        return int(round(np.log2(self.matrix.shape[0])))

    @property
    def dagger(self) -> "Operator":
        return Operator(self.matrix.conj().T, f"{self.name}†")

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol)

    def is_unitary(self, tol: float = NORM_TOL) -> bool:
        eye = np.eye(self.matrix.shape[0])
        return bool(np.max(np.abs(self.matrix.conj().T @ self.matrix - eye)) <= tol)

    def __matmul__(self, other: "Operator") -> "Operator":
        return Operator(self.matrix @ other.matrix, f"{self.name}{other.name}")

    def kron(self, other: "Operator") -> "Operator":
        return Operator(np.kron(self.matrix, other.matrix), f"{self.name}⊗{other.name}")


_s2 = 1 / np.sqrt(2)
IDENTITY = Operator(np.eye(2), "I")
PAULI_X = Operator([[0, 1], [1, 0]], "X")
PAULI_Y = Operator([[0, -1j], [1j, 0]], "Y")
PAULI_Z = Operator([[1, 0], [0, -1]], "Z")
HADAMARD = Operator([[_s2, _s2], [_s2, -_s2]], "H")
PHASE_S = Operator([[1, 0], [0, 1j]], "S")
CNOT = Operator(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], "CNOT"
)
PAULIS = {"X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


def basis_change(basis: str) -> Operator:
    """Unitary taking the +1/-1 eigenstates of ``basis`` to |0>/|1>."""
    if basis == "Z":
        return IDENTITY
    if basis == "X":
        return HADAMARD
    if basis == "Y":
        return HADAMARD @ PHASE_S.dagger
    raise StateError(f"unknown basis {basis!r}")


@dataclass(frozen=True, eq=False)
class KrausChannel:
    operators: tuple[np.ndarray, ...]
    name: str = ""

    def __post_init__(self):
        ops = tuple(_frozen(k) for k in self.operators)
        if not ops:
            raise StateError("channel needs at least one Kraus operator")
        dim = ops[0].shape[0]
        if any(k.shape != (dim, dim) for k in ops):
            raise StateError("Kraus operators have mismatched shapes")
        completeness = sum(k.conj().T @ k for k in ops)
        if np.max(np.abs(completeness - np.eye(dim))) > NORM_TOL:
            raise StateError(f"channel {self.name!r} is not trace preserving")
        object.__setattr__(self, "operators", ops)

    @property
    def n_qubits(self) -> int:
        return int(round(np.log2(self.operators[0].shape[0])))

    @classmethod
    def identity(cls, n_qubits: int = 1) -> "KrausChannel":
        return cls((np.eye(2**n_qubits),), "identity")

    @classmethod
    def dephasing(cls, coherence: float, basis: str = "Z") -> "KrausChannel":
        """Pauli dephasing that scales coherences in ``basis`` by ``coherence``.

        In the Z basis this multiplies the off-diagonal elements of a qubit
        by ``coherence``; ``coherence=0`` is complete dephasing.
        """
        if not 0.0 <= coherence <= 1.0:
            raise StateError(f"coherence {coherence} outside [0, 1]")
        P = PAULIS[basis].matrix
        return cls(
            (np.sqrt((1 + coherence) / 2) * np.eye(2), np.sqrt((1 - coherence) / 2) * P),
            f"dephase{basis}({coherence:g})",
        )


def _apply_left(t: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    k = len(axes)
    opt = op.reshape((2,) * (2 * k))
    out = np.tensordot(opt, t, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _check_targets(state: _Register, op_qubits: int, targets) -> list[int]:
    axes = state.axes(targets)
    if len(axes) != op_qubits:
        raise StateError(f"{op_qubits}-qubit operator given {len(axes)} targets")
    return axes


def _conjugate(rho: np.ndarray, n: int, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    t = rho.reshape((2,) * (2 * n))
    t = _apply_left(t, op, axes)
    t = _apply_left(t, op.conj(), [a + n for a in axes])
    return t.reshape(rho.shape)


def tensor(a: State, b: State) -> State:
    if type(a) is not type(b):
        raise StateError("cannot tensor a pure state with a density state")
    roles = a.roles + b.roles
    if len(set(roles)) != len(roles):
        raise StateError("overlapping labels in tensor product")
    if isinstance(a, PureState):
        return PureState(np.kron(a.amplitudes, b.amplitudes), roles)
    return DensityState(np.kron(a.matrix, b.matrix), roles)


def tensor_all(*states: State) -> State:
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def apply_unitary(state: State, U: Operator, targets: Sequence[RoleLike]) -> State:
    if not U.is_unitary():
        raise StateError(f"operator {U.name!r} is not unitary")
    axes = _check_targets(state, U.n_qubits, targets)
    n = state.n_qubits
    if isinstance(state, PureState):
        t = _apply_left(state.amplitudes.reshape((2,) * n), U.matrix, axes)
        return PureState(t.reshape(-1), state.roles)
    return DensityState(_conjugate(state.matrix, n, U.matrix, axes), state.roles)


def apply_channel(state: State, ch: KrausChannel, targets: Sequence[RoleLike]) -> DensityState:
    rho = state.to_density()
    axes = _check_targets(rho, ch.n_qubits, targets)
    n = rho.n_qubits
    out = sum(_conjugate(rho.matrix, n, K, axes) for K in ch.operators)
    return DensityState(out, rho.roles)


def partial_trace(state: State, keep: Iterable[RoleLike]) -> DensityState:
    rho = state.to_density()
    keep_axes = sorted(rho.axes(list(keep)))
    if not keep_axes:
        raise StateError("partial trace must keep at least one qubit")
    n = rho.n_qubits
    letters = "abcdefgh"
    rows = list(letters[:n])
    cols = [letters[i] if i not in keep_axes else letters[i].upper() for i in range(n)]
    out = "".join(letters[i] for i in keep_axes) + "".join(letters[i].upper() for i in keep_axes)
    reduced = np.einsum("".join(rows) + "".join(cols) + "->" + out, rho.matrix.reshape((2,) * (2 * n)))
    dim = 2 ** len(keep_axes)
    return DensityState(reduced.reshape(dim, dim), tuple(rho.roles[i] for i in keep_axes))


def _full_operator(state: _Register, obs: Operator, targets) -> tuple[np.ndarray, list[int]]:
    if targets is None:
        targets = state.roles
    return obs.matrix, _check_targets(state, obs.n_qubits, targets)


def expectation(state: State, obs: Operator, targets: Sequence[RoleLike] | None = None) -> float:
    """Real expectation value ``Tr(rho obs)`` of a Hermitian observable."""
    if not obs.is_hermitian():
        raise StateError(f"observable {obs.name!r} is not Hermitian")
    op, axes = _full_operator(state, obs, targets)
    n = state.n_qubits
    if isinstance(state, PureState):
        psi = state.amplitudes.reshape((2,) * n)
        val = np.vdot(psi, _apply_left(psi, op, axes))
    else:
        t = _apply_left(state.matrix.reshape((2,) * (2 * n)), op, axes)
        val = np.trace(t.reshape(state.matrix.shape))
    if abs(val.imag) > IMAG_TOL:
        raise StateError(f"expectation has imaginary part {val.imag:.3e}")
    return float(val.real)


def _check_pm1_spectrum(obs: Operator) -> None:
    sq = obs.matrix @ obs.matrix
    if not obs.is_hermitian() or np.max(np.abs(sq - np.eye(sq.shape[0]))) > NORM_TOL:
        raise StateError(f"observable {obs.name!r} does not have a +/-1 spectrum")


def project_postselect(state: State, obs: Operator, outcome: int,
                       targets: Sequence[RoleLike]) -> tuple[float, State]:
    """Project onto the ``outcome`` eigenspace of ``obs`` and renormalise.

    Returns the outcome probability and the conditional state on the full
    register (measured qubits are kept).
    """
    if outcome not in (1, -1):
        raise StateError(f"outcome must be +1 or -1, got {outcome}")
    _check_pm1_spectrum(obs)
    axes = _check_targets(state, obs.n_qubits, targets)
    proj = (np.eye(obs.matrix.shape[0]) + outcome * obs.matrix) / 2
    n = state.n_qubits
    if isinstance(state, PureState):
        t = _apply_left(state.amplitudes.reshape((2,) * n), proj, axes).reshape(-1)
        prob = float(np.vdot(t, t).real)
        if prob <= NORM_TOL:
            raise ZeroProbabilityError(f"outcome {outcome:+d} has zero probability")
        return prob, PureState(t / np.sqrt(prob), state.roles)
    m = _conjugate(state.matrix, n, proj, axes)
    prob = float(np.trace(m).real)
    if prob <= NORM_TOL:
        raise ZeroProbabilityError(f"outcome {outcome:+d} has zero probability")
    return prob, DensityState(m / prob, state.roles)


def fidelity(a: State, b: PureState) -> float:
    """Overlap ``<b|a|b>`` of a state with a pure reference."""
    if a.roles != b.roles:
        raise StateError("fidelity needs identically labelled registers")
    rho = a.to_density().matrix
    f = float(np.vdot(b.amplitudes, rho @ b.amplitudes).real)
    return min(max(f, 0.0), 1.0)


def std_uncertainty(state: State, obs: Operator, targets: Sequence[RoleLike] | None = None) -> float:
    mean = expectation(state, obs, targets)
    second = expectation(state, obs @ obs, targets)
    return float(np.sqrt(max(second - mean**2, 0.0)))


def basis_state(bits: str, roles) -> PureState:
    """Computational basis state, e.g. ``basis_state("01", roles)``."""
    amps = np.zeros(2 ** len(bits))
    amps[int(bits, 2)] = 1.0
    return PureState(amps, roles)


def qubit(alpha: complex, beta: complex, role: RoleLike) -> PureState:
    return PureState([alpha, beta], (role,))


def random_pure_state(roles, rng: np.random.Generator) -> PureState:
    roles = _as_roles(roles)
    v = rng.normal(size=2 ** len(roles)) + 1j * rng.normal(size=2 ** len(roles))
    return PureState.from_unnormalized(v, roles)


def random_density_state(roles, rng: np.random.Generator, rank: int | None = None) -> DensityState:
    roles = _as_roles(roles)
    dim = 2 ** len(roles)
    g = rng.normal(size=(dim, rank or dim)) + 1j * rng.normal(size=(dim, rank or dim))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityState(rho / np.trace(rho).real, roles)
