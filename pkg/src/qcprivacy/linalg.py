"""Dense quantum-information primitives over named qubit registers.

Conventions: logarithms are base 2, qubits are big-endian, and the first
register of a layout is the most significant one.  A register of width ``w``
is one tensor axis of dimension ``2**w``.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

MAX_QUBITS = 20
EIG_CUTOFF = 1e-12
NEG_EIG_TOL = 1e-10
STATE_TOL = 1e-10


class WidthCapError(ValueError):
    """Raised when a state would exceed the dense-simulation qubit cap."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered, named qubit registers."""

    registers: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        regs = tuple((str(n), int(w)) for n, w in self.registers)
        object.__setattr__(self, "registers", regs)
        names = [n for n, _ in regs]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate register names in {names}")
        for name, w in regs:
            if w < 0:
                raise ValueError(f"register {name!r} has negative width")
        if self.width > MAX_QUBITS:
            raise WidthCapError(f"layout needs {self.width} qubits, cap is {MAX_QUBITS}")

    @classmethod
    def of(cls, *registers: tuple[str, int]) -> "RegisterLayout":
        return cls(tuple(registers))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.registers)

    @property
    def widths(self) -> tuple[int, ...]:
        return tuple(w for _, w in self.registers)

    @property
    def width(self) -> int:
        return sum(w for _, w in self.registers)

    @property
    def dim(self) -> int:
        return 1 << self.width

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(1 << w for _, w in self.registers)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown register {name!r}; layout has {self.names}") from None

    def width_of(self, name: str) -> int:
        return self.registers[self.index(name)][1]

    def __contains__(self, name) -> bool:
        return name in self.names

    def sub(self, names: Iterable[str]) -> "RegisterLayout":
        """Sub-layout holding ``names`` in this layout's order."""
        keep = set(names)
        unknown = keep - set(self.names)
        if unknown:
            raise KeyError(f"unknown registers {sorted(unknown)}; layout has {self.names}")
        return RegisterLayout(tuple(r for r in self.registers if r[0] in keep))

    def concat(self, other: "RegisterLayout") -> "RegisterLayout":
        return RegisterLayout(self.registers + other.registers)

    def basis_index(self, values: dict) -> int:
        """Flat computational-basis index for register contents (missing = 0)."""
        idx = 0
        for name, w in self.registers:
            v = int(values.get(name, 0))
            if not 0 <= v < (1 << w):
                raise ValueError(f"value {v} does not fit register {name!r} of width {w}")
            idx = (idx << w) | v
        return idx

    def split_index(self, idx: int) -> dict:
        out = {}
        for name, w in reversed(self.registers):
            out[name] = idx & ((1 << w) - 1)
            idx >>= w
        return out


@dataclass(frozen=True)
class PureState:
    vector: np.ndarray
    layout: RegisterLayout

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=np.complex128).reshape(-1)
        if v.size != self.layout.dim:
            raise ValueError(f"vector of size {v.size} does not match layout dimension {self.layout.dim}")
        norm = float(np.vdot(v, v).real)
        if abs(norm - 1.0) > STATE_TOL:
            raise ValueError(f"state is not normalised (squared norm {norm!r})")
        object.__setattr__(self, "vector", _frozen(v))

    @classmethod
    def basis(cls, layout: RegisterLayout, values: dict | None = None) -> "PureState":
        v = np.zeros(layout.dim, dtype=np.complex128)
        v[layout.basis_index(values or {})] = 1.0
        return cls(v, layout)

    @property
    def width(self) -> int:
        return self.layout.width

    def tensor_view(self) -> np.ndarray:
        return self.vector.reshape(self.layout.dims)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.vector, self.vector.conj()), self.layout, check=False)


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    layout: RegisterLayout
    check: bool = True

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        d = self.layout.dim
        if m.shape != (d, d):
            raise ValueError(f"matrix of shape {m.shape} does not match layout dimension {d}")
        if self.check:
            _validate_density(m)
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def width(self) -> int:
        return self.layout.width

    def density(self) -> "DensityMatrix":
        return self


def _validate_density(m: np.ndarray) -> None:
    if not np.allclose(m, m.conj().T, atol=STATE_TOL, rtol=0):
        raise ValueError("matrix is not Hermitian")
    tr = np.trace(m).real
    if abs(tr - 1.0) > STATE_TOL:
        raise ValueError(f"trace is {tr!r}, expected 1")
    lo = float(np.linalg.eigvalsh(m).min())
    if lo < -NEG_EIG_TOL:
        raise ValueError(f"matrix has negative eigenvalue {lo!r}")


State = Union[PureState, DensityMatrix]


@dataclass(frozen=True)
class CqState:
    """Classical-quantum ensemble: labelled quantum states with probabilities.

    ``classical`` names the label registers (with the widths used when the
    ensemble is assembled into one block-diagonal matrix); each member is
    ``(labels, probability, state)`` with ``labels`` a tuple of ints.
    """

    classical: RegisterLayout
    members: tuple

    def __post_init__(self):
        members = tuple((tuple(int(v) for v in lab), float(p), s) for lab, p, s in self.members)
        if not members:
            raise ValueError("empty ensemble")
        layout = members[0][2].layout
        overlap = set(layout.names) & set(self.classical.names)
        if overlap:
            raise ValueError(f"registers {sorted(overlap)} are both classical and quantum")
        seen = set()
        total = 0.0
        for lab, p, s in members:
            if s.layout != layout:
                raise ValueError("ensemble members do not share one layout")
            if len(lab) != len(self.classical.registers):
                raise ValueError(f"label {lab} does not match classical registers {self.classical.names}")
            if lab in seen:
                raise ValueError(f"duplicate label {lab}")
            if p < 0:
                raise ValueError(f"negative probability {p} for label {lab}")
            seen.add(lab)
            total += p
        if abs(total - 1.0) > STATE_TOL:
            raise ValueError(f"probabilities sum to {total!r}")
        object.__setattr__(self, "members", members)

    @property
    def layout(self) -> RegisterLayout:
        return self.members[0][2].layout

    @property
    def names(self) -> tuple[str, ...]:
        return self.classical.names + self.layout.names

    def assemble(self) -> DensityMatrix:
        """The block-diagonal joint matrix, classical registers first."""
        full = self.classical.concat(self.layout)
        dq = self.layout.dim
        out = np.zeros((full.dim, full.dim), dtype=np.complex128)
        for lab, p, s in self.members:
            c = self.classical.basis_index(dict(zip(self.classical.names, lab)))
            out[c * dq:(c + 1) * dq, c * dq:(c + 1) * dq] = p * s.density().matrix
        return DensityMatrix(out, full, check=False)

    def label_marginal(self) -> dict:
        return {lab: p for lab, p, _ in self.members}


# ------------------------------------------------------------------ basics


def tensor(a: State, b: State) -> State:
    """Kronecker product; ``a`` occupies the most significant qubits."""
    layout = a.layout.concat(b.layout)
    if isinstance(a, PureState) and isinstance(b, PureState):
        return PureState(np.kron(a.vector, b.vector), layout)
    return DensityMatrix(np.kron(a.density().matrix, b.density().matrix), layout, check=False)


def _split(vector: np.ndarray, layout: RegisterLayout, keep: Sequence[str]) -> np.ndarray:
    """Reshape a state vector into a (kept, rest) matrix."""
    keep_idx = [layout.index(n) for n in layout.names if n in keep]
    rest_idx = [i for i in range(len(layout.registers)) if i not in keep_idx]
    dims = layout.dims
    t = vector.reshape(dims) if dims else vector.reshape(())
    t = np.transpose(t, keep_idx + rest_idx)
    dk = math.prod(dims[i] for i in keep_idx)
    return t.reshape(dk, -1)


def _reduced_matrix(state: State, keep: Sequence[str]) -> np.ndarray:
    layout = state.layout
    if isinstance(state, PureState):
        m = _split(state.vector, layout, keep)
        return m @ m.conj().T
    keep_idx = [layout.index(n) for n in layout.names if n in keep]
    rest_idx = [i for i in range(len(layout.registers)) if i not in keep_idx]
    dims = layout.dims
    k = len(dims)
    t = state.matrix.reshape(dims + dims)
    t = np.transpose(t, keep_idx + rest_idx + [k + i for i in keep_idx] + [k + i for i in rest_idx])
    dk = math.prod(dims[i] for i in keep_idx)
    dr = layout.dim // dk
    return np.einsum("arbr->ab", t.reshape(dk, dr, dk, dr))


def partial_trace(state: State, keep: Iterable[str]) -> DensityMatrix:
    """Reduced state on ``keep``; kept registers stay in layout order."""
    keep = set(keep)
    sub = state.layout.sub(keep)
    return DensityMatrix(_reduced_matrix(state, keep), sub, check=False)


def purity(state: State) -> float:
    if isinstance(state, PureState):
        return 1.0
    m = state.matrix
    return float(np.vdot(m, m).real)


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2 for pure states on the same layout."""
    if a.layout != b.layout:
        raise ValueError("layouts differ")
    return float(abs(np.vdot(a.vector, b.vector)) ** 2)


def trace_distance(rho: State, sigma: State) -> float:
    if rho.layout.dims != sigma.layout.dims:
        raise ValueError("dimension mismatch")
    diff = rho.density().matrix - sigma.density().matrix
    return float(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())


# ---------------------------------------------------------------- entropy


def spectrum_entropy(eigenvalues) -> float:
    lam = np.asarray(eigenvalues, dtype=np.float64)
    if lam.size and lam.min() < -NEG_EIG_TOL:
        raise ValueError(f"negative eigenvalue {lam.min()!r}")
    lam = lam[lam > EIG_CUTOFF]
    return float(-(lam * np.log2(lam)).sum())


def _hermitian_spectrum(m: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(0.5 * (m + m.conj().T))


def von_neumann_entropy(rho: State) -> float:
    """S(rho) = -Tr rho log2 rho, in bits."""
    if isinstance(rho, PureState):
        return 0.0
    m = np.asarray(rho.matrix)
    if not np.allclose(m, m.conj().T, atol=STATE_TOL, rtol=0):
        raise ValueError("matrix is not Hermitian")
    return spectrum_entropy(np.linalg.eigvalsh(m))


def _mixture_spectrum(states: Sequence[State], weights: Sequence[float], keep: set) -> np.ndarray:
    """Spectrum of sum_j w_j Tr_rest(state_j) restricted to ``keep``.

    For pure members the smaller of the two Gram forms is diagonalised:
    sum_j w_j M_j M_j^dagger (kept side) or the block matrix K^dagger K with
    K = [sqrt(w_j) M_j] (traced side); their nonzero spectra coincide.
    """
    layout = states[0].layout
    keep = set(keep) & set(layout.names)
    if all(isinstance(s, PureState) for s in states):
        if not keep:
            return np.array([sum(weights)])
        mats = [_split(s.vector, layout, keep) for s in states]
        dk, dr = mats[0].shape
        if len(mats) == 1 and dr == 1:
            return np.array([weights[0]])
        if dk <= len(mats) * dr:
            rho = np.zeros((dk, dk), dtype=np.complex128)
            for w, m in zip(weights, mats):
                rho += w * (m @ m.conj().T)
            return _hermitian_spectrum(rho)
        k = np.concatenate([math.sqrt(w) * m for w, m in zip(weights, mats)], axis=1)
        return _hermitian_spectrum(k.conj().T @ k)
    rho = sum(w * _reduced_matrix(s, keep) for w, s in zip(weights, states))
    return _hermitian_spectrum(np.atleast_2d(rho))


def _as_cq(state) -> CqState:
    if isinstance(state, CqState):
        return state
    return CqState(RegisterLayout(), (((), 1.0, state),))


def cq_entropy(cq: CqState, registers: Iterable[str]) -> float:
    """Entropy of a register subset of a classical-quantum ensemble.

    Members are grouped by the kept classical labels; the result is
    H(groups) + sum_g p_g S(mixture_g), which equals the entropy of the
    assembled block-diagonal matrix.
    """
    cq = _as_cq(cq)
    registers = set(registers)
    unknown = registers - set(cq.names)
    if unknown:
        raise KeyError(f"unknown registers {sorted(unknown)}; state has {cq.names}")
    cidx = [i for i, n in enumerate(cq.classical.names) if n in registers]
    quantum = registers & set(cq.layout.names)
    groups: dict = defaultdict(list)
    for lab, p, s in cq.members:
        if p > 0:
            groups[tuple(lab[i] for i in cidx)].append((p, s))
    total = 0.0
    for members in groups.values():
        pg = sum(p for p, _ in members)
        total -= pg * math.log2(pg) if pg > EIG_CUTOFF else 0.0
        if quantum:
            lam = _mixture_spectrum([s for _, s in members], [p / pg for p, _ in members], quantum)
            total += pg * spectrum_entropy(lam)
    return total


def entropy(state, registers: Iterable[str]) -> float:
    """Entropy of ``registers`` for a pure state, density matrix or ensemble."""
    return cq_entropy(_as_cq(state), registers)


def conditional_mutual_information(state, a: Iterable[str], b: Iterable[str], c: Iterable[str] = ()) -> float:
    """I(A:B|C) = S(AC) + S(BC) - S(C) - S(ABC), in bits."""
    a, b, c = set(a), set(b), set(c)
    if a & b or a & c or b & c:
        raise ValueError(f"register sets overlap: {sorted(a)}, {sorted(b)}, {sorted(c)}")
    cq = _as_cq(state)
    if not a or not b:
        return 0.0
    return (
        cq_entropy(cq, a | c)
        + cq_entropy(cq, b | c)
        - cq_entropy(cq, c)
        - cq_entropy(cq, a | b | c)
    )


def mutual_information(state, a: Iterable[str], b: Iterable[str]) -> float:
    return conditional_mutual_information(state, a, b, ())
