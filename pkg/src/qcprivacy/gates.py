"""Operators that act on named registers of a state vector."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import RegisterLayout

UNITARY_TOL = 1e-10


class UnitarityError(ValueError):
    pass


def _to_front(vector: np.ndarray, layout: RegisterLayout, registers: tuple[str, ...]):
    axes = [layout.index(r) for r in registers]
    t = vector.reshape(layout.dims) if layout.registers else vector.reshape(())
    t = np.moveaxis(t, axes, list(range(len(axes))))
    shape = t.shape
    d = math.prod(shape[: len(axes)])
    return t.reshape(d, -1), shape, axes


def _from_front(flat: np.ndarray, shape, axes) -> np.ndarray:
    t = flat.reshape(shape)
    return np.moveaxis(t, list(range(len(axes))), axes).reshape(-1)


class Gate:
    registers: tuple[str, ...]

    def check(self, layout: RegisterLayout) -> None:
        raise NotImplementedError

    def _act(self, flat: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def dim(self, layout: RegisterLayout) -> int:
        return math.prod(1 << layout.width_of(r) for r in self.registers)

    def apply(self, vector: np.ndarray, layout: RegisterLayout) -> np.ndarray:
        if len(set(self.registers)) != len(self.registers):
            raise ValueError(f"gate repeats a register: {self.registers}")
        flat, shape, axes = _to_front(vector, layout, self.registers)
        return _from_front(self._act(flat), shape, axes)


@dataclass(frozen=True, eq=False)
class Unitary(Gate):
    registers: tuple[str, ...]
    matrix: np.ndarray

    def check(self, layout):
        d = self.dim(layout)
        u = np.asarray(self.matrix)
        if u.shape != (d, d):
            raise UnitarityError(f"matrix shape {u.shape} does not act on {self.registers} (dim {d})")
        dev = np.abs(u.conj().T @ u - np.eye(d)).max()
        if dev > UNITARY_TOL:
            raise UnitarityError(f"matrix deviates from unitary by {dev:.3e}")

    def _act(self, flat):
        return np.asarray(self.matrix) @ flat


@dataclass(frozen=True, eq=False)
class Permutation(Gate):
    """|j> -> phases[j] |images[j]> on the joint basis of ``registers``."""

    registers: tuple[str, ...]
    images: np.ndarray
    phases: np.ndarray | None = None

    def check(self, layout):
        d = self.dim(layout)
        img = np.asarray(self.images)
        if img.shape != (d,) or not np.array_equal(np.sort(img), np.arange(d)):
            raise UnitarityError(f"images are not a permutation of range({d})")
        if self.phases is not None:
            ph = np.asarray(self.phases)
            if ph.shape != (d,) or np.abs(np.abs(ph) - 1).max() > UNITARY_TOL:
                raise UnitarityError("phases are not unimodular")

    def _act(self, flat):
        src = flat if self.phases is None else flat * np.asarray(self.phases)[:, None]
        out = np.empty_like(flat)
        out[np.asarray(self.images)] = src
        return out


@dataclass(frozen=True, eq=False)
class Prepare(Gate):
    """Replace ``registers`` (which must hold |0...0>) with ``vector``.

    Any such preparation extends to a unitary; only the action on |0> is
    specified.
    """

    registers: tuple[str, ...]
    vector: np.ndarray

    def check(self, layout):
        v = np.asarray(self.vector)
        if v.shape != (self.dim(layout),):
            raise UnitarityError(f"prepared vector has shape {v.shape}")
        norm = float(np.vdot(v, v).real)
        if abs(norm - 1) > UNITARY_TOL:
            raise UnitarityError(f"prepared vector has squared norm {norm!r}")

    def _act(self, flat):
        stray = float(np.vdot(flat[1:], flat[1:]).real) if flat.shape[0] > 1 else 0.0
        if stray > UNITARY_TOL:
            raise UnitarityError(f"registers {self.registers} are not in |0>")
        return np.outer(np.asarray(self.vector, dtype=np.complex128), flat[0])


# ----------------------------------------------------------- constructors

_H1 = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)


def hadamard_matrix(width: int) -> np.ndarray:
    h = np.ones((1, 1), dtype=np.complex128)
    for _ in range(width):
        h = np.kron(h, _H1)
    return h


def hadamard(register: str, width: int) -> Unitary:
    """Hadamard on every qubit of a register."""
    return Unitary((register,), hadamard_matrix(width))


def pauli_z(register: str) -> Permutation:
    return Permutation((register,), np.arange(2), np.array([1.0, -1.0], dtype=np.complex128))


def pauli_x(register: str) -> Permutation:
    return Permutation((register,), np.array([1, 0]))


def classical_map(registers: tuple[str, ...], widths: tuple[int, ...], fn: Callable[..., tuple]) -> Permutation:
    """Reversible map on basis states: fn(*contents) -> new contents."""
    d = 1 << sum(widths)
    images = np.empty(d, dtype=np.int64)
    for j in range(d):
        vals, rem = [], j
        for w in reversed(widths):
            vals.append(rem & ((1 << w) - 1))
            rem >>= w
        vals.reverse()
        out = fn(*vals)
        idx = 0
        for v, w in zip(out, widths):
            idx = (idx << w) | int(v)
        images[j] = idx
    return Permutation(tuple(registers), images)


def cnot(control: str, target: str) -> Permutation:
    return classical_map((control, target), (1, 1), lambda c, t: (c, t ^ c))
