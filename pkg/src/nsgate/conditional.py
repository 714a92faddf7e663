"""Conditional operations on a system coupled to measured ancilla modes.

A conditional scheme couples system modes to ancilla modes through a global
mode unitary, then accepts the run only when the ancilla photon counters show
one of a designated set of occupation outcomes.  Each accepted outcome acts on
the system as a measurement (Kraus) operator; summing over every outcome
recovers a completeness identity, and summing over the accepted subset gives
the unnormalized conditional state and its success probability.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

import numpy as np

from .fock import (
    FockSector,
    LopCircuit,
    Occupation,
    as_occupation,
    enumerate_sector,
    fock_amplitude,
)

#: Probabilities below this are treated as zero when normalizing states.
NORM_EPS = 1e-14

_HERM_TOL = 1e-12
_PSD_TOL = 1e-10


class SystemBasis:
    """Direct sum of photon-number sectors on the system modes.

    States are ordered by ascending photon number, each sector internally in
    its canonical order, and indexed by a single flat position.
    """

    def __init__(self, modes: int, photon_sectors: Iterable[int]):
        if modes < 1:
            raise ValueError(f"system mode count must be positive, got {modes}")
        sectors = tuple(sorted(set(int(n) for n in photon_sectors)))
        if any(n < 0 for n in sectors):
            raise ValueError(f"photon sectors must be non-negative, got {sectors}")
        self.modes = int(modes)
        self.sectors = sectors
        states: list[Occupation] = []
        for n in sectors:
            states.extend(enumerate_sector(modes, n).basis)
        self.states = tuple(states)
        self._index = {occ: i for i, occ in enumerate(self.states)}

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, occ: Iterable[int]) -> int:
        return self._index[as_occupation(occ)]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SystemBasis)
            and self.modes == other.modes
            and self.sectors == other.sectors
        )

    def __hash__(self) -> int:
        return hash((self.modes, self.sectors))

    def __repr__(self) -> str:
        return f"SystemBasis(modes={self.modes}, sectors={self.sectors})"


@dataclass(frozen=True)
class ConditionalScheme:
    """System/ancilla split, ancilla input, and accepted measurement outcomes.

    The ancilla input is a pure Fock occupation; outcomes are the occupation
    patterns whose observation makes the run count as a success.  The system
    state space is the direct sum of the listed photon-number sectors.
    """

    system_modes: int
    ancilla_modes: int
    ancilla_input: Occupation
    outcomes: tuple[Occupation, ...]
    system_photons: tuple[int, ...] = (0, 1, 2)

    def __post_init__(self):
        object.__setattr__(self, "ancilla_input", as_occupation(self.ancilla_input))
        object.__setattr__(
            self, "outcomes", tuple(as_occupation(o) for o in self.outcomes)
        )
        object.__setattr__(
            self, "system_photons", tuple(int(n) for n in self.system_photons)
        )
        if self.system_modes < 1:
            raise ValueError("a scheme needs at least one system mode")
        if self.ancilla_modes < 0:
            raise ValueError("ancilla mode count cannot be negative")
        if len(self.ancilla_input) != self.ancilla_modes:
            raise ValueError(
                f"ancilla input covers {len(self.ancilla_input)} modes, "
                f"scheme has {self.ancilla_modes}"
            )
        if not self.outcomes:
            raise ValueError("a scheme needs at least one accepted outcome")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise ValueError("accepted outcomes must be distinct")
        for occ in self.outcomes:
            if len(occ) != self.ancilla_modes:
                raise ValueError(
                    f"outcome {occ} does not cover {self.ancilla_modes} ancilla modes"
                )
        if not self.system_photons or any(n < 0 for n in self.system_photons):
            raise ValueError("system photon sectors must be non-negative")

    @property
    def rank(self) -> int:
        return len(self.outcomes)

    @cached_property
    def system_basis(self) -> SystemBasis:
        return SystemBasis(self.system_modes, self.system_photons)

    def all_outcomes(self) -> "ConditionalScheme":
        """Scheme accepting every ancilla occupation photon conservation allows."""
        if self.ancilla_modes == 0:
            return self
        max_total = max(self.system_photons) + sum(self.ancilla_input)
        outcomes: list[Occupation] = []
        for total in range(max_total + 1):
            outcomes.extend(enumerate_sector(self.ancilla_modes, total).basis)
        return ConditionalScheme(
            system_modes=self.system_modes,
            ancilla_modes=self.ancilla_modes,
            ancilla_input=self.ancilla_input,
            outcomes=tuple(outcomes),
            system_photons=self.system_photons,
        )


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian positive-semidefinite state on a system basis.

    Unnormalized states are allowed (conditional outputs carry trace equal to
    their success probability), but the trace never exceeds 1.
    """

    basis: SystemBasis
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=complex)
        d = self.basis.dim
        if e.shape != (d, d):
            raise ValueError(f"entries shape {e.shape} does not match basis dim {d}")
        if np.abs(e - e.conj().T).max(initial=0.0) > _HERM_TOL:
            raise ValueError("density matrix must be Hermitian")
        if np.linalg.eigvalsh(e).min(initial=0.0) < -_PSD_TOL:
            raise ValueError("density matrix must be positive semidefinite")
        tr = e.trace().real
        if tr < -_HERM_TOL or tr > 1 + _HERM_TOL:
            raise ValueError(f"trace {tr} outside [0, 1]")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def trace(self) -> float:
        return float(self.entries.trace().real)

    @classmethod
    def pure(cls, basis: SystemBasis, amplitudes) -> "DensityMatrix":
        """Rank-1 state from a (normalized) amplitude vector."""
        v = np.asarray(amplitudes, dtype=complex)
        if v.shape != (basis.dim,):
            raise ValueError(f"amplitude vector must have length {basis.dim}")
        v = v / np.linalg.norm(v)
        return cls(basis, np.outer(v, v.conj()))


@dataclass(frozen=True)
class MeasurementOperator:
    """System-space operator implementing one post-selection outcome.

    Columns run over the scheme's input sectors; rows run over the output
    sectors photon conservation allows for this outcome (input photons plus
    ancilla input photons minus outcome photons).
    """

    scheme: ConditionalScheme
    outcome: Occupation
    in_basis: SystemBasis
    out_basis: SystemBasis
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=complex)
        if e.shape != (self.out_basis.dim, self.in_basis.dim):
            raise ValueError(
                f"entries shape {e.shape} does not match bases "
                f"({self.out_basis.dim}, {self.in_basis.dim})"
            )
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)


@dataclass(frozen=True)
class ConditionalResult:
    """Unnormalized conditional state, success probability, normalized state.

    ``normalized`` is None when the probability is below NORM_EPS (the
    post-selection never succeeds, so no output state exists).
    """

    rho_bar: DensityMatrix
    probability: float
    normalized: Optional[DensityMatrix]


def kraus_operator(
    scheme: ConditionalScheme, lop: LopCircuit, outcome
) -> MeasurementOperator:
    """Extract the measurement operator for one ancilla outcome.

    Entry (out_state, in_state) is the global Fock amplitude from
    in_state + ancilla_input to out_state + outcome.  Each block is computed
    inside its exact total-photon sector, so conservation zeros are exact.
    """
    outcome = as_occupation(outcome)
    if lop.dim != scheme.system_modes + scheme.ancilla_modes:
        raise ValueError(
            f"mode unitary has {lop.dim} modes, scheme needs "
            f"{scheme.system_modes + scheme.ancilla_modes}"
        )
    if len(outcome) != scheme.ancilla_modes:
        raise ValueError(
            f"outcome {outcome} does not cover {scheme.ancilla_modes} ancilla modes"
        )
    in_basis = scheme.system_basis
    shift = sum(scheme.ancilla_input) - sum(outcome)
    out_sectors = sorted(
        {n + shift for n in scheme.system_photons if n + shift >= 0}
    )
    out_basis = SystemBasis(scheme.system_modes, out_sectors or (0,))
    entries = np.zeros((out_basis.dim, in_basis.dim), dtype=complex)
    if out_sectors:
        for b, alpha in enumerate(in_basis.states):
            target = sum(alpha) + shift
            if target < 0:
                continue
            for gamma in enumerate_sector(scheme.system_modes, target).basis:
                a = out_basis.index(gamma)
                entries[a, b] = fock_amplitude(
                    lop, alpha + scheme.ancilla_input, gamma + outcome
                )
    return MeasurementOperator(scheme, outcome, in_basis, out_basis, entries)


def apply_conditional(
    scheme: ConditionalScheme, lop: LopCircuit, rho: DensityMatrix
) -> ConditionalResult:
    """Conditional output state and success probability for an input state."""
    if rho.basis != scheme.system_basis:
        raise ValueError("input state is not defined on the scheme's system basis")
    if rho.trace <= NORM_EPS:
        raise ValueError("input state must have positive trace")
    ops = [kraus_operator(scheme, lop, mu) for mu in scheme.outcomes]
    union_sectors = sorted({n for op in ops for n in op.out_basis.sectors})
    out_basis = SystemBasis(scheme.system_modes, union_sectors)
    acc = np.zeros((out_basis.dim, out_basis.dim), dtype=complex)
    for op in ops:
        rows = [out_basis.index(occ) for occ in op.out_basis.states]
        m = np.zeros((out_basis.dim, rho.basis.dim), dtype=complex)
        m[rows, :] = op.entries
        acc += m @ rho.entries @ m.conj().T
    probability = float(acc.trace().real)
    probability = min(max(probability, 0.0), 1.0)
    rho_bar = DensityMatrix(out_basis, acc)
    normalized = None
    if probability > NORM_EPS:
        normalized = DensityMatrix(out_basis, acc / probability)
    return ConditionalResult(rho_bar, probability, normalized)


def completeness_defect(scheme: ConditionalScheme, lop: LopCircuit) -> float:
    """Max-norm deviation of the summed M†M from the identity.

    Meaningful when the scheme's outcomes enumerate every ancilla occupation
    photon conservation allows (see ConditionalScheme.all_outcomes); then the
    defect is numerically zero for any unitary circuit.
    """
    dim = scheme.system_basis.dim
    acc = np.zeros((dim, dim), dtype=complex)
    for mu in scheme.outcomes:
        m = kraus_operator(scheme, lop, mu).entries
        acc += m.conj().T @ m
    return float(np.abs(acc - np.eye(dim)).max(initial=0.0))


def decompose_by_ancilla_count(
    state, sector: FockSector, system_modes: int
) -> dict[int, np.ndarray]:
    """Split a global fixed-total state vector by ancilla photon count.

    Returns full-length component vectors, one per ancilla count from 0 to
    the sector total; the components sum back to the state and their squared
    norms add up to the state's squared norm.
    """
    vec = np.asarray(state, dtype=complex)
    if vec.shape != (sector.dim,):
        raise ValueError(f"state vector must have length {sector.dim}")
    if not 0 < system_modes < sector.modes:
        raise ValueError(
            f"system mode count must be in 1..{sector.modes - 1}, got {system_modes}"
        )
    parts = {
        c: np.zeros(sector.dim, dtype=complex) for c in range(sector.photons + 1)
    }
    for i, occ in enumerate(sector.basis):
        parts[sum(occ[system_modes:])][i] = vec[i]
    return parts
