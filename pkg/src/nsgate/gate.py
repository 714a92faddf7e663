"""Nonlinear sign-shift (NS) gate designs on linear-optical circuits.

The NS gate flips the sign of the two-photon amplitude of a single mode,
alpha|0> + beta|1> + gamma|2>  ->  alpha|0> + beta|1> - gamma|2>,
which no passive one-mode circuit can do.  It becomes possible as a
conditional operation: couple the mode to ancilla modes carrying one photon,
apply a global mode unitary, and accept the run when the photon exits in a
designated ancilla mode.  Functioning requires the three diagonal Kraus
entries to satisfy m0 = m1 = -m2, which pins the system-system entry of the
mode unitary to 1 - sqrt(2) and ties the accepted-row entries together; the
remaining freedom is fixed here by completing the constrained rows to a full
unitary.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import null_space

from .conditional import ConditionalScheme, kraus_operator
from .fock import LopCircuit, Occupation

SQRT2 = math.sqrt(2.0)

#: Residual below which a circuit counts as a functioning sign-shift gate.
CONDITION_TOL = 1e-10

# Feasibility slack for the completion's Gram analysis.  Kept below the mode
# unitarity tolerance so accepted completions always validate as unitary.
_FEAS_EPS = 1e-11


class InfeasibleDesignError(Exception):
    """No unitary extends the requested fixed entries.

    ``violations`` names every constraint found violated (row or column
    normalization, the Schwarz orthogonality bound, or missing free columns).
    """

    def __init__(self, violations: Sequence[str]):
        self.violations = tuple(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class PartialMatrix:
    """Square matrix with a boolean mask flagging the fixed entries."""

    values: np.ndarray
    fixed: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        f = np.array(self.fixed, dtype=bool)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"partial matrix must be square, got shape {v.shape}")
        if f.shape != v.shape:
            raise ValueError("fixed-entry mask must match the matrix shape")
        v.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "fixed", f)

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class GeneralizedDesign:
    """Constrained entries of a rank-s sign-shift design, before completion."""

    partial: PartialMatrix
    input_mode: int
    accept_modes: tuple[int, ...]
    input_amplitude: complex
    accept_amplitudes: tuple[complex, ...]
    predicted_probability: float


@dataclass(frozen=True)
class NsDesign:
    """A completed sign-shift design: constrained entries plus full unitary.

    Mode 0 is the system mode; the single ancilla photon enters at
    ``photon_in_mode`` and the run is accepted when it exits in any of
    ``accept_modes`` (all indices zero-based, on the global circuit).
    """

    total_modes: int
    photon_in_mode: int
    accept_modes: tuple[int, ...]
    input_amplitude: complex
    accept_amplitudes: tuple[complex, ...]
    matrix: LopCircuit

    def __post_init__(self):
        u = self.matrix.matrix
        if abs(u[0, 0] - (1 - SQRT2)) > 1e-12:
            raise ValueError("system-system entry must equal 1 - sqrt(2)")
        i = self.photon_in_mode
        for j, yj in zip(self.accept_modes, self.accept_amplitudes):
            if abs(u[j, i] - u[0, i] * u[j, 0] / SQRT2) > 1e-12:
                raise ValueError(
                    f"entry ({j}, {i}) must equal U[0,{i}]*U[{j},0]/sqrt(2)"
                )
            if abs(u[j, 0] - yj) > 1e-12 or abs(u[0, i] - self.input_amplitude) > 1e-12:
                raise ValueError("completed matrix disagrees with design amplitudes")

    @property
    def predicted_probability(self) -> float:
        x2 = abs(self.input_amplitude) ** 2
        return x2 / 2 * sum(abs(y) ** 2 for y in self.accept_amplitudes)

    def scheme(self, system_photons=(0, 1, 2)) -> ConditionalScheme:
        """Post-selection scheme matching this design's input and outcomes."""
        k = self.total_modes - 1
        ancilla_input = tuple(
            1 if m == self.photon_in_mode - 1 else 0 for m in range(k)
        )
        outcomes = tuple(
            tuple(1 if m == j - 1 else 0 for m in range(k))
            for j in self.accept_modes
        )
        return ConditionalScheme(
            system_modes=1,
            ancilla_modes=k,
            ancilla_input=ancilla_input,
            outcomes=outcomes,
            system_photons=tuple(system_photons),
        )


@dataclass(frozen=True)
class OutcomeReport:
    """Diagonal Kraus entries and sign-shift residual for one outcome."""

    outcome: Occupation
    m0: complex
    m1: complex
    m2: complex
    residual: float
    probability: float


@dataclass(frozen=True)
class NsReport:
    """Per-outcome sign-shift diagnostics plus rolled-up totals."""

    per_outcome: tuple[OutcomeReport, ...]
    condition_residual: float
    success_probability: float

    @property
    def m0(self) -> complex:
        return self.per_outcome[0].m0

    @property
    def m1(self) -> complex:
        return self.per_outcome[0].m1

    @property
    def m2(self) -> complex:
        return self.per_outcome[0].m2


def complete_to_unitary(partial: PartialMatrix) -> LopCircuit:
    """Extend fixed rows/columns to a full unitary, or prove none exists.

    The fixed entries must fill a rows-times-columns block.  The free parts
    of the constrained rows must then realize a prescribed Gram matrix
    (unit norms and mutual orthogonality against the fixed parts), which
    exists iff that Gram matrix is positive semidefinite and its rank fits in
    the free columns.  On failure the error names the violated constraints;
    on success the remaining rows are an orthonormal basis of the complement.
    """
    n = partial.dim
    fixed = partial.fixed
    rows_idx = [r for r in range(n) if fixed[r].any()]
    cols_idx = [c for c in range(n) if fixed[:, c].any()]
    if not rows_idx:
        raise ValueError("partial matrix has no fixed entries")
    block = np.zeros_like(fixed)
    block[np.ix_(rows_idx, cols_idx)] = True
    if not np.array_equal(fixed, block):
        raise ValueError("fixed entries must fill a rows-times-columns block")

    f = partial.values[np.ix_(rows_idx, cols_idx)]
    free_cols = [c for c in range(n) if c not in cols_idx]
    free_dim = len(free_cols)
    gram = np.eye(len(rows_idx)) - f @ f.conj().T

    violations = []
    for a, r in enumerate(rows_idx):
        if gram[a, a].real < -_FEAS_EPS:
            violations.append(f"row {r} normalization: fixed entries exceed unit norm")
    for b, c in enumerate(cols_idx):
        if np.sum(np.abs(f[:, b]) ** 2) > 1 + _FEAS_EPS:
            violations.append(
                f"column {c} normalization: fixed entries exceed unit norm"
            )
    for a in range(len(rows_idx)):
        for b in range(a + 1, len(rows_idx)):
            minor = gram[a, a].real * gram[b, b].real - abs(gram[a, b]) ** 2
            if minor < -_FEAS_EPS:
                violations.append(
                    f"Schwarz bound violated between rows {rows_idx[a]} "
                    f"and {rows_idx[b]}"
                )
    eigvals, eigvecs = np.linalg.eigh(gram)
    if eigvals[0] < -_FEAS_EPS and not violations:
        violations.append(
            "row orthonormality constraints admit no positive semidefinite Gram"
        )
    if violations:
        raise InfeasibleDesignError(violations)

    keep = eigvals > _FEAS_EPS
    rank = int(np.count_nonzero(keep))
    if rank > free_dim:
        raise InfeasibleDesignError(
            [
                f"completion needs {rank} free columns but only {free_dim} "
                "remain; add vacuum modes"
            ]
        )
    # Free parts v_r realizing the required inner products v_a† v_b, which
    # equal the complex conjugate of the Gram entries; hence the plain
    # transpose here, not the conjugate one.
    w = np.sqrt(eigvals[keep])[:, None] * eigvecs[:, keep].T

    body = np.zeros((len(rows_idx), n), dtype=complex)
    body[:, cols_idx] = f
    body[:, free_cols[:rank]] = w.T
    if len(rows_idx) < n:
        complement = null_space(body.conj())
        rest = complement.T
        out = np.zeros((n, n), dtype=complex)
        out[rows_idx, :] = body
        out[[r for r in range(n) if r not in rows_idx], :] = rest
    else:
        out = body
    return LopCircuit(out)


def generalized_design(
    x: float,
    y_list: Sequence[float],
    phases: Optional[tuple[float, Sequence[float]]] = None,
    total_modes: int = 0,
) -> GeneralizedDesign:
    """Constrained entries of a rank-s sign-shift design.

    ``x`` is the modulus coupling the system into the ancilla input mode and
    ``y_list`` the moduli coupling the system out of each accepted mode.  The
    photon enters at mode 1 and is accepted in modes 1..s; other placements
    are mode permutations of this one.  The predicted success probability is
    (x^2 / 2) * sum(y_j^2).
    """
    s = len(y_list)
    if s < 1:
        raise ValueError("at least one accepted mode is required")
    if total_modes < s + 1:
        raise ValueError(
            f"need at least {s + 1} modes for {s} accepted modes, got {total_modes}"
        )
    if not 0 <= x <= 1 or any(not 0 <= y <= 1 for y in y_list):
        raise ValueError("coupling moduli must lie in [0, 1]")
    if phases is None:
        phase_x, phase_y = 0.0, [0.0] * s
    else:
        phase_x, phase_y = phases
        if len(phase_y) != s:
            raise ValueError("one phase per accepted mode is required")

    n = total_modes
    values = np.zeros((n, n), dtype=complex)
    mask = np.zeros((n, n), dtype=bool)
    ux = x * cmath.exp(1j * phase_x)
    values[0, 0] = 1 - SQRT2
    values[0, 1] = ux
    mask[0, :2] = True
    uys = []
    for a, (y, ph) in enumerate(zip(y_list, phase_y)):
        j = 1 + a
        uy = y * cmath.exp(1j * ph)
        values[j, 0] = uy
        values[j, 1] = ux * uy / SQRT2
        mask[j, :2] = True
        uys.append(uy)
    predicted = (x**2 / 2) * sum(y**2 for y in y_list)
    return GeneralizedDesign(
        partial=PartialMatrix(values, mask),
        input_mode=1,
        accept_modes=tuple(range(1, s + 1)),
        input_amplitude=ux,
        accept_amplitudes=tuple(uys),
        predicted_probability=predicted,
    )


def complete_design(design: GeneralizedDesign, max_extra_modes: int = 2) -> NsDesign:
    """Complete a design to a unitary, adding up to two vacuum modes if needed."""
    base = design.partial.dim
    last: Optional[InfeasibleDesignError] = None
    for extra in range(max_extra_modes + 1):
        n = base + extra
        values = np.zeros((n, n), dtype=complex)
        mask = np.zeros((n, n), dtype=bool)
        values[:base, :base] = design.partial.values
        mask[:base, :base] = design.partial.fixed
        try:
            circuit = complete_to_unitary(PartialMatrix(values, mask))
        except InfeasibleDesignError as err:
            last = err
            continue
        return NsDesign(
            total_modes=n,
            photon_in_mode=design.input_mode,
            accept_modes=design.accept_modes,
            input_amplitude=design.input_amplitude,
            accept_amplitudes=design.accept_amplitudes,
            matrix=circuit,
        )
    assert last is not None
    raise last


def klm_design(u12: complex, u21: complex) -> NsDesign:
    """Rank-1 sign-shift design from the two free mode couplings.

    The returned circuit fixes the system-system entry to 1 - sqrt(2) and the
    ancilla return entry to u12 * u21 / sqrt(2), then completes the rest to a
    unitary on the fewest modes that admit one (three at the canonical
    optimum u12 = u21 = 2**-0.25, where the success probability is 1/4).
    """
    u12 = complex(u12)
    u21 = complex(u21)
    if abs(u12) > 1 or abs(u21) > 1:
        raise ValueError("coupling moduli must lie in [0, 1]")
    phases = (cmath.phase(u12) if u12 else 0.0, [cmath.phase(u21) if u21 else 0.0])
    design = generalized_design(abs(u12), [abs(u21)], phases, total_modes=2)
    return complete_design(design)


def verify_ns(lop: LopCircuit, scheme: ConditionalScheme) -> NsReport:
    """Check whether a circuit implements the sign shift under a scheme.

    Extracts the Kraus diagonal (m0, m1, m2) for every accepted outcome and
    reports the worst deviation from m0 = m1 = -m2 together with per-outcome
    and total success probabilities.  A failing gate yields a large residual,
    not an error.
    """
    if scheme.system_modes != 1:
        raise ValueError("sign-shift verification needs a single system mode")
    if set(scheme.system_photons) != {0, 1, 2}:
        raise ValueError("sign-shift verification needs photon sectors {0, 1, 2}")
    n_in = sum(scheme.ancilla_input)
    reports = []
    for mu in scheme.outcomes:
        if sum(mu) != n_in:
            raise ValueError(
                f"outcome {mu} changes the ancilla photon count; the Kraus "
                "operator is not diagonal on the sign-shift sectors"
            )
        m = kraus_operator(scheme, lop, mu).entries
        m0, m1, m2 = m[0, 0], m[1, 1], m[2, 2]
        residual = max(abs(m1 - m0), abs(m2 + m0))
        reports.append(
            OutcomeReport(
                outcome=mu,
                m0=m0,
                m1=m1,
                m2=m2,
                residual=float(residual),
                probability=float(abs(m0) ** 2),
            )
        )
    return NsReport(
        per_outcome=tuple(reports),
        condition_residual=max(r.residual for r in reports),
        success_probability=sum(r.probability for r in reports),
    )


def reduce_general_ancilla(chi) -> LopCircuit:
    """Ancilla-only unitary turning the one-photon basis input into |chi>.

    Returns the k x k unitary whose first column is the amplitude vector chi,
    so that injecting the photon into the first ancilla mode and applying it
    prepares the general one-photon state.  Prepending it to a circuit (as
    U @ V on the ancilla block) reduces any one-photon ancilla input to the
    basis-state input, leaving all post-selected probabilities unchanged.
    """
    v = np.asarray(chi, dtype=complex).reshape(-1)
    if v.size < 1:
        raise ValueError("chi must have at least one amplitude")
    if abs(np.sum(np.abs(v) ** 2) - 1.0) > 1e-10:
        raise ValueError("chi must be normalized to one photon")
    k = v.size
    out = np.zeros((k, k), dtype=complex)
    out[:, 0] = v
    if k > 1:
        out[:, 1:] = null_space(v.conj()[None, :])
    return LopCircuit(out)


def ancilla_block(system_modes: int, ancilla_unitary: LopCircuit) -> LopCircuit:
    """Embed an ancilla-only unitary as identity-on-system ⊕ ancilla action."""
    k = ancilla_unitary.dim
    n = system_modes + k
    out = np.eye(n, dtype=complex)
    out[system_modes:, system_modes:] = ancilla_unitary.matrix
    return LopCircuit(out)
