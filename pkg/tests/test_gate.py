import math

import numpy as np
import pytest

from nsgate import (
    ConditionalScheme,
    DensityMatrix,
    InfeasibleDesignError,
    LopCircuit,
    PartialMatrix,
    X2_MAX,
    ancilla_block,
    apply_conditional,
    complete_design,
    complete_to_unitary,
    generalized_design,
    haar_unitary,
    klm_design,
    kraus_operator,
    reduce_general_ancilla,
    verify_ns,
)

SQRT2 = math.sqrt(2.0)


class TestKlmDesign:
    def test_optimum(self, klm_optimum):
        design, scheme = klm_optimum
        assert design.total_modes == 3
        u = design.matrix.matrix
        assert u[0, 0] == pytest.approx(1 - SQRT2, abs=1e-14)
        assert u[1, 1] == pytest.approx(0.5, abs=1e-12)
        report = verify_ns(design.matrix, scheme)
        assert report.condition_residual <= 1e-12
        assert report.success_probability == pytest.approx(0.25, abs=1e-12)

    def test_decoupled_ancilla_still_completable(self):
        design = klm_design(0, 0)
        u = design.matrix.matrix
        assert u[1, 1] == pytest.approx(0.0, abs=1e-14)
        assert design.predicted_probability == 0.0
        report = verify_ns(design.matrix, design.scheme())
        assert report.success_probability == pytest.approx(0.0, abs=1e-14)

    def test_saturated_first_row(self):
        # x^2 exactly at the cap: the first row closes with no free weight.
        x = math.sqrt(X2_MAX)
        design = klm_design(x, 0)
        u = design.matrix.matrix
        assert np.abs(u[0, 2:]).max(initial=0.0) < 1e-12
        assert abs(np.abs(u[0, 0]) ** 2 + np.abs(u[0, 1]) ** 2 - 1) < 1e-12

    def test_corner_infeasible_names_schwarz(self):
        x = math.sqrt(X2_MAX)
        with pytest.raises(InfeasibleDesignError) as excinfo:
            klm_design(x, x)
        assert "Schwarz" in str(excinfo.value)

    def test_modulus_above_one_rejected(self):
        with pytest.raises(ValueError):
            klm_design(1.2, 0.5)

    def test_complex_couplings_honored(self):
        u12 = 0.6 * np.exp(0.7j)
        u21 = 0.5 * np.exp(-1.1j)
        design = klm_design(u12, u21)
        u = design.matrix.matrix
        assert u[0, 1] == pytest.approx(u12, abs=1e-12)
        assert u[1, 0] == pytest.approx(u21, abs=1e-12)
        assert u[1, 1] == pytest.approx(u12 * u21 / SQRT2, abs=1e-12)
        report = verify_ns(design.matrix, design.scheme())
        assert report.condition_residual <= 1e-12


class TestCompleteToUnitary:
    def test_single_fixed_row_completes(self, rng):
        row = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        row /= np.linalg.norm(row)
        values = np.zeros((4, 4), dtype=complex)
        values[0] = row
        mask = np.zeros((4, 4), dtype=bool)
        mask[0] = True
        circuit = complete_to_unitary(PartialMatrix(values, mask))
        assert np.allclose(circuit.matrix[0], row)

    def test_fully_fixed_unitary_accepted(self, rng):
        u = haar_unitary(3, rng)
        mask = np.ones((3, 3), dtype=bool)
        circuit = complete_to_unitary(PartialMatrix(u.matrix, mask))
        assert np.allclose(circuit.matrix, u.matrix)

    def test_fully_fixed_non_unitary_rejected(self):
        values = np.eye(3, dtype=complex) * 0.9
        mask = np.ones((3, 3), dtype=bool)
        with pytest.raises(InfeasibleDesignError):
            complete_to_unitary(PartialMatrix(values, mask))

    def test_non_block_pattern_rejected(self):
        values = np.zeros((3, 3), dtype=complex)
        mask = np.zeros((3, 3), dtype=bool)
        mask[0, 0] = mask[1, 1] = True
        with pytest.raises(ValueError):
            complete_to_unitary(PartialMatrix(values, mask))

    def test_no_fixed_entries_rejected(self):
        with pytest.raises(ValueError):
            complete_to_unitary(
                PartialMatrix(np.zeros((2, 2)), np.zeros((2, 2), dtype=bool))
            )

    def test_interior_point_needs_extra_mode(self):
        # strictly inside the feasibility region the free parts span two
        # directions, so three modes cannot host them but four can
        design = generalized_design(0.5, [0.5], total_modes=3)
        with pytest.raises(InfeasibleDesignError) as excinfo:
            complete_to_unitary(design.partial)
        assert "free columns" in str(excinfo.value)
        completed = complete_design(design)
        assert completed.total_modes == 4

    def test_row_norm_violation_named(self):
        design = generalized_design(0.95, [0.2], total_modes=4)
        with pytest.raises(InfeasibleDesignError) as excinfo:
            complete_to_unitary(design.partial)
        assert "row 0 normalization" in str(excinfo.value)


class TestGeneralizedDesign:
    def test_single_accept_mode_reduces_to_klm_pattern(self):
        design = generalized_design(0.7, [0.6], total_modes=3)
        values = design.partial.values
        mask = design.partial.fixed
        assert values[0, 0] == pytest.approx(1 - SQRT2)
        assert values[0, 1] == pytest.approx(0.7)
        assert values[1, 0] == pytest.approx(0.6)
        assert values[1, 1] == pytest.approx(0.7 * 0.6 / SQRT2)
        expected_mask = np.zeros((3, 3), dtype=bool)
        expected_mask[:2, :2] = True
        assert np.array_equal(mask, expected_mask)

    def test_predicted_probability_formula(self):
        x = math.sqrt(1 / SQRT2)
        ys = [0.4, 0.5]
        design = generalized_design(x, ys, total_modes=4)
        assert design.predicted_probability == pytest.approx(
            (x**2 / 2) * (0.4**2 + 0.5**2)
        )

    def test_rank_two_split_optimum_probability(self):
        # x^2 = 1/sqrt(2) with the accepted weight split over two modes still
        # reaches 1/4, on four modes exactly at the generalized boundary.
        x = (1 / SQRT2) ** 0.5
        y = (1 / (2 * SQRT2)) ** 0.5
        design = complete_design(generalized_design(x, [y, y], total_modes=4))
        assert design.total_modes == 4
        assert design.predicted_probability == pytest.approx(0.25, abs=1e-12)
        report = verify_ns(design.matrix, design.scheme())
        assert report.condition_residual <= 1e-12
        assert report.success_probability == pytest.approx(0.25, abs=1e-10)

    def test_rank_two_interior_point(self):
        design = complete_design(generalized_design(0.6, [0.4, 0.3], total_modes=4))
        report = verify_ns(design.matrix, design.scheme())
        assert report.condition_residual <= 1e-12
        assert report.success_probability == pytest.approx(
            design.predicted_probability, abs=1e-10
        )
        # each accepted outcome contributes |U_j1 U_1i / sqrt(2)|^2
        u = design.matrix.matrix
        for rep, j in zip(report.per_outcome, design.accept_modes):
            assert rep.probability == pytest.approx(
                abs(u[0, 1] * u[j, 0]) ** 2 / 2, abs=1e-12
            )

    def test_zero_input_coupling_gives_zero_probability(self):
        design = generalized_design(0.0, [0.5, 0.5], total_modes=4)
        assert design.predicted_probability == 0.0

    def test_measured_probability_is_input_independent(self, rng):
        # a functioning gate scales every sector alike, so the success
        # probability matches (x^2 / 2) * sum(y^2) for any input state
        design = complete_design(generalized_design(0.6, [0.4, 0.3], total_modes=4))
        scheme = design.scheme()
        for _ in range(5):
            psi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            rho = DensityMatrix.pure(scheme.system_basis, psi)
            result = apply_conditional(scheme, design.matrix, rho)
            assert result.probability == pytest.approx(
                design.predicted_probability, abs=1e-10
            )

    def test_modulus_validation(self):
        with pytest.raises(ValueError):
            generalized_design(0.5, [1.4], total_modes=3)
        with pytest.raises(ValueError):
            generalized_design(0.5, [], total_modes=3)
        with pytest.raises(ValueError):
            generalized_design(0.5, [0.5, 0.5], total_modes=2)


class TestVerifyNs:
    def test_identity_fails_sign_condition(self):
        scheme = ConditionalScheme(1, 2, (1, 0), ((1, 0),))
        report = verify_ns(LopCircuit(np.eye(3)), scheme)
        assert report.m0 == pytest.approx(1.0)
        assert report.m1 == pytest.approx(1.0)
        assert report.m2 == pytest.approx(1.0)
        assert report.condition_residual == pytest.approx(2.0)

    def test_functioning_implies_matrix_form(self, rng):
        # converse check on working gates: small residual forces the entry
        # structure (needs a non-degenerate gate, probability > 0)
        for x2, y2 in [(0.3, 0.5), (0.5, 0.6), (1 / SQRT2, 1 / SQRT2)]:
            design = complete_design(
                generalized_design(math.sqrt(x2), [math.sqrt(y2)], total_modes=3)
            )
            report = verify_ns(design.matrix, design.scheme())
            if report.condition_residual > 1e-10:
                continue
            u = design.matrix.matrix
            assert abs(u[0, 0] - (1 - SQRT2)) <= 1e-8
            assert abs(u[1, 1] - u[0, 1] * u[1, 0] / SQRT2) <= 1e-8

    def test_multi_system_mode_rejected(self, rng):
        scheme = ConditionalScheme(2, 1, (1,), ((1,),))
        with pytest.raises(ValueError):
            verify_ns(haar_unitary(3, rng), scheme)

    def test_photon_changing_outcome_rejected(self, rng):
        scheme = ConditionalScheme(1, 2, (1, 0), ((0, 0),))
        with pytest.raises(ValueError):
            verify_ns(haar_unitary(3, rng), scheme)


class TestReduceGeneralAncilla:
    def test_basis_vector_gives_identity_action(self):
        v = reduce_general_ancilla([1.0, 0.0])
        assert np.allclose(np.abs(v.matrix[:, 0]), [1.0, 0.0])

    def test_balanced_superposition_column(self):
        chi = np.array([1.0, 1.0]) / math.sqrt(2)
        v = reduce_general_ancilla(chi)
        assert np.allclose(v.matrix[:, 0], chi)

    def test_non_normalized_rejected(self):
        with pytest.raises(ValueError):
            reduce_general_ancilla([1.0, 1.0])

    def test_pipeline_equivalence(self, rng):
        # preparing |chi> inside the circuit must reproduce the physics of
        # feeding |chi> directly, outcome by outcome
        scheme = ConditionalScheme(1, 2, (1, 0), ((1, 0),), (0, 1, 2))
        for _ in range(10):
            chi = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            chi /= np.linalg.norm(chi)
            upstream = haar_unitary(3, rng)
            folded = LopCircuit(
                upstream.matrix
                @ ancilla_block(1, reduce_general_ancilla(chi)).matrix
            )
            m_reduced = kraus_operator(scheme, folded, (1, 0)).entries
            m_direct = sum(
                chi[a]
                * kraus_operator(
                    ConditionalScheme(
                        1, 2, tuple(1 if m == a else 0 for m in range(2)),
                        ((1, 0),), (0, 1, 2),
                    ),
                    upstream,
                    (1, 0),
                ).entries
                for a in range(2)
            )
            assert np.abs(m_reduced - m_direct).max() < 1e-10
            psi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
            rho = DensityMatrix.pure(scheme.system_basis, psi)
            p_reduced = apply_conditional(scheme, folded, rho).probability
            p_direct = float(
                np.trace(m_direct @ rho.entries @ m_direct.conj().T).real
            )
            assert p_reduced == pytest.approx(p_direct, abs=1e-10)


class TestPermutationEquivalence:
    def test_swapping_ancilla_modes_preserves_probabilities(self, rng):
        base = ConditionalScheme(1, 3, (1, 0, 0), ((0, 1, 0),), (0, 1, 2))
        lop = haar_unitary(4, rng)
        psi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        rho = DensityMatrix.pure(base.system_basis, psi)
        p_base = apply_conditional(base, lop, rho).probability

        # swap ancilla modes 1 and 2 (global modes 2 and 3)
        perm = [0, 1, 3, 2]
        swapped_lop = LopCircuit(lop.matrix[np.ix_(perm, perm)])
        swapped = ConditionalScheme(
            1,
            3,
            tuple(base.ancilla_input[i] for i in (0, 2, 1)),
            (tuple(base.outcomes[0][i] for i in (0, 2, 1)),),
            (0, 1, 2),
        )
        p_swapped = apply_conditional(swapped, swapped_lop, rho).probability
        assert p_swapped == pytest.approx(p_base, abs=1e-14)


class TestAncillaBlock:
    def test_embedding_is_identity_on_system(self, rng):
        v = haar_unitary(2, rng)
        g = ancilla_block(2, v)
        assert np.allclose(g.matrix[:2, :2], np.eye(2))
        assert np.allclose(g.matrix[2:, 2:], v.matrix)
        assert np.abs(g.matrix[:2, 2:]).max() == 0
