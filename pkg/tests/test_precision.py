"""Emulated arithmetic contracts, the stability diagnostics, and the
Paige-inequality reports."""

from fractions import Fraction

import numpy as np
import pytest

from funmlab import (
    PrecisionConfig,
    StructuralError,
    SymmetricOperator,
    cg_emulated,
    lanczos_decompose,
    lanczos_emulated,
    paige_report,
    round_to,
)
from funmlab.lanczos import LanczosDecomposition
from funmlab.precision import EmulatedArithmetic, diagnose


def random_unit_symmetric(seed, n):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((n, n))
    m = m + m.T
    m /= np.linalg.norm(m, 2)
    return SymmetricOperator.from_dense(m, symmetrize=True, norm_hint=1.0), rng


class TestRoundTo:
    def test_exactly_representable_values(self):
        cfg = PrecisionConfig(8)
        assert round_to(1.0, cfg) == 1.0
        assert round_to(1.5, PrecisionConfig(4)) == 1.5
        assert round_to(0.0, cfg) == 0.0
        assert round_to(-2.0, cfg) == -2.0

    def test_rounds_to_nearest_neighbor(self):
        # spacing at 1.0 with 8 mantissa bits is 2^-8; 1 + 2^-10 rounds down
        assert round_to(1.0 + 2.0**-10, PrecisionConfig(8)) == 1.0
        assert round_to(1.0 + 2.0**-9 + 2.0**-12, PrecisionConfig(8)) == 1.0 + 2.0**-8

    def test_ties_to_even(self):
        cfg = PrecisionConfig(8)
        # 1 + 2^-9 sits exactly between 1 and 1 + 2^-8; even mantissa wins
        assert round_to(1.0 + 2.0**-9, cfg) == 1.0
        assert round_to(1.0 + 3.0 * 2.0**-9, cfg) == 1.0 + 2.0**-7

    def test_identity_at_full_width(self):
        cfg = PrecisionConfig(52)
        rng = np.random.default_rng(0)
        x = rng.standard_normal(1000) * 10.0 ** rng.integers(-200, 200, 1000)
        np.testing.assert_array_equal(round_to(x, cfg), x)

    def test_array_and_scalar_agree(self):
        cfg = PrecisionConfig(11)
        rng = np.random.default_rng(1)
        x = rng.standard_normal(100)
        array_out = round_to(x, cfg)
        scalar_out = np.array([round_to(float(v), cfg) for v in x])
        np.testing.assert_array_equal(array_out, scalar_out)

    def test_bits_range_validated(self):
        with pytest.raises(StructuralError):
            PrecisionConfig(3)
        with pytest.raises(StructuralError):
            PrecisionConfig(53)

    def test_relative_error_contract_large_sample(self):
        # |fl(x o y) - x o y| <= eps |x o y| for a million operand pairs
        rng = np.random.default_rng(2)
        n = 1_000_000
        x = rng.uniform(-100.0, 100.0, n)
        y = rng.uniform(-100.0, 100.0, n)
        y[y == 0.0] = 1.0
        for bits in (8, 16, 37):
            cfg = PrecisionConfig(bits)
            ar = EmulatedArithmetic(cfg)
            for op in (np.add, np.subtract, np.multiply, np.divide):
                exact = op(x, y)
                emulated = ar.round(exact)
                assert np.all(
                    np.abs(emulated - exact) <= cfg.epsilon * np.abs(exact)
                )
            exact_sqrt = np.sqrt(np.abs(x))
            assert np.all(
                np.abs(ar.round(exact_sqrt) - exact_sqrt)
                <= cfg.epsilon * exact_sqrt
            )

    def test_round_to_nearest_against_exact_rationals(self):
        # half-ulp optimality: the emulated result is within 2^-(bits+1)
        # of the exact rational result, relatively
        rng = np.random.default_rng(3)
        for bits in (6, 13, 24):
            cfg = PrecisionConfig(bits)
            half_ulp = Fraction(1, 2 ** (bits + 1))
            for _ in range(400):
                x = float(round_to(float(rng.uniform(-8, 8)), cfg))
                y = float(round_to(float(rng.uniform(0.25, 8)), cfg))
                for op in ("add", "sub", "mul", "div"):
                    exact = {
                        "add": Fraction(x) + Fraction(y),
                        "sub": Fraction(x) - Fraction(y),
                        "mul": Fraction(x) * Fraction(y),
                        "div": Fraction(x) / Fraction(y),
                    }[op]
                    computed = {
                        "add": x + y,
                        "sub": x - y,
                        "mul": x * y,
                        "div": x / y,
                    }[op]
                    rounded = Fraction(float(round_to(computed, cfg)))
                    if exact == 0:
                        assert rounded == 0
                        continue
                    # double rounding (op in double, then to bits) stays
                    # within a half ulp plus the double-precision crumb
                    slack = half_ulp + Fraction(1, 2**52)
                    assert abs(rounded - exact) <= slack * abs(exact)


class TestEmulatedMatvec:
    def test_requirement_two_shape(self):
        # ||fl(A w) - A w|| <= 2 n^{3/2} ||A|| ||w|| eps
        for bits in (10, 16, 24):
            cfg = PrecisionConfig(bits)
            ar = EmulatedArithmetic(cfg)
            for seed in range(10):
                rng = np.random.default_rng(seed)
                n = int(rng.integers(2, 101))
                m = rng.standard_normal((n, n))
                m = (m + m.T) / 2.0
                w = rng.standard_normal(n)
                exact = m @ w
                emulated = ar.matvec_dense(ar.round(m), w)
                norm_m = np.linalg.norm(m, 2)
                bound = (
                    2.0 * n**1.5 * norm_m * np.linalg.norm(w) * cfg.epsilon
                )
                # storage rounding of A itself costs one extra eps factor
                bound += norm_m * np.linalg.norm(w) * cfg.epsilon * n
                assert np.linalg.norm(emulated - exact) <= bound


class TestEmulatedLanczos:
    def test_full_width_matches_double_bit_for_bit(self):
        a, rng = random_unit_symmetric(5, 40)
        x = rng.standard_normal(40)
        dec_double = lanczos_decompose(a, x, 18, breakdown_tol=0.0)
        dec_emulated, _ = lanczos_emulated(a, x, 18, PrecisionConfig(52))
        assert np.array_equal(dec_double.q_basis, dec_emulated.q_basis)
        assert np.array_equal(dec_double.alphas, dec_emulated.alphas)
        assert np.array_equal(dec_double.betas, dec_emulated.betas)
        assert dec_double.beta_next == dec_emulated.beta_next

    def test_sixteen_bit_paige_quantities(self):
        a, rng = random_unit_symmetric(6, 60)
        x = rng.standard_normal(60)
        cfg = PrecisionConfig(16)
        _, diag = lanczos_emulated(a, x, 25, cfg)
        n, k = 60, diag.steps_taken
        assert diag.residual_norm <= k * (2 * n**1.5 + 7) * cfg.epsilon
        assert diag.max_qnorm_drift <= (n + 4) * cfg.epsilon

    def test_monotone_defect_degradation(self):
        a, rng = random_unit_symmetric(7, 60)
        x = rng.standard_normal(60)
        defects = []
        for bits in (52, 32, 24, 16, 12):
            _, diag = lanczos_emulated(a, x, 25, PrecisionConfig(bits))
            defects.append(diag.orthogonality_defect)
        for earlier, later in zip(defects, defects[1:]):
            assert later >= earlier / 3.0

    def test_diagnostics_carry_ritz_range(self):
        a = SymmetricOperator.from_diagonal(np.linspace(0.5, 2.0, 30))
        rng = np.random.default_rng(8)
        _, diag = lanczos_emulated(a, rng.standard_normal(30), 10,
                                   PrecisionConfig(20))
        assert 0.4 <= diag.ritz_min <= diag.ritz_max <= 2.1


class TestPaigeReport:
    def test_all_inequalities_hold_at_reduced_precision(self):
        for bits in (12, 16, 52):
            a, rng = random_unit_symmetric(9, 50)
            x = rng.standard_normal(50)
            _, diag = lanczos_emulated(a, x, 20, PrecisionConfig(bits))
            report = paige_report(diag, a)
            assert report.all_passed, report.as_dict()

    def test_full_precision_ratios_are_small(self):
        a, rng = random_unit_symmetric(10, 50)
        x = rng.standard_normal(50)
        _, diag = lanczos_emulated(a, x, 20, PrecisionConfig(52))
        report = paige_report(diag, a)
        assert report["residual_norm"].ratio <= 1e-3
        # the q-norm bound is only (n+4) eps while the drift cannot fall
        # below ~1 ulp, so its ratio floor is ~1/(n+4), not 1e-3
        assert report["qnorm_drift"].ratio <= 0.1

    def test_flags_non_normalizing_variant(self):
        # a buggy recurrence that skips normalization must trip the
        # q-norm inequality
        a, rng = random_unit_symmetric(11, 30)
        x = rng.standard_normal(30)
        cfg = PrecisionConfig(16)

        q_prev = np.zeros(30)
        q = x / np.linalg.norm(x)
        beta = 0.0
        columns, alphas, betas = [], [], []
        for _ in range(6):
            columns.append(q)
            w = a.matvec(q) - beta * q_prev
            alpha = float(w @ q)
            w = w - alpha * q
            alphas.append(alpha)
            beta_next = float(np.linalg.norm(w))
            q_prev, q = q, w * 1.5  # bug: scales instead of normalizing
            beta = beta_next
            betas.append(beta_next)
        buggy = LanczosDecomposition(
            q_basis=np.column_stack(columns),
            alphas=np.asarray(alphas),
            betas=np.asarray(betas[:-1]),
            beta_next=betas[-1],
            q_next=q / np.linalg.norm(q),
            steps_taken=6,
            requested_k=6,
            breakdown=False,
            x_norm=float(np.linalg.norm(x)),
        )
        report = paige_report(diagnose(buggy, a, cfg), a)
        assert not report.all_passed
        assert not report["qnorm_drift"].passed


class TestEmulatedCg:
    def test_reduces_residual_at_reduced_precision(self):
        values = np.geomspace(0.1, 1.0, 12)
        a = SymmetricOperator.from_diagonal(values)
        rng = np.random.default_rng(12)
        b = rng.standard_normal(12)
        trace = cg_emulated(a, b, 8, PrecisionConfig(16))
        assert trace.residual_norms[-1] <= 0.1 * trace.residual_norms[0]

    def test_full_width_matches_double_cg(self):
        from funmlab import cg_solve

        values = np.geomspace(0.2, 1.0, 10)
        a = SymmetricOperator.from_diagonal(values)
        rng = np.random.default_rng(13)
        b = rng.standard_normal(10)
        emulated = cg_emulated(a, b, 6, PrecisionConfig(52))
        plain = cg_solve(a, b, 6)
        np.testing.assert_allclose(
            emulated.solution, plain.solution, rtol=1e-12
        )
