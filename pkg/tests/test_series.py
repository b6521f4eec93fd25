from fractions import Fraction

import numpy as np
import pytest

from innerlab.series import (
    CertificateMethod, CertificateStatus, CoeffSeq, SeqMode, bn_mass, conjecture_evidence, dirichlet_mass_limit,
    forward_coeffs, hardy_check, np_certify, random_mass_one_sequence, ratio_tail, reciprocal_coeffs,
)

# --- CERTIFICATION ---

@pytest.mark.parametrize('alpha', [0, Fraction(1, 2), 1])
def test_dirichlet_certified(alpha):

    a    = CoeffSeq.dirichlet(alpha, N=200)
    cert = np_certify(a)

    assert cert.status == CertificateStatus.Certified
    assert cert.degree == 200
    assert cert.first_negative_index is None
    assert cert.min_coefficient >= 0


def test_linear_coefficients_refuted():

    a    = CoeffSeq.from_values([n + 1 for n in range(11)])
    cert = np_certify(a)

    assert a.exact
    assert cert.status == CertificateStatus.Refuted
    assert cert.first_negative_index == 2
    assert cert.b[2] == Fraction(-1)


def test_szego_representation_is_single_atom():

    b = reciprocal_coeffs(CoeffSeq.szego(30))

    assert b[1] == 1
    assert all(c == 0 for c in b.coeffs[2:])


def test_float_certificate_reports_tolerance():

    cert = np_certify(CoeffSeq.dirichlet(1, N=50, mode=SeqMode.Float), tol=1e-10)

    assert cert.certified
    assert cert.tolerance == 1e-10


def test_hardy_criterion():

    assert hardy_check(CoeffSeq.dirichlet(1, N=50)).certified
    # Ratios (n+2)/(n+1) are decreasing and above one
    assert hardy_check(CoeffSeq.from_values([n + 1 for n in range(10)])).status == CertificateStatus.Inconclusive


def test_hardy_criterion_non_monotone_ratios():

    # Ratios 2, 1/2, 1
    cert = hardy_check(CoeffSeq.from_values([1, 2, 1, 1]))

    assert cert.status == CertificateStatus.Inconclusive
    assert cert.method == CertificateMethod.HardyCriterion


def test_hardy_certificate_implies_direct_certificate(rng):

    for _ in range(30):

        # Nondecreasing ratios bounded by one give a log-convex sequence
        N      = int(rng.integers(1, 40))
        ratios = sorted(Fraction(int(rng.integers(1, 50)), 50) for _ in range(N))
        values = [Fraction(1)]
        for r in ratios:
            values.append(values[-1] * r)

        a = CoeffSeq.from_values(values)

        assert hardy_check(a).certified
        assert np_certify(a).certified


def test_hardy_criterion_needs_positive_coefficients():

    with pytest.raises(ValueError):
        hardy_check(CoeffSeq.from_values([1, 0, 1]))

# --- RECURSIONS ---

def test_reciprocal_of_harmonic_coefficients():

    b = reciprocal_coeffs(CoeffSeq.from_values([1, Fraction(1, 2), Fraction(1, 3), Fraction(1, 4)]))

    assert b.coeffs == (0, Fraction(1, 2), Fraction(1, 12), Fraction(1, 24))


def test_forward_of_geometric_representation():

    b = CoeffSeq.from_values([0] + [Fraction(1, 2 ** n) for n in range(1, 11)])

    assert forward_coeffs(b, 10).coeffs == (1,) + (Fraction(1, 2),) * 10


def test_reciprocal_convolution_identity(rng):

    for _ in range(20):

        N = int(rng.integers(1, 30))
        a = CoeffSeq.from_values([Fraction(1)] + [Fraction(int(rng.integers(-50, 50)), int(rng.integers(1, 50))) for _ in range(N)])
        b = reciprocal_coeffs(a)

        # (1 - Σ b_n x^n)(Σ a_n x^n) = 1
        for n in range(1, N + 1):
            assert sum(b[k] * a[n - k] for k in range(1, n + 1)) == a[n]



def test_reciprocal_forward_roundtrip(rng):

    for _ in range(50):

        N      = int(rng.integers(1, 101))
        values = [Fraction(1)] + [Fraction(int(rng.integers(1, 100)), int(rng.integers(1, 100))) for _ in range(N)]
        a      = CoeffSeq.from_values(values)

        b = reciprocal_coeffs(a)
        assert b.exact
        assert forward_coeffs(b, N).coeffs == a.coeffs


def test_reciprocal_needs_normalized_kernel():

    with pytest.raises(ValueError):
        reciprocal_coeffs(CoeffSeq.from_values([2, 1]))


def test_interval_mode_encloses_float():

    a_iv = CoeffSeq.dirichlet(Fraction(1, 2), N=30)
    a_fl = CoeffSeq.dirichlet(Fraction(1, 2), N=30, mode=SeqMode.Float)

    assert a_iv.mode == SeqMode.Interval
    np.testing.assert_allclose(
        reciprocal_coeffs(a_iv).as_array(),
        reciprocal_coeffs(a_fl).as_array(),
        atol=1e-12,
    )

# --- RATIOS AND MASS ---

def test_ratio_tail_of_dirichlet():

    ratios = ratio_tail(CoeffSeq.dirichlet(1, N=10))

    assert ratios[0] == Fraction(2)
    assert ratios[-1] == Fraction(11, 10)


def test_mass_of_bounded_dirichlet_kernel():

    b    = reciprocal_coeffs(CoeffSeq.dirichlet(2, N=300, mode=SeqMode.Float))
    mass = bn_mass(b)

    assert mass < 1
    assert mass == pytest.approx(dirichlet_mass_limit(2), abs=1e-2)
    assert dirichlet_mass_limit(2) == pytest.approx(1 - 6 / np.pi ** 2)


def test_mass_rejects_negative_sequences():

    with pytest.raises(ValueError):
        bn_mass(reciprocal_coeffs(CoeffSeq.from_values([1, 2, 3])))

# --- CONJECTURE HARNESS ---

def test_random_mass_one_sequences_ratio_tail(rng):

    for _ in range(20):

        b        = random_mass_one_sequence(rng, support=6)
        evidence = conjecture_evidence(b, N=500)

        assert bn_mass(b) == 1
        assert evidence.hypothesis
        assert evidence.gap <= 1e-3
        assert not evidence.counterexample_candidate


def test_bounded_kernel_outside_hypothesis():

    b        = reciprocal_coeffs(CoeffSeq.dirichlet(2, N=200, mode=SeqMode.Float))
    evidence = conjecture_evidence(b, N=200, mass_limit=dirichlet_mass_limit(2))

    assert evidence.hypothesis is False
    assert evidence.mass < 1
    assert not evidence.counterexample_candidate


def test_floating_partial_mass_is_undecided():

    b = reciprocal_coeffs(CoeffSeq.dirichlet(1, N=50, mode=SeqMode.Float))

    assert conjecture_evidence(b, N=50).hypothesis is None
