from fractions import Fraction

import numpy as np
import pytest

from commonsys import certify
from commonsys.certify import (
    LEMMA_SUITE_NAMES,
    derive_all,
    derive_c0,
    derive_c1,
    derive_c2_c3_C4,
    pair_product_trivariate,
    prevalence_value_poly,
    verify_lemma_suite,
)
from commonsys.errors import VerificationFailed
from commonsys.exactpoly import subdivision_positive_on_box
from commonsys.qsqrt2 import AlgebraicNumber, an_sign

F = Fraction


@pytest.fixture(scope="module")
def ledger():
    return derive_all()


class TestLemmaSuite:
    def test_seven_certificates_all_verified(self):
        certs = verify_lemma_suite()
        assert len(certs) == len(LEMMA_SUITE_NAMES) == 7
        assert all(c.verified for c in certs)

    def test_flipped_sign_self_test(self):
        with pytest.raises(VerificationFailed) as err:
            verify_lemma_suite(flip_sign_of="low_mean_correction_negative")
        assert "low-mean" in str(err.value)

    def test_factorization_identity_is_exact(self):
        # spot check the identity at rational points
        rng = np.random.default_rng(2)
        for _ in range(20):
            t4 = F(int(rng.integers(-20, 21)), 64)
            t5 = F(int(rng.integers(-20, 21)), 64)
            h = F(1, 2)
            lhs = (h**9 + h**5 * t4 + h**4 * t5 + t4 * t5) * (
                h**9 + h**5 * t4 - h**4 * t5 - t4 * t5
            )
            rhs = (h**4 + t4) ** 2 * (h**10 - t5**2)
            assert lhs == rhs


class TestC0:
    def test_positive_and_below_exact_value(self):
        c0, cert = derive_c0()
        assert c0 > 0 and cert.verified
        value = prevalence_value_poly().eval(F(9, 20))
        assert an_sign(value - AlgebraicNumber(c0, 0)) > 0
        # the exact value is about 5.7176e-05
        assert F(5717, 10**8) < c0 < F(5718, 10**8)

    def test_full_value_not_capped_by_mean_power(self):
        # c0 is the full polynomial value; no relation to (9/20)^9 required
        c0, _ = derive_c0()
        assert c0 < F(9, 20) ** 9  # it happens to be smaller, and that is fine


class TestC1:
    def test_below_root_and_box_certified(self):
        c1, certs = derive_c1()
        assert c1 > 0
        assert all(c.verified for c in certs.values())
        slice_poly = certify.spectral_radius_margin_poly()
        assert an_sign(slice_poly.eval(c1)) > 0  # still left of the root

    def test_larger_radius_fails_with_witness(self):
        c1, _ = derive_c1()
        ok, cert = subdivision_positive_on_box(
            certify.local_margin_poly2(),
            (F(1, 3), F(2, 3), F(0), c1 + F(1, 10)),
            max_depth=20,
        )
        assert not ok and cert.verified

    def test_smaller_radius_also_certifies(self):
        c1, _ = derive_c1()
        ok, _ = subdivision_positive_on_box(
            certify.local_margin_poly2(), (F(1, 3), F(2, 3), F(0), c1 / 2), max_depth=34
        )
        assert ok


class TestC2C3C4:
    def test_window_is_largest_dyadic(self):
        c2, c3, C4, certs = derive_c2_c3_C4()
        assert all(c.verified for c in certs.values())
        assert c2.denominator <= 1024
        assert (F(1, 2) + c2) ** 4 / 2 <= F(7, 100)
        assert (F(1, 2) + c2 + F(1, 1024)) ** 4 / 2 > F(7, 100)

    def test_constants_positive_and_finite(self):
        c2, c3, C4, _ = derive_c2_c3_C4()
        assert 0 < c2 <= F(1, 6)
        assert c3 > 0
        assert C4 > 0

    def test_derivative_bound_dominates_sampling(self):
        c2, c3, C4, _ = derive_c2_c3_C4()
        c2f = float(c2)
        t4max = (0.5 + c2f) ** 4 / 2
        t5max = ((0.5 + c2f) / np.sqrt(2) + 2 * c2f) * t4max

        def derivative(a, t4, t5):
            u = a**9 + a**5 * t4 + a**4 * t5 + t4 * t5
            v = (1 - a) ** 9 + (1 - a) ** 5 * t4 - (1 - a) ** 4 * t5 - t4 * t5
            du = 9 * a**8 + 5 * a**4 * t4 + 4 * a**3 * t5
            dv = -9 * (1 - a) ** 8 - 5 * (1 - a) ** 4 * t4 + 4 * (1 - a) ** 3 * t5
            return du * v + u * dv

        worst = max(
            abs(derivative(a, t4, t5))
            for a in np.linspace(0.5 - c2f, 0.5 + c2f, 41)
            for t4 in np.linspace(0, t4max, 21)
            for t5 in np.linspace(-t5max, t5max, 21)
        )
        assert worst <= float(C4)

    def test_balanced_slice_identity(self):
        # at mean exactly 1/2 the product collapses to the factorized form
        product = pair_product_trivariate()
        rng = np.random.default_rng(3)
        for _ in range(10):
            t4 = F(int(rng.integers(0, 30)), 512)
            t5 = F(int(rng.integers(-20, 21)), 512)
            value = AlgebraicNumber(0, 0)
            for (i, j, k), coeff in product.terms.items():
                value = value + coeff * AlgebraicNumber(
                    F(1, 2) ** i * t4**j * t5**k, 0
                )
            want = (F(1, 16) + t4) ** 2 * (F(1, 1024) - t5**2)
            assert value == AlgebraicNumber(want, 0)

    def test_collapsed_window_still_finite(self):
        # radius-zero strip: the centered bound stays finite
        derivative = pair_product_trivariate().diff(0)
        shifted = derivative.shift(0, F(1, 2))
        bound = shifted.monomial_abs_bound(
            [AlgebraicNumber(0, 0), AlgebraicNumber(F(1, 32), 0), AlgebraicNumber(F(1, 90), 0)]
        )
        assert an_sign(bound) >= 0
        assert bound.approx() < 1.0


class TestL0:
    def test_ledger_values(self, ledger):
        assert ledger.c0 > 0 and ledger.c1 > 0 and ledger.c3 > 0
        assert 0 < ledger.c2 <= F(1, 6)
        assert ledger.c5 > 0 and ledger.c6 > 0
        assert ledger.C4 > 0
        assert 1 <= ledger.l0 <= 10**7

    def test_conditions_replay_at_multiples(self, ledger):
        for l in (ledger.l0, 2 * ledger.l0, 10 * ledger.l0):
            rows = ledger.replay(l)
            assert all(r["satisfied"] for r in rows), (l, rows)

    def test_l0_is_threshold(self, ledger):
        rows = ledger.replay(ledger.l0 - 1)
        assert not all(r["satisfied"] for r in rows)

    def test_every_certificate_reverifies(self, ledger):
        assert ledger.verify_all()
        assert len(ledger.certificates) >= 10

    def test_tampered_ledger_detected(self, ledger):
        import copy

        broken = copy.deepcopy(ledger)
        cert = broken.certificates["prevalence_floor_c0"]
        cert.witness["steps"][1]["op"] = ">"
        assert not broken.verify_all()

    def test_derivation_is_deterministic(self, ledger):
        again = derive_all()
        assert again.to_dict() == ledger.to_dict()

    def test_window_condition_covers_case_split(self, ledger):
        # c5/sqrt(l0) <= 1/6 keeps the balanced regimes inside [1/3, 2/3]
        assert ledger.c5 <= F(1, 6) * certify._sqrt_lower_int(ledger.l0)

    def test_small_l_fails_growth(self, ledger):
        rows = {r["condition"]: r for r in ledger.replay(100)}
        assert not rows["growth"]["satisfied"]

    def test_exact_free_variable_defect_at_l0(self, ledger):
        # end-to-end: the certified threshold really makes the extended
        # system common at this colouring, in exact rational arithmetic
        from commonsys import counting, harmonic, linsys

        exact = (F(3, 4), F(1, 4), F(1, 2))
        f = harmonic.GroupFunction(
            3, 1, np.array([float(v) for v in exact]), exact
        )
        rep = counting.defect(
            linsys.preset("phi"), f, "alon", l=ledger.l0, method="brute"
        )
        assert rep.value >= 0

    def test_summary_renders(self, ledger):
        text = ledger.summary()
        assert "l0" in text and "ok " in text and "FAIL" not in text


def _tamper(cert):
    """Apply one targeted corruption; returns False if nothing tamperable."""
    if cert.method == "sturm":
        flip = {
            "StrictlyPositive": "StrictlyNegative",
            "StrictlyNegative": "StrictlyPositive",
            "HasRoot": "StrictlyPositive",
        }
        cert.witness["verdict"] = flip[cert.witness["verdict"]]
        return True
    if cert.method == "subdivision":
        terms = cert.witness["poly2"]
        i, j, coeff = terms[0]
        terms[0] = [i, j, "-1000000 + 0*sqrt2"]
        return True
    for step in cert.witness.get("steps", []):
        kind = step.get("kind")
        if kind == "cmp":
            step["op"] = {"<": ">", "<=": ">", "==": ">", ">=": "<", ">": "<"}[step["op"]]
            return True
        if kind == "poly_eval":
            step["value"] = "12345 + 0*sqrt2"
            return True
        if kind in ("sqrt_lower", "even_binomial_value"):
            step["value"] = str(Fraction(step["value"]) + 1)
            return True
        if kind == "monomial_abs_bound":
            step["bound"] = "0 + 0*sqrt2"
            return True
        if kind == "poly_identity":
            step["lhs"] = step["lhs"][1:]
            return True
        if kind == "lemma" and step.get("premises"):
            premise = step["premises"][0]
            premise["op"] = {"<": ">", "<=": ">", "==": ">", ">=": "<", ">": "<"}[
                premise["op"]
            ]
            return True
    return False


class TestCheckerSoundness:
    def test_every_emitted_certificate_rejects_tampering(self, ledger):
        import copy

        from commonsys.exactpoly import verify_certificate

        pool = dict(ledger.certificates)
        for i, cert in enumerate(verify_lemma_suite()):
            pool[f"suite_{i}"] = cert
        tampered = 0
        for name, cert in pool.items():
            assert verify_certificate(cert), name
            broken = copy.deepcopy(cert)
            if _tamper(broken):
                assert not verify_certificate(broken), f"tamper not caught: {name}"
                tampered += 1
        assert tampered >= len(pool) - 2  # nearly every certificate is tamperable
