from decimal import Decimal, getcontext
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commonsys import exactpoly
from commonsys.errors import (
    DepthExhausted,
    NotExactlyOneRoot,
    VerificationFailed,
    ZeroPolynomial,
)
from commonsys.exactpoly import (
    HAS_ROOT,
    STRICTLY_NEGATIVE,
    STRICTLY_POSITIVE,
    Certificate,
    ExactPoly,
    ExactPoly2,
    check_certificate,
    eval_exact,
    isolate_positive_root,
    poly_from_rationals,
    rational_chain_certificate,
    sturm_chain,
    sturm_sign_on_interval,
    subdivision_positive_on_box,
    verify_certificate,
)
from commonsys.qsqrt2 import (
    AlgebraicNumber,
    an_sign,
    format_algebraic,
    parse_algebraic,
    sqrt_lower,
    sqrt_upper,
)

F = Fraction
rationals = st.fractions(
    min_value=-100, max_value=100, max_denominator=50
)


class TestAlgebraicNumber:
    def test_sign_examples(self):
        assert an_sign(AlgebraicNumber(3, -2)) == 1  # 9 > 8
        assert an_sign(AlgebraicNumber(-1, 0)) == -1
        assert an_sign(AlgebraicNumber(0, 0)) == 0
        assert an_sign(AlgebraicNumber(-3, 2)) == -1
        assert an_sign(AlgebraicNumber(0, -1)) == -1

    @given(rationals, rationals, rationals, rationals, rationals, rationals)
    @settings(max_examples=60, deadline=None)
    def test_field_axioms(self, a, b, c, d, e, f):
        x = AlgebraicNumber(a, b)
        y = AlgebraicNumber(c, d)
        z = AlgebraicNumber(e, f)
        assert (x + y) + z == x + (y + z)
        assert (x * y) * z == x * (y * z)
        assert x * (y + z) == x * y + x * z
        assert x + y == y + x and x * y == y * x
        if y != AlgebraicNumber(0, 0):
            assert y * y.inverse() == AlgebraicNumber(1, 0)
            assert (x / y) * y == x

    def test_sign_against_high_precision_decimal(self):
        getcontext().prec = 60
        sqrt2 = Decimal(2).sqrt()
        rng = np.random.default_rng(123)
        for _ in range(10**4):
            a = F(int(rng.integers(-1000, 1001)), int(rng.integers(1, 100)))
            b = F(int(rng.integers(-1000, 1001)), int(rng.integers(1, 100)))
            x = AlgebraicNumber(a, b)
            approx = (
                Decimal(a.numerator) / Decimal(a.denominator)
                + Decimal(b.numerator) / Decimal(b.denominator) * sqrt2
            )
            want = 0 if approx == 0 else (1 if approx > 0 else -1)
            assert an_sign(x) == want

    def test_parse_format_round_trip(self):
        for x in (
            AlgebraicNumber(F(3, 7), F(-2, 5)),
            AlgebraicNumber(0, 0),
            AlgebraicNumber(F(-1, 3), 0),
            AlgebraicNumber(0, F(9, 2)),
        ):
            assert parse_algebraic(format_algebraic(x)) == x

    def test_power(self):
        s = AlgebraicNumber(0, 1)
        assert s**2 == AlgebraicNumber(2, 0)
        assert s**-2 == AlgebraicNumber(F(1, 2), 0)

    def test_sqrt_bounds(self):
        for x in (F(2), F(3, 7), F(1, 2**18), F(0)):
            lo, hi = sqrt_lower(x), sqrt_upper(x)
            assert lo * lo <= x <= hi * hi
            assert hi - lo < F(1, 2**40)


class TestExactPoly:
    def test_eval_constant_term(self):
        p = poly_from_rationals([F(5, 3), 1, 2])
        assert eval_exact(p, 0) == AlgebraicNumber(F(5, 3), 0)

    def test_eval_double_root(self):
        p = poly_from_rationals([1, -2, 1])  # (x-1)^2
        assert eval_exact(p, 1) == AlgebraicNumber(0, 0)

    def test_divmod_reconstructs(self):
        a = poly_from_rationals([1, 2, 0, 1, 5])
        b = poly_from_rationals([3, 1, 2])
        q, r = a.divmod(b)
        assert q * b + r == a
        assert r.degree < b.degree

    def test_degree_cap(self):
        with pytest.raises(ValueError):
            ExactPoly([1] * 70)


class TestSturm:
    def test_product_margin_positive(self):
        s = poly_from_rationals([F(1, 1024), F(1, 256), -F(1, 8), -1])
        verdict, cert = sturm_sign_on_interval(s, 0, F(7, 100))
        assert verdict == STRICTLY_POSITIVE and cert.verified

    def test_low_mean_correction_negative_with_exact_endpoints(self):
        from commonsys.certify import low_mean_correction_poly

        q = low_mean_correction_poly()
        # endpoint values: q(0) = -1/(2 sqrt2), q(1/2) = 1/32 - 3 sqrt2/128
        assert q.eval(0) == AlgebraicNumber(0, -F(1, 4))
        assert q.eval(F(1, 2)) == AlgebraicNumber(F(1, 32), -F(3, 128))
        verdict, cert = sturm_sign_on_interval(q, 0, F(1, 2))
        assert verdict == STRICTLY_NEGATIVE and cert.verified

    def test_sqrt2_has_root(self):
        p = poly_from_rationals([-2, 0, 1])
        verdict, cert = sturm_sign_on_interval(p, 1, 2)
        assert verdict == HAS_ROOT and cert.verified

    def test_endpoint_root(self):
        p = poly_from_rationals([0, 1])
        verdict, _ = sturm_sign_on_interval(p, 0, 1)
        assert verdict == HAS_ROOT

    def test_zero_polynomial(self):
        with pytest.raises(ZeroPolynomial):
            sturm_sign_on_interval(ExactPoly([]), 0, 1)

    def test_counts_match_scanning_oracle(self):
        rng = np.random.default_rng(77)
        lo, hi = F(-8), F(8)
        for _ in range(25):
            deg = int(rng.choice([3, 5]))
            coeffs = [int(rng.integers(-9, 10)) for _ in range(deg)] + [
                int(rng.integers(1, 10))
            ]
            poly = poly_from_rationals(coeffs)
            if an_sign(poly.eval(lo)) == 0 or an_sign(poly.eval(hi)) == 0:
                continue
            chain = sturm_chain(poly)
            count = exactpoly.count_roots_open(chain, lo, hi)
            # independent oracle: sign changes of the float evaluation on a
            # fine grid; zeros (roots landing exactly on grid points) are
            # compressed out so the flip across them is still seen
            grid = np.linspace(-8, 8, 160001)
            vals = np.polyval(list(reversed([float(c) for c in coeffs])), grid)
            signs = np.sign(vals)
            signs = signs[signs != 0]
            flips = int(np.sum(signs[1:] * signs[:-1] < 0))
            assert count == flips


class TestIsolation:
    def test_sqrt2(self):
        p = poly_from_rationals([-2, 0, 1])
        (a, b), cert = isolate_positive_root(p, (1, 2), F(1, 1000))
        assert b - a <= F(1, 1000) and cert.verified
        assert a * a <= 2 <= b * b

    def test_binding_slice_root(self):
        p = poly_from_rationals([F(1, 243), -F(1, 81), 0, -1])
        (a, b), cert = isolate_positive_root(p, (0, 1), F(1, 10**6))
        assert b - a <= F(1, 10**6) and cert.verified
        assert an_sign(p.eval(a)) > 0 > an_sign(p.eval(b))

    def test_linear_through_zero(self):
        p = poly_from_rationals([0, 1])
        (a, b), _ = isolate_positive_root(p, (-1, 1), F(1, 100))
        assert a <= 0 <= b

    def test_no_root(self):
        p = poly_from_rationals([1, 0, 1])
        with pytest.raises(NotExactlyOneRoot):
            isolate_positive_root(p, (0, 1), F(1, 100))

    def test_two_roots(self):
        p = poly_from_rationals([F(1, 8), -F(3, 4), 1])  # roots ~0.19, ~0.56
        with pytest.raises(NotExactlyOneRoot):
            isolate_positive_root(p, (0, 1), F(1, 100))


class TestSubdivision:
    def test_constant_one_accepts_at_root(self):
        poly2 = ExactPoly2({(0, 0): 1})
        ok, cert = subdivision_positive_on_box(poly2, (0, 1, 0, 1), max_depth=0)
        assert ok and cert.verified
        assert cert.witness["tree"]["status"] == "accepted"

    def test_local_margin_fails_on_wide_box(self):
        from commonsys.certify import local_margin_poly2

        poly2 = local_margin_poly2()
        # exact witness at the corner: (1/3)^5 - (1/3)^4/2 - 1/8 < 0
        corner = poly2.eval(F(1, 3), F(1, 2))
        assert an_sign(corner) < 0
        ok, cert = subdivision_positive_on_box(
            poly2, (F(1, 3), F(2, 3), 0, F(1, 2)), max_depth=20
        )
        assert not ok and cert.verified
        wx, wy = (F(v) for v in cert.witness["witness_point"])
        assert an_sign(poly2.eval(wx, wy)) < 0

    def test_depth_exhausted_on_tangent_zero(self):
        # (x - y)^2 is nonnegative but vanishes on the diagonal, so interval
        # bounds straddle zero at every depth
        poly2 = ExactPoly2({(2, 0): 1, (1, 1): -2, (0, 2): 1})
        with pytest.raises(DepthExhausted):
            subdivision_positive_on_box(poly2, (0, 1, 0, 1), max_depth=4)

    def test_interval_eval_bounds_sampling(self):
        rng = np.random.default_rng(42)
        poly2 = ExactPoly2(
            {
                (i, j): F(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
                for i in range(3)
                for j in range(3)
            }
        )
        box = (F(-1, 2), F(1, 3), F(1, 5), F(4, 5))
        iv = poly2.interval_eval(
            exactpoly.ExactInterval.bounds(box[0], box[1]),
            exactpoly.ExactInterval.bounds(box[2], box[3]),
        )
        for _ in range(200):
            x = F(int(rng.integers(0, 65)), 64) * (box[1] - box[0]) + box[0]
            y = F(int(rng.integers(0, 65)), 64) * (box[3] - box[2]) + box[2]
            v = poly2.eval(x, y)
            assert an_sign(v - iv.lo) >= 0 and an_sign(iv.hi - v) >= 0


class TestCertificates:
    def test_tampered_sturm_fails(self):
        s = poly_from_rationals([F(1, 1024), F(1, 256), -F(1, 8), -1])
        _, cert = sturm_sign_on_interval(s, 0, F(7, 100))
        cert.witness["verdict"] = STRICTLY_NEGATIVE
        assert not verify_certificate(cert)

    def test_tampered_chain_entry_fails(self):
        p = poly_from_rationals([-2, 0, 1])
        _, cert = sturm_sign_on_interval(p, 1, 2)
        cert.witness["chain"][1] = poly_from_rationals([1, 1]).to_strings()
        assert not verify_certificate(cert)

    def test_tampered_subdivision_fails(self):
        poly2 = ExactPoly2({(0, 0): 1})
        _, cert = subdivision_positive_on_box(poly2, (0, 1, 0, 1), max_depth=0)
        cert.witness["poly2"] = ExactPoly2({(0, 0): -1}).to_list()
        assert not verify_certificate(cert)

    def test_chain_comparison_checked(self):
        cert = rational_chain_certificate(
            "1/2 < 1", [{"kind": "cmp", "lhs": "1/2", "op": "<", "rhs": "1"}]
        )
        assert cert.verified
        bad = Certificate(
            claim="1 < 1/2",
            method="rational_chain",
            witness={"steps": [{"kind": "cmp", "lhs": "1", "op": "<", "rhs": "1/2"}]},
        )
        with pytest.raises(VerificationFailed):
            check_certificate(bad)

    def test_unknown_lemma_rejected(self):
        bad = Certificate(
            claim="nonsense",
            method="rational_chain",
            witness={"steps": [{"kind": "lemma", "name": "made_up", "premises": []}]},
        )
        assert not verify_certificate(bad)

    def test_round_trip_dict(self):
        p = poly_from_rationals([-2, 0, 1])
        _, cert = sturm_sign_on_interval(p, 1, 2)
        again = Certificate.from_dict(cert.to_dict())
        assert verify_certificate(again)
