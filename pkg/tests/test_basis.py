import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from futon.basis import BasisKind, BasisSpec, chebyshev_weight, eval_basis, gram_matrix, quadrature_rule
from futon.errors import DomainError, ResolutionError


def gram_schmidt_oracle(K, n=200_000):
    """Orthonormalize monomials on a fine midpoint grid; returns a callable evaluator."""
    x = (np.arange(n) + 0.5) / n
    V = np.vander(x, K, increasing=True)
    Q, Rm = np.linalg.qr(V / math.sqrt(n))
    # Q columns are orthonormal in the discrete inner product; coefficients map monomials to Q.
    coef = np.linalg.inv(Rm)
    sign = np.sign(np.diag(coef))  # fix sign so leading coefficient is positive
    coef = coef * sign

    def evaluate(t):
        return np.vander(np.atleast_1d(t), K, increasing=True) @ coef

    return evaluate


class TestEvalBasis:
    def test_cosine_at_zero(self):
        np.testing.assert_allclose(eval_basis(BasisSpec("cosine", 3), 0.0), [1, math.sqrt(2), math.sqrt(2)], atol=1e-15)

    def test_cosine_at_half(self):
        np.testing.assert_allclose(eval_basis(BasisSpec("cosine", 3), 0.5), [1, 0, -math.sqrt(2)], atol=1e-12)

    def test_legendre_matches_gram_schmidt(self):
        ref = gram_schmidt_oracle(4)
        x = np.array([0.0, 0.13, 0.5, 0.77, 1.0])
        np.testing.assert_allclose(eval_basis(BasisSpec("legendre", 4), x), ref(x), atol=1e-6)

    def test_legendre_k2_at_one(self):
        np.testing.assert_allclose(eval_basis(BasisSpec("legendre", 2), 1.0), [1.0, math.sqrt(3)], atol=1e-12)

    def test_chebyshev_closed_form(self):
        x = np.linspace(0.01, 0.99, 7)
        theta = np.arccos(2 * x - 1)
        k = np.arange(5)
        expected = np.cos(np.outer(theta, k)) * np.where(k == 0, math.sqrt(1 / math.pi), math.sqrt(2 / math.pi))
        np.testing.assert_allclose(eval_basis(BasisSpec("chebyshev", 5), x), expected, atol=1e-12)

    def test_shape(self):
        assert eval_basis(BasisSpec("cosine", 6), np.zeros((3, 4))).shape == (3, 4, 6)
        assert eval_basis(BasisSpec("legendre", 2), 0.3).shape == (2,)

    @pytest.mark.parametrize("x", [-1e-9, 1.0 + 1e-9, 2.0, np.nan])
    def test_out_of_domain(self, x):
        with pytest.raises(DomainError):
            eval_basis(BasisSpec("cosine", 4), x)

    @pytest.mark.parametrize("K", [0, -1, 1.5])
    def test_bad_K(self, K):
        with pytest.raises(DomainError):
            BasisSpec("cosine", K)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            BasisSpec("wavelet", 4)

    @given(st.floats(0.0, 1.0), st.integers(1, 40))
    def test_cosine_bounded(self, x, K):
        v = eval_basis(BasisSpec("cosine", K), x)
        assert np.all(np.abs(v) <= math.sqrt(2) + 1e-12)
        assert v[0] == 1.0

    @given(st.floats(0.0, 1.0), st.integers(1, 30))
    def test_legendre_bounded(self, x, K):
        v = eval_basis(BasisSpec("legendre", K), x)
        assert np.all(np.abs(v) <= np.sqrt(2 * np.arange(K) + 1) + 1e-9)


class TestGram:
    @pytest.mark.parametrize("kind", ["cosine", "legendre", "chebyshev"])
    @pytest.mark.parametrize("K", [1, 2, 8, 32])
    def test_identity(self, kind, K):
        G = gram_matrix(BasisSpec(kind, K), 4096)
        assert np.max(np.abs(G - np.eye(K))) < 1e-6

    def test_legendre_gram_against_independent_rule(self):
        # Fine midpoint rule (not the Gauss rule used internally).
        n = 200_000
        x = (np.arange(n) + 0.5) / n
        phi = eval_basis(BasisSpec("legendre", 6), x)
        G = phi.T @ phi / n
        assert np.max(np.abs(G - np.eye(6))) < 1e-6

    def test_chebyshev_weighted_by_substitution(self):
        # int f(x) w(x) dx with x = (1 - cos t)/2 becomes int_0^pi f dt.
        n = 20_000
        t = (np.arange(n) + 0.5) * math.pi / n
        x = (1 - np.cos(t)) / 2
        phi = eval_basis(BasisSpec("chebyshev", 5), x)
        G = phi.T @ phi * (math.pi / n)
        assert np.max(np.abs(G - np.eye(5))) < 1e-10

    def test_chebyshev_not_orthonormal_unweighted(self):
        n = 100_000
        x = (np.arange(n) + 0.5) / n
        phi = eval_basis(BasisSpec("chebyshev", 3), x)
        G = phi.T @ phi / n
        assert np.max(np.abs(G - np.eye(3))) > 0.05

    def test_separable_2d(self):
        spec = BasisSpec("cosine", 4)
        x, w = quadrature_rule("cosine", 64)
        phi = eval_basis(spec, x)
        # Separable tensor-product basis on a 64 x 64 grid.
        P = np.einsum("ik,jl->ijkl", phi, phi).reshape(64 * 64, 16)
        W = np.outer(w, w).ravel()
        G = (P * W[:, None]).T @ P
        assert np.max(np.abs(G - np.eye(16))) < 1e-5

    def test_resolution_guard(self):
        with pytest.raises(ResolutionError):
            gram_matrix(BasisSpec("cosine", 32), 63)

    def test_quadrature_weights_sum(self):
        assert quadrature_rule("cosine", 10)[1].sum() == pytest.approx(1.0)
        assert quadrature_rule("legendre", 10)[1].sum() == pytest.approx(1.0)
        assert quadrature_rule("chebyshev", 10)[1].sum() == pytest.approx(math.pi)

    def test_chebyshev_weight_integral(self):
        # int_0^1 dx / sqrt(x(1-x)) = pi
        x, w = quadrature_rule("chebyshev", 50)
        assert np.sum(w) == pytest.approx(math.pi)
        assert chebyshev_weight(0.5) == pytest.approx(2.0)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(list(BasisKind)), st.integers(1, 16))
def test_gram_symmetric_psd(kind, K):
    G = gram_matrix(BasisSpec(kind, K), 4 * K)
    np.testing.assert_allclose(G, G.T, atol=1e-12)
    assert np.min(np.linalg.eigvalsh(G)) > 0.5
