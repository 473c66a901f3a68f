import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fastcur.inputs import GeneratorSpec, generate
from fastcur.kernels import counting, make_rng
from fastcur.preprocess import (
    Multiplier,
    MultiplierSpec,
    apply_mult,
    bidiagonal_product,
    derive_seed,
    gaussian_multiplier,
    identity_multiplier,
    preprocessed_cur,
    solve_mult,
    sparse_col,
    sparse_row,
)
from fastcur.twostage import TwoStageConfig, two_stage_cur


def dense_oracle(M):
    # build the product factor by factor from explicit matrices
    n = M.n
    out = np.eye(n)
    for t in range(M.b):
        B = np.eye(n)
        if M.orientation(t) == "lower":
            B[np.arange(1, n), np.arange(n - 1)] = M.offdiag[t]
        else:
            B[np.arange(n - 1), np.arange(1, n)] = M.offdiag[t]
        out = B @ out
        if M.perms:
            out = np.eye(n)[M.perms[t]] @ out
    return out


def test_identity_multiplier():
    X = make_rng(0).standard_normal((6, 4))
    M = bidiagonal_product(6, 0, 3)
    assert np.array_equal(apply_mult(M, X), X)
    assert np.array_equal(solve_mult(M, X), X)
    assert np.array_equal(apply_mult(identity_multiplier(4), X, "right"), X)


def test_single_lower_factor_on_identity():
    M = Multiplier("bidiag_product", 3, 1, 0, "none", offdiag=(np.ones(2),))
    assert np.array_equal(apply_mult(M, np.eye(3)), [[1, 0, 0], [1, 1, 0], [0, 1, 1]])


def test_single_lower_factor_hand_solve():
    M = Multiplier("bidiag_product", 3, 1, 0, "none", offdiag=(np.array([2.0, -1.0]),))
    # [[1,0,0],[2,1,0],[0,-1,1]] y = (1, 4, 0): y0 = 1, y1 = 4 - 2 = 2, y2 = 0 + 2 = 2
    assert np.array_equal(solve_mult(M, np.array([1.0, 4.0, 0.0])), [1.0, 2.0, 2.0])


@pytest.mark.parametrize("permute", ["none", "interleaved"])
@pytest.mark.parametrize("b", [1, 2, 5, 8])
def test_matches_factorwise_oracle(b, permute):
    M = bidiagonal_product(12, b, seed=b, permute=permute)
    D = dense_oracle(M)
    assert np.allclose(M.todense(), D, rtol=0, atol=1e-12 * np.abs(D).max())
    X = make_rng(1).standard_normal((12, 3))
    assert np.allclose(apply_mult(M, X), D @ X, atol=1e-10 * np.abs(D).max())
    assert np.allclose(apply_mult(M, X.T, "right"), X.T @ D, atol=1e-10 * np.abs(D).max())


@pytest.mark.parametrize("permute", ["none", "interleaved"])
def test_determinant_is_unit(permute):
    M = bidiagonal_product(10, 6, seed=2, permute=permute)
    assert abs(np.linalg.det(dense_oracle(M))) == pytest.approx(1.0, rel=1e-8)


@pytest.mark.parametrize("permute", ["none", "interleaved"])
@pytest.mark.parametrize("side", ["left", "right"])
def test_roundtrip_b8(permute, side):
    M = bidiagonal_product(100, 8, seed=4, permute=permute)
    X = make_rng(5).standard_normal((100, 7))
    X = X if side == "left" else X.T
    Y = solve_mult(M, apply_mult(M, X, side), side)
    assert np.linalg.norm(Y - X) <= 1e-10 * np.linalg.norm(X)
    Z = apply_mult(M, solve_mult(M, X, side), side)
    assert np.linalg.norm(Z - X) <= 1e-10 * np.linalg.norm(X)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 60), b=st.integers(0, 6), seed=st.integers(0, 10**6),
       permute=st.sampled_from(["none", "interleaved"]))
def test_roundtrip_property(n, b, seed, permute):
    M = bidiagonal_product(n, b, seed, permute)
    x = make_rng(seed).standard_normal(n)
    assert np.linalg.norm(solve_mult(M, apply_mult(M, x)) - x) <= 1e-10 * np.linalg.norm(x)


def test_gaussian_roundtrip_and_singular_guard():
    G = gaussian_multiplier(30, 7)
    X = make_rng(8).standard_normal((30, 4))
    assert np.linalg.norm(solve_mult(G, apply_mult(G, X)) - X) <= 1e-10 * np.linalg.norm(X)
    S = Multiplier("gaussian", 2, dense=np.ones((2, 2)))
    with pytest.raises(ArithmeticError):
        solve_mult(S, np.ones(2))


def test_gaussian_deterministic():
    assert np.array_equal(gaussian_multiplier(3, 9).dense, gaussian_multiplier(3, 9).dense)


def test_gaussian_entry_statistics():
    G = gaussian_multiplier(200, 1).dense
    assert abs(G.mean()) <= 0.05
    assert abs(G.var() - 1.0) <= 0.1


def test_gaussian_condition_numbers():
    ok = sum(np.linalg.cond(gaussian_multiplier(50, s).dense) < 1e6 for s in range(100))
    assert ok >= 99


def test_dimension_errors():
    M = bidiagonal_product(4, 2, 0)
    with pytest.raises(ValueError):
        apply_mult(M, np.ones((5, 2)))
    with pytest.raises(ValueError):
        apply_mult(M, np.ones((2, 5)), "right")
    with pytest.raises(ValueError):
        apply_mult(M, np.ones((4, 4)), "middle")
    with pytest.raises(ValueError):
        bidiagonal_product(4, -1, 0)


def test_sparse_col_b0_is_unit_vector():
    v = sparse_col(bidiagonal_product(9, 0, 1), 4)
    assert v.indices.tolist() == [4] and v.values.tolist() == [1.0]


def test_sparse_col_b3_window():
    M = bidiagonal_product(20, 3, seed=6, permute="none")
    v = sparse_col(M, 5)
    assert v.indices.size <= 4
    assert set(v.indices.tolist()) <= set(range(2, 9))
    assert np.allclose(v.todense(), apply_mult(M, np.eye(20)[:, 5]), atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 50), b=st.integers(0, 12), seed=st.integers(0, 10**6), data=st.data())
def test_sparse_col_support_bound(n, b, seed, data):
    M = bidiagonal_product(n, b, seed, "none")
    j = data.draw(st.integers(0, n - 1))
    v = sparse_col(M, j)
    w = sparse_row(M, j)
    assert v.indices.size <= b + 1 and w.indices.size <= b + 1
    D = dense_oracle(M)
    assert np.allclose(v.todense(), D[:, j], atol=1e-12 * max(1.0, np.abs(D).max()))
    assert np.allclose(w.todense(), D[j], atol=1e-12 * max(1.0, np.abs(D).max()))


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 50), b=st.integers(0, 8), seed=st.integers(0, 10**6), data=st.data())
def test_sparse_col_interleaved_matches_dense(n, b, seed, data):
    M = bidiagonal_product(n, b, seed, "interleaved")
    j = data.draw(st.integers(0, n - 1))
    D = dense_oracle(M)
    v = sparse_col(M, j)
    assert v.indices.size <= min(2**b, n)
    assert np.allclose(v.todense(), D[:, j], atol=1e-12 * max(1.0, np.abs(D).max()))


def test_sparse_col_rejects_gaussian():
    with pytest.raises(TypeError):
        sparse_col(gaussian_multiplier(5, 0), 1)
    with pytest.raises(IndexError):
        sparse_col(bidiagonal_product(5, 2, 0), 5)


def test_multiplier_json_roundtrip():
    for M in (bidiagonal_product(15, 4, 11, "interleaved"), gaussian_multiplier(6, 2)):
        back = Multiplier.from_dict(M.to_dict())
        assert set(M.to_dict()) == {"kind", "n", "b", "seed", "permute"}
        assert np.array_equal(back.todense(), M.todense())


def test_spec_parse():
    assert MultiplierSpec.parse("gaussian") == MultiplierSpec("gaussian")
    assert MultiplierSpec.parse("bidiag:8") == MultiplierSpec("bidiag", 8, "interleaved")
    assert MultiplierSpec.parse("bidiag:4:none") == MultiplierSpec("bidiag", 4, "none")
    with pytest.raises(ValueError):
        MultiplierSpec.parse("hadamard")


def test_derive_seed_stable_and_distinct():
    assert derive_seed(5, 1) == derive_seed(5, 1)
    assert len({derive_seed(5, 1), derive_seed(5, 2), derive_seed(6, 1)}) == 3
    assert 0 <= derive_seed(2**63, 1) < 2**64


def needle(seed=0):
    return generate(GeneratorSpec("needle", 200, 200, 2, seed=seed))


@pytest.mark.parametrize("seed", range(5))
def test_identity_multipliers_reproduce_two_stage(seed):
    W = generate(GeneratorSpec("average", 80, 60, 4, 1e-6, seed=seed))
    cfg = TwoStageConfig(12, 12, 4, seed=seed)
    lr, rep = preprocessed_cur(W, cfg)
    f, ref = two_stage_cur(W, cfg)
    assert np.array_equal(lr.dense(), f.dense(W))
    assert rep.flops_stage1 == ref.flops_stage1


def test_gaussian_preprocessing_finds_needle():
    W = needle()
    cfg = TwoStageConfig(20, 20, 2, seed=3)
    lr, rep = preprocessed_cur(W, cfg, MultiplierSpec("gaussian"), MultiplierSpec("gaussian"))
    assert lr.A.shape == (200, 2) and lr.B.shape == (2, 200)
    assert np.linalg.norm(W - lr.dense()) <= 1e-6 * np.linalg.norm(W)
    assert rep.rel_err_sampled <= 1e-6


def test_low_rank_apply():
    W = needle()
    lr, _ = preprocessed_cur(W, TwoStageConfig(20, 20, 2, seed=1), MultiplierSpec("gaussian"),
                             MultiplierSpec("gaussian"))
    x = make_rng(2).standard_normal(200)
    assert np.allclose(lr.apply(x), lr.dense() @ x)


def test_explicit_multiplier_objects():
    W = needle()
    F, H = gaussian_multiplier(200, 1), gaussian_multiplier(200, 2)
    lr, rep = preprocessed_cur(W, TwoStageConfig(10, 10, 2, seed=0), F, H)
    # A B approximates W itself, not F W H
    assert np.linalg.norm(W - lr.dense()) <= 1e-6 * np.linalg.norm(W)
    with pytest.raises(ValueError):
        preprocessed_cur(W, TwoStageConfig(10, 10, 2), gaussian_multiplier(100, 1), H)


def test_lazy_flops_linear_in_size():
    spec = MultiplierSpec("bidiag", 16, "none")
    cfg = TwoStageConfig(20, 20, 4, seed=1)
    flops = {}
    for n in (400, 800, 1600):
        W = generate(GeneratorSpec("average", n, n, 4, 1e-8, seed=1))
        flops[n] = preprocessed_cur(W, cfg, spec, spec)[1].flops
    # doubling m + n at most doubles the cost; quadratic growth would quadruple it
    assert flops[800] / flops[400] <= 2.1
    assert flops[1600] / flops[800] <= 2.1
