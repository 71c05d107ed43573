import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from deepwalk_sbm.config import coerce, dump_config, load_config
from deepwalk_sbm.linalg import sym_eigh_desc
from deepwalk_sbm.metrics import best_permutation_accuracy, recovery_fraction
from deepwalk_sbm.sbm import SbmParams, generate_sbm
from deepwalk_sbm.errors import IsolatedNodeError
from deepwalk_sbm.theory import LinearUpdate, block_values, cbar_spectrum
from deepwalk_sbm.trainer import EmbeddingState, error_matrix, gd_step, softmax_matrix
from deepwalk_sbm.walks import WalkConfig, build_cooccurrence

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


@st.composite
def labelled(draw, max_k=5):
    K = draw(st.integers(2, max_k))
    m = draw(st.integers(1, 6))
    labels = np.repeat(np.arange(K), m)
    pred = np.array(draw(st.lists(st.integers(0, K - 1), min_size=K * m, max_size=K * m)))
    return K, labels, pred


@given(labelled(), st.randoms(use_true_random=False))
def test_matching_ignores_predicted_label_names(data, rnd):
    K, labels, pred = data
    perm = list(range(K))
    rnd.shuffle(perm)
    a = best_permutation_accuracy(pred, labels, K)
    assert a == best_permutation_accuracy(np.array(perm)[pred], labels, K)
    assert 0 < a <= 1


@given(
    st.integers(2, 4),
    st.lists(st.integers(-4000, 4000), min_size=6, max_size=40),
    st.integers(-6, 6),
    st.integers(-1000, 1000),
)
def test_gap_cut_recovery_invariant_under_positive_affine_maps(K, ints, k, shift):
    # dyadic values and power-of-two scales keep the map exact in floating point
    x = np.array(ints, dtype=float) / 1024.0
    labels = np.arange(x.size) % K
    y = x * 2.0**k + shift
    assert recovery_fraction(x, labels, K) == recovery_fraction(y, labels, K)


@given(
    st.integers(2, 5),
    st.lists(st.floats(-3, 3, allow_nan=False), min_size=5, max_size=5, unique=True),
    st.integers(1, 8),
    st.sampled_from(["exp", "cube", "arctan", "shift"]),
)
def test_gap_cut_invariant_under_monotone_maps_for_separated_clusters(K, centres, m, kind):
    centres = np.array(centres[:K])
    assume(np.min(np.diff(np.sort(centres))) > 1e-3)
    labels = np.repeat(np.arange(K), m)
    x = centres[labels]
    f = {"exp": np.exp, "cube": lambda v: v**3 + v, "arctan": np.arctan, "shift": lambda v: v - 7.5}[kind]
    assert recovery_fraction(x, labels, K) == recovery_fraction(f(x), labels, K) == 1.0


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.integers(1, 3), st.floats(1e-3, 0.5), st.integers(0, 2**31))
def test_softmax_close_to_uniform_in_small_ball(n, d, eps, seed):
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((2 * n, d))
    W *= eps / np.linalg.norm(W)
    Q = softmax_matrix(W[:n], W[n:])
    np.testing.assert_allclose(Q.sum(axis=1), 1, atol=1e-12)
    assert np.linalg.norm(Q - 1.0 / n) <= eps**2


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10), st.integers(1, 3), st.integers(0, 2**31), st.floats(1e-3, 1.0))
def test_step_splits_into_linear_and_error_parts(n, d, seed, eta):
    rng = np.random.default_rng(seed)
    A = rng.uniform(0, 1, (n, n))
    C = A + A.T
    s = EmbeddingState(0.5 * rng.standard_normal((n, d)), 0.5 * rng.standard_normal((n, d)))
    lin = LinearUpdate(C, eta, 2)
    lhs = gd_step(s, C, eta).W
    rhs = lin.Lmat @ s.W - eta * error_matrix(C, s.X, s.Y) @ s.W
    assert np.abs(lhs - rhs).max() <= 1e-12 * max(1.0, np.abs(lhs).max())


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 60), st.integers(2, 9), st.data(), st.integers(0, 1000))
def test_walk_mass_conservation(r, L, data, seed):
    T = data.draw(st.integers(1, L - 1))
    try:
        g = generate_sbm(SbmParams(12, 2, 0.7, 0.3), seed)
    except IsolatedNodeError:
        assume(False)
    cfg = WalkConfig(r, L, T)
    C = build_cooccurrence(g, cfg, seed)
    assert round(C.values.sum() * r) == cfg.pairs_per_walk * r
    assert np.array_equal(C.values, C.values.T)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(2, 5), st.integers(1, 8), st.floats(0.02, 0.45), st.floats(0.01, 0.5),
    st.integers(2, 40), st.data(),
)
def test_block_values_consistent_with_spectrum(K, m, q, gap, L, data):
    T = data.draw(st.integers(1, L - 1))
    p = min(q + gap, 0.99)
    params = SbmParams(K * m, K, p, q)
    bv = block_values(params, L, T)
    lam = cbar_spectrum(params, L, T)
    n = K * m
    assert np.isclose(bv.theta, lam[1], rtol=1e-12, atol=1e-15)
    assert np.isclose((n / K) * bv.a + n * (K - 1) / K * bv.b, lam[0], rtol=1e-12)
    assert bv.a > bv.b


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (5, 5), elements=finite))
def test_eigh_descending_and_sign_fixed(A):
    S = A + A.T
    vals, vecs = sym_eigh_desc(S)
    assert np.all(np.diff(vals) <= 1e-12)
    for j in range(5):
        nz = np.flatnonzero(np.abs(vecs[:, j]) > 1e-12)
        assert vecs[nz[0], j] > 0
    np.testing.assert_allclose(vecs @ np.diag(vals) @ vecs.T, S, atol=1e-8 * max(1, np.abs(S).max()))


@given(
    st.dictionaries(
        st.from_regex(r"[a-z][a-z_]{0,8}", fullmatch=True),
        st.one_of(st.integers(-10**6, 10**6), st.floats(-1e6, 1e6, allow_nan=False), st.booleans()),
        max_size=8,
    )
)
def test_config_roundtrip(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("cfg") / "c.txt"
    dump_config(values, path)
    back = load_config(path)
    assert set(back) == set(values)
    for key, v in values.items():
        kind = "bool" if isinstance(v, bool) else "int" if isinstance(v, int) else "float"
        assert coerce(key, back[key], kind) == v
