"""Gradient construction, rank decisions, and the sampling driver."""

import numpy as np
import pytest

import corpus
from netident.engine import (
    DEFAULT_TOL_RANK,
    EngineError,
    KMatrix,
    NetworkSample,
    SamplingError,
    SingularNetworkError,
    analyze,
    build_K,
    compute_transfer,
    edge_verdict_by_rank_drop,
    edge_verdicts_from_kernel,
    kernel_basis,
    network_matrix,
    numeric_rank,
    reduce_full_excitation,
    reduce_full_measurement,
    sample_network_matrix,
)
from netident.topology import (
    build_selection_matrices,
    validate_selections,
    validate_topology,
)


def make_sample(topo, x):
    """Deterministic sample at explicit weights, for closed-form checks."""
    x = np.asarray(x, dtype=complex)
    G = network_matrix(topo, x)
    T, cond = compute_transfer(G)
    return NetworkSample(x=x, G=G, T=T, cond=cond)


def unit_k(entries, scale=1.0):
    """KMatrix wrapper for raw numeric tests; labels are placeholders."""
    entries = np.asarray(entries, dtype=complex)
    return KMatrix(
        entries=entries,
        row_excitation=(1,) * entries.shape[0],
        row_measurement=(1,) * entries.shape[0],
        col_edges=((1, 2),) * entries.shape[1],
        scale=scale,
    )


def test_network_matrix_places_weights_at_flow_targets():
    topo = validate_topology(3, [[1, 2], [1, 3], [2, 1]])
    G = network_matrix(topo, [10.0, 20.0, 30.0])
    expected = np.zeros((3, 3), dtype=complex)
    expected[1, 0] = 10.0  # edge (1, 2): flow 1 -> 2 sits at row 2, col 1
    expected[2, 0] = 20.0
    expected[0, 1] = 30.0
    np.testing.assert_array_equal(G, expected)


def test_network_matrix_rejects_wrong_length():
    topo = validate_topology(2, [[1, 2]])
    with pytest.raises(ValueError, match="length 1"):
        network_matrix(topo, [1.0, 2.0])


def test_transfer_of_empty_coupling_is_identity():
    T, cond = compute_transfer(np.zeros((3, 3)))
    np.testing.assert_allclose(T, np.eye(3))
    assert cond == pytest.approx(1.0)


def test_transfer_chain_closed_form():
    # Lower-triangular G: T = I + G for a single feed-forward edge.
    topo = validate_topology(2, [[1, 2]])
    G = network_matrix(topo, [0.5])
    T, _ = compute_transfer(G)
    np.testing.assert_allclose(T, [[1.0, 0.0], [0.5, 1.0]], atol=1e-15)


def test_transfer_two_cycle_closed_form():
    # det(I - G) = 1 - x1*x2; T = [[1, x2], [x1, 1]] / det.
    topo = validate_topology(2, [[1, 2], [2, 1]])
    x = np.array([0.5, 0.25])
    T, _ = compute_transfer(network_matrix(topo, x))
    det = 1 - 0.5 * 0.25
    np.testing.assert_allclose(T, np.array([[1, 0.25], [0.5, 1]]) / det, atol=1e-15)


def test_transfer_rejects_singular_coupling():
    G = np.array([[0.0, 1.0], [1.0, 0.0]])  # det(I - G) = 0
    with pytest.raises(SingularNetworkError, match="excluded set"):
        compute_transfer(G)


def test_sampling_is_deterministic_per_generator_state():
    topo = validate_topology(4, [[1, 2], [2, 3], [3, 4], [4, 1]])
    s1 = sample_network_matrix(topo, np.random.default_rng(99))
    s2 = sample_network_matrix(topo, np.random.default_rng(99))
    np.testing.assert_array_equal(s1.x, s2.x)
    assert s1.cond == s2.cond


def test_sampling_bounds_and_conditioning():
    topo = validate_topology(4, [[1, 2], [2, 3], [3, 4], [4, 1]])
    sample = sample_network_matrix(topo, np.random.default_rng(5), cond_limit=1e6)
    assert np.abs(sample.x.real).max() <= 1.0
    assert np.abs(sample.x.imag).max() <= 1.0
    assert sample.cond <= 1e6
    assert not sample.x.flags.writeable
    assert not sample.T.flags.writeable
    np.testing.assert_allclose(
        (np.eye(4) - sample.G) @ sample.T, np.eye(4), atol=1e-9
    )


def test_sampling_rejects_degenerate_cond_limit():
    topo = validate_topology(2, [[1, 2]])
    with pytest.raises(ValueError, match="cond_limit"):
        sample_network_matrix(topo, np.random.default_rng(0), cond_limit=1.0)


def test_sampling_budget_exhaustion():
    # cond(I - G) > 1 + 1e-12 for any appreciable weight, so every draw
    # is rejected and the retry budget runs out.
    topo = validate_topology(2, [[1, 2]])
    with pytest.raises(SamplingError, match="no acceptable sample in 50 draws"):
        sample_network_matrix(topo, np.random.default_rng(0), cond_limit=1.0 + 1e-12)


def test_gradient_chain_is_identity():
    # h(x) = x for the measured end of a single edge, so K = [1].
    topo = validate_topology(2, [[1, 2]])
    sel = build_selection_matrices(topo, validate_selections(topo, [1], [2]))
    K = build_K(make_sample(topo, [0.5]), sel)
    np.testing.assert_allclose(K.entries, [[1.0]], atol=1e-15)
    assert K.row_excitation == (1,)
    assert K.row_measurement == (2,)
    assert K.col_edges == ((1, 2),)
    assert not K.entries.flags.writeable


def test_gradient_against_flow_is_zero():
    # Measuring upstream of the only edge gives h independent of x.
    topo = validate_topology(2, [[1, 2]])
    sel = build_selection_matrices(topo, validate_selections(topo, [2], [1]))
    K = build_K(make_sample(topo, [0.8]), sel)
    np.testing.assert_allclose(K.entries, [[0.0]], atol=1e-15)


def test_gradient_rows_ordered_excitation_major():
    # Row r must pair excitation row_excitation[r] with measurement
    # row_measurement[r], stacking measurements fastest.
    topo = validate_topology(3, [[1, 2], [2, 3]])
    sel = build_selection_matrices(topo, validate_selections(topo, [1, 2], [2, 3]))
    K = build_K(make_sample(topo, [0.5, 0.25]), sel)
    assert K.row_excitation == (1, 1, 2, 2)
    assert K.row_measurement == (2, 3, 2, 3)
    # d h[(b,c)] / d x_k = (T B)[j,b] * (C T)[c,i] for edge k = (j, i)
    T = make_sample(topo, [0.5, 0.25]).T
    for r in range(4):
        for k, (j, i) in enumerate(topo.edges):
            expected = T[j - 1, K.row_excitation[r] - 1] * T[
                K.row_measurement[r] - 1, i - 1
            ]
            assert K.entries[r, k] == pytest.approx(expected, abs=1e-14)


@pytest.mark.filterwarnings("ignore:invalid value encountered")
def test_gradient_rejects_non_finite_transfer():
    topo = validate_topology(2, [[1, 2]])
    sel = build_selection_matrices(topo, validate_selections(topo, [1], [2]))
    bad = NetworkSample(
        x=np.array([1.0 + 0j]),
        G=np.zeros((2, 2), dtype=complex),
        T=np.full((2, 2), np.inf, dtype=complex),
        cond=np.inf,
    )
    with pytest.raises(EngineError, match="non-finite"):
        build_K(bad, sel)


def test_numeric_rank_basic_cases():
    assert numeric_rank(unit_k([[1.0]]))[0] == 1
    assert numeric_rank(unit_k([[0.0]]))[0] == 0
    assert numeric_rank(unit_k([[1.0, 1.0], [1.0, 1.0]]))[0] == 1
    rank, sigma = numeric_rank(unit_k(np.eye(3)))
    assert rank == 3
    np.testing.assert_allclose(sigma, np.ones(3))


def test_numeric_rank_noise_floor_uses_construction_scale():
    # Entries at rounding-residue level: numerical zero relative to the
    # construction scale even though the largest singular value is the
    # largest entry.
    residue = np.full((1, 1), 1e-30)
    assert numeric_rank(unit_k(residue, scale=2.5))[0] == 0
    # With a genuinely tiny scale the same entries count as signal.
    assert numeric_rank(unit_k(residue, scale=1e-31))[0] == 1


def test_numeric_rank_rejects_non_finite():
    with pytest.raises(EngineError, match="non-finite"):
        numeric_rank(unit_k([[np.nan]]))


def test_kernel_basis_spans_null_space():
    K = unit_k([[1.0, 1.0], [1.0, 1.0]])
    V = kernel_basis(K)
    assert V.shape == (2, 1)
    np.testing.assert_allclose(K.entries @ V, 0, atol=1e-14)
    np.testing.assert_allclose(V.conj().T @ V, np.eye(1), atol=1e-14)


def test_kernel_basis_trivial_and_empty():
    assert kernel_basis(unit_k(np.eye(2))).shape == (2, 0)
    empty = KMatrix(
        entries=np.zeros((1, 0), dtype=complex),
        row_excitation=(1,),
        row_measurement=(1,),
        col_edges=(),
        scale=1.0,
    )
    assert kernel_basis(empty).shape == (0, 0)


def test_edge_verdicts_read_kernel_rows():
    V = np.array([[0.0], [1.0]], dtype=complex)
    np.testing.assert_array_equal(
        edge_verdicts_from_kernel(V), np.array([True, False])
    )
    # empty basis certifies everything
    np.testing.assert_array_equal(
        edge_verdicts_from_kernel(np.zeros((3, 0))), np.array([True] * 3)
    )


def test_rank_drop_verdicts_match_kernel_verdicts():
    g = corpus.RING_ALLOCATION
    topo, sets = corpus.load(g)
    sel = build_selection_matrices(topo, sets)
    sample = sample_network_matrix(topo, np.random.default_rng(12))
    K = build_K(sample, sel)
    kernel_view = edge_verdicts_from_kernel(kernel_basis(K))
    for e in range(topo.n_edges):
        assert edge_verdict_by_rank_drop(K, e) == kernel_view[e]


def test_rank_drop_rejects_bad_index():
    K = unit_k([[1.0]])
    with pytest.raises(IndexError):
        edge_verdict_by_rank_drop(K, 1)


@pytest.mark.parametrize(
    "name,network,edges",
    [
        ("chain", True, (True,)),
        ("chain_reversed", False, (False,)),
        ("two_cycle_full_measure", True, (True, True)),
        ("two_cycle_single_measure", False, (False, False)),
        (
            "ring_allocation",
            False,
            (True, True, False, True, False, False, True, False),
        ),
    ],
)
def test_analyze_frozen_verdicts(name, network, edges):
    topo, sets = corpus.load(corpus.HANDCRAFTED[name])
    res = analyze(topo, sets, nsamples=3, seed=0)
    assert res.network is network
    assert res.edges == edges


def test_analyze_structural_invariants():
    for g in corpus.HANDCRAFTED.values():
        topo, sets = corpus.load(g)
        res = analyze(topo, sets, nsamples=3, seed=1)
        if res.network:
            assert all(res.edges)
        for diag in res.samples:
            assert diag.rank + diag.kernel_dim == topo.n_edges
            assert diag.cond <= res.params["cond_limit"]
            assert not diag.singular_values.flags.writeable


def test_analyze_deterministic_given_seed():
    topo, sets = corpus.load(corpus.RING_ALLOCATION)
    r1 = analyze(topo, sets, nsamples=4, seed=7)
    r2 = analyze(topo, sets, nsamples=4, seed=7)
    assert r1.network == r2.network
    assert r1.edges == r2.edges
    for d1, d2 in zip(r1.samples, r2.samples):
        assert d1.rank == d2.rank and d1.cond == d2.cond
        np.testing.assert_array_equal(d1.singular_values, d2.singular_values)


def test_analyze_records_parameters():
    topo, sets = corpus.load(corpus.CHAIN)
    res = analyze(topo, sets, nsamples=2, seed=3, tol_rank=1e-8)
    assert res.params["nsamples"] == 2
    assert res.params["seed"] == 3
    assert res.params["tol_rank"] == 1e-8
    assert res.params["full_rank_marks_all_edges"] is True


def test_analyze_rejects_empty_sample_budget():
    topo, sets = corpus.load(corpus.CHAIN)
    with pytest.raises(ValueError, match="nsamples"):
        analyze(topo, sets, nsamples=0)


def test_analyze_prefixes_failing_sample_index():
    topo, sets = corpus.load(corpus.CHAIN)
    with pytest.raises(SamplingError, match="sample 0:"):
        analyze(topo, sets, nsamples=1, seed=0, cond_limit=1.0 + 1e-12)


def test_full_excitation_reduction_matches_general_gradient():
    topo = validate_topology(3, [[1, 2], [2, 3], [3, 1], [1, 3]])
    sets = validate_selections(topo, [1, 2, 3], [1, 3])
    sel = build_selection_matrices(topo, sets)
    sample = sample_network_matrix(topo, np.random.default_rng(21))
    full = edge_verdicts_from_kernel(kernel_basis(build_K(sample, sel)))
    red = edge_verdicts_from_kernel(kernel_basis(reduce_full_excitation(sample, sel)))
    np.testing.assert_array_equal(full, red)


def test_full_measurement_reduction_matches_general_gradient():
    topo = validate_topology(3, [[1, 2], [2, 3], [3, 1], [1, 3]])
    sets = validate_selections(topo, [2], [1, 2, 3])
    sel = build_selection_matrices(topo, sets)
    sample = sample_network_matrix(topo, np.random.default_rng(22))
    full = edge_verdicts_from_kernel(kernel_basis(build_K(sample, sel)))
    red = edge_verdicts_from_kernel(kernel_basis(reduce_full_measurement(sample, sel)))
    np.testing.assert_array_equal(full, red)


def test_reductions_enforce_their_preconditions():
    topo = validate_topology(2, [[1, 2]])
    sel = build_selection_matrices(topo, validate_selections(topo, [1], [2]))
    sample = make_sample(topo, [0.5])
    with pytest.raises(ValueError, match="full-excitation"):
        reduce_full_excitation(sample, sel)
    with pytest.raises(ValueError, match="full-measurement"):
        reduce_full_measurement(sample, sel)


def test_verdicts_equivariant_under_node_relabeling():
    # Identifiability is a property of the labeled graph structure, so
    # relabeling nodes must relabel the verdicts and nothing else.
    perm = {1: 3, 2: 1, 3: 2, 4: 6, 5: 5, 6: 4}
    g = corpus.RING_ALLOCATION
    topo, sets = corpus.load(g)
    res = analyze(topo, sets, nsamples=3, seed=0)
    verdict_of = dict(zip(topo.edges, res.edges))

    permuted = {
        "n": g["n"],
        "edges": [[perm[j], perm[i]] for j, i in g["edges"]],
        "excited": [perm[v] for v in g["excited"]],
        "measured": [perm[v] for v in g["measured"]],
    }
    topo_p, sets_p = corpus.load(permuted)
    res_p = analyze(topo_p, sets_p, nsamples=3, seed=0)
    inv = {v: k for k, v in perm.items()}
    expected = tuple(verdict_of[(inv[j], inv[i])] for j, i in topo_p.edges)
    assert res_p.edges == expected
    assert res_p.network == res.network
