"""Coupling matrix construction and overlap adjustment."""

import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flexlink.errors import ModelError
from flexlink.model import (
    Association,
    OverlapModel,
    apply_overlap,
    build_coupling,
    pairwise_overlap_factors,
)

from .helpers import make_scenario, two_cell_scenario, coud_assoc, random_scenario


def test_single_cell_coupling_is_interference_free():
    h0 = np.array([[2e-8]])
    sc = make_scenario(h0, np.array([[1.0]]), np.array([[1.0]]), [1e6, 2e6])
    assoc = Association(b_ul=[0], b_dl=[0], n_bs=1)
    model = build_coupling(sc, assoc)
    assert np.all(model.v_tilde == 0.0)
    assert np.allclose(model.d_diag, [2e-8, 2e-8])
    assert model.v.shape == (2, 2)
    assert np.all(model.v > 0)


def test_two_cell_coud_blocks_match_hand_expansion():
    sc = two_cell_scenario()
    assoc = coud_assoc(sc)
    assert assoc.b_ul.tolist() == [0, 1] and assoc.b_dl.tolist() == [0, 1]
    model = build_coupling(sc, assoc)
    h0, h1, h2 = sc.h0, sc.h1, sc.h2

    # receiver-block / transmitter-block entries written out by hand
    expected_v = np.array([
        [h0[0, 0], h0[0, 1], h1[0, 0], h1[0, 1]],   # UL of UE0 hears ...
        [h0[1, 0], h0[1, 1], h1[1, 0], h1[1, 1]],   # UL of UE1
        [h2[0, 0], h2[0, 1], h0[0, 0], h0[1, 0]],   # DL of UE0
        [h2[1, 0], h2[1, 1], h0[0, 1], h0[1, 1]],   # DL of UE1
    ])
    assert np.array_equal(model.v, expected_v)

    expected_vt = np.array([
        [0.0, h0[0, 1], 0.0, h1[0, 1]],
        [h0[1, 0], 0.0, h1[1, 0], 0.0],
        [0.0, h2[0, 1], 0.0, h0[1, 0]],
        [h2[1, 0], 0.0, h0[0, 1], 0.0],
    ])
    assert np.array_equal(model.v_tilde, expected_vt)
    assert np.array_equal(model.d_diag, [h0[0, 0], h0[1, 1], h0[0, 0], h0[1, 1]])


def test_decoupled_ue_keeps_bs_to_bs_entry_but_not_self_gain():
    sc = two_cell_scenario()
    # UE0: uplink at BS1, downlink at BS0; UE1 coupled at BS1
    assoc = Association(b_ul=[1, 1], b_dl=[0, 1], n_bs=2)
    model = build_coupling(sc, assoc)
    # own DL (from BS0) interferes own UL (at BS1) through the BS-to-BS channel
    assert model.v_tilde[0, 2] == sc.h1[1, 0]
    assert model.v_tilde[0, 2] > 0
    # own UL never interferes own DL: the h2 self-gain is not a channel
    assert model.v_tilde[2, 0] == 0.0


def test_coud_cross_blocks_zero_exactly_on_shared_bs():
    sc = random_scenario(3, n_ue=5, n_bs=3)
    rng = np.random.default_rng(5)
    b = rng.integers(0, 3, size=5)
    assoc = Association(b_ul=b, b_dl=b, n_bs=3)
    model = build_coupling(sc, assoc)
    k = 5
    same = b[:, None] == b[None, :]
    assert np.array_equal(model.v_tilde[:k, k:] == 0.0, same)
    assert np.array_equal(model.v_tilde[k:, :k] == 0.0, same)


def test_dimension_mismatch_raises():
    sc = two_cell_scenario()
    bad = Association(b_ul=[0, 1, 0], b_dl=[0, 1, 1], n_bs=2)
    with pytest.raises(ModelError):
        build_coupling(sc, bad)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_coupling_permutation_equivariant(seed):
    sc = random_scenario(seed, n_ue=4, n_bs=2)
    rng = np.random.default_rng(seed + 1)
    b_ul = rng.integers(0, 2, size=4)
    b_dl = rng.integers(0, 2, size=4)
    model = build_coupling(sc, Association(b_ul=b_ul, b_dl=b_dl, n_bs=2))

    perm = rng.permutation(4)
    sc_p = make_scenario(sc.h0[:, perm], sc.h1, sc.h2[np.ix_(perm, perm)],
                         np.concatenate([sc.demands[:4][perm], sc.demands[4:][perm]]))
    model_p = build_coupling(sc_p, Association(b_ul=b_ul[perm], b_dl=b_dl[perm], n_bs=2))

    link_perm = np.concatenate([perm, perm + 4])
    assert np.array_equal(model_p.v, model.v[np.ix_(link_perm, link_perm)])
    assert np.array_equal(model_p.v_tilde, model.v_tilde[np.ix_(link_perm, link_perm)])
    assert np.array_equal(model_p.d_diag, model.d_diag[link_perm])


# overlap adjustment


def test_pairwise_factors_match_worked_example():
    # cell i: (UL, DL) = (0.3, 0.7); cell j: (0.7, 0.3)
    fac = pairwise_overlap_factors(load_ul=[0.3, 0.7], load_dl=[0.7, 0.3])
    assert fac[("dl", "ul")][0, 1] == pytest.approx(0.57, abs=0.005)
    assert fac[("ul", "dl")][0, 1] == 0.0
    # same-direction factors clamp to one
    assert np.all(fac[("ul", "ul")] == 1.0)
    assert np.all(fac[("dl", "dl")] == 1.0)


def test_cell_specific_products_match_worked_example():
    sc = two_cell_scenario()
    assoc = coud_assoc(sc)
    model = build_coupling(sc, assoc)
    overlap = OverlapModel(scheme="cell_specific", load_ul=[0.3, 0.7], load_dl=[0.7, 0.3])
    adjusted = apply_overlap(model, overlap, assoc)
    k = 2
    # DL served by cell 0 hears UL served by cell 1: c_dl[0] * c_ul[1] = 0.49
    assert adjusted.v_tilde[k + 0, 1] == pytest.approx(0.49 * model.v_tilde[k + 0, 1])
    # UL served by cell 0 hears DL served by cell 1: c_ul[0] * c_dl[1] = 0.09
    assert adjusted.v_tilde[0, k + 1] == pytest.approx(0.09 * model.v_tilde[0, k + 1])


def test_scheme_none_is_identity():
    sc = two_cell_scenario()
    assoc = coud_assoc(sc)
    model = build_coupling(sc, assoc)
    out = apply_overlap(model, OverlapModel(scheme="none"), assoc)
    assert np.array_equal(out.v_tilde, model.v_tilde)
    assert np.array_equal(out.v, model.v)


def test_zero_historical_load_gives_zero_factor_and_diagnostic(caplog):
    with caplog.at_level(logging.WARNING, logger="flexlink.model"):
        fac = pairwise_overlap_factors(load_ul=[0.0, 0.5], load_dl=[0.6, 0.6])
    assert np.all(fac[("ul", "dl")][0, :] == 0.0)
    assert any("overlap factor set to 0" in r.message for r in caplog.records)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000),
       scheme=st.sampled_from(["cell_pairwise", "cell_specific"]))
def test_overlap_never_increases_coupling(seed, scheme):
    sc = random_scenario(seed, n_ue=4, n_bs=3)
    rng = np.random.default_rng(seed)
    assoc = Association(b_ul=rng.integers(0, 3, size=4),
                        b_dl=rng.integers(0, 3, size=4), n_bs=3)
    model = build_coupling(sc, assoc)
    overlap = OverlapModel(scheme=scheme, load_ul=rng.uniform(0, 1, 3),
                           load_dl=rng.uniform(0, 1, 3))
    adjusted = apply_overlap(model, overlap, assoc)
    assert np.all(adjusted.v_tilde <= model.v_tilde + 1e-300)
    # same-direction blocks untouched
    assert np.array_equal(adjusted.v_tilde[:4, :4], model.v_tilde[:4, :4])
    assert np.array_equal(adjusted.v_tilde[4:, 4:], model.v_tilde[4:, 4:])


def test_association_matrices_have_block_structure():
    assoc = Association(b_ul=[1, 0, 1], b_dl=[0, 0, 1], n_bs=2)
    k, n = 3, 2
    assert np.all(assoc.a_ul.sum(axis=0) == 1)
    assert np.all(assoc.a_dl.sum(axis=0) == 1)
    assert assoc.a.shape == (n, 2 * k)
    expected_ext = np.vstack([
        np.hstack([np.eye(k), np.zeros((k, k))]),
        np.hstack([np.zeros((n, k)), assoc.a_dl]),
    ])
    assert np.array_equal(assoc.a_ext, expected_ext)
    # p = lambda_map @ p_bar reproduces per-link PSD from per-transmitter PSD
    p_bar = np.array([1.0, 2.0, 3.0, 10.0, 20.0])
    p = assoc.lambda_map @ p_bar
    assert p.tolist() == [1.0, 2.0, 3.0, 10.0, 10.0, 20.0]
