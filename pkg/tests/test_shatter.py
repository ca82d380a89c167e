import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vc2lab.fp import FieldCtx, FpVector, vector_from_rank
from vc2lab.gs import ExplicitSet, GsSet, QgsSet
from vc2lab.highrank import build_trace_basis
from vc2lab.shatter import (
    ContainmentMap,
    NotShattered,
    QuadShatterCertificate,
    ShatterCertificate,
    Vc2Failure,
    exhaustive_z_finder,
    pattern_signature,
    shatters,
    vc2_realizes,
    vc2_shatters,
    vc_dim,
    vc_dim_naive,
)

ctx3 = FieldCtx(3)
ctx5 = FieldCtx(5)


def explicit(ctx, n, seed, density=0.5):
    rng = np.random.default_rng(seed)
    return ExplicitSet(ctx, n, rng.random(ctx.p ** n) < density)


def check_certificate(a, cert: ShatterCertificate):
    for mask, y in enumerate(cert.witnesses):
        for i, v in enumerate(cert.S):
            assert a.contains(v + y) == bool(mask >> i & 1)


def test_pattern_signature_singleton():
    a = GsSet(ctx3, 2)
    inside = FpVector(ctx3, (1, 0))
    outside = FpVector(ctx3, (2, 0))
    zero = FpVector(ctx3, (0, 0))
    assert pattern_signature(a, [zero], inside) == 1
    assert pattern_signature(a, [zero], outside) == 0


def test_three_point_set_is_shattered():
    a = GsSet(ctx3, 3)
    s = [FpVector(ctx3, (0, 0, 0)), FpVector(ctx3, (0, 1, 2)), FpVector(ctx3, (0, 2, 1))]
    cert = shatters(a, s)
    assert isinstance(cert, ShatterCertificate)
    check_certificate(a, cert)


def test_pair_with_named_witness_pool():
    a = GsSet(ctx5, 2)
    s = [FpVector(ctx5, (0, 0)), FpVector(ctx5, (0, 1))]
    cert = shatters(a, s)
    assert isinstance(cert, ShatterCertificate)
    pool = [FpVector(ctx5, (0, 0)), FpVector(ctx5, (1, 0)), FpVector(ctx5, (4, 0)), FpVector(ctx5, (0, 1))]
    assert {pattern_signature(a, s, y) for y in pool} == {0, 1, 2, 3}


def test_four_point_sets_not_shattered_in_gs34():
    a = GsSet(ctx3, 4)
    rng = np.random.default_rng(2)
    for _ in range(5):
        ranks = rng.choice(3 ** 4 - 1, size=3, replace=False) + 1
        s = [FpVector(ctx3, (0, 0, 0, 0))] + [vector_from_rank(ctx3, 4, int(r)) for r in ranks]
        result = shatters(a, s)
        if isinstance(result, NotShattered):
            assert 0 <= result.missing < 16


def test_shatters_threads_match():
    a = GsSet(ctx3, 4)
    s = [FpVector(ctx3, (0, 0, 0, 0)), FpVector(ctx3, (0, 0, 1, 2)), FpVector(ctx3, (0, 0, 2, 1))]
    c1 = shatters(a, s, threads=1)
    c2 = shatters(a, s, threads=2)
    assert isinstance(c1, ShatterCertificate) and c1.witnesses == c2.witnesses


@given(seed=st.integers(0, 2_000))
@settings(max_examples=40, deadline=None)
def test_monotone_under_subsets(seed):
    a = explicit(ctx3, 2, seed)
    rng = np.random.default_rng(seed + 1)
    ranks = rng.choice(9, size=3, replace=False)
    s = [vector_from_rank(ctx3, 2, int(r)) for r in ranks]
    if isinstance(shatters(a, s), ShatterCertificate):
        for drop in range(3):
            sub = [v for i, v in enumerate(s) if i != drop]
            assert isinstance(shatters(a, sub), ShatterCertificate)


@given(seed=st.integers(0, 2_000), shift=st.integers(0, 8))
@settings(max_examples=40, deadline=None)
def test_translation_invariance(seed, shift):
    a = explicit(ctx3, 2, seed)
    rng = np.random.default_rng(seed + 7)
    ranks = rng.choice(9, size=2, replace=False)
    s = [vector_from_rank(ctx3, 2, int(r)) for r in ranks]
    t = vector_from_rank(ctx3, 2, shift)
    res = shatters(a, s)
    moved = shatters(a, [v + t for v in s])
    assert isinstance(res, ShatterCertificate) == isinstance(moved, ShatterCertificate)
    if isinstance(res, ShatterCertificate):
        # witnesses for the translated set are witnesses of the original shifted by -t
        for mask, y in enumerate(moved.witnesses):
            assert pattern_signature(a, s, y + t) == mask


@pytest.mark.parametrize("p,n", [(3, 2), (5, 1)])
def test_vc_dim_matches_naive_oracle(p, n):
    ctx = FieldCtx(p)
    for seed in range(25):
        a = explicit(ctx, n, seed)
        assert vc_dim(a, k_max=5).dim == vc_dim_naive(a)


def test_vc_dim_gs_values():
    assert vc_dim(GsSet(ctx3, 3), k_max=4).dim == 3
    assert vc_dim(GsSet(ctx5, 2), k_max=4).dim == 2
    # full group: no translate ever leaves the set
    assert vc_dim(ExplicitSet(ctx3, 2, np.ones(9, dtype=bool))).dim == 0
    # computed value, not asserted from any external source
    assert vc_dim(GsSet(ctx3, 2), k_max=4).dim == 2


def test_vc_dim_qgs_small_group():
    # computed on the full 27-element group; regression-pinned
    a = QgsSet(build_trace_basis(ctx3, 3))
    assert vc_dim(a, k_max=4).dim == 3


def test_all_maps_enumeration():
    from vc2lab.shatter import all_maps

    maps = list(all_maps(1))
    assert len(maps) == 16
    assert maps[0].to_index() == 0 and maps[15].to_index() == 15


def test_vc_dim_certificate_is_sound():
    a = GsSet(ctx3, 3)
    res = vc_dim(a, k_max=4)
    assert res.dim == 3 and res.certificate is not None
    check_certificate(a, res.certificate)


def test_containment_map_index_round_trip():
    for k in (1, 2, 3):
        for idx in (0, 1, (1 << ((k + 1) ** 2)) - 1):
            phi = ContainmentMap.from_index(k, idx)
            assert phi.to_index() == idx
    # index 0 is the all-in-set map
    phi = ContainmentMap.from_index(1, 0)
    assert all(v for row in phi.verdicts for v in row)


def test_vc2_realizes_trivial_cases():
    basis = build_trace_basis(ctx3, 5)
    a = QgsSet(basis)
    zero = FpVector(ctx3, (0,) * 5)
    out_map = ContainmentMap(0, ((False,),))
    in_map = ContainmentMap(0, ((True,),))
    assert vc2_realizes(a, [zero], [zero], out_map, zero)
    assert not vc2_realizes(a, [zero], [zero], in_map, zero)


def test_vc2_shatters_empty_set_fails_at_all_in_map():
    a = ExplicitSet(ctx3, 2, np.zeros(9, dtype=bool))
    zero = FpVector(ctx3, (0, 0))
    v = FpVector(ctx3, (0, 1))
    res = vc2_shatters(a, [zero, v], [zero, v], exhaustive_z_finder(a, [zero, v], [zero, v]))
    assert isinstance(res, Vc2Failure)
    assert res.map_index == 0
    assert all(val for row in res.phi.verdicts for val in row)


def test_vc2_shatters_exhaustive_small_group():
    # a dense random set on F_3^3 quadratically shatters k=1 trivially
    a = explicit(ctx3, 3, seed=5)
    zero = FpVector(ctx3, (0, 0, 0))
    res = vc2_shatters(a, [zero], [zero], exhaustive_z_finder(a, [zero], [zero]))
    assert isinstance(res, QuadShatterCertificate)
    assert len(res.witnesses) == 2
