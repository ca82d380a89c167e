import numpy as np
import pytest

from vc2lab.fp import FieldCtx, FpVector, basis_vector
from vc2lab.gs import QgsSet
from vc2lab.highrank import build_trace_basis
from vc2lab.shatter import ContainmentMap, QuadShatterCertificate, vc2_realizes, vc2_shatters
from vc2lab.factor import (
    AtomLabel,
    QuadraticFactor,
    atom_census,
    atom_label,
    check_cross_term_range,
    check_forced_zeros,
    construct_shatter_pair,
    find_in_atom,
    forced_zero_probe,
    planted_qualifying_sets,
    predicted_grid,
    random_zero_cross_term_sets,
    realize_map,
    target_values_for_map,
    zero_forcing_map,
)

ctx3 = FieldCtx(3)
ctx5 = FieldCtx(5)


@pytest.fixture(scope="module")
def basis9():
    return build_trace_basis(ctx3, 9)


@pytest.fixture(scope="module")
def basis13():
    return build_trace_basis(ctx3, 13)


@pytest.fixture(scope="module")
def basis5():
    return build_trace_basis(ctx3, 5)


def test_factor_rejects_dependent_linears():
    with pytest.raises(ValueError):
        QuadraticFactor((FpVector(ctx3, (1, 1, 0)), FpVector(ctx3, (2, 2, 0))), ())
    with pytest.raises(ValueError):
        QuadraticFactor((), (1, 1))


def test_atom_label_examples(basis9):
    f = QuadraticFactor((basis_vector(ctx3, 9, 0),), (1,))
    zero = FpVector(ctx3, (0,) * 9)
    assert atom_label(f, basis9, zero).values == (0, 0)
    x = FpVector(ctx3, (2,) + (0,) * 8)
    assert atom_label(f, basis9, x).values[0] == 2


def test_find_in_atom_round_trip(basis9):
    f = QuadraticFactor((basis_vector(ctx3, 9, 0), basis_vector(ctx3, 9, 1)), (1, 2))
    for rank in range(0, 81, 5):
        vals = []
        r = rank
        for _ in range(4):
            vals.append(r % 3)
            r //= 3
        label = AtomLabel(tuple(vals))
        x = find_in_atom(f, basis9, label, seed=rank)
        assert atom_label(f, basis9, x) == label


def test_find_in_atom_rejects_high_complexity(basis5):
    f = QuadraticFactor(tuple(basis_vector(ctx3, 5, i) for i in range(2)), (1,))
    # complexity 3 >= 5/2: not guaranteed non-empty
    with pytest.raises(ValueError):
        find_in_atom(f, basis5, AtomLabel((0, 0, 0)))


def test_atom_census_trivial_factors(basis9):
    b3 = build_trace_basis(ctx3, 3)
    assert list(atom_census(QuadraticFactor((), ()), b3).values()) == [27]
    census = atom_census(QuadraticFactor((basis_vector(ctx3, 3, 0),), ()), b3)
    assert sorted(census.values()) == [9, 9, 9]


def test_atom_census_bound_sweep(basis9):
    # every (l, q) combination with l, q <= 2 over the same basis
    for l in range(3):
        for q in range(3):
            f = QuadraticFactor(tuple(basis_vector(ctx3, 9, i) for i in range(l)), tuple(range(1, q + 1)))
            census = atom_census(f, basis9, check_bound=True)
            assert len(census) == 3 ** (l + q)
            if l + q * 2 < 9:
                assert min(census.values()) > 0


def test_atom_census_single_quadratic_level_sets(basis9):
    f = QuadraticFactor((), (1,))
    census = atom_census(f, basis9, check_bound=True)
    assert len(census) == 3
    assert sum(census.values()) == 3 ** 9
    for size in census.values():
        assert (size - 3 ** 8) ** 2 <= 3 ** 9


# ---------------------------------------------------------------------------
# Target tables.
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("p", [3, 5, 7])
def test_k2_tables_cover_all_maps(p):
    for idx in range(16):
        phi = ContainmentMap.from_index(1, idx)
        tv = target_values_for_map(phi, p)
        assert predicted_grid(tv, p).verdicts == phi.verdicts


@pytest.mark.parametrize("p", [3, 5, 7])
def test_k3_tables_cover_all_maps(p):
    for idx in range(512):
        phi = ContainmentMap.from_index(2, idx)
        tv = target_values_for_map(phi, p)
        assert predicted_grid(tv, p).verdicts == phi.verdicts


def test_target_values_reject_partial_maps():
    with pytest.raises(ValueError):
        target_values_for_map(zero_forcing_map(), 3)


# ---------------------------------------------------------------------------
# Construction and realization.
# ---------------------------------------------------------------------------


def test_construct_pair_k2_invariants(basis13):
    c = construct_shatter_pair(basis13, 2, seed=0)
    assert len(c.X) == 2 and len(c.Y) == 2
    assert c.X[0].is_zero() and c.Y[0].is_zero()
    assert len(c.factor.linear_polys) == 4
    assert c.factor.complexity == 6
    a = QgsSet(basis13)
    for t in (1, 2):
        assert a.cross_term(t, c.X[1], c.Y[1]) == 0


def test_construct_pair_deterministic(basis13):
    c1 = construct_shatter_pair(basis13, 2, seed=42)
    c2 = construct_shatter_pair(basis13, 2, seed=42)
    assert c1.X == c2.X and c1.Y == c2.Y


def test_construct_pair_size_limits(basis13):
    with pytest.raises(ValueError):
        construct_shatter_pair(basis13, 3, seed=0)  # needs n >= 31
    with pytest.raises(ValueError):
        construct_shatter_pair(basis13, 4, seed=0)


def test_k2_pipeline_realizes_all_maps(basis13):
    c = construct_shatter_pair(basis13, 2, seed=0)
    a = QgsSet(basis13)
    cert = vc2_shatters(a, c.X, c.Y, lambda phi: realize_map(c, phi, seed=0))
    assert isinstance(cert, QuadShatterCertificate)
    assert len(cert.witnesses) == 16
    # independent re-check of a few witnesses
    for idx in (0, 7, 15):
        phi = ContainmentMap.from_index(1, idx)
        assert vc2_realizes(a, c.X, c.Y, phi, cert.witnesses[idx])


def test_realize_map_deterministic(basis13):
    c = construct_shatter_pair(basis13, 2, seed=1)
    phi = ContainmentMap.from_index(1, 9)
    assert realize_map(c, phi, seed=5) == realize_map(c, phi, seed=5)


def test_construction_doc_round_trip(basis13):
    from vc2lab.factor import construction_doc, construction_from_doc
    from vc2lab import certs

    c = construct_shatter_pair(basis13, 2, seed=3)
    doc = certs.loads(certs.dumps(construction_doc(c)))
    back = construction_from_doc(doc)
    assert back.X == c.X and back.Y == c.Y
    assert back.factor == c.factor
    # the reloaded construction still drives realization
    phi = ContainmentMap.from_index(1, 11)
    a = QgsSet(basis13)
    assert vc2_realizes(a, back.X, back.Y, phi, realize_map(back, phi, seed=0))
    # tampering with a point breaks the invariant verification
    doc["Y"][1][0] = (doc["Y"][1][0] + 1) % 3
    with pytest.raises(ValueError):
        construction_from_doc(doc)


# ---------------------------------------------------------------------------
# Forced-zero checks and the cross-term range.
# ---------------------------------------------------------------------------


def test_zero_forcing_map_shape():
    phi = zero_forcing_map()
    comp = {(0, 1), (0, 2), (1, 0), (2, 0), (2, 3), (3, 2)}
    assert phi.verdicts[0][0] is None
    for i in range(4):
        for j in range(4):
            if (i, j) == (0, 0):
                continue
            assert phi.verdicts[i][j] == ((i, j) not in comp)
    assert not phi.is_total()


def test_forced_zero_probe_mixed_outcomes(basis5):
    results = forced_zero_probe(basis5, instances=8, seed=1)
    assert all(r.ok for r in results)
    assert any(r.vacuous for r in results)
    assert any(not r.vacuous for r in results)


def test_planted_instances_admit_realizers(basis5):
    a = QgsSet(basis5)
    got = planted_qualifying_sets(basis5, m=1, seed=3, constrain_level=1)
    assert got is not None
    x, y = got
    # level-1 cross-terms vanish on the whole grid
    for xi in x:
        for yj in y:
            assert a.cross_term(1, xi, yj) == 0


def test_check_forced_zeros_inapplicable_without_hypothesis(basis5):
    a = QgsSet(basis5)
    x, y = random_zero_cross_term_sets(basis5, 1, seed=0)
    z = FpVector(ctx3, (0,) * 5)
    grid_ok = vc2_realizes(a, x, y, zero_forcing_map(), z)
    if not grid_ok:
        with pytest.raises(ValueError):
            check_forced_zeros(a, x, y, 1, z)


def test_cross_term_range_p3_vacuous(basis5):
    a = QgsSet(basis5)
    x, y = random_zero_cross_term_sets(basis5, 1, seed=2)
    res = check_cross_term_range(a, x, y, 1)
    assert res.ok  # every residue mod 3 lies in {-2..2}


def test_cross_term_range_p7_detects_outlier():
    basis = build_trace_basis(FieldCtx(7), 3)
    a = QgsSet(basis)
    zero = FpVector(FieldCtx(7), (0, 0, 0))
    # search a pair with 2 x^T M_1 y outside {-2..2} mod 7, i.e. in {3, 4}
    rng = np.random.default_rng(0)
    found = None
    while found is None:
        x = FpVector(FieldCtx(7), tuple(int(c) for c in rng.integers(0, 7, 3)))
        y = FpVector(FieldCtx(7), tuple(int(c) for c in rng.integers(0, 7, 3)))
        if a.cross_term(1, x, y) in (3, 4):
            found = (x, y)
    x, y = found
    res = check_cross_term_range(a, (zero, x), (zero, y), 1)
    assert not res.ok
