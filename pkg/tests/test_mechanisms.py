import itertools

import pytest

from ipsdual.mechanisms import (
    CANONICAL_NAMES,
    REFERENCE_PAIRS,
    BasicMechanism,
    PairState,
    _duality_matrices,
    apply,
    canonical,
    classify_all,
    count_effect,
    is_dual,
    is_monotone,
    symmetry_images,
    transform,
)

PAIRS = [(0, 0), (0, 1), (1, 0), (1, 1)]


def naive_dual(f, g):
    """Direct transcription of the two implications on tuples."""

    def wedge(a, b):
        return (min(a[0], b[0]), min(a[1], b[1]))

    def dag(a):
        return (a[1], a[0])

    for x in PAIRS:
        for y in PAIRS:
            fx, gy = tuple(f(*x)), tuple(g(*y))
            if wedge(y, dag(fx)) == (0, 0) and wedge(gy, dag(x)) != (0, 0):
                return False
            if wedge(x, dag(gy)) == (0, 0) and wedge(fx, dag(y)) != (0, 0):
                return False
    return True


@pytest.fixture(scope="module")
def catalog():
    return classify_all()


def test_apply_examples():
    assert apply(canonical("resampling"), (1, 0)) == (1, 1)
    assert apply(canonical("coalescent"), (1, 1)) == (0, 1)
    assert apply(canonical("identity"), (0, 1)) == (0, 1)
    assert isinstance(apply(canonical("identity"), (0, 1)), PairState)


def test_transform_examples():
    assert transform(canonical("resampling"), "dagger")(0, 1) == (1, 1)
    assert transform(canonical("identity"), "hat")(1, 0) == (0, 1)
    expected = BasicMechanism.from_pairs(
        {(0, 0): (0, 0), (0, 1): (1, 0), (1, 0): (1, 0), (1, 1): (1, 0)}
    )
    assert transform(canonical("coalescent"), "dagger") == expected


@pytest.mark.parametrize("sym", ["dagger", "hat", "hat_dagger"])
def test_transforms_are_involutions(sym):
    for code in range(256):
        m = BasicMechanism.from_code(code)
        assert transform(transform(m, sym), sym) == m


def test_transform_unknown():
    with pytest.raises(ValueError):
        transform(canonical("identity"), "flip")


def test_is_dual_examples():
    assert is_dual(canonical("resampling"), canonical("coalescent"))
    assert is_dual(canonical("pure_birth"), canonical("pure_birth"))
    assert not is_dual(canonical("pure_birth"), canonical("coalescent"))
    assert not naive_dual(canonical("pure_birth"), canonical("coalescent"))


def test_both_forms_agree_everywhere():
    by_def, by_char = _duality_matrices()
    assert (by_def == by_char).all()


def test_is_dual_matches_naive_oracle():
    by_def, _ = _duality_matrices()
    mechs = [BasicMechanism.from_code(c) for c in range(256)]
    for f, g in itertools.product(mechs, mechs):
        expected = naive_dual(f, g)
        assert by_def[f.code, g.code] == expected
    # spot-check the scalar path on a spread of pairs
    for fc, gc in itertools.product(range(0, 256, 7), range(0, 256, 5)):
        assert is_dual(mechs[fc], mechs[gc]) == by_def[fc, gc]


def test_duality_is_symmetric():
    by_def, _ = _duality_matrices()
    assert (by_def == by_def.T).all()


def test_catalog_counts(catalog):
    assert catalog.with_dual_count == 16
    assert catalog.self_dual_count == 8
    assert len(catalog.entries) == 16


def test_catalog_contains_reference_pairs(catalog):
    for f, g in REFERENCE_PAIRS:
        assert (f, g) in catalog
        assert catalog.dual_of(f) == g


def test_catalog_entries_are_dual(catalog):
    for f, g in catalog.entries:
        assert is_dual(f, g)
        assert naive_dual(f, g)


def test_catalog_necessary_conditions(catalog):
    for f, _ in catalog.entries:
        assert f(0, 0) == (0, 0)
        assert is_monotone(f)


def test_catalog_symmetry_closure(catalog):
    entries = set(catalog.entries)
    for f, g in catalog.entries:
        for image in symmetry_images(f, g):
            assert image in entries


def test_catalog_is_sorted_and_deterministic(catalog):
    assert catalog.rows() == classify_all().rows()
    keys = [(f.table, g.table) for f, g in catalog.entries]
    assert keys == sorted(keys)


def test_canonical_tables():
    pb = canonical("pure_birth")
    assert [tuple(pb(*x)) for x in PAIRS] == [(0, 0), (0, 1), (1, 1), (1, 1)]
    dc = canonical("death_coalescent")
    assert [tuple(dc(*x)) for x in PAIRS] == [(0, 0), (0, 0), (0, 1), (0, 1)]
    zero = canonical("constant_zero")
    assert all(zero(*x) == (0, 0) for x in PAIRS)
    assert len(CANONICAL_NAMES) == 7


def test_canonical_unknown():
    with pytest.raises(ValueError):
        canonical("mutation")


def test_count_effect():
    assert count_effect(canonical("resampling"))[PairState(1, 0)] == 1
    assert count_effect(canonical("coalescent"))[PairState(1, 1)] == -1
    assert count_effect(canonical("death_coalescent"))[PairState(1, 0)] == 0
    for code in range(256):
        assert set(count_effect(BasicMechanism.from_code(code)).values()) <= {-2, -1, 0, 1, 2}


def test_code_roundtrip():
    for code in range(256):
        assert BasicMechanism.from_code(code).code == code
    with pytest.raises(ValueError):
        BasicMechanism((0, 1, 2))
    with pytest.raises(ValueError):
        BasicMechanism.from_code(256)
