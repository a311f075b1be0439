import itertools
import math

import numpy as np
import pytest

from cavityring.exceptions import InvalidInputError
from cavityring.hilbert import BasisIndex, ProductState, enumerate_basis
from cavityring.spectra import TWO_CAVITY_TWO_EXC_ORDER
from cavityring.symmetry import (
    GroupKind,
    Orbit,
    SymmetryGroup,
    apply_permutation,
    build_collective_state,
    burnside_count,
    collective_basis,
    compose,
    count_collective_states,
    counting_survey,
    inverse,
    orbits,
    permutation_operator,
)
from cavityring.system_params import SystemParams


@pytest.mark.parametrize("kind", list(GroupKind))
@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_group_axioms(kind, n):
    group = SymmetryGroup.build(kind, n)
    elements = set(group.elements)
    assert group.identity in elements
    for a, b in itertools.product(group.elements, repeat=2):
        assert compose(a, b) in elements
    for a in group.elements:
        assert inverse(a) in elements
        assert compose(a, inverse(a)) == group.identity


def test_group_orders():
    assert SymmetryGroup.build("cyclic", 3).order == 3
    assert SymmetryGroup.build("dihedral", 3).order == 6
    assert SymmetryGroup.build("dihedral", 4).order == 8
    assert SymmetryGroup.build("cyclic", 2).elements == SymmetryGroup.build("dihedral", 2).elements


def test_apply_permutation_examples():
    assert apply_permutation(ProductState.from_kets("e,0", "g,0"), (1, 0)) == ProductState.from_kets("g,0", "e,0")
    state = ProductState.from_kets("g,1", "e,0", "g,2")
    assert apply_permutation(state, (0, 1, 2)) == state
    rotated = apply_permutation(ProductState.from_kets("g,1", "g,0", "g,0"), (1, 2, 0))
    assert rotated == ProductState.from_kets("g,0", "g,1", "g,0")


def test_apply_permutation_rejects_bad_permutations():
    state = ProductState.from_kets("e,0", "g,0")
    with pytest.raises(InvalidInputError):
        apply_permutation(state, (0, 1, 2))
    with pytest.raises(InvalidInputError):
        apply_permutation(state, (0, 0))


def test_orbit_examples():
    two = enumerate_basis(SystemParams(n_cavities=2), 1)
    assert len(orbits(two, SymmetryGroup.build("dihedral", 2))) == 2
    three = enumerate_basis(SystemParams(n_cavities=3), 2)
    assert len(three) == 18
    assert len(orbits(three, SymmetryGroup.build("dihedral", 3))) == 5
    assert len(orbits(three, SymmetryGroup.build("cyclic", 3))) == 6
    vacuum = enumerate_basis(SystemParams(n_cavities=3), 0)
    assert len(orbits(vacuum, SymmetryGroup.build("dihedral", 3))) == 1


def test_orbits_partition_the_basis():
    basis = enumerate_basis(SystemParams(n_cavities=4), 3)
    group = SymmetryGroup.build("dihedral", 4)
    found = orbits(basis, group)
    assert sum(orbit.size for orbit in found) == len(basis)
    members = [m for orbit in found for m in orbit.members]
    assert len(set(members)) == len(basis)
    for orbit in found:
        assert orbit.representative == min(orbit.members)
        assert {apply_permutation(orbit.representative, g) for g in group.elements} == set(orbit.members)


def test_orbits_reject_open_basis():
    with pytest.raises(InvalidInputError, match=r"\|g,0>\|e,0>"):
        orbits([ProductState.from_kets("e,0", "g,0")], SymmetryGroup.build("dihedral", 2))


@pytest.mark.parametrize(
    "cavities, n_ex, expected",
    [(2, 1, 2), (2, 2, 5), (3, 1, 2), (3, 2, 5), (3, 3, 10), (2, 0, 1)],
)
def test_count_collective_states(cavities, n_ex, expected):
    assert count_collective_states(cavities, n_ex) == expected
    if n_ex <= 3 and cavities <= 3:
        assert expected == n_ex**2 + 1


def test_orbit_enumeration_agrees_with_burnside():
    records = counting_survey(cavities=(2, 3, 4), excitations=range(5))
    assert len(records) == 3 * 5 * 2
    for record in records:
        assert record.orbits == record.burnside, record
        assert burnside_count(record.n_cavities, record.n_ex, record.kind) == record.orbits


def test_four_excitation_counts_are_reported():
    records = counting_survey(cavities=(3, 4), excitations=(4,))
    assert {(r.n_cavities, r.kind) for r in records} == {
        (3, GroupKind.CYCLIC),
        (3, GroupKind.DIHEDRAL),
        (4, GroupKind.CYCLIC),
        (4, GroupKind.DIHEDRAL),
    }
    assert all(r.orbits > 0 for r in records)


def test_build_collective_state_symmetric():
    pair = Orbit(
        representative=ProductState.from_kets("g,0", "e,0"),
        members=(ProductState.from_kets("g,0", "e,0"), ProductState.from_kets("e,0", "g,0")),
    )
    state = build_collective_state(pair, 0.0)
    assert state.amplitudes == pytest.approx((1 / math.sqrt(2), 1 / math.sqrt(2)))
    antisymmetric = build_collective_state(pair, math.pi)
    assert antisymmetric.amplitudes == pytest.approx((1 / math.sqrt(2), -1 / math.sqrt(2)))

    singleton = Orbit(
        representative=ProductState.from_kets("e,0", "e,0"),
        members=(ProductState.from_kets("e,0", "e,0"),),
    )
    assert build_collective_state(singleton, 0.0).amplitudes == (1.0,)
    assert build_collective_state(singleton, math.pi) is None


def test_three_cavity_single_excitation_state():
    group = SymmetryGroup.build("dihedral", 3)
    atom_orbit = [o for o in orbits(enumerate_basis(SystemParams(n_cavities=3), 1), group) if o.size == 3]
    state = build_collective_state(atom_orbit[-1], 0.0)
    assert len(state.members) == 3
    assert all(a == pytest.approx(1 / math.sqrt(3)) for a in state.amplitudes)


def test_two_cavity_two_excitation_collective_basis():
    states = collective_basis(SystemParams(n_cavities=2), 2)
    assert {s.representative for s in states} == set(TWO_CAVITY_TWO_EXC_ORDER)
    assert [s.representative for s in states] == sorted(TWO_CAVITY_TWO_EXC_ORDER)
    assert len(collective_basis(SystemParams(n_cavities=2, phi="pi"), 2)) == 3


def test_vacuum_collective_basis():
    (state,) = collective_basis(SystemParams(n_cavities=4), 0)
    assert state.amplitudes == (1.0,)


@pytest.mark.parametrize("cavities, n_ex, phi", [(2, 1, 0.0), (2, 2, math.pi), (3, 2, 0.0), (4, 3, 0.0)])
def test_collective_states_are_orthonormal(cavities, n_ex, phi):
    params = SystemParams(n_cavities=cavities, phi=phi)
    index = BasisIndex(enumerate_basis(params, n_ex))
    vectors = np.column_stack([s.vector(index) for s in collective_basis(params, n_ex)])
    gram = vectors.conj().T @ vectors
    assert np.max(np.abs(gram - np.eye(gram.shape[0]))) <= 1e-12


@pytest.mark.parametrize("kind", list(GroupKind))
def test_symmetric_states_are_fixed_by_the_group(kind):
    params = SystemParams(n_cavities=4)
    index = BasisIndex(enumerate_basis(params, 2))
    group = SymmetryGroup.build(kind, 4)
    for state in collective_basis(params, 2, group):
        vector = state.vector(index)
        for perm in group.elements:
            assert np.allclose(permutation_operator(perm, index) @ vector, vector, atol=1e-12)
