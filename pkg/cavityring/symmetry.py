"""Ring symmetry groups, orbits of product states and collective states."""

import math
from enum import Enum
from typing import Iterable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from cavityring import config
from cavityring.exceptions import InvalidInputError
from cavityring.hilbert import (
    BasisIndex,
    ProductState,
    enumerate_basis,
    excitation_number,
    local_generating_polynomial,
)
from cavityring.system_params import SystemParams

Permutation = tuple[int, ...]


class GroupKind(str, Enum):
    CYCLIC = "cyclic"
    DIHEDRAL = "dihedral"


def compose(first: Permutation, second: Permutation) -> Permutation:
    """Returns first∘second (apply second, then first)."""
    return tuple(first[second[i]] for i in range(len(second)))


def inverse(perm: Permutation) -> Permutation:
    result = [0] * len(perm)
    for i, image in enumerate(perm):
        result[image] = i
    return tuple(result)


def cycle_lengths(perm: Permutation) -> list[int]:
    seen = [False] * len(perm)
    lengths = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        length, i = 0, start
        while not seen[i]:
            seen[i] = True
            i = perm[i]
            length += 1
        lengths.append(length)
    return lengths


class SymmetryGroup(BaseModel):
    """Cavity-index permutations of the regular-polygon ring (perm[i] is the image of i)."""

    model_config = ConfigDict(frozen=True)

    kind: GroupKind = Field(GroupKind.DIHEDRAL, alias="kind")
    n: int = Field(..., alias="n", ge=2)  # Required field
    elements: tuple[Permutation, ...] = Field(..., alias="elements")  # Required field

    @model_validator(mode="after")
    def _check_elements(self):
        for perm in self.elements:
            if sorted(perm) != list(range(self.n)):
                raise ValueError(f"{perm} is not a permutation of {self.n} cavities.")
        return self

    @classmethod
    def build(cls, kind: GroupKind | str, n: int) -> "SymmetryGroup":
        kind = GroupKind(kind)
        elements: list[Permutation] = []
        for k in range(n):
            elements.append(tuple((i + k) % n for i in range(n)))
        if kind is GroupKind.DIHEDRAL:
            for k in range(n):
                elements.append(tuple((k - i) % n for i in range(n)))
        unique = sorted(set(elements))
        return cls(kind=kind, n=n, elements=tuple(unique))

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def identity(self) -> Permutation:
        return tuple(range(self.n))


class Orbit(BaseModel):
    """Group orbit of one product state; members in canonical order."""

    model_config = ConfigDict(frozen=True)

    representative: ProductState = Field(..., alias="representative")
    members: tuple[ProductState, ...] = Field(..., alias="members")

    @property
    def size(self) -> int:
        return len(self.members)


class CollectiveState(BaseModel):
    """Normalized symmetry-adapted superposition over one orbit."""

    model_config = ConfigDict(frozen=True)

    members: tuple[ProductState, ...] = Field(..., alias="members")
    amplitudes: tuple[complex, ...] = Field(..., alias="amplitudes")
    phi: float = Field(0.0, alias="phi")
    n_ex: int = Field(..., alias="n_ex", ge=0)

    @model_validator(mode="after")
    def _check_normalized(self):
        if len(self.members) != len(self.amplitudes):
            raise ValueError("Every member needs exactly one amplitude.")
        norm = sum(abs(a) ** 2 for a in self.amplitudes)
        if abs(norm - 1.0) > config.NORM_ATOL:
            raise ValueError(f"Collective state is not normalized (norm² = {norm}).")
        return self

    @property
    def representative(self) -> ProductState:
        return self.members[0]

    @property
    def amplitude_map(self) -> dict[ProductState, complex]:
        return dict(zip(self.members, self.amplitudes))

    @property
    def label(self) -> str:
        prefix = "S" if self.phi == 0.0 else "A"
        return f"{prefix}{self.representative}"

    def vector(self, basis: BasisIndex) -> np.ndarray:
        """Amplitude column over a product basis."""
        vec = np.zeros(len(basis), dtype=complex)
        for state, amplitude in zip(self.members, self.amplitudes):
            vec[basis.index(state)] = amplitude
        return vec

    def __str__(self) -> str:
        return self.label


def apply_permutation(s: ProductState, perm: Permutation) -> ProductState:
    """Moves the content of cavity i to cavity perm[i]."""
    if len(perm) != s.n_cavities or sorted(perm) != list(range(s.n_cavities)):
        raise InvalidInputError(
            f"Permutation {perm} does not act on {s.n_cavities} cavities."
        )
    atoms = [None] * s.n_cavities
    photons = [0] * s.n_cavities
    for i, target in enumerate(perm):
        atoms[target] = s.atoms[i]
        photons[target] = s.photons[i]
    return ProductState(atoms=tuple(atoms), photons=tuple(photons))


def orbits(basis: Iterable[ProductState], group: SymmetryGroup) -> list[Orbit]:
    """Partitions a group-closed basis into orbits ordered by representative."""
    ordered = sorted(basis, key=lambda s: s.sort_key)
    members_of = set(ordered)
    assigned: set[ProductState] = set()
    result = []
    for state in ordered:
        if state in assigned:
            continue
        images = {apply_permutation(state, perm) for perm in group.elements}
        for image in images:
            if image not in members_of:
                raise InvalidInputError(
                    f"Basis is not closed under the {group.kind.value} group: "
                    f"{image} (image of {state}) is missing."
                )
        members = tuple(sorted(images, key=lambda s: s.sort_key))
        assigned.update(members)
        result.append(Orbit(representative=members[0], members=members))
    return result


def count_collective_states(
    n_cavities: int,
    n_ex: int,
    kind: GroupKind | str = GroupKind.DIHEDRAL,
    fock_cutoff: Optional[int] = None,
) -> int:
    """Number of orbits in the n_ex manifold, by explicit orbit enumeration."""
    params = SystemParams(n_cavities=n_cavities, fock_cutoff=fock_cutoff)
    group = SymmetryGroup.build(kind, n_cavities)
    return len(orbits(enumerate_basis(params, n_ex), group))


def burnside_count(
    n_cavities: int,
    n_ex: int,
    kind: GroupKind | str = GroupKind.DIHEDRAL,
    fock_cutoff: Optional[int] = None,
) -> int:
    """Orbit count as the group average of fixed points, from cycle-index polynomials."""
    cutoff = n_ex if fock_cutoff is None else fock_cutoff
    local = local_generating_polynomial(cutoff)
    group = SymmetryGroup.build(kind, n_cavities)
    total = 0
    for perm in group.elements:
        poly = np.array([1], dtype=np.int64)
        for length in cycle_lengths(perm):
            stretched = np.zeros(length * (len(local) - 1) + 1, dtype=np.int64)
            stretched[::length] = local
            poly = np.convolve(poly, stretched)
        total += int(poly[n_ex]) if n_ex < len(poly) else 0
    if total % group.order:
        raise ArithmeticError(f"Fixed-point total {total} not divisible by |G|={group.order}.")
    return total // group.order


def build_collective_state(orbit: Orbit, phi: float = 0.0) -> Optional[CollectiveState]:
    """Symmetric combination for phi=0, (1, -1)/√2 for two-member orbits at phi=π."""
    n_ex = excitation_number(orbit.representative)
    if math.isclose(phi, 0.0, abs_tol=1e-12):
        amplitude = complex(1.0 / math.sqrt(orbit.size))
        return CollectiveState(
            members=orbit.members,
            amplitudes=(amplitude,) * orbit.size,
            phi=0.0,
            n_ex=n_ex,
        )
    if not math.isclose(phi, math.pi, abs_tol=1e-12):
        raise InvalidInputError(f"phi must be 0 or pi, got {phi}.")
    if orbit.size != 2:
        return None
    amplitude = 1.0 / math.sqrt(2.0)
    return CollectiveState(
        members=orbit.members,
        amplitudes=(complex(amplitude), complex(-amplitude)),
        phi=math.pi,
        n_ex=n_ex,
    )


def collective_basis(
    params: SystemParams,
    n_ex: int,
    group: SymmetryGroup | GroupKind | str = GroupKind.DIHEDRAL,
    phi: Optional[float] = None,
) -> list[CollectiveState]:
    """One collective state per supported orbit, in canonical representative order."""
    if not isinstance(group, SymmetryGroup):
        group = SymmetryGroup.build(group, params.n_cavities)
    phi = params.phi if phi is None else phi
    states = []
    for orbit in orbits(enumerate_basis(params, n_ex), group):
        state = build_collective_state(orbit, phi)
        if state is not None:
            states.append(state)
    return states


def permutation_operator(perm: Permutation, basis: BasisIndex) -> np.ndarray:
    """Matrix of the cavity relabelling on a group-closed product basis."""
    matrix = np.zeros((len(basis), len(basis)), dtype=complex)
    for column, state in enumerate(basis):
        matrix[basis.index(apply_permutation(state, perm)), column] = 1.0
    return matrix


class CountRecord(BaseModel):
    n_cavities: int
    n_ex: int
    kind: GroupKind
    distinguishable: int
    orbits: int
    burnside: int

    @property
    def law(self) -> int:
        """The small-excitation counting law n_ex² + 1."""
        return self.n_ex**2 + 1


def counting_survey(
    cavities: Iterable[int] = (2, 3, 4),
    excitations: Iterable[int] = (0, 1, 2, 3, 4),
    kinds: Iterable[GroupKind] = (GroupKind.CYCLIC, GroupKind.DIHEDRAL),
) -> list[CountRecord]:
    """Tabulates orbit and Burnside counts for every requested combination."""
    records = []
    for n in cavities:
        for n_ex in excitations:
            params = SystemParams(n_cavities=n)
            basis = enumerate_basis(params, n_ex)
            for kind in kinds:
                group = SymmetryGroup.build(kind, n)
                records.append(
                    CountRecord(
                        n_cavities=n,
                        n_ex=n_ex,
                        kind=kind,
                        distinguishable=len(basis),
                        orbits=len(orbits(basis, group)),
                        burnside=burnside_count(n, n_ex, kind),
                    )
                )
    return records
