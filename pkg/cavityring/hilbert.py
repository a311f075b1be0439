"""Truncated product Hilbert space of n cavities, one two-level atom and one mode each."""

import itertools
import logging
from enum import IntEnum
from typing import Iterable, Iterator

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from cavityring.exceptions import InvalidInputError
from cavityring.system_params import SystemParams

logger = logging.getLogger(__name__)


class AtomLevel(IntEnum):
    GROUND = 0
    EXCITED = 1

    @property
    def symbol(self) -> str:
        return "e" if self is AtomLevel.EXCITED else "g"


class ProductState(BaseModel):
    """One distinguishable basis ket: per-cavity atomic level and photon number."""

    model_config = ConfigDict(frozen=True)

    atoms: tuple[AtomLevel, ...] = Field(..., alias="atoms")  # Required field
    photons: tuple[int, ...] = Field(..., alias="photons")  # Required field

    @model_validator(mode="after")
    def _check_shape(self):
        if len(self.atoms) != len(self.photons):
            raise ValueError(
                f"atoms ({len(self.atoms)}) and photons ({len(self.photons)}) "
                "must cover the same cavities."
            )
        if any(n < 0 for n in self.photons):
            raise ValueError(f"Photon numbers must be non-negative: {self.photons}")
        return self

    @classmethod
    def from_kets(cls, *kets: str) -> "ProductState":
        """Builds a state from per-cavity labels such as "e,0", "g,2"."""
        atoms, photons = [], []
        for ket in kets:
            level, _, count = ket.partition(",")
            level = level.strip().lower()
            if level not in ("g", "e"):
                raise InvalidInputError(f"Unknown atomic level in {ket!r}.")
            atoms.append(AtomLevel.EXCITED if level == "e" else AtomLevel.GROUND)
            photons.append(int(count))
        return cls(atoms=tuple(atoms), photons=tuple(photons))

    @property
    def n_cavities(self) -> int:
        return len(self.atoms)

    @property
    def sort_key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Canonical order: atoms before photons, cavity 1 most significant."""
        return tuple(int(a) for a in self.atoms), self.photons

    def replace(self, cavity: int, atom: AtomLevel, photons: int) -> "ProductState":
        """Returns a copy with one cavity's content replaced."""
        atoms = list(self.atoms)
        counts = list(self.photons)
        atoms[cavity] = atom
        counts[cavity] = photons
        return ProductState(atoms=tuple(atoms), photons=tuple(counts))

    def __lt__(self, other: "ProductState") -> bool:
        return self.sort_key < other.sort_key

    def __str__(self) -> str:
        return "".join(f"|{a.symbol},{n}>" for a, n in zip(self.atoms, self.photons))


def excitation_number(s: ProductState) -> int:
    """Number of excited atoms plus the total photon count."""
    return sum(int(a) for a in s.atoms) + sum(s.photons)


def local_states(cutoff: int, k: int) -> list[tuple[AtomLevel, int]]:
    """Single-cavity states carrying exactly k excitations within the cutoff."""
    states = []
    if k <= cutoff:
        states.append((AtomLevel.GROUND, k))
    if 1 <= k <= cutoff + 1:
        states.append((AtomLevel.EXCITED, k - 1))
    return states


def local_generating_polynomial(cutoff: int) -> np.ndarray:
    """Coefficient k counts the single-cavity states holding k excitations."""
    return np.array(
        [len(local_states(cutoff, k)) for k in range(cutoff + 2)], dtype=np.int64
    )


def enumerate_basis(params: SystemParams, n_ex: int) -> list[ProductState]:
    """Returns every product state with exactly n_ex excitations, canonically ordered."""
    if n_ex < 0:
        raise InvalidInputError(f"Excitation number must be non-negative, got {n_ex}.")
    n = params.n_cavities
    cutoff = params.cutoff_for(n_ex)
    if n_ex > n * (1 + cutoff):
        raise InvalidInputError(
            f"{n_ex} excitations cannot fit in {n} cavities with photon cutoff {cutoff}."
        )
    if cutoff < n_ex:
        logger.warning(
            "Fock cutoff %d is below the excitation number %d; the manifold is "
            "truncated and collective-state counts will not match the untruncated ones.",
            cutoff,
            n_ex,
        )
    states = []
    for split in itertools.product(range(n_ex + 1), repeat=n):
        if sum(split) != n_ex:
            continue
        for local in itertools.product(*(local_states(cutoff, k) for k in split)):
            states.append(
                ProductState(
                    atoms=tuple(atom for atom, _ in local),
                    photons=tuple(count for _, count in local),
                )
            )
    return sorted(states, key=lambda s: s.sort_key)


def enumerate_full_basis(params: SystemParams, cutoff: int | None = None) -> list[ProductState]:
    """Returns the whole truncated product space (all manifolds), canonically ordered."""
    if cutoff is None:
        if params.fock_cutoff is None:
            raise InvalidInputError("The full basis needs an explicit fock_cutoff.")
        cutoff = params.fock_cutoff
    n = params.n_cavities
    states = [
        ProductState(atoms=tuple(AtomLevel(a) for a in atoms), photons=tuple(photons))
        for atoms in itertools.product((0, 1), repeat=n)
        for photons in itertools.product(range(cutoff + 1), repeat=n)
    ]
    return sorted(states, key=lambda s: s.sort_key)


def manifold_dimension(params: SystemParams, n_ex: int) -> int:
    """Manifold size from the per-cavity generating polynomial raised to the n-th power."""
    local = local_generating_polynomial(params.cutoff_for(n_ex))
    total = np.array([1], dtype=np.int64)
    for _ in range(params.n_cavities):
        total = np.convolve(total, local)
    return int(total[n_ex]) if n_ex < len(total) else 0


class BasisIndex:
    """Canonical bijection between an ordered list of states and 0..D-1."""

    def __init__(self, states: Iterable[ProductState]):
        self._states: tuple[ProductState, ...] = tuple(states)
        self._lookup: dict[ProductState, int] = {}
        for i, state in enumerate(self._states):
            if state in self._lookup:
                raise InvalidInputError(f"Duplicate basis state {state}.")
            self._lookup[state] = i

    @property
    def states(self) -> tuple[ProductState, ...]:
        return self._states

    def index(self, state: ProductState) -> int:
        try:
            return self._lookup[state]
        except KeyError:
            raise InvalidInputError(f"State {state} is not part of this basis.") from None

    def state(self, i: int) -> ProductState:
        return self._states[i]

    def __contains__(self, state: ProductState) -> bool:
        return state in self._lookup

    def __len__(self) -> int:
        return len(self._states)

    def __iter__(self) -> Iterator[ProductState]:
        return iter(self._states)
