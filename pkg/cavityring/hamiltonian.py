"""Free and interaction Hamiltonians as dense Hermitian matrices (ħ = 1)."""

import itertools
import math
from enum import Enum
from typing import Callable, Iterable, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from cavityring.exceptions import InvalidInputError
from cavityring.hilbert import AtomLevel, BasisIndex, ProductState, excitation_number
from cavityring.symmetry import CollectiveState
from cavityring.system_params import SystemParams

BasisLabel = Union[ProductState, CollectiveState]
Action = Callable[[ProductState], list[tuple[ProductState, float]]]


class LocalOperator(str, Enum):
    RAISE = "R+"
    LOWER = "R-"
    INVERSION = "Rz"
    ANNIHILATE = "a"
    CREATE = "a+"


def apply_local(kind: LocalOperator, cavity: int, s: ProductState) -> list[tuple[ProductState, float]]:
    """Action of one single-cavity operator; an empty list means the image vanishes."""
    atom, n = s.atoms[cavity], s.photons[cavity]
    if kind is LocalOperator.RAISE:
        return [(s.replace(cavity, AtomLevel.EXCITED, n), 1.0)] if atom is AtomLevel.GROUND else []
    if kind is LocalOperator.LOWER:
        return [(s.replace(cavity, AtomLevel.GROUND, n), 1.0)] if atom is AtomLevel.EXCITED else []
    if kind is LocalOperator.INVERSION:
        return [(s, 0.5 if atom is AtomLevel.EXCITED else -0.5)]
    if kind is LocalOperator.ANNIHILATE:
        return [(s.replace(cavity, atom, n - 1), math.sqrt(n))] if n > 0 else []
    return [(s.replace(cavity, atom, n + 1), math.sqrt(n + 1))]


class RingTopology(BaseModel):
    """Undirected photon-hopping edges between cavities (0-based)."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., alias="n", ge=2)
    edges: tuple[tuple[int, int], ...] = Field(..., alias="edges")

    @model_validator(mode="after")
    def _check_edges(self):
        seen = set()
        for i, j in self.edges:
            if not (0 <= i < self.n and 0 <= j < self.n) or i == j:
                raise ValueError(f"Edge ({i}, {j}) is not a pair of distinct cavities.")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"Edge {key} listed twice.")
            seen.add(key)
        return self

    @classmethod
    def ring(cls, n: int) -> "RingTopology":
        """Nearest neighbours on the polygon; a single edge for two cavities."""
        if n == 2:
            return cls(n=2, edges=((0, 1),))
        return cls(n=n, edges=tuple(sorted((min(i, (i + 1) % n), max(i, (i + 1) % n)) for i in range(n))))

    @classmethod
    def all_pairs(cls, n: int) -> "RingTopology":
        return cls(n=n, edges=tuple(itertools.combinations(range(n), 2)))

    @classmethod
    def named(cls, name: str, n: int) -> "RingTopology":
        if name == "ring":
            return cls.ring(n)
        if name == "all-pairs":
            return cls.all_pairs(n)
        raise InvalidInputError(f"Unknown topology {name!r}; use 'ring' or 'all-pairs'.")


class HamiltonianMatrix(BaseModel):
    """Dense complex matrix with the basis its rows and columns refer to."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    entries: np.ndarray = Field(..., alias="entries")
    basis: tuple[BasisLabel, ...] = Field(..., alias="basis")

    @model_validator(mode="after")
    def _check_shape(self):
        if self.entries.shape != (len(self.basis), len(self.basis)):
            raise ValueError(
                f"Matrix shape {self.entries.shape} does not match {len(self.basis)} basis labels."
            )
        return self

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def max_asymmetry(self) -> float:
        """Largest entry of |H - H†|."""
        if self.dim == 0:
            return 0.0
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    def __add__(self, other: "HamiltonianMatrix") -> "HamiltonianMatrix":
        if self.basis != other.basis:
            raise InvalidInputError("Cannot add matrices over different bases.")
        return HamiltonianMatrix(entries=self.entries + other.entries, basis=self.basis)


def _as_index(basis: Iterable[ProductState]) -> BasisIndex:
    return basis if isinstance(basis, BasisIndex) else BasisIndex(basis)


def operator_matrix(basis: BasisIndex, actions: Sequence[tuple[float, Action]]) -> np.ndarray:
    """Sums weighted actions into a matrix; images outside the basis are dropped."""
    matrix = np.zeros((len(basis), len(basis)), dtype=complex)
    for column, state in enumerate(basis):
        for weight, action in actions:
            for image, amplitude in action(state):
                if image in basis:
                    matrix[basis.index(image), column] += weight * amplitude
    return matrix


def _product(*steps: tuple[LocalOperator, int]) -> Action:
    """Operator product; the last step acts first."""

    def action(state: ProductState) -> list[tuple[ProductState, float]]:
        terms = [(state, 1.0)]
        for kind, cavity in reversed(steps):
            terms = [
                (image, amp * coeff)
                for current, amp in terms
                for image, coeff in apply_local(kind, cavity, current)
            ]
        return terms

    return action


def local_operator(kind: LocalOperator | str, cavity: int, basis: Iterable[ProductState]) -> np.ndarray:
    """Matrix of a single-cavity operator; a† at the cutoff is truncated."""
    index = _as_index(basis)
    return operator_matrix(index, [(1.0, _product((LocalOperator(kind), cavity)))])


def atom_field_term(params: SystemParams, basis: Iterable[ProductState]) -> HamiltonianMatrix:
    """g Σ_i (R_i⁺ a_i + R_i⁻ a_i†)."""
    index = _as_index(basis)
    actions = []
    for i in range(params.n_cavities):
        actions.append((params.g, _product((LocalOperator.RAISE, i), (LocalOperator.ANNIHILATE, i))))
        actions.append((params.g, _product((LocalOperator.LOWER, i), (LocalOperator.CREATE, i))))
    return HamiltonianMatrix(entries=operator_matrix(index, actions), basis=index.states)


def hopping_term(
    params: SystemParams,
    topology: RingTopology,
    basis: Iterable[ProductState],
) -> HamiltonianMatrix:
    """χ Σ_edges (a_i† a_j + a_j† a_i), each undirected edge once."""
    if topology.n != params.n_cavities:
        raise InvalidInputError(
            f"Topology covers {topology.n} cavities, system has {params.n_cavities}."
        )
    index = _as_index(basis)
    actions = []
    for i, j in topology.edges:
        actions.append((params.chi, _product((LocalOperator.CREATE, i), (LocalOperator.ANNIHILATE, j))))
        actions.append((params.chi, _product((LocalOperator.CREATE, j), (LocalOperator.ANNIHILATE, i))))
    return HamiltonianMatrix(entries=operator_matrix(index, actions), basis=index.states)


def free_term(params: SystemParams, basis: Iterable[ProductState]) -> HamiltonianMatrix:
    """ω Σ_i (R_zi + a_i† a_i) with R_z = ±1/2, i.e. ω (n_ex - n/2) on the diagonal."""
    index = _as_index(basis)
    offset = params.n_cavities / 2.0
    diagonal = [params.omega * (excitation_number(s) - offset) for s in index]
    return HamiltonianMatrix(entries=np.diag(np.array(diagonal, dtype=complex)), basis=index.states)


def interaction_hamiltonian(
    params: SystemParams,
    basis: Iterable[ProductState],
    topology: RingTopology | None = None,
) -> HamiltonianMatrix:
    """Atom-field coupling plus photon hopping."""
    index = _as_index(basis)
    topology = topology or RingTopology.ring(params.n_cavities)
    return atom_field_term(params, index) + hopping_term(params, topology, index)


def restrict(H: HamiltonianMatrix, collective: Sequence[CollectiveState]) -> HamiltonianMatrix:
    """Matrix of ⟨collective_a| H |collective_b⟩."""
    if not all(isinstance(label, ProductState) for label in H.basis):
        raise InvalidInputError("Only matrices over a product basis can be restricted.")
    index = BasisIndex(H.basis)
    for state in collective:
        missing = [m for m in state.members if m not in index]
        if missing:
            raise InvalidInputError(
                f"Collective state {state} has member {missing[0]} outside the "
                f"{H.dim}-dimensional basis."
            )
    if not collective:
        return HamiltonianMatrix(entries=np.zeros((0, 0), dtype=complex), basis=())
    vectors = np.column_stack([state.vector(index) for state in collective])
    block = vectors.conj().T @ H.entries @ vectors
    block = 0.5 * (block + block.conj().T)
    return HamiltonianMatrix(entries=block, basis=tuple(collective))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a
