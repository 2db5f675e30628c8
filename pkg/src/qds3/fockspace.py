"""Truncated chiral-fermion Fock spaces on a finite momentum window.

Basis states are occupation bitstrings over momentum slots; slot order is
momentum index ascending, then flavor, with the usual string-sign convention
for fermionic operators. Operators assembled from fermion bilinears act
directly on sparse ``{bitstring: amplitude}`` dictionaries, so identity
checks never require enumerating the full basis; explicit scipy.sparse
matrices are available for windows small enough to enumerate.

Momentum of slot index n is p = 2*pi*n/length_L. The reference (Fermi sea)
state fills every slot with n <= 0 and leaves n > 0 empty; normal ordering
subtracts the sea expectation value.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.sparse as sparse

__all__ = [
    "MomentumWindow",
    "FermionFockSpace",
    "build_space",
    "Bilinear",
    "normal_ordered_bilinear",
    "number_operator",
    "boson_mode",
    "ValiditySector",
    "state_norm",
    "state_inner",
    "state_sub",
    "state_add_scaled",
]

_FULL_BASIS_MAX_BITS = 22  # 4M states; enumeration above this is a usage error


@dataclass(frozen=True)
class MomentumWindow:
    """Contiguous momentum slots n_min..n_max with n_min < 0 < n_max."""

    n_min: int
    n_max: int
    length_L: float = 2.0 * np.pi
    cap: int = 24

    def __post_init__(self):
        if not (self.n_min < 0 < self.n_max):
            raise ValueError("window must straddle the Fermi point: n_min < 0 < n_max")
        if self.length_L <= 0.0:
            raise ValueError("length_L must be strictly positive")
        if self.n_slots > self.cap:
            raise ValueError(
                f"window has {self.n_slots} slots, exceeding the cap {self.cap}")

    @property
    def n_slots(self) -> int:
        return self.n_max - self.n_min + 1

    def momentum(self, n: int) -> float:
        return 2.0 * np.pi * n / self.length_L


class FermionFockSpace:
    """Occupation-bitstring Fock space for ``flavors`` fermion species.

    Slot index of momentum n, flavor f is (n - n_min) * flavors + f; bit s
    of a basis integer is the occupation of slot s. Creation/annihilation
    pick up the parity of occupied slots below the target slot.
    """

    def __init__(self, window: MomentumWindow, flavors: int = 1):
        if flavors not in (1, 3):
            raise ValueError("flavors must be 1 or 3")
        if window.n_slots * flavors > window.cap:
            raise ValueError(
                f"{window.n_slots} slots x {flavors} flavors exceeds cap {window.cap}")
        self.window = window
        self.flavors = flavors
        self.n_bits = window.n_slots * flavors
        sea = 0
        for n in range(window.n_min, 1):
            for f in range(flavors):
                sea |= 1 << self.slot(n, f)
        self.fermi_sea = sea
        self._sea_popcount = bin(sea).count("1")

    # -- slot bookkeeping -------------------------------------------------

    def slot(self, n: int, flavor: int = 0) -> int:
        if not (self.window.n_min <= n <= self.window.n_max):
            raise ValueError(f"momentum index {n} outside window")
        if not 0 <= flavor < self.flavors:
            raise ValueError(f"flavor {flavor} out of range")
        return (n - self.window.n_min) * self.flavors + flavor

    def slot_label(self, s: int) -> tuple[int, int]:
        """(momentum index, flavor) of slot s."""
        return self.window.n_min + s // self.flavors, s % self.flavors

    def sea_occupied(self, s: int) -> bool:
        return bool((self.fermi_sea >> s) & 1)

    def charge(self, state: int) -> int:
        """Fermion number relative to the sea (all flavors)."""
        return bin(state).count("1") - self._sea_popcount

    def flavor_charge(self, state: int, flavor: int) -> int:
        total = 0
        for n in range(self.window.n_min, self.window.n_max + 1):
            s = self.slot(n, flavor)
            total += ((state >> s) & 1) - ((self.fermi_sea >> s) & 1)
        return total

    @property
    def dim(self) -> int:
        return 1 << self.n_bits

    def basis(self) -> np.ndarray:
        """All basis bitstrings (guarded; only sensible for small windows)."""
        if self.n_bits > _FULL_BASIS_MAX_BITS:
            raise ValueError(
                f"refusing to enumerate 2^{self.n_bits} basis states; "
                "use dictionary-state operations instead")
        return np.arange(self.dim, dtype=np.int64)

    def occupied_sea_momenta(self) -> range:
        return range(self.window.n_min, 1)


def build_space(window: MomentumWindow, flavors: int = 1) -> FermionFockSpace:
    """Construct the Fock space; see :class:`FermionFockSpace`."""
    return FermionFockSpace(window, flavors)


def _parity_below(bits: int, s: int) -> int:
    return bin(bits & ((1 << s) - 1)).count("1") & 1


class Bilinear:
    """Operator const + sum_t coeff_t cdag_{i_t} c_{j_t} on a Fock space.

    Terms are (i, j, coeff) slot-index triples. Application to a state
    dictionary is exact (fermionic signs included); matrices are built on
    demand for spaces small enough to enumerate.
    """

    def __init__(self, space: FermionFockSpace, terms, const: complex = 0.0):
        self.space = space
        self.terms = [(int(i), int(j), complex(c)) for (i, j, c) in terms]
        self.const = complex(const)

    def dagger(self) -> "Bilinear":
        return Bilinear(self.space,
                        [(j, i, c.conjugate()) for (i, j, c) in self.terms],
                        self.const.conjugate())

    def apply(self, psi: dict[int, complex]) -> dict[int, complex]:
        out: dict[int, complex] = {}
        const = self.const
        for state, amp in psi.items():
            if const != 0.0:
                out[state] = out.get(state, 0.0) + const * amp
            for (i, j, coeff) in self.terms:
                if not (state >> j) & 1:
                    continue
                sign = -1.0 if _parity_below(state, j) else 1.0
                mid = state & ~(1 << j)
                if (mid >> i) & 1:
                    continue
                if _parity_below(mid, i):
                    sign = -sign
                new = mid | (1 << i)
                out[new] = out.get(new, 0.0) + sign * coeff * amp
        return {k: v for k, v in out.items() if v != 0.0}

    def to_sparse(self) -> sparse.csr_matrix:
        """Matrix over the full enumerated basis (small windows only)."""
        basis = self.space.basis()
        rows, cols, vals = [], [], []
        for col, state in enumerate(basis):
            image = self.apply({int(state): 1.0})
            for new, amp in image.items():
                rows.append(new)
                cols.append(col)
                vals.append(amp)
        return sparse.csr_matrix((vals, (rows, cols)),
                                 shape=(self.space.dim, self.space.dim))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        """Check self-adjointness term-by-term (no matrix needed)."""
        acc: dict[tuple[int, int], complex] = {}
        for (i, j, c) in self.terms:
            acc[(i, j)] = acc.get((i, j), 0.0) + c
        for (i, j), c in acc.items():
            if abs(c - acc.get((j, i), 0.0).conjugate()) > tol:
                return False
        return abs(self.const.imag) <= tol


def normal_ordered_bilinear(space: FermionFockSpace, pairs) -> Bilinear:
    """sum :cdag_i c_j: with the Fermi-sea expectation subtracted."""
    const = 0.0
    for (i, j, coeff) in pairs:
        if i == j and space.sea_occupied(i):
            const -= coeff
    return Bilinear(space, pairs, const)


def number_operator(space: FermionFockSpace, flavor: int | None = None) -> Bilinear:
    """Normal-ordered fermion number (one flavor, or all when None)."""
    flavors = range(space.flavors) if flavor is None else (flavor,)
    pairs = []
    for n in range(space.window.n_min, space.window.n_max + 1):
        for f in flavors:
            s = space.slot(n, f)
            pairs.append((s, s, 1.0))
    return normal_ordered_bilinear(space, pairs)


def boson_mode(space: FermionFockSpace, k_index: int,
               flavor: int = 0) -> tuple[Bilinear, Bilinear]:
    """Boson lowering/raising bilinears (b_k, bdag_k) for mode k = 2*pi*k_index/L.

    bdag_k = i sqrt(2*pi/(L k)) sum_p :cdag_{p+k} c_p:  truncated to in-window
    pairs; with the slot spacing this reduces to (i/sqrt(k_index)) sum over
    momentum hops of k_index slots. b_k is the conjugate. Normal ordering is
    moot here (no diagonal terms), so the sea is annihilated by every b_k.
    """
    max_k = space.window.n_slots - 1
    if not 1 <= k_index <= max_k:
        raise ValueError(f"k_index must lie in 1..{max_k}, got {k_index}")
    amp = 1j / np.sqrt(k_index)
    raise_terms = []
    for n in range(space.window.n_min, space.window.n_max - k_index + 1):
        raise_terms.append((space.slot(n + k_index, flavor), space.slot(n, flavor), amp))
    b_dag = Bilinear(space, raise_terms)
    return b_dag.dagger(), b_dag


@dataclass(frozen=True)
class ValiditySector:
    """Basis states whose outermost window slots are frozen at sea values.

    A state belongs to the sector when, for every flavor, the lowest
    ``margin`` momentum slots are occupied and the highest ``margin`` slots
    are empty. Truncated bosonisation identities are exact on such states
    for mode indices up to the margin. Enumeration (single flavor) walks
    charge-N seas dressed with up to ``max_excitations`` particle-hole
    pairs, optionally confined to ``excursion`` slots around the Fermi point.
    """

    margin: int
    max_excitations: int = 2
    excursion: int | None = None

    def contains(self, space: FermionFockSpace, state: int) -> bool:
        w = space.window
        for f in range(space.flavors):
            for d in range(self.margin):
                if not (state >> space.slot(w.n_min + d, f)) & 1:
                    return False
                if (state >> space.slot(w.n_max - d, f)) & 1:
                    return False
        return True

    def charge_sea(self, space: FermionFockSpace, charge: int = 0) -> int:
        """Lowest state of a charge sector: slots with n <= charge filled."""
        if space.flavors != 1:
            if charge != 0:
                raise ValueError("charged-sector enumeration is single-flavor")
            return space.fermi_sea
        sea = 0
        for n in range(space.window.n_min, space.window.n_max + 1):
            if n <= charge:
                sea |= 1 << space.slot(n)
        return sea

    def states(self, space: FermionFockSpace, charge: int = 0) -> list[int]:
        """Sector basis states of the given charge dressed with excitations.

        Holes are drawn from the occupied, particles from the empty movable
        slots; ``excursion``, when set, confines both to that many momentum
        slots around the charge-N Fermi edge.
        """
        sea = self.charge_sea(space, charge)
        w = space.window
        occ, emp = [], []
        for s in range(space.n_bits):
            n, _ = space.slot_label(s)
            if not (w.n_min + self.margin <= n <= w.n_max - self.margin):
                continue
            if (sea >> s) & 1:
                if self.excursion is None or charge - n < self.excursion:
                    occ.append(s)
            elif self.excursion is None or n - charge <= self.excursion:
                emp.append(s)
        out = []
        for n_exc in range(self.max_excitations + 1):
            for holes in combinations(occ, n_exc):
                for parts in combinations(emp, n_exc):
                    st = sea
                    for h in holes:
                        st &= ~(1 << h)
                    for p in parts:
                        st |= 1 << p
                    out.append(st)
        return out


# -- state-dictionary helpers ---------------------------------------------

def state_norm(psi: dict[int, complex]) -> float:
    return float(np.sqrt(sum(abs(v) ** 2 for v in psi.values())))


def state_inner(phi: dict[int, complex], psi: dict[int, complex]) -> complex:
    if len(phi) <= len(psi):
        return complex(sum(v.conjugate() * psi.get(k, 0.0) for k, v in phi.items()))
    return complex(sum(complex(phi.get(k, 0.0)).conjugate() * v for k, v in psi.items()))


def state_sub(a: dict[int, complex], b: dict[int, complex]) -> dict[int, complex]:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0.0) - v
    return out


def state_add_scaled(a: dict[int, complex], scale: complex,
                     b: dict[int, complex]) -> dict[int, complex]:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0.0) + scale * v
    return out
