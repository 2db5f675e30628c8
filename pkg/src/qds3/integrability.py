"""Exact-solvability certificates for the three-component exchange model.

Builds the particle-impurity interaction on the 9-dimensional two-site
space, its exact scattering matrix, and the trigonometric two-site R-matrix
family; verifies the Yang-Baxter equation on 27-dimensional embeddings and
implements the coupling reparametrisation that identifies the scattering
matrix with an R-matrix up to a scalar.

Two-site index convention: row = 3*alpha + gamma for particle index alpha
and impurity index gamma (both 0-based), i.e. numpy.kron(particle, impurity).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .su3 import elementary

__all__ = [
    "DomainError",
    "DegenerateError",
    "MismatchError",
    "AcsCouplings",
    "TrigParams",
    "build_interaction",
    "scattering_matrix",
    "scattering_closed_form",
    "build_r_matrix",
    "swap_operator",
    "embed_pair",
    "yang_baxter_residual",
    "reparametrize",
    "MatchResult",
    "match_s_to_r",
]

TWO_PI = 2.0 * np.pi


class DomainError(ValueError):
    """Couplings outside the domain of the reparametrisation formulas."""


class DegenerateError(ValueError):
    """Isotropic point |j_par| = |j_perp|: mu_bar = 0 and f_bar is undefined."""


class MismatchError(RuntimeError):
    """No sign branch brings the scattering matrix onto the R-matrix ray."""


@dataclass(frozen=True)
class AcsCouplings:
    """Parameters of the three-component fermion gas-impurity model.

    j_par and j_perp are the longitudinal and transverse exchange couplings,
    zeta12/zeta13/zeta23 the transverse phases (stored mod 2pi), h1..h3 the
    per-component fields. length_L, v_fermi and reg_a are the system length,
    Fermi velocity and regularisation length (all strictly positive);
    hbar = 1 throughout.
    """

    j_par: float
    j_perp: float
    zeta12: float = 0.0
    zeta13: float = 0.0
    zeta23: float = 0.0
    h1: float = 0.0
    h2: float = 0.0
    h3: float = 0.0
    length_L: float = TWO_PI
    v_fermi: float = 1.0
    reg_a: float = 1.0

    def __post_init__(self):
        for name in ("length_L", "v_fermi", "reg_a"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be strictly positive")
        for name in ("zeta12", "zeta13", "zeta23"):
            object.__setattr__(self, name, float(getattr(self, name)) % TWO_PI)

    @property
    def zetas(self) -> dict[tuple[int, int], float]:
        """Phases keyed by 0-based component pair (alpha, beta), alpha < beta."""
        return {(0, 1): self.zeta12, (0, 2): self.zeta13, (1, 2): self.zeta23}


@dataclass(frozen=True)
class TrigParams:
    """Logarithmic R-matrix parameters: x = exp(i f_bar), q = exp(mu_bar).

    Branch convention f_bar in (0, pi], mu_bar >= 0.
    """

    f_bar: float
    mu_bar: float

    def __post_init__(self):
        if not (np.isfinite(self.f_bar) and np.isfinite(self.mu_bar)):
            raise ValueError("R-matrix parameters must be finite")
        if not 0.0 < self.f_bar <= np.pi:
            raise ValueError("f_bar outside the branch (0, pi]")
        if self.mu_bar < 0.0:
            raise ValueError("mu_bar must be non-negative")


def build_interaction(c: AcsCouplings) -> np.ndarray:
    """Particle-impurity exchange interaction on the two-site space.

    H = j_par sum_a e_aa x e_aa
      + j_perp sum_{a<b} (exp(i zeta_ab) e_ab x e_ba + h.c.)
    """
    h = np.zeros((9, 9), dtype=complex)
    for a in range(3):
        h += c.j_par * np.kron(elementary(a, a), elementary(a, a))
    for (a, b), zeta in c.zetas.items():
        hop = np.exp(1j * zeta) * np.kron(elementary(a, b), elementary(b, a))
        h += c.j_perp * (hop + hop.conj().T)
    return h


def scattering_matrix(h: np.ndarray, hermitian_tol: float = 1e-12) -> np.ndarray:
    """Unitary scattering matrix exp(iH) of a Hermitian two-site generator."""
    h = np.asarray(h, dtype=complex)
    if np.max(np.abs(h - h.conj().T)) > hermitian_tol:
        raise ValueError("generator is not Hermitian")
    evals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(1j * evals)) @ vecs.conj().T


def scattering_closed_form(c: AcsCouplings) -> np.ndarray:
    """Closed form of exp(i H_int): exp(i j_par) on the aligned diagonal,
    cos(j_perp) on the mixed diagonal, i sin(j_perp) exp(+-i zeta) off it."""
    s = np.zeros((9, 9), dtype=complex)
    for a in range(3):
        s += np.exp(1j * c.j_par) * np.kron(elementary(a, a), elementary(a, a))
    for a in range(3):
        for b in range(3):
            if a != b:
                s += np.cos(c.j_perp) * np.kron(elementary(a, a), elementary(b, b))
    for (a, b), zeta in c.zetas.items():
        s += 1j * np.sin(c.j_perp) * (
            np.exp(1j * zeta) * np.kron(elementary(a, b), elementary(b, a))
            + np.exp(-1j * zeta) * np.kron(elementary(b, a), elementary(a, b)))
    return s


def build_r_matrix(f_bar: float | TrigParams, mu_bar: float | None = None) -> np.ndarray:
    """Trigonometric two-site R-matrix.

    R = sinh(i f_bar + mu_bar) sum_a e_aa x e_aa
      + i sin(f_bar) sum_{a != b} e_aa x e_bb
      + sinh(mu_bar) sum_{a<b} (exp(i f_bar) e_ab x e_ba + exp(-i f_bar) e_ba x e_ab)

    Accepts a TrigParams or a raw (f_bar, mu_bar) pair; raw values are not
    restricted to the canonical branch (sign searches need both signs).
    """
    if isinstance(f_bar, TrigParams):
        f, mu = f_bar.f_bar, f_bar.mu_bar
    else:
        if mu_bar is None:
            raise TypeError("mu_bar required when f_bar is a plain float")
        f, mu = float(f_bar), float(mu_bar)
    r = np.zeros((9, 9), dtype=complex)
    for a in range(3):
        r += np.sinh(1j * f + mu) * np.kron(elementary(a, a), elementary(a, a))
    for a in range(3):
        for b in range(3):
            if a != b:
                r += 1j * np.sin(f) * np.kron(elementary(a, a), elementary(b, b))
    for a in range(3):
        for b in range(a + 1, 3):
            r += np.sinh(mu) * (
                np.exp(1j * f) * np.kron(elementary(a, b), elementary(b, a))
                + np.exp(-1j * f) * np.kron(elementary(b, a), elementary(a, b)))
    return r


def swap_operator() -> np.ndarray:
    """9x9 permutation exchanging the two sites."""
    p = np.zeros((9, 9), dtype=complex)
    for a in range(3):
        for b in range(3):
            p += np.kron(elementary(a, b), elementary(b, a))
    return p


def embed_pair(r: np.ndarray, sites: tuple[int, int], n_sites: int = 3) -> np.ndarray:
    """Embed a two-site operator into a chain of 3-dimensional sites."""
    d = 3
    t = np.asarray(r).reshape(d, d, d, d)  # (out_i, out_j, in_i, in_j)
    dim = d ** n_sites
    out = np.zeros((dim, dim), dtype=complex)
    shape = (d,) * n_sites
    i, j = sites
    for col in range(dim):
        ket = list(np.unravel_index(col, shape))
        block = t[:, :, ket[i], ket[j]]
        for oi in range(d):
            for oj in range(d):
                amp = block[oi, oj]
                if amp == 0.0:
                    continue
                ket[i], ket[j] = oi, oj
                out[np.ravel_multi_index(tuple(ket), shape), col] += amp
    return out


def yang_baxter_residual(f1: float, f2: float, mu: float) -> float:
    """Relative Yang-Baxter defect of the R-matrix family at fixed mu_bar.

    Builds R12(f1), R13(f1 + f2), R23(f2) on three sites (the spectral
    parameter composes additively in f_bar) and returns
    ||R12 R13 R23 - R23 R13 R12|| / ||R12 R13 R23||.
    """
    r12 = embed_pair(build_r_matrix(f1, mu), (0, 1))
    r13 = embed_pair(build_r_matrix(f1 + f2, mu), (0, 2))
    r23 = embed_pair(build_r_matrix(f2, mu), (1, 2))
    lhs = r12 @ r13 @ r23
    rhs = r23 @ r13 @ r12
    scale = np.linalg.norm(lhs)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(lhs - rhs) / scale)


def reparametrize(j_par: float, j_perp: float) -> TrigParams:
    """Map exchange couplings to R-matrix parameters.

    cosh(mu_bar) = cos(j_par)/cos(j_perp)
    cot^2(f_bar) = sin^2(j_par) / (sin(j_perp + j_par) sin(j_perp - j_par))

    with f_bar on the branch (0, pi/2]. Raises DegenerateError at the
    isotropic point j_par = +-j_perp and DomainError when either expression
    leaves its admissible range (sufficient domain: 0 <= j_par < j_perp < pi/2).
    """
    sp, sm = np.sin(j_perp + j_par), np.sin(j_perp - j_par)
    if sm == 0.0 or sp == 0.0:
        raise DegenerateError(
            f"isotropic couplings j_par={j_par}, j_perp={j_perp}: f_bar undefined")
    cos_ratio = np.cos(j_par) / np.cos(j_perp)
    if cos_ratio < 1.0:
        raise DomainError(f"cos(j_par)/cos(j_perp) = {cos_ratio} < 1: no real mu_bar")
    denom = sp * sm
    if denom < 0.0:
        raise DomainError(
            f"sin(j_perp + j_par) sin(j_perp - j_par) = {denom} < 0: no real f_bar")
    mu_bar = float(np.arccosh(cos_ratio))
    cot2 = np.sin(j_par) ** 2 / denom
    f_bar = float(np.arctan2(1.0, np.sqrt(cot2)))  # branch (0, pi/2]
    return TrigParams(f_bar=f_bar, mu_bar=mu_bar)


@dataclass(frozen=True)
class MatchResult:
    """Outcome of the scattering-matrix-to-R-matrix identification."""

    scale: complex
    residual: float
    branch: tuple[int, int]  # signs applied to (f_bar, mu_bar)
    params: TrigParams


def match_s_to_r(c: AcsCouplings, tol: float = 1e-6) -> MatchResult:
    """Certify that the scattering matrix lies on the R-matrix ray.

    Requires equal transverse phases; the common phase is set to the f_bar
    obtained from :func:`reparametrize` (the solvability condition ties the
    phase to the couplings). Searches the four sign branches (+-f_bar,
    +-mu_bar) for the least-squares scalar minimising ||S - scale*R|| and
    returns the best branch with its relative residual ||S - scale*R||/||R||.
    Raises MismatchError when the best residual exceeds ``tol``.
    """
    if not (abs(c.zeta12 - c.zeta13) < 1e-12 and abs(c.zeta12 - c.zeta23) < 1e-12):
        raise ValueError(
            "solvability requires equal phases zeta12 = zeta13 = zeta23; got "
            f"({c.zeta12}, {c.zeta13}, {c.zeta23})")
    params = reparametrize(c.j_par, c.j_perp)
    tuned = AcsCouplings(
        j_par=c.j_par, j_perp=c.j_perp,
        zeta12=params.f_bar, zeta13=params.f_bar, zeta23=params.f_bar,
        h1=c.h1, h2=c.h2, h3=c.h3,
        length_L=c.length_L, v_fermi=c.v_fermi, reg_a=c.reg_a)
    s = scattering_matrix(build_interaction(tuned))
    best = None
    for sf in (1, -1):
        for sm in (1, -1):
            r = build_r_matrix(sf * params.f_bar, sm * params.mu_bar)
            scale = np.vdot(r, s) / np.vdot(r, r)
            residual = float(np.linalg.norm(s - scale * r) / np.linalg.norm(r))
            if best is None or residual < best.residual:
                best = MatchResult(scale=complex(scale), residual=residual,
                                   branch=(sf, sm), params=params)
    if best.residual > tol:
        raise MismatchError(
            f"best branch {best.branch} residual {best.residual:.3e} exceeds {tol:.1e}")
    return best
