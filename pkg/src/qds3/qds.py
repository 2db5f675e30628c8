"""Three-level system coupled to two discretized ohmic oscillator baths.

Builds the system-bath Hamiltonian

    H = eps3*lam3 + eps8*lam8 + Delta*(lam1 + lam4 + cos(zeta)*lam6 + sin(zeta)*lam7)
        + sum_k omega_k (n_k3 + n_k8)
        + sum_k C_k [lam3 (b_k3 + bdag_k3) + lam8 (b_k8 + bdag_k8)]

on the space (3 levels) x (boson modes), maps fermion-gas couplings onto
the dissipative parameters, certifies the ohmic spectral density of the
discretized bath, evolves states with a short-iterate Lanczos propagator,
and verifies the phase-field conjugation and displaced-oscillator steps on
small truncated boson spaces.

Tensor factor order: level first, then the channel-3 modes (ascending
frequency), then the channel-8 modes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.linalg
import scipy.sparse as sparse

from .integrability import AcsCouplings
from .su3 import ChargeSector, detuning_shift, gell_mann_basis, to_orthogonal_coords

__all__ = [
    "QdsParams",
    "BathDiscretization",
    "SystemBathState",
    "Trajectory",
    "KrylovError",
    "map_acs_to_qds",
    "build_bath",
    "assemble_hamiltonian",
    "initial_state",
    "GaussianTestFunction",
    "spectral_density_residual",
    "evolve",
    "conjugation_check",
    "displaced_spectrum_residual",
]

TWO_PI = 2.0 * np.pi

TRAJECTORY_COLUMNS = ("t", "p1", "p2", "p3", "lam3", "lam8",
                      "re_c12", "im_c12", "norm", "energy")


class KrylovError(RuntimeError):
    """Lanczos step could not reach the local error target."""


@dataclass(frozen=True)
class QdsParams:
    """Dissipative-system parameters.

    eps3/eps8 are the detunings, delta the common tunnelling amplitude,
    zeta the residual tunnelling phase (rotating the 2-3 sector), alpha the
    dimensionless ohmic coupling and omega_c the bath cutoff frequency.
    """

    eps3: float
    eps8: float
    delta: float
    zeta: float = 0.0
    alpha: float = 0.0
    omega_c: float = 1.0

    def __post_init__(self):
        if self.alpha < 0.0:
            raise ValueError("ohmic coupling alpha must be non-negative")
        if not self.omega_c > 0.0:
            raise ValueError("cutoff omega_c must be strictly positive")


@dataclass(frozen=True)
class BathDiscretization:
    """Shared mode ladder of the two bath channels.

    Both channels (coupling to lam3 and lam8) carry identical frequency and
    coupling lists; n_max is the per-mode boson truncation. Frequencies must
    be strictly increasing.
    """

    omegas: tuple[float, ...]
    couplings: tuple[float, ...]
    n_max: int = 4

    def __post_init__(self):
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))
        object.__setattr__(self, "couplings", tuple(float(c) for c in self.couplings))
        if len(self.omegas) != len(self.couplings):
            raise ValueError("omegas and couplings must have equal length")
        if any(w <= 0 for w in self.omegas):
            raise ValueError("mode frequencies must be strictly positive")
        if any(b <= a for a, b in zip(self.omegas, self.omegas[1:])):
            raise ValueError("mode frequencies must be strictly increasing")
        if self.n_max < 1:
            raise ValueError("n_max must be at least 1")

    @property
    def n_modes(self) -> int:
        return len(self.omegas)


@dataclass
class SystemBathState:
    """Complex amplitudes over (3 levels) x (n_max+1)^(2*n_modes) boson levels."""

    amplitudes: np.ndarray
    n_modes: int
    n_max: int

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).ravel()
        expected = 3 * (self.n_max + 1) ** (2 * self.n_modes)
        if self.amplitudes.size != expected:
            raise ValueError(
                f"state has {self.amplitudes.size} amplitudes, expected {expected}")
        if abs(np.linalg.norm(self.amplitudes) - 1.0) > 1e-9:
            raise ValueError("state is not normalized")

    def level_amplitudes(self) -> np.ndarray:
        """View as (3, bath_dim)."""
        return self.amplitudes.reshape(3, -1)


@dataclass
class Trajectory:
    """Time series of populations, diagonal observables, 1-2 coherence,
    norm and energy; populations sum to 1 within 1e-9 per row."""

    data: np.ndarray  # shape (n_rows, 10), columns TRAJECTORY_COLUMNS

    columns = TRAJECTORY_COLUMNS

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(self.columns) + "\n")
            for row in self.data:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def map_acs_to_qds(c: AcsCouplings, sector: ChargeSector = ChargeSector()) -> QdsParams:
    """Map fermion-gas couplings and a charge sector onto QDS parameters.

    eps3/eps8 are the diagonal-sector components of the field vector shifted
    by the charge-sector projection; Delta = -j_perp*L/(2*pi*a); zeta =
    zeta23 - zeta13 + zeta12; alpha = (1 - j_par*L/(2*pi*v_F))^2; the cutoff
    is omega_c = v_F/a.
    """
    coords = to_orthogonal_coords(np.diag([c.h1, c.h2, c.h3]).astype(complex))
    d3, d8 = detuning_shift(sector)
    delta = -c.j_perp * c.length_L / (TWO_PI * c.reg_a)
    zeta = (c.zeta23 - c.zeta13 + c.zeta12) % TWO_PI
    alpha = (1.0 - c.j_par * c.length_L / (TWO_PI * c.v_fermi)) ** 2
    return QdsParams(eps3=coords.x3 + d3, eps8=coords.x8 + d8, delta=delta,
                     zeta=zeta, alpha=alpha, omega_c=c.v_fermi / c.reg_a)


def build_bath(n_modes: int, c: AcsCouplings, n_max: int = 4) -> BathDiscretization:
    """Discretize the bath on the natural mode ladder of the finite system.

    omega_n = 2*pi*v_F*n/L for n = 1..n_modes and
    C_n = -v_F * sqrt(2*pi*k_n/L) * exp(-omega_n/(2*omega_c)) * (1 - j_par*L/(2*pi*v_F))
    with k_n = 2*pi*n/L and omega_c = v_F/a, so that
    C_n^2 * L/(2*pi*v_F) = alpha * omega_n * exp(-omega_n/omega_c) per mode.
    """
    if n_modes < 1:
        raise ValueError("n_modes must be at least 1")
    omega_c = c.v_fermi / c.reg_a
    prefactor = 1.0 - c.j_par * c.length_L / (TWO_PI * c.v_fermi)
    omegas, couplings = [], []
    for n in range(1, n_modes + 1):
        k = TWO_PI * n / c.length_L
        omega = c.v_fermi * k
        omegas.append(omega)
        couplings.append(-c.v_fermi * np.sqrt(TWO_PI * k / c.length_L)
                         * np.exp(-omega / (2 * omega_c)) * prefactor)
    return BathDiscretization(tuple(omegas), tuple(couplings), n_max=n_max)


def _impurity_matrix(q: QdsParams) -> np.ndarray:
    lam = gell_mann_basis()
    return (q.eps3 * lam[3] + q.eps8 * lam[8]
            + q.delta * (lam[1] + lam[4]
                         + np.cos(q.zeta) * lam[6] + np.sin(q.zeta) * lam[7]))


def _kron_chain(factors) -> sparse.csr_matrix:
    out = factors[0]
    for f in factors[1:]:
        out = sparse.kron(out, f, format="csr")
    return sparse.csr_matrix(out)


def assemble_hamiltonian(q: QdsParams, bath: BathDiscretization,
                         dim_cap: int = 2_000_000) -> sparse.csr_matrix:
    """Sparse Hamiltonian on (3 levels) x (two bath channels).

    The two channels share the mode list; channel 3 couples through lam3,
    channel 8 through lam8, both with the same per-mode coupling.
    """
    nb = bath.n_max + 1
    n_factors = 2 * bath.n_modes
    dim = 3 * nb ** n_factors
    if dim > dim_cap:
        raise ValueError(f"total dimension {dim} exceeds cap {dim_cap}")
    lam = gell_mann_basis()
    eye_level = sparse.identity(3, format="csr")
    eye_mode = sparse.identity(nb, format="csr")
    num_op = sparse.diags(np.arange(nb, dtype=float), format="csr")
    ladder = np.sqrt(np.arange(1, nb, dtype=float))
    x_op = sparse.diags([ladder, ladder], [1, -1], format="csr")  # b + bdag

    def embedded(level_op, mode_ops: dict[int, sparse.csr_matrix]):
        factors = [level_op if level_op is not None else eye_level]
        for slot in range(n_factors):
            factors.append(mode_ops.get(slot, eye_mode))
        return _kron_chain(factors)

    h = embedded(sparse.csr_matrix(_impurity_matrix(q)), {})
    lam3 = sparse.csr_matrix(lam[3])
    lam8 = sparse.csr_matrix(lam[8])
    for mode, (omega, coupling) in enumerate(zip(bath.omegas, bath.couplings)):
        slot3, slot8 = mode, bath.n_modes + mode
        h = h + embedded(None, {slot3: omega * num_op})
        h = h + embedded(None, {slot8: omega * num_op})
        if coupling != 0.0:
            h = h + embedded(lam3, {slot3: coupling * x_op})
            h = h + embedded(lam8, {slot8: coupling * x_op})
    return sparse.csr_matrix(h)


def initial_state(bath: BathDiscretization, level: int) -> SystemBathState:
    """Product state: the given level (1-based) times the bath vacuum."""
    if level not in (1, 2, 3):
        raise ValueError("level must be 1, 2 or 3")
    bath_dim = (bath.n_max + 1) ** (2 * bath.n_modes)
    amps = np.zeros(3 * bath_dim, dtype=complex)
    amps[(level - 1) * bath_dim] = 1.0
    return SystemBathState(amps, n_modes=bath.n_modes, n_max=bath.n_max)


@dataclass(frozen=True)
class GaussianTestFunction:
    """Gaussian probe exp(-(omega - center)^2 / (2 width^2)) for the
    spectral-density comparison; support must sit well below the cutoff."""

    center: float
    width: float

    def __call__(self, omega):
        return np.exp(-((omega - self.center) ** 2) / (2.0 * self.width ** 2))


def spectral_density_residual(bath: BathDiscretization, q: QdsParams,
                              test_fn: GaussianTestFunction) -> float:
    """Relative defect of sum_k C_k^2 f(omega_k) against the ohmic integral.

    The reference integral of alpha * omega * exp(-omega/omega_c) * f(omega)
    is evaluated with adaptive quadrature; the discrete side converges to it
    like the mode spacing (one over the mode count at fixed span).
    """
    if test_fn.center > 0.5 * q.omega_c:
        raise ValueError("test function must be supported at omega << omega_c")
    discrete = sum(ck * ck * test_fn(w) for w, ck in zip(bath.omegas, bath.couplings))
    upper = test_fn.center + 12.0 * test_fn.width
    integral, _ = scipy.integrate.quad(
        lambda w: q.alpha * w * np.exp(-w / q.omega_c) * test_fn(w),
        0.0, upper, limit=200)
    if integral == 0.0:
        return float(abs(discrete))
    return float(abs(discrete - integral) / abs(integral))


# -- time evolution ---------------------------------------------------------

def _lanczos_expm_step(h: sparse.csr_matrix, psi: np.ndarray, dt: float,
                       tol: float, m_max: int) -> np.ndarray:
    """One step of exp(-i*dt*H) psi in a Lanczos subspace grown until the
    local error estimate drops below tol."""
    if m_max < 1:
        raise ValueError("subspace cap must be at least 1")
    beta0 = np.linalg.norm(psi)
    v = psi / beta0
    basis = [v]
    alphas: list[float] = []
    betas: list[float] = []
    w = h @ v
    for j in range(m_max):
        alpha = float(np.vdot(basis[j], w).real)
        alphas.append(alpha)
        w = w - alpha * basis[j]
        if j > 0:
            w = w - betas[-1] * basis[j - 1]
        # full reorthogonalization; subspaces here are small
        for u in basis:
            w = w - np.vdot(u, w) * u
        beta = float(np.linalg.norm(w))
        m = j + 1
        t_mat = np.diag(alphas)
        if betas:
            off = np.array(betas)
            t_mat = t_mat + np.diag(off, 1) + np.diag(off, -1)
        small = scipy.linalg.expm(-1j * dt * t_mat)
        err = beta * abs(small[m - 1, 0])
        if beta < 1e-14 or err < tol:
            vm = np.column_stack(basis)
            return beta0 * (vm @ small[:, 0])
        if j < m_max - 1:
            basis.append(w / beta)
            betas.append(beta)
            w = h @ basis[-1]
    raise KrylovError(
        f"local error {err:.3e} above target {tol:.1e} at subspace size {m_max}; "
        "reduce dt or raise the subspace cap")


def _observables(psi: np.ndarray, h: sparse.csr_matrix, t: float) -> list[float]:
    levels = psi.reshape(3, -1)
    pops = np.sum(np.abs(levels) ** 2, axis=1)
    c12 = complex(np.sum(levels[0] * levels[1].conj()))
    norm = float(np.linalg.norm(psi))
    energy = float(np.vdot(psi, h @ psi).real)
    return [t, float(pops[0]), float(pops[1]), float(pops[2]),
            float(pops[0] - pops[1]),
            float((pops[0] + pops[1] - 2.0 * pops[2]) / np.sqrt(3.0)),
            c12.real, c12.imag, norm, energy]


def evolve(h: sparse.csr_matrix, psi0: SystemBathState, t_final: float,
           dt: float, tol: float = 1e-10, m_max: int = 40) -> Trajectory:
    """Unitary evolution by repeated short Lanczos steps.

    Records one trajectory row at t = 0 and after every step. Norm drift is
    bounded by orthonormality roundoff (the subspace propagator is exactly
    unitary) and energy drift by the accumulated local error.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if abs(np.linalg.norm(psi0.amplitudes) - 1.0) > 1e-9:
        raise ValueError("initial state is not normalized")
    psi = psi0.amplitudes.copy()
    rows = [_observables(psi, h, 0.0)]
    n_steps = int(round(t_final / dt))
    for step in range(1, n_steps + 1):
        psi = _lanczos_expm_step(h, psi, dt, tol, m_max)
        rows.append(_observables(psi, h, step * dt))
    return Trajectory(np.array(rows))


# -- unitary-conjugation verification ---------------------------------------

#: Diagonal generators of the three channels (three-body combinations of the
#: level projectors); the channel-0 member is proportional to the identity.
def _channel_generators() -> dict[int, np.ndarray]:
    e = [np.diag([1.0 if i == j else 0.0 for i in range(3)]) for j in range(3)]
    return {
        3: (e[0] - e[1]) / np.sqrt(2.0),
        8: (e[0] + e[1] - 2.0 * e[2]) / np.sqrt(6.0),
        0: (e[0] + e[1] + e[2]) / np.sqrt(3.0),
    }


def conjugation_check(n_modes: int, n_max: int, coupling: float,
                      length_L: float = TWO_PI, v_fermi: float = 1.0,
                      reg_a: float = 0.1) -> float:
    """Verify the phase-field conjugation of the free-boson Hamiltonian.

    For each channel A in (3, 8, 0) with diagonal generator S_A, builds
    U = exp(i * g * phi_A) with phi_A = -sum_k sqrt(2*pi/(L*k)) e^{-a*k/2}
    (b_k + bdag_k) S_A on the truncated space (3 levels) x (n_max+1)^n_modes
    and compares U H0 U^dag against

        H0 - g * v_F * sum_k sqrt(2*pi*k/L) e^{-a*k/2} i S_A (b_k - bdag_k)
           + g^2 * (2*pi*v_F/L) * sum_k e^{-a*k} S_A^2

    restricted to total boson occupation <= n_max - 2 (the top two levels
    are contaminated by truncation). Returns the max element deviation over
    channels. The quadratic term is the closed double-commutator constant;
    for channel 0 it is the displaced-oscillator energy shift.
    """
    if n_modes < 1:
        raise ValueError("n_modes must be at least 1")
    nb = n_max + 1
    dim_b = nb ** n_modes
    if 3 * dim_b > 5000:
        raise ValueError("truncated conjugation space too large for dense expm")
    b_single = np.diag(np.sqrt(np.arange(1, nb)), 1)
    eye_b = np.eye(nb)

    def mode_op(op, mode):
        factors = [op if m == mode else eye_b for m in range(n_modes)]
        out = factors[0]
        for f in factors[1:]:
            out = np.kron(out, f)
        return out

    ks = [TWO_PI * n / length_L for n in range(1, n_modes + 1)]
    h0_b = sum(v_fermi * k * mode_op(b_single.conj().T @ b_single, m)
               for m, k in enumerate(ks))
    occupation = sum(mode_op(np.diag(np.arange(nb, dtype=float)), m)
                     for m in range(n_modes))
    occ_diag = np.diag(occupation)
    worst = 0.0
    for s_a in _channel_generators().values():
        phi = np.zeros((3 * dim_b, 3 * dim_b), dtype=complex)
        linear = np.zeros_like(phi)
        const = np.zeros_like(phi)
        for m, k in enumerate(ks):
            damp = np.exp(-reg_a * k / 2.0)
            x_m = mode_op(b_single + b_single.conj().T, m)
            p_m = mode_op(b_single - b_single.conj().T, m)
            phi += -np.sqrt(TWO_PI / (length_L * k)) * damp * np.kron(s_a, x_m)
            linear += -v_fermi * np.sqrt(TWO_PI * k / length_L) * damp * 1j * np.kron(s_a, p_m)
            const += (TWO_PI * v_fermi / length_L) * damp ** 2 * np.kron(s_a @ s_a, np.eye(dim_b))
        h0 = np.kron(np.eye(3), h0_b)
        u = scipy.linalg.expm(1j * coupling * phi)
        conjugated = u @ h0 @ u.conj().T
        expected = h0 + coupling * linear + coupling ** 2 * const
        keep = np.tile(occ_diag <= n_max - 2, 3)
        defect = (conjugated - expected)[np.ix_(keep, keep)]
        worst = max(worst, float(np.max(np.abs(defect))))
    return worst


def displaced_spectrum_residual(omega: float, g: float, n_max: int,
                                n_check: int | None = None) -> float:
    """Spectrum of the displaced oscillator omega*bdag*b + g*(b + bdag)
    against the exact ladder omega*n - g^2/omega, over n <= n_check
    (default n_max - 3)."""
    if n_check is None:
        n_check = n_max - 3
    if not 0 <= n_check <= n_max:
        raise ValueError("n_check out of range")
    nb = n_max + 1
    b = np.diag(np.sqrt(np.arange(1, nb)), 1)
    h = omega * b.conj().T @ b + g * (b + b.conj().T)
    evals = np.linalg.eigvalsh(h)
    exact = omega * np.arange(nb) - g * g / omega
    return float(np.max(np.abs(evals[: n_check + 1] - exact[: n_check + 1])))
