"""Batch front door for the verification suites and the simulator.

Exit codes: 0 all checks pass, 1 a numerical check failed, 2 usage or
configuration error, 3 I/O failure. Verification commands emit a JSON
record {command, inputs, residuals, pass}; simulate writes a CSV trajectory
with the fixed header. All randomized scans take an explicit --seed and
reruns with identical inputs produce byte-identical output.

The numerical modules are imported lazily so that QDS3_THREADS can cap the
linear-algebra thread pools before they load.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

EXIT_PASS = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _apply_thread_cap() -> None:
    cap = os.environ.get("QDS3_THREADS")
    if not cap:
        return
    if not cap.isdigit() or int(cap) < 1:
        raise SystemExit(EXIT_USAGE)
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, cap)


def _emit(payload: dict, out_path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w") as fh:
            fh.write(text)


def _result(command: str, inputs: dict, residuals: dict, passed: bool) -> dict:
    return {"command": command, "inputs": inputs,
            "residuals": residuals, "pass": bool(passed)}


# -- subcommands -------------------------------------------------------------

def cmd_verify_algebra(args) -> int:
    from . import su3

    residuals = {
        "completeness": su3.completeness_residual(),
        "completeness_extended": su3.completeness_residual(extended=True),
        "orthogonality": su3.orthogonality_residual(),
        "commutator_table": su3.commutator_table_residual(),
        "weight_norm": su3.weight_norm_residual(),
    }
    passed = (residuals["completeness"] <= 1e-14
              and residuals["completeness_extended"] <= 1e-14
              and residuals["orthogonality"] <= 1e-14
              and residuals["commutator_table"] <= 1e-15
              and residuals["weight_norm"] <= 1e-15)
    _emit(_result("verify-algebra", {}, residuals, passed), args.out)
    return EXIT_PASS if passed else EXIT_NUMERICAL


def cmd_verify_ybe(args) -> int:
    import numpy as np

    from . import integrability

    f_values = np.linspace(args.f_min, args.f_max, args.f_steps)
    mu_values = [float(m) for m in args.mu.split(",")]
    worst = 0.0
    for mu in mu_values:
        for f1 in f_values:
            for f2 in f_values:
                worst = max(worst, integrability.yang_baxter_residual(f1, f2, mu))
    residuals = {"yang_baxter_max": worst}
    passed = worst <= args.tol
    inputs = {"f_min": args.f_min, "f_max": args.f_max, "f_steps": args.f_steps,
              "mu": mu_values, "tol": args.tol}
    _emit(_result("verify-ybe", inputs, residuals, passed), args.out)
    return EXIT_PASS if passed else EXIT_NUMERICAL


def cmd_verify_smatrix(args) -> int:
    import numpy as np
    import scipy.linalg

    from . import integrability

    rng = np.random.default_rng(args.seed)
    worst_closed = 0.0
    worst_unitary = 0.0
    eye = np.eye(9)
    for _ in range(args.samples):
        c = integrability.AcsCouplings(
            j_par=float(rng.uniform(-np.pi, np.pi)),
            j_perp=float(rng.uniform(-np.pi, np.pi)),
            zeta12=float(rng.uniform(0, 2 * np.pi)),
            zeta13=float(rng.uniform(0, 2 * np.pi)),
            zeta23=float(rng.uniform(0, 2 * np.pi)))
        h = integrability.build_interaction(c)
        s = integrability.scattering_matrix(h)
        oracle = scipy.linalg.expm(1j * h)
        closed = integrability.scattering_closed_form(c)
        worst_closed = max(worst_closed,
                           float(np.max(np.abs(closed - oracle))),
                           float(np.max(np.abs(closed - s))))
        worst_unitary = max(worst_unitary,
                            float(np.linalg.norm(s.conj().T @ s - eye)))
    residuals = {"closed_form_max": worst_closed, "unitarity_max": worst_unitary}
    passed = worst_closed <= 1e-12 and worst_unitary <= 1e-12
    inputs = {"samples": args.samples, "seed": args.seed}
    _emit(_result("verify-smatrix", inputs, residuals, passed), args.out)
    return EXIT_PASS if passed else EXIT_NUMERICAL


def cmd_reparam(args) -> int:
    from . import integrability

    inputs = {"j_par": args.jpar, "j_perp": args.jperp}
    try:
        params = integrability.reparametrize(args.jpar, args.jperp)
    except (integrability.DomainError, integrability.DegenerateError) as exc:
        _emit({"command": "reparam", "inputs": inputs,
               "error": type(exc).__name__, "detail": str(exc), "pass": False},
              args.out)
        return EXIT_NUMERICAL
    payload = {"command": "reparam", "inputs": inputs,
               "f_bar": params.f_bar, "mu_bar": params.mu_bar}
    passed = True
    if args.match:
        c = integrability.AcsCouplings(j_par=args.jpar, j_perp=args.jperp)
        match = integrability.match_s_to_r(c)
        payload["residual"] = match.residual
        payload["scale"] = [match.scale.real, match.scale.imag]
        payload["branch"] = list(match.branch)
        passed = match.residual <= 1e-9
    payload["pass"] = passed
    _emit(payload, args.out)
    return EXIT_PASS if passed else EXIT_NUMERICAL


def cmd_bosonize(args) -> int:
    from . import bosonize, fockspace

    window = fockspace.MomentumWindow(
        n_min=-args.window, n_max=args.window, cap=2 * args.window + 2)
    space = fockspace.build_space(window, flavors=args.flavors)
    a = args.a_over_l * window.length_L
    residuals: dict = {}
    fitted = None
    if args.check == "commutators":
        sector = fockspace.ValiditySector(margin=4, max_excitations=2, excursion=4)
        worst = 0.0
        for k in range(1, args.k_max + 1):
            for kp in range(1, args.k_max + 1):
                worst = max(worst, bosonize.commutator_residual(space, k, kp, sector))
        residuals["commutator_max"] = worst
        passed = worst <= 1e-12
    elif args.check == "twopoint":
        _, _, rel = bosonize.two_point_compare(space, window.length_L / 8.0, a)
        residuals["two_point_rel_err"] = rel
        passed = rel <= 1e-5
    elif args.check == "density":
        sector = fockspace.ValiditySector(margin=2, max_excitations=3, excursion=3)
        res = bosonize.density_identity_residual(space, sector, a)
        residuals["density_max_element"] = res
        passed = res <= 1e-2
    else:  # kinetic
        sector = fockspace.ValiditySector(margin=3, max_excitations=2, excursion=3)
        fit = bosonize.kinetic_identity_fit(space, sector)
        residuals["kinetic_postfit"] = fit.residual
        fitted = {"quadratic": fit.c_quadratic, "linear": fit.c_linear,
                  "const": fit.c_const}
        passed = fit.residual <= 1e-10
    payload = {"command": "bosonize", "check": args.check,
               "window": args.window, "flavors": args.flavors,
               "a_over_l": args.a_over_l, "residuals": residuals,
               "pass": passed}
    if fitted is not None:
        payload["fitted_coeffs"] = fitted
    _emit(payload, args.out)
    return EXIT_PASS if passed else EXIT_NUMERICAL


def cmd_spectral(args) -> int:
    import numpy as np

    from . import integrability, qds

    # mode ladder spanning [0, span*omega_c] with args.modes rungs
    omega_c = 1.0
    length = 2 * np.pi * args.modes / (args.span * omega_c)
    acs = integrability.AcsCouplings(j_par=0.0, j_perp=0.0,
                                     length_L=length, v_fermi=1.0, reg_a=1.0)
    bath = qds.build_bath(args.modes, acs)
    params = qds.map_acs_to_qds(acs)
    probe = qds.GaussianTestFunction(center=args.center * omega_c,
                                     width=args.width * omega_c)
    rel = qds.spectral_density_residual(bath, params, probe)
    per_mode = max(
        abs(ck * ck * length / (2 * np.pi) - params.alpha * w * np.exp(-w / omega_c))
        / (params.alpha * w * np.exp(-w / omega_c))
        for w, ck in zip(bath.omegas, bath.couplings))
    residuals = {"spectral_rel": rel, "per_mode_identity_rel": per_mode}
    passed = rel <= 0.02 and per_mode <= 1e-14
    inputs = {"modes": args.modes, "center": args.center, "width": args.width,
              "span": args.span}
    _emit(_result("spectral", inputs, residuals, passed), args.out)
    return EXIT_PASS if passed else EXIT_NUMERICAL


def cmd_conjugation(args) -> int:
    from . import qds

    dev = qds.conjugation_check(args.modes, args.nmax, args.coupling)
    disp = qds.displaced_spectrum_residual(1.0, args.displacement, 16)
    residuals = {"conjugation_max_element": dev, "displaced_spectrum": disp}
    passed = dev <= 1e-6 and disp <= 1e-8
    inputs = {"modes": args.modes, "nmax": args.nmax,
              "coupling": args.coupling, "displacement": args.displacement}
    _emit(_result("conjugation", inputs, residuals, passed), args.out)
    return EXIT_PASS if passed else EXIT_NUMERICAL


# -- simulate ----------------------------------------------------------------

_SIM_COMMON = {"n_modes": int, "n_max": int, "t_final": float, "dt": float,
               "initial_level": int}
_SIM_QDS = {"eps3": float, "eps8": float, "delta": float, "zeta": float,
            "alpha": float, "omega_c": float}
_SIM_ACS = {"j_par": float, "j_perp": float, "zeta12": float, "zeta13": float,
            "zeta23": float, "h1": float, "h2": float, "h3": float,
            "L": float, "v_fermi": float, "a": float,
            "M3": float, "M8": float, "C": float, "C3": float, "C8": float}


class ConfigError(ValueError):
    pass


def load_config(path: str) -> dict:
    """Parse and validate a simulation config; QDS and AC-S parameter blocks
    are mutually exclusive."""
    try:
        with open(path) as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = set(_SIM_COMMON) | set(_SIM_QDS) | set(_SIM_ACS) | {"seed"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    has_qds = [k for k in _SIM_QDS if k in data]
    has_acs = [k for k in _SIM_ACS if k in data]
    if has_qds and has_acs:
        raise ConfigError("QDS and AC-S parameter blocks are mutually exclusive")
    if not has_qds and not has_acs:
        raise ConfigError("config must contain a QDS or an AC-S parameter block")
    schema = dict(_SIM_COMMON)
    schema.update(_SIM_QDS if has_qds else _SIM_ACS)
    missing = sorted(k for k in schema if k not in data and k != "seed")
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(missing)}")
    cfg = {}
    for key, want in schema.items():
        value = data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number")
        if not math.isfinite(value):
            raise ConfigError(f"{key} must be finite")
        if want is int and int(value) != value:
            raise ConfigError(f"{key} must be an integer")
        cfg[key] = want(value)
    cfg["mode"] = "qds" if has_qds else "acs"
    if cfg["mode"] == "qds" and cfg["alpha"] < 0:
        raise ConfigError("alpha must be non-negative")
    if cfg["initial_level"] not in (1, 2, 3):
        raise ConfigError("initial_level must be 1, 2 or 3")
    if cfg["n_modes"] < 0 or cfg["n_max"] < 1:
        raise ConfigError("n_modes must be >= 0 and n_max >= 1")
    if cfg["dt"] <= 0 or cfg["t_final"] < 0:
        raise ConfigError("dt must be positive and t_final non-negative")
    return cfg


def _bath_from_qds(params, n_modes: int, n_max: int, span: float = 5.0):
    """Mode ladder for a bare QDS block: rungs omega_n = n*d with spacing
    chosen so n_modes rungs span [0, span*omega_c], couplings fixed by the
    ohmic identity C_n^2 = d * alpha * omega_n * exp(-omega_n/omega_c)."""
    import numpy as np

    from . import qds

    if n_modes == 0:
        return qds.BathDiscretization((), (), n_max=n_max)
    spacing = span * params.omega_c / n_modes
    omegas = spacing * np.arange(1, n_modes + 1)
    couplings = -np.sqrt(spacing * params.alpha * omegas
                         * np.exp(-omegas / params.omega_c))
    return qds.BathDiscretization(tuple(omegas), tuple(couplings), n_max=n_max)


def cmd_simulate(args) -> int:
    from . import integrability, qds, su3

    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg["mode"] == "acs":
        acs = integrability.AcsCouplings(
            j_par=cfg["j_par"], j_perp=cfg["j_perp"], zeta12=cfg["zeta12"],
            zeta13=cfg["zeta13"], zeta23=cfg["zeta23"], h1=cfg["h1"],
            h2=cfg["h2"], h3=cfg["h3"], length_L=cfg["L"],
            v_fermi=cfg["v_fermi"], reg_a=cfg["a"])
        sector = su3.ChargeSector(m3=cfg["M3"], m8=cfg["M8"], c=cfg["C"],
                                  c3=cfg["C3"], c8=cfg["C8"])
        params = qds.map_acs_to_qds(acs, sector)
        if cfg["n_modes"] > 0:
            bath = qds.build_bath(cfg["n_modes"], acs, n_max=cfg["n_max"])
        else:
            bath = qds.BathDiscretization((), (), n_max=cfg["n_max"])
    else:
        params = qds.QdsParams(eps3=cfg["eps3"], eps8=cfg["eps8"],
                               delta=cfg["delta"], zeta=cfg["zeta"],
                               alpha=cfg["alpha"], omega_c=cfg["omega_c"])
        bath = _bath_from_qds(params, cfg["n_modes"], cfg["n_max"])
    h = qds.assemble_hamiltonian(params, bath)
    psi0 = qds.initial_state(bath, cfg["initial_level"])
    trajectory = qds.evolve(h, psi0, cfg["t_final"], cfg["dt"])
    trajectory.write_csv(args.out)
    return EXIT_PASS


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qds3",
        description="Verification and simulation toolkit for a three-level "
                    "dissipative system with two ohmic baths.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out", default=None, help="write JSON here (default stdout)")

    p = sub.add_parser("verify-algebra", help="matrix-algebra identity suite")
    add_out(p)
    p.set_defaults(func=cmd_verify_algebra)

    p = sub.add_parser("verify-ybe", help="Yang-Baxter residual over a parameter grid")
    p.add_argument("--f-min", type=float, default=0.1)
    p.add_argument("--f-max", type=float, default=1.4)
    p.add_argument("--f-steps", type=int, default=8)
    p.add_argument("--mu", default="0.2,0.5,1.0", help="comma-separated mu values")
    p.add_argument("--tol", type=float, default=1e-10)
    add_out(p)
    p.set_defaults(func=cmd_verify_ybe)

    p = sub.add_parser("verify-smatrix", help="closed-form scattering matrix vs exponential")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    add_out(p)
    p.set_defaults(func=cmd_verify_smatrix)

    p = sub.add_parser("reparam", help="couplings -> R-matrix parameters")
    p.add_argument("--jpar", type=float, required=True)
    p.add_argument("--jperp", type=float, required=True)
    p.add_argument("--match", action="store_true",
                   help="also certify S = scale * R")
    add_out(p)
    p.set_defaults(func=cmd_reparam)

    p = sub.add_parser("bosonize", help="finite-window bosonisation checks")
    p.add_argument("--window", type=int, required=True, metavar="M",
                   help="momentum window [-M, M]")
    p.add_argument("--flavors", type=int, default=1, choices=(1, 3))
    p.add_argument("--check", required=True,
                   choices=("commutators", "density", "kinetic", "twopoint"))
    p.add_argument("--a-over-l", type=float, default=0.02,
                   help="regularisation length over system length")
    p.add_argument("--k-max", type=int, default=4,
                   help="largest mode index for the commutator scan")
    add_out(p)
    p.set_defaults(func=cmd_bosonize)

    p = sub.add_parser("spectral", help="discretized bath vs ohmic spectral density")
    p.add_argument("--modes", type=int, default=200)
    p.add_argument("--center", type=float, default=0.3, help="probe center / omega_c")
    p.add_argument("--width", type=float, default=0.1, help="probe width / omega_c")
    p.add_argument("--span", type=float, default=5.0, help="ladder span / omega_c")
    add_out(p)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("conjugation", help="phase-field conjugation verification")
    p.add_argument("--modes", type=int, default=1)
    p.add_argument("--nmax", type=int, default=12)
    p.add_argument("--coupling", type=float, default=0.05)
    p.add_argument("--displacement", type=float, default=0.02,
                   help="drive strength for the displaced-oscillator check")
    add_out(p)
    p.set_defaults(func=cmd_conjugation)

    p = sub.add_parser("simulate", help="evolve a system-bath state")
    p.add_argument("--config", required=True, help="JSON config path")
    p.add_argument("--out", required=True, help="CSV trajectory path")
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    _apply_thread_cap()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
