"""Command line front end.

Exit codes: 0 success, 2 input/parse error, 3 certification failure,
4 numerical error, 5 bound violation found by ``verify``.
"""

import argparse
import math
import sys as _sys
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import example_system
from .dynamics import convex_combination, is_hurwitz
from .errors import CertificationError, InputError, NumericalError
from .io import (
    certificate_to_dict,
    dump_json,
    dump_signal,
    dump_system,
    load_signal,
    load_system,
    write_csv,
    write_trajectory_csv,
)
from .lyapunov import check_linearization_lyapunov, check_weak_lyapunov
from .rates import (
    NonlinearConfig,
    beta,
    compute_M,
    compute_nonlinear_certificate,
    m_delta_curve,
    slow_convergence_demo,
    verify_homogeneous_bound,
    verify_nonlinear_bound,
    verify_switching_instants,
)
from .signals import generate_dwell_time, generate_regular
from .integrate import simulate_switched

EXIT_OK, EXIT_INPUT, EXIT_CERT, EXIT_NUMERIC, EXIT_VIOLATION = 0, 2, 3, 4, 5

COMMANDS = (
    "check", "simulate", "certify-homogeneous", "certify-nonlinear",
    "m-curve", "beta-curve", "verify", "demo-slow", "example",
)


class _BoundViolation(Exception):
    pass


def parse_grid(text):
    """``"a:b:n"`` (linear), ``"a:b:n,log"`` (log-spaced) or ``"v1,v2,..."``."""
    text = (text or "").strip()
    if not text:
        raise InputError("empty delta grid")
    try:
        if ":" in text:
            spec, _, mode = text.partition(",")
            a, b, n = spec.split(":")
            a, b, n = float(a), float(b), int(n)
            if n < 1:
                raise InputError("grid needs at least one point")
            if mode.strip() == "log":
                if a <= 0 or b <= 0:
                    raise InputError("log grid bounds must be positive")
                return np.geomspace(a, b, n)
            if mode.strip():
                raise InputError(f"unknown grid mode {mode!r}")
            return np.linspace(a, b, n)
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"cannot parse grid {text!r}: {exc}") from exc
    if not vals:
        raise InputError("empty delta grid")
    return np.asarray(vals)


def _parse_vector(text, d):
    try:
        x = np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise InputError(f"cannot parse state {text!r}") from exc
    if x.shape != (d,):
        raise InputError(f"initial state has {len(x)} entries, expected {d}")
    return x


def _system(args):
    if args.system is None:
        raise InputError("--system is required for this command")
    return load_system(args.system)


def _out(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _method(args):
    return "exact" if args.method == "exact" else "sphere"


def _lyap_radii(R):
    # sample shells out to the H-norm radius where the quadratic part reaches R
    top = math.sqrt(R)
    return top * np.arange(1, 9) / 8.0


# commands -------------------------------------------------------------------


def hypothesis_report(sys, samples=4096, R=1.0, seed=0):
    """JSON-ready hypothesis report: Hurwitz linearizations, positive
    definite form, sampled weak decrease, exact linearized weak decrease."""
    report = {"dimension": sys.dimension, "subsystems": sys.p}
    hur = []
    for i, s in enumerate(sys.subsystems, start=1):
        h = is_hurwitz(s.matrix)
        hur.append({"subsystem": i, "is_hurwitz": h.is_hurwitz, "abscissa": h.abscissa})
    report["hurwitz"] = hur
    if sys.p > 1:
        mid = convex_combination(sys, np.full(sys.p, 1.0 / sys.p))
        h = is_hurwitz(mid.matrix)
        report["uniform_convex_combination"] = {"is_hurwitz": h.is_hurwitz, "abscissa": h.abscissa}
    V = sys.lyapunov
    if V is None:
        raise InputError("system has no Lyapunov form")
    report["lyapunov"] = {
        "type": type(V).__name__,
        "positive_definite": True,
        "min_eigenvalue": float(np.linalg.eigvalsh(V.norm_matrix)[0]),
    }
    report["weak_lyapunov"] = check_weak_lyapunov(sys, samples, _lyap_radii(R), seed=seed)
    report["linearization"] = check_linearization_lyapunov(sys)
    report["all_hold"] = bool(
        all(h["is_hurwitz"] for h in hur)
        and all(r.holds for r in report["weak_lyapunov"])
        and all(r.holds for r in report["linearization"])
    )
    return report


def cmd_check(args):
    sys = _system(args)
    report = hypothesis_report(sys, args.samples, args.R or 1.0, args.seed)
    dump_json(report, _out(args) / "check.json")
    print(f"check: all hypotheses hold = {report['all_hold']}")
    if not report["all_hold"]:
        raise CertificationError("at least one hypothesis failed; see check.json")


def cmd_simulate(args):
    sys = _system(args)
    out = _out(args)
    if args.signal:
        u = load_signal(args.signal, horizon=args.horizon)
    else:
        horizon = args.horizon or 20.0 * args.delta
        u = generate_dwell_time(args.seed, sys.p, args.delta, horizon)
        dump_signal(u, out / "signal.json")
    x0 = _parse_vector(args.x0, sys.dimension) if args.x0 else np.eye(sys.dimension)[0]
    horizon = args.horizon or u.horizon
    traj = simulate_switched(sys, u, x0, horizon, record_dt=args.record_dt or args.delta / 10.0)
    write_trajectory_csv(traj, sys, out / "trajectory.csv")
    print(f"simulate: {len(traj)} records, final state {traj.final_state}")


def cmd_certify_homogeneous(args):
    sys = _system(args)
    cert = compute_M(sys, args.delta, _method(args), args.samples, seed=args.seed)
    rf = cert.rate
    extra = {"beta": {"overshoot": rf.overshoot, "decay_rate": rf.decay_rate}}
    dump_json(certificate_to_dict(cert, "homogeneous", extra), _out(args) / "certificate_homogeneous.json")
    print(f"certify-homogeneous: M({args.delta:g}) = {cert.M:.12g}")
    return cert


def cmd_certify_nonlinear(args):
    sys = _system(args)
    if args.R is None:
        raise InputError("--R is required for certify-nonlinear")
    cfg = NonlinearConfig(samples=min(args.samples, 1024), seed=args.seed)
    cert = compute_nonlinear_certificate(sys, args.delta, args.R, cfg)
    dump_json(certificate_to_dict(cert, "nonlinear"), _out(args) / "certificate_nonlinear.json")
    print(f"certify-nonlinear: alpha = {cert.alpha:.6g}, gamma = {cert.gamma:.6g}")
    return cert


def write_m_curve(sys, deltas, path, method="exact", samples=4096, seed=0):
    curve = m_delta_curve(sys, deltas, method, samples, seed)
    order = np.argsort(curve.deltas, kind="stable")
    write_csv(path, ["delta", "M"], zip(curve.deltas[order], curve.values[order]))
    return curve


def write_beta_curve(sys, deltas, t_grid, path, method="exact", samples=4096, seed=0):
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size == 0:
        raise InputError("empty delta grid")
    cols, header = [np.asarray(t_grid, dtype=float)], ["t"]
    for d in deltas:
        rf = compute_M(sys, d, method, samples, seed=seed).rate
        cols.append(beta(rf, 1.0, cols[0]))
        header.append(f"beta_delta_{d:g}")
    write_csv(path, header, zip(*cols))


def emit_curves(sys, m_deltas, beta_deltas, t_grid, out_dir, method="exact", samples=4096, seed=0):
    """Write ``M_of_delta.csv`` and ``beta_of_t.csv`` into ``out_dir``."""
    if len(m_deltas) == 0 or len(beta_deltas) == 0:
        raise InputError("empty delta grid")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_m_curve(sys, m_deltas, out_dir / "M_of_delta.csv", method, samples, seed)
    write_beta_curve(sys, beta_deltas, t_grid, out_dir / "beta_of_t.csv", method, samples, seed)


def cmd_m_curve(args):
    sys = _system(args)
    deltas = parse_grid(args.delta_grid or "0.05:10:50,log")
    curve = write_m_curve(sys, deltas, _out(args) / "M_of_delta.csv", _method(args), args.samples, args.seed)
    print(f"m-curve: {len(curve)} points, monotone = {curve.monotone}")


def cmd_beta_curve(args):
    sys = _system(args)
    deltas = parse_grid(args.delta_grid or "0.5,1,2")
    t = np.linspace(0.0, args.horizon or 20.0, 401)
    write_beta_curve(sys, deltas, t, _out(args) / "beta_of_t.csv", _method(args), args.samples, args.seed)
    print(f"beta-curve: {len(deltas)} columns")


def cmd_verify(args):
    sys = _system(args)
    horizon = args.horizon or 20.0 * args.delta
    if sys.all_linear and args.R is None:
        cert = compute_M(sys, args.delta, _method(args), args.samples, seed=args.seed)
        rep = verify_homogeneous_bound(sys, cert, args.trials, horizon / args.delta, seed=args.seed + 1)
        inst = verify_switching_instants(sys, cert, min(args.trials, 200), seed=args.seed + 2)
        report = {"kind": "homogeneous", "certificate": cert, "bound": rep, "switching_instants": inst}
        bad = rep.violations + inst.violations
    else:
        if args.R is None:
            raise InputError("--R is required to verify a nonlinear system")
        cfg = NonlinearConfig(samples=min(args.samples, 1024), seed=args.seed)
        cert = compute_nonlinear_certificate(sys, args.delta, args.R, cfg)
        rep = verify_nonlinear_bound(sys, cert, args.trials, seed=args.seed + 1,
                                     horizon_mult=horizon / args.delta)
        report = {"kind": "nonlinear", "certificate": cert, "bound": rep}
        bad = rep.violations
    dump_json(certificate_to_dict(report), _out(args) / "verify_report.json")
    print(f"verify: {args.trials} trials, {bad} violating, max ratio {rep.max_ratio:.6g}")
    if bad:
        raise _BoundViolation(f"{bad} trials violate the certified bound")


def cmd_demo_slow(args):
    sys = _system(args)
    T_grid = parse_grid(args.T_grid)
    if args.signal:
        u = load_signal(args.signal, horizon=args.horizon)
    else:
        u = generate_regular(sys.p, 0.005, max(float(np.max(T_grid)), 1e-3))
    x0 = _parse_vector(args.x0, sys.dimension) if args.x0 else np.eye(sys.dimension)[0]
    rows = slow_convergence_demo(sys, u, x0, T_grid)
    write_csv(_out(args) / "slow_convergence.csv", ["T", "time_to_half", "norm_at_T"],
              ((r.T, r.time_to_half, r.norm_at_T) for r in rows))
    print("demo-slow: " + ", ".join(f"T={r.T:g}: {r.time_to_half:.4g}" for r in rows))


def cmd_example(args):
    out = _out(args)
    path = out / "example_system.json"
    sys = example_system()
    dump_system(sys, path)
    if load_system(path) != sys:
        raise NumericalError("example system did not round-trip through JSON")
    args.system = str(path)
    cmd_check(args)
    cmd_certify_homogeneous(args)
    cmd_m_curve(args)
    cmd_beta_curve(args)
    cmd_verify(args)
    cmd_demo_slow(args)


_HANDLERS = {
    "check": cmd_check,
    "simulate": cmd_simulate,
    "certify-homogeneous": cmd_certify_homogeneous,
    "certify-nonlinear": cmd_certify_nonlinear,
    "m-curve": cmd_m_curve,
    "beta-curve": cmd_beta_curve,
    "verify": cmd_verify,
    "demo-slow": cmd_demo_slow,
    "example": cmd_example,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="switchrate",
        description="Convergence-rate certificates for switched systems with dwell time.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--system", help="system description JSON")
    parser.add_argument("--signal", help="switching signal (JSON, or CSV with t,i)")
    parser.add_argument("--delta", type=float, default=1.0, help="dwell time (default 1)")
    parser.add_argument("--delta-grid", help="a:b:n[,log] or comma separated values")
    parser.add_argument("--R", type=float, help="sublevel bound {V <= R} (nonlinear path)")
    parser.add_argument("--horizon", type=float)
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--samples", type=int, default=4096)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--method", choices=("exact", "sphere"), default="exact")
    parser.add_argument("--x0", help="initial state, comma separated")
    parser.add_argument("--record-dt", type=float)
    parser.add_argument("--T-grid", default="1,2,5,10,20", help="tail start times for demo-slow")
    return parser


def run(args) -> int:
    try:
        _HANDLERS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_INPUT
    except CertificationError as exc:
        print(f"certification failed: {exc}", file=_sys.stderr)
        return EXIT_CERT
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=_sys.stderr)
        return EXIT_NUMERIC
    except _BoundViolation as exc:
        print(f"bound violated: {exc}", file=_sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    _sys.exit(main())
