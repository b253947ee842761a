"""Batch command-line interface.

One process, one subcommand, one serialized result on standard output.
Every numeric value travels with a certificate (tail bound, refinement
drift, or cross-route delta) so the claim can be audited without rerunning,
and output bytes are a pure function of the invocation and configuration;
wall-clock timing therefore goes to standard error, never into the payload.

Exit codes: 0 the computation met its declared tolerance, 1 it ran but
could not certify the tolerance (or a verification identity failed), 2 the
request itself was malformed.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp

from .config import (DEFAULT_CONFIG, DomainError, PrecisionConfig,
                     PrecisionError, StabilizationError)
from . import gamma0, greens, hecke, mero, polar, qseries

SCHEMA = "maass-kit/1"
PREC_ENV = "MAASSKIT_PREC"


class UsageError(Exception):
    """Bad flag value or malformed request; maps to exit code 2."""


@dataclass
class CommandResult:
    status: str                 # ok | fail | error
    payload: object
    certificate: dict = field(default_factory=dict)
    timing: float = 0.0


# -- serialization ------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, (mp.mpf,)):
        return float(v)
    if isinstance(v, (complex, mp.mpc)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, int, float, str)) or v is None:
        return v
    return str(v)


def _flatten_csv(prefix: str, v, rows: list):
    if isinstance(v, (mp.mpf,)):
        v = float(v)
    if isinstance(v, (complex, mp.mpc)):
        rows.append(f"{prefix},{float(v.real)!r},{float(v.imag)!r}")
    elif isinstance(v, dict):
        for k in sorted(v, key=str):
            _flatten_csv(f"{prefix}.{k}", v[k], rows)
    elif isinstance(v, (list, tuple)):
        for i, x in enumerate(v):
            _flatten_csv(f"{prefix}[{i}]", x, rows)
    elif isinstance(v, float):
        rows.append(f"{prefix},{v!r}")
    elif isinstance(v, Fraction):
        rows.append(f"{prefix},{_jsonable(v)}")
    else:
        rows.append(f"{prefix},{v}")


def render(result: CommandResult, fmt: str) -> str:
    if fmt == "json":
        import json
        doc = {
            "schema": SCHEMA,
            "status": result.status,
            "payload": _jsonable(result.payload),
            "certificate": _jsonable(result.certificate),
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"
    rows = [f"schema,{SCHEMA}", f"status,{result.status}"]
    _flatten_csv("payload", result.payload, rows)
    _flatten_csv("certificate", result.certificate, rows)
    return "\n".join(rows) + "\n"


# -- argument plumbing --------------------------------------------------------

def _parse_point(text: str, flag: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"{flag} expects 'x,y', got {text!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise UsageError(f"{flag} expects numeric 'x,y', got {text!r}")


def _parse_int_pair(text: str, flag: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"{flag} expects 'a,c' integers, got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise UsageError(f"{flag} expects integer 'a,c', got {text!r}")


def _build_config(args) -> tuple:
    cert = {}
    cfg = DEFAULT_CONFIG
    source = "default"
    bits = None
    if getattr(args, "prec", None) is not None:
        bits, source = args.prec, "flag"
    elif os.environ.get(PREC_ENV):
        try:
            bits = int(os.environ[PREC_ENV])
        except ValueError:
            raise UsageError(f"environment {PREC_ENV} must be an integer bit count")
        source = "env"
    if bits is not None:
        if bits < 24:
            raise UsageError("--prec needs at least 24 bits")
        cfg = cfg.with_bits(bits)
    cert["precision_bits"] = cfg.precision_bits
    cert["precision_source"] = source
    overrides = {}
    for item in getattr(args, "cutoff", None) or ():
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise UsageError(f"--cutoff expects name=value, got {item!r}")
        try:
            overrides[name] = float(value) if ("." in value or "e" in value.lower()) else int(value)
        except ValueError:
            raise UsageError(f"--cutoff value for {name!r} is not numeric: {value!r}")
    if overrides:
        cfg = cfg.with_cutoffs(**overrides)
        cert["cutoff_overrides"] = dict(sorted(overrides.items()))
    return cfg, cert


def _tolerance(cfg: PrecisionConfig, value, floor: float = 0.0) -> float:
    return max(cfg.abs_tol, cfg.rel_tol * abs(value), floor)


def _find_cusp(N: int, spec_text: str, flag: str):
    a, c = _parse_int_pair(spec_text, flag)
    reps = gamma0.cusps(N)
    for rep in reps:
        if (rep.a, rep.c) == (a, c):
            return rep
    listing = ", ".join(f"{r.a},{r.c}" for r in reps)
    raise UsageError(f"{flag}: {a},{c} is not a listed cusp representative "
                     f"of level {N} (choose from: {listing})")


# -- subcommands --------------------------------------------------------------

def _cmd_qexp(args, cfg, cert):
    n, order = args.n, args.order
    if n < 1:
        raise DomainError("--n must be a positive integer")
    if order < 1:
        raise DomainError("--order must be >= 1")
    _, js = qseries.delta_and_j(order + n + 2)
    powers = [qseries.QSeries.constant(1, js.trunc)]
    for _ in range(n):
        powers.append(powers[-1] * js)
    ser = qseries.faber_polynomial(n).compose_qseries(powers)
    shift = 24 * gamma0.divisor_sigma(1, n)
    coeffs = []
    for e in range(-n, order + 1):
        c = ser.coeff(e) + (shift if e == 0 else 0)
        coeffs.append([e, _jsonable(Fraction(c))])
    cert["arithmetic"] = "exact"
    payload = {"N": 1, "n": n, "order": order, "q_power_width": 1,
               "coefficients": coeffs}
    return CommandResult("ok", payload, cert)


def _cmd_verify_denominator(args, cfg, cert):
    order = args.order
    if order < 1:
        raise DomainError("--order must be >= 1")
    diff = qseries.denominator_check(order, order)
    bad = {k: v for k, v in diff.nonzero().items()}
    cert["arithmetic"] = "exact"
    cert["box"] = [order, order]
    payload = {"order": order, "nonzero_differences": len(bad)}
    if bad:
        worst = sorted(bad)[:5]
        payload["first_failures"] = [[m, n, str(bad[(m, n)])] for m, n in worst]
        return CommandResult("fail", payload, cert)
    return CommandResult("ok", payload, cert)


def _cmd_verify_akn(args, cfg, cert):
    order = args.order
    ok, first = qseries.akn_check(order)
    cert["arithmetic"] = "exact"
    payload = {"order": order, "identity_holds": bool(ok)}
    if not ok:
        payload["first_failure"] = list(first)
        return CommandResult("fail", payload, cert)
    return CommandResult("ok", payload, cert)


def _cmd_compute_j(args, cfg, cert):
    N, n = args.N, args.n
    z = _parse_point(args.z, "--z")
    route = args.route or ("exact" if N == 1 else "interior")
    cert["route"] = route
    if route == "exact":
        if N != 1:
            raise DomainError("route 'exact' exists at level 1 only")
        value = hecke.j_exact_level1(n, z, cfg)
        # the exact route sizes its own series order against cfg and raises
        # on any shortfall, so reaching this line certifies the tolerance
        cert["tolerance"] = _tolerance(cfg, value)
        cert["error_estimate"] = 0.0
        return CommandResult("ok", {"N": N, "n": n, "value": value}, cert)
    if route == "interior":
        fn = hecke.j_interior
    elif route == "relations":
        fn = hecke.j_via_relations
    else:
        raise UsageError(f"--route must be exact, interior, or relations, got {route!r}")
    value = fn(N, n, z, cfg)
    bound = int(cfg.cutoff("coset_bound"))
    drift = abs(value - fn(N, n, z, cfg.with_cutoffs(coset_bound=bound // 2)))
    tol = _tolerance(cfg, value, floor=100.0 * bound ** -1.5)
    cert.update(coset_bound=bound, refinement_drift=drift, tolerance=tol)
    status = "ok" if drift <= tol else "fail"
    return CommandResult(status, {"N": N, "n": n, "value": value}, cert)


def _cmd_compute_j_cusp(args, cfg, cert):
    N, n = args.N, args.n
    rep = _find_cusp(N, args.z or "1,0", "--z")
    value = hecke.j_at_cusp(N, n, rep, cfg)
    c_max = int(cfg.cutoff("c_max"))
    half = hecke.j_at_cusp(N, n, rep, cfg.with_cutoffs(c_max=c_max // 2))
    drift = abs(value - half)
    tol = _tolerance(cfg, value, floor=150.0 * c_max ** -0.5)
    cert.update(c_max=c_max, refinement_drift=drift, tolerance=tol,
                cusp=[rep.a, rep.c])
    status = "ok" if drift <= tol else "fail"
    return CommandResult(status, {"N": N, "n": n, "value": value}, cert)


def _cmd_compute_H(args, cfg, cert):
    N = args.N
    z = _parse_point(args.z, "--z")
    tau = _parse_point(args.tau, "--tau")
    route = args.route or "qexp"
    if route not in ("qexp", "level1", "continuation"):
        raise UsageError(f"--route must be qexp, level1, or continuation, got {route!r}")
    value = polar.H_star(N, z, tau, route=route, cfg=cfg)
    cert["route"] = route
    floor = 5e-3 if route == "continuation" else 0.0
    tol = _tolerance(cfg, value, floor=floor)
    if N == 1 and route != "level1":
        try:
            other = polar.H_star(N, z, tau, route="level1", cfg=cfg)
            delta = abs(value - other)
            cert["cross_route_delta"] = delta
            status = "ok" if delta <= tol else "fail"
        except (DomainError, PrecisionError, StabilizationError) as exc:
            cert["cross_route"] = f"unavailable: {exc}"
            status = "ok"
    else:
        # qexp and level1 size their truncation against cfg internally
        status = "ok"
    cert["tolerance"] = tol
    return CommandResult(status, {"N": N, "z": z, "tau": tau, "value": value}, cert)


def _cmd_e2star(args, cfg, cert):
    N = args.N
    tau = _parse_point(args.tau, "--tau")
    rep = _find_cusp(N, args.z or "1,0", "--z")
    route = args.route or "series"
    if route not in ("series", "hecke_trick"):
        raise UsageError(f"--route must be series or hecke_trick, got {route!r}")
    value = polar.E2_star(N, rep, tau, cfg, route=route)
    c_max = int(cfg.cutoff("c_max"))
    floor = 5e-3 if route == "hecke_trick" else 150.0 * c_max ** -0.5
    cert.update(route=route, cusp=[rep.a, rep.c],
                tolerance=_tolerance(cfg, value, floor=floor))
    return CommandResult("ok", {"N": N, "tau": tau, "value": value}, cert)


def _cmd_ramanujan_beta(args, cfg, cert):
    n = args.n
    route = args.route or "exact"
    if route == "exact":
        cert["arithmetic"] = "exact"
        return CommandResult("ok", {"n": n, "beta": mero.beta_exact(n)}, cert)
    if route != "numeric":
        raise UsageError(f"--route must be exact or numeric, got {route!r}")
    if n < 1:
        raise DomainError("numeric route needs n >= 1")
    value = mero.ramanujan_expansion_1overE4(n, cfg)
    exact = float(mero.beta_exact(n))
    rel = abs(value - exact) / abs(exact)
    bound = int(cfg.cutoff("norm_bound"))
    tol = max(cfg.rel_tol, 20.0 * bound ** -1.5)
    cert.update(norm_bound=bound, exact_route_relative_delta=rel, tolerance=tol)
    status = "ok" if rel <= tol else "fail"
    return CommandResult(status, {"n": n, "value": value}, cert)


def _cmd_kloosterman(args, cfg, cert):
    ns = args.n or []
    if not ns:
        raise UsageError("--n is required (give it once for S(n,n;c), twice for S(m,n;c))")
    if len(ns) > 2:
        raise UsageError("--n may be given at most twice")
    m, n = (ns[0], ns[0]) if len(ns) == 1 else (ns[0], ns[1])
    c = args.order
    if c is None or c < 1:
        raise UsageError("--order must give the positive modulus c")
    value = gamma0.kloosterman(m, n, c)
    cert["arithmetic"] = "exact finite sum with float accumulation"
    return CommandResult("ok", {"m": m, "n": n, "c": c, "value": value}, cert)


def _cmd_cusps(args, cfg, cert):
    reps = gamma0.cusps(args.N)
    payload = {
        "N": args.N,
        "index": gamma0.index(args.N),
        "cusps": [{"a": r.a, "c": r.c, "width": r.width} for r in reps],
    }
    cert["arithmetic"] = "exact"
    return CommandResult("ok", payload, cert)


def _cmd_greens(args, cfg, cert):
    k = args.order or 2
    N = args.N
    z = _parse_point(args.z, "--z")
    w = _parse_point(args.tau, "--tau")
    value = greens.green_eval(k, N, z, w, cfg)
    cap = float(cfg.cutoff("green_cap", 20_000.0))
    doubled = greens.green_eval(k, N, z, w, cfg.with_cutoffs(green_cap=2.0 * cap))
    drift = abs(value - doubled)
    tol = _tolerance(cfg, value, floor=100.0 / cap)
    cert.update(distance_cap=cap, refinement_drift=drift, tolerance=tol)
    status = "ok" if drift <= tol else "fail"
    return CommandResult(status, {"k": k, "N": N, "value": value}, cert)


def _cmd_f_class(args, cfg, cert):
    k = args.order or 2
    D = args.N
    idx = args.n
    tau = _parse_point(args.z, "--z")
    classes = greens.reduced_forms(D)
    if not 0 <= idx < len(classes):
        raise UsageError(f"--n must index a class of discriminant -{D} "
                         f"(0..{len(classes) - 1})")
    cls = classes[idx]
    value, tail = greens._f_class_with_tail(k, cls, tau, cfg)
    bound = int(cfg.cutoff("lattice_bound"))
    tol = max(0.05 * abs(value), cfg.abs_tol)
    cert.update(lattice_bound=bound, half_box_drift=tail, tolerance=tol)
    status = "ok" if tail <= tol else "fail"
    payload = {"k": k, "discriminant": -D, "representative": list(cls.rep),
               "value": value}
    return CommandResult(status, payload, cert)


# -- selftest -----------------------------------------------------------------

def _check(name, fn):
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:        # a crash is a failing check, not a crash
        ok, detail = False, {"exception": f"{type(exc).__name__}: {exc}"}
    detail["seconds"] = round(time.perf_counter() - t0, 2)
    return {"name": name, "status": "ok" if ok else "fail", "detail": detail}


def _selftest_denominator():
    bad = qseries.denominator_check(5, 5).nonzero()
    return not bad, {"nonzero_differences": len(bad)}


def _selftest_akn():
    ok, first = qseries.akn_check(10)
    return bool(ok), {"first_failure": None if ok else list(first)}


def _selftest_cross_route():
    cfg = DEFAULT_CONFIG.with_bits(256)
    worst = 0.0
    for z, tau in ((2j, 3j), (0.5 + 2j, 4j), (1j + 1.0 / 3.0, 3j)):
        a = polar.H_star(1, z, tau, route="qexp", cfg=cfg)
        b = polar.H_star(1, z, tau, route="level1", cfg=cfg)
        worst = max(worst, abs(complex(a - b)))
    return worst <= 1e-8, {"max_route_delta": worst}


def _selftest_ramanujan():
    cfg = DEFAULT_CONFIG.with_cutoffs(norm_bound=30_000)
    worst = 0.0
    for n in range(1, 11):
        num = mero.ramanujan_expansion_1overE4(n, cfg)
        ex = float(mero.beta_exact(n))
        worst = max(worst, abs(num - ex) / abs(ex))
    return worst <= 1e-8, {"max_relative_error": worst}


def _selftest_polar_principal():
    cfg = DEFAULT_CONFIG.with_cutoffs(lattice_bound=100)

    def sampler(t):
        return polar.H_star(1, 2j, t, route="level1", cfg=cfg)

    res = polar.contour_residue(sampler, 2j, 0.05)
    res_err = abs(res - (-1.0 / (2j * math.pi)))

    def psamp(t):
        return polar.psi_series(4, -1, 1, 2j, t, cfg)

    pair = polar.elliptic_extract(psamp, 2j, 4, (0.10,), (-1,), cfg,
                                  samples=16, meromorphic=True)
    mode_err = abs(pair.plus(-1) - 2.0)
    detail = {"residue_error": res_err, "mode_error": mode_err}
    return res_err <= 1e-6 and mode_err <= 1e-4, detail


def _cmd_selftest(args, cfg, cert):
    level = args.route or "quick"
    if level not in ("quick", "full"):
        raise UsageError(f"selftest level must be quick or full, got {level!r}")
    checks = [
        ("denominator_identity", _selftest_denominator),
        ("akn_identity", _selftest_akn),
    ]
    if level == "full":
        checks += [
            ("h_star_cross_route", _selftest_cross_route),
            ("ramanujan_pipeline", _selftest_ramanujan),
            ("polar_principal_part", _selftest_polar_principal),
        ]
    results = [_check(name, fn) for name, fn in checks]
    ok = all(r["status"] == "ok" for r in results)
    cert["level"] = level
    payload = {"level": level, "checks": results,
               "passed": sum(r["status"] == "ok" for r in results),
               "total": len(results)}
    return CommandResult("ok" if ok else "fail", payload, cert)


# -- parser and dispatch ------------------------------------------------------

def _add_common(p, *, N=False, n=False, z=False, tau=False, order=None,
                route=False):
    if N:
        p.add_argument("--N", type=int, default=1)
    if n:
        p.add_argument("--n", type=int, default=1)
    if z:
        p.add_argument("--z")
    if tau:
        p.add_argument("--tau")
    if order is not None:
        p.add_argument("--order", type=int, default=order)
    if route:
        p.add_argument("--route")
    p.add_argument("--prec", type=int)
    p.add_argument("--cutoff", action="append", metavar="NAME=VALUE")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="maasskit",
        description="Hecke systems, polar harmonic Maass forms, and higher "
                    "Green's functions from the command line.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qexp", help="exact q-expansion of the level-1 system")
    _add_common(p, n=True, order=16)
    p.set_defaults(fn=_cmd_qexp)

    p = sub.add_parser("verify-denominator", help="two-variable product identity, exact")
    _add_common(p, order=5)
    p.set_defaults(fn=_cmd_verify_denominator)

    p = sub.add_parser("verify-akn", help="generating identity in Z[X][[q]], exact")
    _add_common(p, order=10)
    p.set_defaults(fn=_cmd_verify_akn)

    p = sub.add_parser("compute-j", help="value of the level-N system at an interior point")
    _add_common(p, N=True, n=True, z=True, route=True)
    p.set_defaults(fn=_cmd_compute_j, needs_z=True)

    p = sub.add_parser("compute-j-cusp", help="constant term of the system at a cusp")
    _add_common(p, N=True, n=True, z=True)
    p.set_defaults(fn=_cmd_compute_j_cusp)

    p = sub.add_parser("compute-H", help="weight-2 polar form H*_{N,z}(tau)")
    _add_common(p, N=True, z=True, tau=True, route=True)
    p.set_defaults(fn=_cmd_compute_H, needs_z=True, needs_tau=True)

    p = sub.add_parser("e2star", help="harmonic weight-2 Eisenstein value")
    _add_common(p, N=True, z=True, tau=True, route=True)
    p.set_defaults(fn=_cmd_e2star, needs_tau=True)

    p = sub.add_parser("ramanujan-beta", help="1/E4 coefficient, exact or via the meromorphic expansion")
    _add_common(p, n=True, route=True)
    p.set_defaults(fn=_cmd_ramanujan_beta)

    p = sub.add_parser("kloosterman", help="classical Kloosterman sum S(m,n;c)")
    p.add_argument("--n", type=int, action="append")
    p.add_argument("--order", type=int, help="modulus c")
    p.add_argument("--prec", type=int)
    p.add_argument("--cutoff", action="append", metavar="NAME=VALUE")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(fn=_cmd_kloosterman)

    p = sub.add_parser("cusps", help="inequivalent cusps of Gamma_0(N) with widths")
    _add_common(p, N=True)
    p.set_defaults(fn=_cmd_cusps)

    p = sub.add_parser("greens", help="higher Green's function at a point pair")
    _add_common(p, N=True, z=True, tau=True, order=2)
    p.set_defaults(fn=_cmd_greens, needs_z=True, needs_tau=True)

    p = sub.add_parser("f-class", help="weight-k class form value")
    _add_common(p, N=True, n=True, z=True, order=2)
    p.set_defaults(fn=_cmd_f_class, needs_z=True)
    p.set_defaults(n=0)

    p = sub.add_parser("selftest", help="acceptance checks (--route quick|full)")
    _add_common(p, route=True)
    p.set_defaults(fn=_cmd_selftest)

    return ap


def run(argv) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        code = exc.code or 0
        return 2 if code else 0
    t0 = time.perf_counter()
    fmt = getattr(args, "format", "json")
    try:
        if getattr(args, "needs_z", False) and not args.z:
            raise UsageError("--z is required for this command")
        if getattr(args, "needs_tau", False) and not args.tau:
            raise UsageError("--tau is required for this command")
        cfg, cert = _build_config(args)
        result = args.fn(args, cfg, cert)
    except (UsageError, DomainError) as exc:
        result = CommandResult("error", {"message": str(exc)})
    except (PrecisionError, StabilizationError) as exc:
        result = CommandResult("fail", {"message": str(exc)})
    result.timing = time.perf_counter() - t0
    sys.stdout.write(render(result, fmt))
    sys.stderr.write(f"time_seconds {result.timing:.3f}\n")
    sys.stderr.flush()
    if result.status == "ok":
        return 0
    return 1 if result.status == "fail" else 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))
