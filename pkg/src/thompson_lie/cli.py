"""Command-line entry point: ``thompson-lie <subcommand> [options]``.

Every subcommand assembles a report with the fields ``command``,
``version``, ``seed``, ``config``, ``checks``, ``result``, ``status`` and
``wall_time``; the report is validated against the shipped schema and
written to ``--json PATH`` (``-`` for stdout).  Only the top-level
``wall_time`` varies between runs with the same arguments.

Exit codes: 0 when all checks pass or a decision is rendered, 1 when a
check fails or the two pictures disagree or stay undecided, 2 on usage
errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from importlib import resources

import numpy as np

from . import __version__
from .checks import Check
from .errors import ConfigurationError, NumericalError, ThompsonLieError, UsageError

SEED_MAX = 2**64 - 1


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------
def report_schema():
    text = (resources.files("thompson_lie") / "data" / "report.schema.json").read_text()
    return json.loads(text)


def validate_report(report):
    """Raise ``jsonschema.ValidationError`` if ``report`` does not match the schema."""
    import jsonschema

    jsonschema.validate(report, report_schema())


def _strip_wall_time(obj):
    if isinstance(obj, dict):
        return {k: _strip_wall_time(v) for k, v in obj.items() if k != "wall_time"}
    if isinstance(obj, list):
        return [_strip_wall_time(v) for v in obj]
    return obj


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps_report(report):
    return json.dumps(report, sort_keys=True, indent=1) + "\n"


def _with_tol(checks, tol):
    """Replace floating thresholds by ``tol``; exact (zero-threshold) checks stay exact."""
    if tol is None:
        return list(checks)
    return [Check(c.name, c.residual, tol) if c.threshold > 0 else c for c in checks]


def _check_status(checks):
    return "pass" if all(c.passed for c in checks) else "fail"


# ---------------------------------------------------------------------------
# input parsing
# ---------------------------------------------------------------------------
def _read_json_arg(value, field):
    """``value`` is a path to a JSON file or inline JSON text."""
    if os.path.isfile(value):
        try:
            with open(value, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"{field}: cannot read {value}: {exc}") from None
    else:
        text = value
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{field}: not a JSON file or JSON text ({exc.msg})") from None


def parse_matrix(value, field="--matrix"):
    """Square complex matrix from JSON: real rows or rows of ``[re, im]`` pairs."""
    from .group_geometry import decode_matrix

    data = _read_json_arg(value, field)
    if isinstance(data, dict):
        if "matrix" not in data:
            raise UsageError(f"{field}: JSON object lacks the 'matrix' field")
        data = data["matrix"]
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise UsageError(f"{field}: entries must be numbers or [re, im] pairs") from None
    if arr.ndim == 2:
        if arr.shape[0] != arr.shape[1] or arr.size == 0:
            raise UsageError(f"{field}: expected a square matrix, got shape {arr.shape}")
        return arr.astype(np.complex128)
    return decode_matrix(data, field)


def _floats(text, field):
    try:
        vals = [float(x) for x in text.replace(" ", "").split(",") if x != ""]
    except ValueError:
        raise UsageError(f"{field}: {text!r} is not a comma-separated list of numbers") from None
    if not vals or not all(np.isfinite(vals)):
        raise UsageError(f"{field}: {text!r} must hold finite numbers")
    return vals


def parse_lambda(text, entry, field="--lambda"):
    """Orbit label from text.

    With ``;`` the text lists the points ``lambda_j`` in catalog
    coordinates, each comma-separated.  Without ``;`` and for groups of
    restricted rank one, the numbers are the side lengths ``r_j``.
    """
    from .thompson import OrbitLabel

    if ";" in text or entry.restricted_rank != 1:
        parts = [p for p in text.split(";") if p.strip()]
        coords = [_floats(p, field) for p in parts]
        if entry.restricted_rank != 1 and len(parts) == 1 and len(coords[0]) != entry.label_length:
            raise UsageError(f"{field}: separate the points of {entry.key} with ';'")
        try:
            return OrbitLabel(entry, tuple(tuple(c) for c in coords))
        except UsageError as exc:
            raise UsageError(f"{field}: {exc}") from None
    sides = _floats(text, field)
    try:
        return OrbitLabel.rank1(entry, sides)
    except UsageError as exc:
        raise UsageError(f"{field}: {exc}") from None


def parse_sweep(path, entry):
    """Orbit labels from a CSV file, one per row.

    Rank one: each row lists side lengths.  Otherwise each row lists the
    coordinates of ``lambda_1, lambda_2, ...`` consecutively.
    Blank rows and rows starting with ``#`` are skipped.
    """
    from .thompson import OrbitLabel

    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise UsageError(f"--sweep: cannot read {path}: {exc}") from None
    labels = []
    for lineno, row in enumerate(rows, start=1):
        cells = [c.strip() for c in row if c.strip()]
        if not cells or cells[0].startswith("#"):
            continue
        field = f"--sweep row {lineno}"
        vals = _floats(",".join(cells), field)
        try:
            if entry.restricted_rank == 1:
                labels.append(OrbitLabel.rank1(entry, vals))
            else:
                m = entry.label_length
                if len(vals) % m:
                    raise UsageError(f"expected a multiple of {m} coordinates, got {len(vals)}")
                labels.append(OrbitLabel(entry, tuple(tuple(vals[i:i + m]) for i in range(0, len(vals), m))))
        except UsageError as exc:
            raise UsageError(f"{field}: {exc}") from None
    if not labels:
        raise UsageError(f"--sweep: {path} holds no rows")
    return labels


def _entry(key):
    from .group_geometry import catalog_entry

    try:
        return catalog_entry(key)
    except ConfigurationError as exc:
        raise UsageError(f"--group: {exc}") from None


def _wb(series, rank):
    from .root_structure import weyl_basis

    try:
        return weyl_basis(series, rank)
    except (UsageError, ConfigurationError, ValueError) as exc:
        raise UsageError(f"--series/--rank: {exc}") from None


# ---------------------------------------------------------------------------
# subcommands; each returns (config, checks, result, status)
# ---------------------------------------------------------------------------
def cmd_roots(args):
    wb = _wb(args.series, args.rank)
    checks = [Check("jacobi", wb.jacobi_residual(), 0),
              Check("antisymmetry", wb.antisymmetry_residual(), 0),
              Check("killing_invariance", wb.killing_invariance_residual(), 0)]
    cfg = {"series": wb.rs.series, "rank": wb.rs.rank}
    return cfg, checks, wb.to_dict(), _check_status(checks)


def cmd_realform(args):
    from .real_forms import DiagramAutomorphism, compact_form_theta, diagram_automorphisms, inner_class, tau_d

    wb = _wb(args.series, args.rank)
    rs = wb.rs
    if args.d:
        try:
            perm = tuple(int(x) - 1 for x in args.d.split(","))
            ds = [DiagramAutomorphism(rs, perm)]
        except ValueError:
            raise UsageError(f"--d: {args.d!r} is not a comma-separated permutation") from None
        if not ds[0].is_involutive:
            raise UsageError(f"--d: {ds[0].describe()} is not involutive")
    else:
        ds = [d for d in diagram_automorphisms(rs) if d.is_involutive]
    theta = compact_form_theta(wb)
    checks, forms = [], []
    for d in ds:
        t = tau_d(wb, d)
        perm = t.root_permutation()
        positive = perm is not None and all(rs.is_positive(perm[a]) for a in rs.positive)
        ic = inner_class(t, theta)
        tag = d.describe()
        checks += [Check(f"tau_d_squared_identity[{tag}]", int(not t.squared_is_identity()), 0),
                   Check(f"tau_d_positive_roots[{tag}]", int(not positive), 0),
                   Check(f"inner_class_recovered[{tag}]", int(ic.perm != d.perm), 0)]
        forms.append({"d": tag, "tau_d": t.label, "inner_class": ic.describe(),
                      "matrix": _sparse(t.matrix)})
    cfg = {"series": rs.series, "rank": rs.rank, "d": args.d}
    return cfg, checks, {"forms": forms}, _check_status(checks)


def _sparse(M):
    """Nonzero entries ``[row, col, re, im]`` of an exact matrix."""
    rows, cols = np.nonzero(M)
    return [[int(r), int(c), float(M[r, c].real), float(M[r, c].imag)] for r, c in zip(rows, cols)]


def cmd_satake(args):
    from .real_forms import (SatakeDiagram, catalog_file_text, check_iwasawa_form, compact_form_theta,
                             extract_satake, satake_catalog, satake_inner_class, tau_d, tau_from_satake)
    from .root_structure import weyl_basis

    if args.file:
        try:
            with open(args.file, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"--file: cannot read {args.file}: {exc}") from None
        name = os.path.splitext(os.path.basename(args.file))[0]
    else:
        if args.name not in satake_catalog():
            raise UsageError(f"--name: unknown diagram {args.name!r}; choose from {sorted(satake_catalog())}")
        text, name = catalog_file_text(args.name), args.name
    try:
        sd = SatakeDiagram.from_json(text, name=name)
    except UsageError as exc:
        raise UsageError(f"{'--file' if args.file else '--name'}: {exc}") from None
    wb = weyl_basis(sd.series, sd.rank)
    d = satake_inner_class(sd, wb.rs)
    td = tau_d(wb, d)
    tau = tau_from_satake(wb, sd)
    rep = check_iwasawa_form(tau, compact_form_theta(wb), wb)
    back = extract_satake(tau)
    checks = [Check("tau_squared_identity", int(not tau.squared_is_identity()), 0),
              Check("satake_round_trip", int(back != sd), 0),
              Check("iwasawa_condition1", int(not rep.condition1), 0),
              Check("iwasawa_condition2", int(not rep.condition2), 0),
              Check("iwasawa_condition3", int(not rep.condition3), 0)]
    result = {"diagram": sd.to_dict(), "name": name, "inner_class": d.describe(),
              "tau_d": {"label": td.label, "matrix": _sparse(td.matrix)},
              "tau": {"label": tau.label, "matrix": _sparse(tau.matrix)},
              "restricted_rank": rep.a_tau_dim, "p_tau_dim": rep.p_tau_dim,
              "rank_zero": rep.rank_zero}
    return {"source": args.file or args.name}, checks, result, _check_status(checks)


def cmd_iwasawa(args):
    from .group_geometry import encode_matrix, iwasawa

    g = parse_matrix(args.matrix)
    det = np.linalg.det(g)
    if abs(det - 1) > 1e-8 * max(1.0, abs(det)):
        raise UsageError(f"--matrix: determinant {det:.6g} is not 1")
    f = iwasawa(g)
    checks = _with_tol([Check("reconstruction", f.residual(g), 1e-10),
                        Check("unitarity", f.unitarity_residual(), 1e-10)], args.tol)
    result = {"b": encode_matrix(f.b), "k": encode_matrix(f.k)}
    return {"n": int(g.shape[0])}, checks, result, _check_status(checks)


def cmd_cartan(args):
    from .group_geometry import cartan_decompose, dagger, encode_matrix, expm_hermitian

    entry = _entry(args.group)
    g = parse_matrix(args.matrix)
    if g.shape != (entry.n, entry.n):
        raise UsageError(f"--matrix: {entry.key} needs {entry.n} x {entry.n}, got {g.shape}")
    try:
        xi, k = cartan_decompose(g, entry, tol=args.tol or 1e-9)
    except UsageError as exc:
        raise UsageError(f"--matrix: {exc}") from None
    n = entry.n
    checks = _with_tol([
        Check("reconstruction", float(np.max(np.abs(expm_hermitian(xi) @ k - g))), 1e-9),
        Check("xi_in_p0", float(np.max(np.abs(entry.dtau(xi) - xi)) + np.max(np.abs(xi - dagger(xi)))), 1e-9),
        Check("k_in_K0", float(max(np.max(np.abs(k @ dagger(k) - np.eye(n))),
                                   entry.real_form_residual(k))), 1e-9)], args.tol)
    result = {"xi": encode_matrix(xi), "k": encode_matrix(k)}
    return {"group": entry.key}, checks, result, _check_status(checks)


def cmd_sigma_check(args):
    from .group_geometry import geometry_suite

    entry = _entry(args.group)
    if args.samples < 1 or args.l < 1:
        raise UsageError("--samples and --l must be positive")
    checks = _with_tol(geometry_suite(entry, samples=args.samples, seed=args.seed, l=args.l), args.tol)
    cfg = {"group": entry.key, "samples": args.samples, "l": args.l}
    return cfg, checks, {"group": entry.to_dict()}, _check_status(checks)


def cmd_thompson(args):
    from .thompson import OptimizerConfig, feasibility_search, rank1_oracle, thompson_compare

    entry = _entry(args.group)
    if bool(args.lambda_) == bool(args.sweep):
        raise UsageError("give exactly one of --lambda and --sweep")
    base = _read_json_arg(args.config, "--config") if args.config else {}
    if not isinstance(base, dict):
        raise UsageError("--config: expected a JSON object of optimizer settings")
    try:
        cfg = OptimizerConfig.from_mapping(base, seed=args.seed, eps_feas=args.tol,
                                           eps_infeas=args.eps_infeas, restarts=args.restarts)
    except ConfigurationError as exc:
        raise UsageError(f"--config: {exc}") from None
    labels = parse_sweep(args.sweep, entry) if args.sweep else [parse_lambda(args.lambda_, entry)]
    checks, rows, ok = [], [], True
    for i, label in enumerate(labels):
        row = {"label": label.to_list()}
        if args.picture == "both":
            cmp = thompson_compare(label, cfg)
            row.update(_strip_wall_time(cmp.to_dict()))
            decisions = {"additive": cmp.additive.decision, "multiplicative": cmp.multiplicative.decision}
            ok = ok and cmp.verdict.startswith("agree")
            row["status"] = "pass" if cmp.verdict.startswith("agree") else (
                "fail" if cmp.verdict == "disagree" else "undecided")
        else:
            rep = feasibility_search(label, args.picture, cfg)
            row.update(_strip_wall_time(rep.to_dict()))
            decisions = {args.picture: rep.decision}
            ok = ok and rep.decision != "undecided"
            row["status"] = "pass" if rep.decision != "undecided" else "undecided"
        if entry.restricted_rank == 1:
            oracle = rank1_oracle(label)
            row["oracle"] = oracle
            wrong = sum(1 for d in decisions.values() if d not in ("undecided", oracle))
            checks.append(Check(f"rank1_oracle[{i}]", wrong, 0))
            if wrong:
                row["status"] = "fail"
        rows.append(row)
    if any(not c.passed for c in checks) or any(r["status"] == "fail" for r in rows):
        status = "fail"
    elif ok:
        status = "pass"
    else:
        status = "undecided"
    config = {"group": entry.key, "picture": args.picture, "optimizer": cfg.to_dict(),
              "lambda": args.lambda_, "sweep": args.sweep}
    return config, checks, {"runs": rows}, status


def cmd_poisson_check(args):
    from .group_geometry import catalog_entry
    from .poisson_family import poisson_suite

    n = {"sl2c": 2, "sl3c": 3}[args.group]
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    forms = ("sl2r", "su11") if n == 2 else ("sl3r", "su21")
    tau_ds = [catalog_entry(k).tau_d for k in forms]
    s_values = tuple(_floats(args.s, "--s"))
    if any(s <= 0 for s in s_values):
        raise UsageError("--s: values must be positive")
    checks = _with_tol(poisson_suite(n=n, samples=args.samples, seed=args.seed,
                                     jacobi_every=args.jacobi_every, s_values=s_values,
                                     tau_ds=tau_ds), args.tol)
    cfg = {"group": args.group, "samples": args.samples, "s": list(s_values),
           "jacobi_every": args.jacobi_every, "tau_d_forms": list(forms)}
    return cfg, checks, {"n": n}, _check_status(checks)


COMMANDS = {
    "roots": cmd_roots,
    "realform": cmd_realform,
    "satake": cmd_satake,
    "iwasawa": cmd_iwasawa,
    "cartan": cmd_cartan,
    "sigma-check": cmd_sigma_check,
    "thompson": cmd_thompson,
    "poisson-check": cmd_poisson_check,
}


# ---------------------------------------------------------------------------
# argument parser
# ---------------------------------------------------------------------------
def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= v <= SEED_MAX:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2**64)")
    return v


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {text!r}") from None
    if not (v > 0 and np.isfinite(v)):
        raise argparse.ArgumentTypeError("must be a positive finite number")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", metavar="PATH", help="write the JSON report here ('-' for stdout)")
    common.add_argument("--seed", type=_seed, default=0, help="RNG seed (default 0)")
    common.add_argument("--tol", type=_positive, default=None,
                        help="numeric tolerance; for thompson this is eps_feas")

    p = argparse.ArgumentParser(prog="thompson-lie",
                                description="Root data, real forms, Iwasawa geometry, polygon "
                                            "feasibility and Poisson checks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    s = sub.add_parser("roots", parents=[common], help="exact structure constants and their identities")
    s.add_argument("--series", required=True, help="A, B, C or D")
    s.add_argument("--rank", type=int, required=True)

    s = sub.add_parser("realform", parents=[common], help="quasi-split real forms tau_d per inner class")
    s.add_argument("--series", required=True)
    s.add_argument("--rank", type=int, required=True)
    s.add_argument("--d", help="1-based diagram permutation, e.g. 3,2,1 (default: all involutive)")

    s = sub.add_parser("satake", parents=[common], help="real form from a Satake diagram")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--file", help="Satake diagram JSON with series, rank, black, arrows")
    g.add_argument("--name", help="shipped diagram, e.g. su31 or sl3r")

    s = sub.add_parser("iwasawa", parents=[common], help="factor g = b k with b in AN and k in SU(n)")
    s.add_argument("--matrix", required=True, help="JSON file or text: real rows or [re, im] pairs")

    s = sub.add_parser("cartan", parents=[common], help="g = exp(xi) k in a catalog real group")
    s.add_argument("--group", required=True)
    s.add_argument("--matrix", required=True)

    s = sub.add_parser("sigma-check", parents=[common], help="sampled Iwasawa/E/sigma identities")
    s.add_argument("--group", required=True)
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--l", type=int, default=3, help="number of factors for sigma^(l)")

    s = sub.add_parser("thompson", parents=[common], help="additive and multiplicative polygon feasibility")
    s.add_argument("--group", required=True)
    s.add_argument("--lambda", dest="lambda_",
                   help="rank one: side lengths r1,r2,...; otherwise points separated by ';'")
    s.add_argument("--sweep", help="CSV file with one label per row")
    s.add_argument("--picture", choices=("both", "additive", "multiplicative"), default="both")
    s.add_argument("--config", help="JSON file or text with optimizer settings")
    s.add_argument("--restarts", type=int)
    s.add_argument("--eps-infeas", type=_positive)

    s = sub.add_parser("poisson-check", parents=[common], help="sampled Poisson identities on AN")
    s.add_argument("--group", required=True, choices=("sl2c", "sl3c"))
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--s", default="0.25,0.5,2", help="scaling parameters for the s-family")
    s.add_argument("--jacobi-every", type=int, default=1, help="check Jacobi on every k-th point")
    return p


def run(argv=None):
    """Execute one command; returns ``(exit_code, report or None)``."""
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2, None
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), None
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2, None
    t0 = time.perf_counter()
    try:
        config, checks, result, status = COMMANDS[args.command](args)
    except (UsageError, ConfigurationError) as exc:
        print(f"thompson-lie {args.command}: error: {exc}", file=sys.stderr)
        return 2, None
    except NumericalError as exc:
        print(f"thompson-lie {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 1, None
    except ThompsonLieError as exc:
        print(f"thompson-lie {args.command}: {exc}", file=sys.stderr)
        return 1, None
    report = _jsonable({
        "command": args.command,
        "version": __version__,
        "seed": args.seed,
        "config": dict(config, tol=args.tol),
        "checks": [c.to_dict() for c in checks],
        "result": _strip_wall_time(result),
        "status": status,
        "wall_time": time.perf_counter() - t0,
    })
    validate_report(report)
    _print_summary(report, sys.stderr if args.json == "-" else sys.stdout)
    if args.json:
        text = dumps_report(report)
        if args.json == "-":
            sys.stdout.write(text)
        else:
            try:
                with open(args.json, "w", encoding="utf-8") as fh:
                    fh.write(text)
            except OSError as exc:
                print(f"thompson-lie: error: --json: cannot write {args.json}: {exc}", file=sys.stderr)
                return 2, report
    return (0 if status == "pass" else 1), report


def _print_summary(report, out):
    for c in report["checks"]:
        print(f"{c['status']:4s}  {c['name']:<36s} {c['residual']:.3e}  (<= {c['threshold']:.1e})", file=out)
    if report["command"] == "thompson":
        for r in report["result"]["runs"]:
            verdict = r.get("verdict") or r.get("decision")
            extra = f"  oracle={r['oracle']}" if "oracle" in r else ""
            print(f"{verdict:<17s} label={r['label']}{extra}", file=out)
    elif report["command"] == "satake":
        res = report["result"]
        print(f"inner class {res['inner_class']}; tau_d {res['tau_d']['label']}; tau {res['tau']['label']}", file=out)
    print(f"status: {report['status']}  ({report['wall_time']:.2f} s)", file=out)


def main(argv=None):
    code, _ = run(argv)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
