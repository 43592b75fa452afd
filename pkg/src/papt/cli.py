"""Command-line front end.

Exit codes: 0 success, 2 invalid flags or input, 3 numerical failure,
4 determinant-space size cap exceeded.  Data goes to stdout (or
``--output``), diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time

from . import fcidump, mbpt, models
from .errors import ContractError, FCIDumpError, PaptError, SizeLimitError
from .oscillator import HOModel, run_oscillator

log = logging.getLogger("papt")

EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_SIZE = 4

CSV_FIELDS = ["order", "method", "correction", "partial_sum", "deviation"]


def _num(v):
    return f"{v:.12g}"


def _dev(v):
    return f"{v:.11e}"


def series_rows(method, series, exact):
    """Formatted per-order rows; the strings are the single source for every output format."""
    rows = []
    sums = series.partial_sums
    for n in range(1, len(series.energies)):
        rows.append({"order": str(n), "method": method, "correction": _num(series.energies[n]),
                     "partial_sum": _num(sums[n]), "deviation": _dev(sums[n] - exact)})
    return rows


def render(rows, meta, fmt):
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()
    if fmt == "json":
        doc = {"metadata": meta,
               "rows": [{"order": int(r["order"]), "method": r["method"],
                         **{k: float(r[k]) for k in CSV_FIELDS[2:]}} for r in rows]}
        return json.dumps(doc, indent=2) + "\n"
    lines = [f"# {k}: {v}" for k, v in meta.items()]
    widths = {k: max(len(k), *(len(r[k]) for r in rows)) if rows else len(k) for k in CSV_FIELDS}
    lines.append("  ".join(k.rjust(widths[k]) for k in CSV_FIELDS))
    for r in rows:
        lines.append("  ".join(r[k].rjust(widths[k]) for k in CSV_FIELDS))
    return "\n".join(lines) + "\n"


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _methods(choice, pair):
    return list(pair) if choice == "both" else [choice]


def cmd_osc(args):
    m = HOModel(n_basis=args.basis, lam=args.lam, damping=0.0 if args.undamped else args.damping,
                quad_points=args.quad)
    rows = []
    meta = {"lambda": args.lam, "n_basis": args.basis, "quad_points": args.quad,
            "damping": m.damping}
    for method in _methods(args.method, ("rspt", "papt")):
        t0 = time.perf_counter()
        run = run_oscillator(m, args.order, method)
        log.info("%s: %d orders in %.3f s", method, args.order, time.perf_counter() - t0)
        meta["exact"] = float(_num(run.exact))
        rows.extend(series_rows(method, run.series, run.exact))
    _emit(render(rows, meta, args.format), args.output)
    return 0


def _frozen(text):
    if not text:
        return ()
    try:
        idx = [int(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad orbital list {text!r}") from None
    if any(i < 1 for i in idx):
        raise argparse.ArgumentTypeError("orbital indices are 1-based")
    return tuple(i - 1 for i in idx)


def _load(args):
    s = fcidump.read(args.fcidump)
    return mbpt.prepare(s, frozen=args.frozen, max_dets=args.max_dets)


def cmd_mbpt(args):
    problem = _load(args)
    meta = {"E_HF": float(_num(problem.e_hf)), "E_FCI": float(_num(problem.e_fci)),
            "n_determinants": len(problem.space), "frozen": [f + 1 for f in problem.frozen]}
    rows = []
    for method in _methods(args.method, ("mp", "papt")):
        t0 = time.perf_counter()
        if method == "mp":
            run = mbpt.mp_series(problem, args.order)
        else:
            run = mbpt.papt_series(problem, args.order, sc_iterations=args.sc_iterations)
            lam = run.lam
            meta["lambda_residual"] = float(_num(lam.residual))
            meta["lambda_discarded_singular_values"] = [float(_num(v)) for v in lam.discarded_singular_values()]
            meta["lambda_smallest_kept_singular_value"] = float(_num(lam.smallest_kept_singular_value()))
        log.info("%s: %d orders in %.3f s", method, args.order, time.perf_counter() - t0)
        rows.extend(series_rows(method, run.series, problem.e_fci))
    _emit(render(rows, meta, args.format), args.output)
    return 0


def cmd_fci(args):
    problem = _load(args)
    meta = {"E_HF": float(_num(problem.e_hf)), "E_FCI": float(_num(problem.e_fci)),
            "n_determinants": len(problem.space), "frozen": [f + 1 for f in problem.frozen]}
    if args.format == "json":
        text = json.dumps({"metadata": meta}, indent=2) + "\n"
    elif args.format == "csv":
        text = "E_HF,E_FCI,n_determinants\n" + f"{_num(problem.e_hf)},{_num(problem.e_fci)},{len(problem.space)}\n"
    else:
        text = "".join(f"{k}: {v}\n" for k, v in meta.items())
    _emit(text, args.output)
    return 0


def cmd_model(args):
    if args.kind == "h2":
        s = models.h2_minimal()
    elif args.kind == "hubbard":
        s = models.hubbard_chain(args.norb, args.nelec, u=args.u)
    elif args.kind == "random":
        s = models.random_molecular(args.norb, args.nelec, seed=args.seed)
    else:
        s = models.stretched_h2(args.r)
    if args.dimer:
        s = fcidump.block_dimer(s, s)
    _emit(fcidump.write(s), args.output)
    return 0


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="papt", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--order", type=_positive, default=7)
        sp.add_argument("--format", choices=("table", "csv", "json"), default="table")
        sp.add_argument("--output", "-o")

    o = sub.add_parser("osc", help="perturbed harmonic oscillator series")
    common(o)
    o.add_argument("--lambda", dest="lam", type=float, default=0.1)
    o.add_argument("--basis", type=int, default=30)
    o.add_argument("--quad", type=int, default=80)
    o.add_argument("--damping", type=float, default=0.125)
    o.add_argument("--undamped", action="store_true", help="pure x**4 perturbation")
    o.add_argument("--method", choices=("rspt", "papt", "both"), default="both")
    o.set_defaults(func=cmd_osc)

    for name, func, helptext in (("mbpt", cmd_mbpt, "MP and adapted series against FCI"),
                                 ("fci", cmd_fci, "FCI ground-state energy")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("fcidump")
        sp.add_argument("--frozen", type=_frozen, default=(),
                        help="comma-separated 1-based canonical orbitals to freeze")
        sp.add_argument("--max-dets", type=_positive, default=mbpt.DEFAULT_MAX_DETS)
        if name == "mbpt":
            common(sp)
            sp.add_argument("--method", choices=("mp", "papt", "both"), default="both")
            sp.add_argument("--sc-iterations", type=int, default=0)
        else:
            sp.add_argument("--format", choices=("table", "csv", "json"), default="table")
            sp.add_argument("--output", "-o")
        sp.set_defaults(func=func)

    m = sub.add_parser("model", help="write a model FCIDUMP")
    m.add_argument("kind", choices=("h2", "hubbard", "random", "stretched"))
    m.add_argument("--norb", type=int, default=6)
    m.add_argument("--nelec", type=int, default=4)
    m.add_argument("--u", type=float, default=1.0)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--r", type=float, default=1.0)
    m.add_argument("--dimer", action="store_true", help="noninteracting dimer of the model")
    m.add_argument("--output", "-o")
    m.set_defaults(func=cmd_model)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except SizeLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (FCIDumpError, ContractError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PaptError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
