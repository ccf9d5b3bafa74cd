"""Command-line entry point.

Exit codes: 0 success, 2 failed precondition, 3 tolerance unachievable,
4 verification failed.  Every JSON document carries a ``config`` echo whose
``argv`` can be fed back through ``cuspfields replay``.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import cuspcore, etaforms, hilbertbound
from .cuspexpand import PlanError, choose_plan, expand_at_cusp, sigma_width
from .numberfield import NumberField
from .recognize import certify_cusp

EXIT_OK, EXIT_PRECONDITION, EXIT_TOLERANCE, EXIT_VERIFY = 0, 2, 3, 4


class Precondition(Exception):
    pass


def _dump(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _emit(args, doc: dict, human: str):
    doc = {**doc, "config": args.echo}
    if args.json is None:
        sys.stdout.write(human.rstrip("\n") + "\n")
    elif args.json == "-":
        sys.stdout.write(_dump(doc))
    else:
        Path(args.json).write_text(_dump(doc))
        sys.stdout.write(human.rstrip("\n") + "\n")


def _table(header: list[str], rows: list[list]) -> str:
    cells = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells)


def _sigma(args) -> cuspcore.IntegerMatrix2x2:
    if getattr(args, "sigma", None):
        sigma = cuspcore.IntegerMatrix2x2.from_list(args.sigma.replace(";", ",").split(","))
    else:
        a, L = cuspcore.parse_cusp(args.cusp)
        sigma = cuspcore.sigma_for_cusp(a, L)
    if sigma.det != 1:
        raise Precondition(f"sigma {sigma} is not in SL_2(Z)")
    return sigma


def cmd_cusps(args):
    cusps = cuspcore.enumerate_cusps(args.level)
    doc = {"N": args.level, "cusps": [c.to_json() for c in cusps]}
    rows = [[c.label, c.width, c.sigma.to_list(), c.field_bound] for c in cusps]
    _emit(args, doc, _table(["cusp", "width", "sigma", "N_prime"], rows))
    return EXIT_OK


def cmd_bound(args):
    sigma = _sigma(args)
    Np = cuspcore.classical_field_bound(args.level, sigma)
    doc = {"N": args.level, "sigma": sigma.to_list(), "N_prime": Np,
           "width": sigma_width(args.level, sigma)}
    _emit(args, doc, f"N' = {Np}")
    return EXIT_OK


def _gens(text: str):
    return [g for g in (p.strip() for p in text.split(",")) if g]


def _load_field(spec: str) -> NumberField:
    return NumberField.from_json(spec)


def cmd_hbound(args):
    F = _load_field(args.field)
    lvl = hilbertbound.HilbertLevel(F, F.ideal(*[F.parse(g) for g in _gens(args.ideal)]),
                                    F.ideal(*[F.parse(g) for g in _gens(args.tmu)]))
    sigma = hilbertbound.FieldMatrix2x2.parse(F, args.sigma)
    uc = hilbertbound.UnitConstraint(args.unit_constraint)
    member = hilbertbound.gamma_mu_member(sigma, lvl.with_level(F.unit_ideal), uc)
    if not member:
        raise Precondition(f"sigma {sigma} is not in Gamma_mu(1)")
    N0 = hilbertbound.field_bound_N0(sigma, lvl, uc)
    supp = hilbertbound.support_ideal(sigma, lvl, uc)
    checked, passed = hilbertbound.sufficiency_sweep(sigma, lvl, args.height, uc)
    doc = {"field": F.name, "N0": N0, "support_ideal_hnf": supp.to_json(),
           "gamma_member": member,
           "checks": {"alpha_checked": checked, "alpha_passed": passed,
                      "local_symbols": hilbertbound.local_symbols(sigma, lvl)}}
    _emit(args, doc, f"N0 = {N0}\nsupport ideal = {supp}\n"
                     f"sufficiency: {passed}/{checked} alpha pass")
    return EXIT_OK


def cmd_corpus_build(args):
    labels = args.label or sorted(etaforms.CORPUS)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for lab in labels:
        rec = etaforms.expand(etaforms.corpus_quotient(lab), args.trunc)
        path = out / f"{lab}.json"
        path.write_text(json.dumps(rec.to_json(), sort_keys=True) + "\n")
        written.append({"label": lab, "path": str(path), "T": args.trunc})
    _emit(args, {"written": written}, "\n".join(w["path"] for w in written))
    return EXIT_OK


def cmd_corpus_list(args):
    rows = []
    for lab in sorted(etaforms.CORPUS):
        eq = etaforms.corpus_quotient(lab)
        rows.append({"label": lab, "N": eq.level, "k": eq.weight, "eta": eq.to_json()})
    _emit(args, {"forms": rows},
          _table(["label", "N", "k", "eta"], [[r["label"], r["N"], r["k"], r["eta"]] for r in rows]))
    return EXIT_OK


def cmd_expand(args):
    f = etaforms.load_form(args.form)
    sigma = _sigma(args)
    plan = choose_plan(f, sigma, args.nmax, args.tol, args.prec, args.period_factor)
    exp = expand_at_cusp(f, sigma, plan)
    doc = exp.to_json()
    rows = [[c["n"], c["re"][:24], c["im"][:24], f"{c['err']:.2e}"] for c in doc["coeffs"]]
    _emit(args, doc, f"{f.label} at {sigma}: width {exp.width}, N' {exp.N_prime}\n"
                     + _table(["n", "re", "im", "err"], rows))
    return EXIT_OK


def _modulus(text):
    return None if text in (None, "auto") else int(text)


def cmd_verify(args):
    f = etaforms.load_form(args.form)
    sigma = _sigma(args)
    exp, rep = certify_cusp(f, sigma, _modulus(args.modulus), args.nmax, args.tol,
                            args.denominator, args.period_factor, args.prec)
    doc = rep.to_json()
    rows = [[n, r.status, r.element or "", f"{r.residual:.1e}"] for n, r in rep.entries]
    _emit(args, doc, f"{f.label} at {sigma} in Q(zeta_{rep.M}): "
                     f"all_recognized={rep.all_recognized}\n"
                     + _table(["n", "status", "value", "residual"], rows))
    return EXIT_OK if rep.all_recognized else EXIT_VERIFY


def _sweep_task(task):
    form_json, sigma_list, label, opts = task
    f = etaforms.NewformRecord.from_json(form_json)
    sigma = cuspcore.IntegerMatrix2x2.from_list(sigma_list)
    row = {"form": f.label, "cusp": label, "sigma": sigma_list,
           "width": sigma_width(f.level, sigma),
           "N_prime": cuspcore.classical_field_bound(f.level, sigma)}
    try:
        _, rep = certify_cusp(f, sigma, None, opts["nmax"], opts["tol"],
                              period_factor=opts["period_factor"], prec_bits=opts["prec"])
        row.update(all_recognized=rep.all_recognized, max_residual=rep.max_residual,
                   failures=rep.failures(), error=None)
    except Exception as exc:  # the sweep aggregates, never aborts
        row.update(all_recognized=False, max_residual=None, failures=[],
                   error=f"{type(exc).__name__}: {exc}")
    return row


def _corpus_files(args) -> list[Path | str]:
    if args.corpus:
        return sorted(Path(args.corpus).glob("*.json"))
    if args.forms is not None:
        return list(args.forms)
    return sorted(etaforms.FORMS_DIR.glob("*.json"))


def cmd_sweep(args):
    tasks = []
    opts = {"nmax": args.nmax, "tol": args.tol, "period_factor": args.period_factor,
            "prec": args.prec}
    for spec in _corpus_files(args):
        if isinstance(spec, str):
            f = etaforms.load_form(spec)
        else:
            f = etaforms.NewformRecord.from_json(json.loads(spec.read_text()))
        if args.levels and f.level not in args.levels:
            continue
        fj = f.to_json()
        for c in cuspcore.enumerate_cusps(f.level):
            if args.cusps and c.label not in args.cusps:
                continue
            tasks.append((fj, c.sigma.to_list(), c.label, opts))
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_sweep_task, tasks))
    else:
        rows = [_sweep_task(t) for t in tasks]
    human = _table(["form", "cusp", "width", "N_prime", "all_recognized", "max_residual"],
                   [[r["form"], r["cusp"], r["width"], r["N_prime"], r["all_recognized"],
                     "-" if r["max_residual"] is None else f"{r['max_residual']:.1e}"]
                    for r in rows])
    _emit(args, {"rows": rows}, human)
    return EXIT_OK


def cmd_replay(args):
    data = json.loads(Path(args.config).read_text())
    cfg = data.get("config", data)
    return main(cfg["argv"])


def _add_json(p):
    p.add_argument("--json", nargs="?", const="-", default=None, metavar="PATH",
                   help="emit JSON (to stdout, or to PATH)")


def _add_numeric(p, nmax=10, tol=1e-8):
    p.add_argument("--nmax", type=int, default=nmax)
    p.add_argument("--tol", type=float, default=tol)
    p.add_argument("--prec", type=int, default=None,
                   help="fixed working precision in bits (default: automatic, "
                        "floor from CUSPFIELDS_PREC_BITS)")
    p.add_argument("--period-factor", type=int, default=1)
    p.add_argument("--seed", type=int, default=0, help="recorded for reproducibility; "
                   "all sampling grids are deterministic")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cuspfields",
        description="Cusp arithmetic, field bounds and certified Fourier expansions at cusps.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cusps", help="cusps of Gamma_0(N)")
    p.add_argument("--level", type=int, required=True)
    _add_json(p)
    p.set_defaults(func=cmd_cusps)

    p = sub.add_parser("bound", help="classical field bound N/gcd(cd, N)")
    p.add_argument("--level", type=int, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--sigma")
    g.add_argument("--cusp")
    _add_json(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("hbound", help="N0 and support ideal over a totally real field")
    p.add_argument("--field", required=True, help="field JSON path or builtin name")
    p.add_argument("--ideal", required=True, help="comma-separated generators of the level")
    p.add_argument("--tmu", default="1", help="generators of t_mu O_F")
    p.add_argument("--sigma", required=True, help="a,b,c,d as field expressions")
    p.add_argument("--unit-constraint", default="totally_positive_unit",
                   choices=[u.value for u in hilbertbound.UnitConstraint])
    p.add_argument("--height", type=int, default=8, help="alpha grid height for the checks")
    _add_json(p)
    p.set_defaults(func=cmd_hbound)

    p = sub.add_parser("corpus", help="eta-quotient corpus")
    csub = p.add_subparsers(dest="action", required=True)
    b = csub.add_parser("build", help="write form JSON files")
    b.add_argument("--label", action="append")
    b.add_argument("--trunc", type=int, default=400)
    b.add_argument("--out", default=".")
    _add_json(b)
    b.set_defaults(func=cmd_corpus_build)
    ls = csub.add_parser("list", help="list the built-in eta quotients")
    _add_json(ls)
    ls.set_defaults(func=cmd_corpus_list)

    for name, func, nmax, tol, text in (
            ("expand", cmd_expand, 30, 1e-8, "numerical expansion of f|sigma with error bars"),
            ("verify", cmd_verify, 10, 1e-8, "recognize expansion coefficients in Q(zeta_M)")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--form", required=True, help="form JSON path or corpus label")
        g = p.add_mutually_exclusive_group(required=True)
        g.add_argument("--cusp")
        g.add_argument("--sigma")
        _add_numeric(p, nmax, tol)
        if name == "verify":
            p.add_argument("--modulus", default="auto")
            p.add_argument("--denominator", type=int, default=None)
        _add_json(p)
        p.set_defaults(func=func)

    p = sub.add_parser("sweep", help="verify every cusp of every corpus form")
    p.add_argument("--corpus", help="directory of form JSON files")
    p.add_argument("--forms", nargs="*", help="form paths or labels (overrides --corpus)")
    p.add_argument("--levels", type=int, nargs="*")
    p.add_argument("--cusps", nargs="*", help="restrict to these cusp labels, e.g. oo 1/2")
    p.add_argument("--jobs", type=int, default=1)
    _add_numeric(p)
    _add_json(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("replay", help="re-run from a config echo")
    p.add_argument("config")
    p.set_defaults(func=cmd_replay)
    return ap


def _echo(args, argv) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "json")}
    cfg["argv"] = [a for a in argv]
    return cfg


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.echo = _echo(args, _strip_json(argv))
    try:
        return args.func(args)
    except (PlanError, etaforms.TailBoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except (Precondition, ValueError, KeyError, FileNotFoundError,
            cuspcore.NotUnimodularError, hilbertbound.NotInGammaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


def _strip_json(argv: list[str]) -> list[str]:
    """Drop ``--json [PATH]`` so a replay writes to stdout instead of clobbering files."""
    out, skip = [], False
    for i, a in enumerate(argv):
        if skip:
            skip = False
            continue
        if a == "--json":
            nxt = argv[i + 1] if i + 1 < len(argv) else None
            skip = nxt is not None and (nxt == "-" or not nxt.startswith("-"))
            continue
        if a.startswith("--json="):
            continue
        out.append(a)
    return out + ["--json"] if argv and argv[0] != "replay" else out


if __name__ == "__main__":
    sys.exit(main())
