"""Command-line driver: gkhyp <subcommand> [options].

Exit codes: 0 success, 2 input error, 3 cap exceeded, 4 verification
mismatch (a finding), 5 internal error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ArtifactError, InputError, WrongDimension
from .exactalg import FieldSpec, parse_field

EXIT_OK, EXIT_INPUT, EXIT_CAP, EXIT_MISMATCH, EXIT_INTERNAL = 0, 2, 3, 4, 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(json.dumps({"error": "InputError", "message": message}), file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _common(p: argparse.ArgumentParser, form=True):
    p.add_argument("--field", default="2", help="p or p^m (default 2)")
    p.add_argument("--n", type=int, default=None, help="ambient dimension")
    p.add_argument("--k", type=int, default=3, help="arity of the form (default 3)")
    if form:
        p.add_argument("--form", default=None, help="functional text such as 123+456, or @file")
        p.add_argument("--form-json", default=None, help='coefficient map such as {"123": 1}, or @file')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=None, help="enumeration cap")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--reproducible", action="store_true", help="omit wall time so reruns are byte-identical")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gkhyp", description="Hyperplanes of Grassmannians over finite fields")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="signature of one functional")
    _common(p)

    p = sub.add_parser("census", help="bucket every functional class for small (n, q)")
    _common(p, form=False)

    p = sub.add_parser("canonical", help="print a canonical form")
    _common(p, form=False)
    p.add_argument("--type", required=True, help="T1..T11, variants as T10_1 / T10_2")
    p.add_argument("--lam", type=int, default=None, help="lambda for T10/T11")

    p = sub.add_parser("hexcheck", help="hexagonality and singular-plane test at n = 7")
    _common(p)

    p = sub.add_parser("spreadcheck", help="spread test plus restriction scan, n even")
    _common(p)

    p = sub.add_parser("delta-verify", help="check Delta against hexagonality and the cube identity")
    _common(p, form=False)
    p.add_argument("--mode", choices=("hex", "ehom", "both"), default="both")
    p.add_argument("--forms", type=int, default=1, help="random normalized forms for the hex check")
    p.add_argument("--trials", type=int, default=50, help="trials for the cube identity")
    p.add_argument("--ehom-field", default=str((1 << 61) - 1), help="prime used by the cube identity")
    p.add_argument("--corrupt", action="store_true", help="corrupt one Delta coefficient (canary)")

    p = sub.add_parser("count", help="residue sweep of the flag-counting argument")
    _common(p, form=False)
    p.add_argument("--q", default=None, help="comma separated prime powers")
    p.add_argument("--ns", default=None, help="comma separated even dimensions")

    p = sub.add_parser("oracle", help="kernel method versus brute force for the upper radical")
    _common(p, form=False)
    p.add_argument("--trials", type=int, default=100)
    return ap


# ---------------------------------------------------------------------------
# helpers


def _read_arg(v: str) -> str:
    if v.startswith("@"):
        try:
            return Path(v[1:]).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {v[1:]}: {exc}") from exc
    return v


def _functional(args, F: FieldSpec, required=True):
    from .exterior import parse_functional, parse_functional_json

    if args.form is not None and args.form_json is not None:
        raise InputError("give either --form or --form-json, not both")
    if args.form is not None:
        return parse_functional(_read_arg(args.form), args.n, F, args.k)
    if args.form_json is not None:
        return parse_functional_json(_read_arg(args.form_json), args.n, F, args.k)
    if required:
        raise InputError("a functional is required (--form or --form-json)")
    return None


def _subspace_json(S):
    return [list(r) for r in S.basis]


def _envelope(args, F: FieldSpec | None, result, t0):
    caps = {"cap": args.cap}
    rep = {
        "tool": "artifact",
        "version": __version__,
        "command": args.command,
        "field": str(F) if F is not None else None,
        "seed": args.seed,
        "caps": caps,
        "wall_time": None if args.reproducible else round(time.perf_counter() - t0, 6),
        "result": result,
    }
    return rep


# ---------------------------------------------------------------------------
# subcommands; each returns (result, exit code, csv rows or None)


def cmd_analyze(args, F):
    from .geometry import DEFAULT_CAP
    from .hyperplane import Hyperplane, signature, upper_radical

    f = _functional(args, F)
    H = Hyperplane(f)
    out = {
        "form": f.to_text(),
        "n": H.n,
        "k": H.k,
        "rank": H.rank,
        "lower_radical": _subspace_json(H.lower_radical),
    }
    cap = args.cap if args.cap is not None else DEFAULT_CAP
    if H.k == 3:
        sig = signature(H)
        out.update(
            {
                "poles": sig.poles,
                "depth": int(H.degrees().max()),
                "degree_hist": {str(d): c for d, c in sig.degree_hist},
                "upper_radical_size": sig.upper_radical_size,
                "spread": sig.spread,
                "singular_plane_free": sig.singular_plane_free,
                "type": sig.type if sig.type is not None else "Unknown",
            }
        )
        if H.n == 7:
            from .hyperplane import is_hexagonal

            out["hexagonal"] = is_hexagonal(H)
    else:
        out["upper_radical_size"] = len(upper_radical(H, "auto", cap=cap))
    return out, EXIT_OK, None


def cmd_census(args, F):
    from .census import CENSUS_CAP, census

    if args.n is None:
        raise InputError("--n is required")
    if args.k != 3:
        raise InputError("the census handles k = 3")
    rep = census(args.n, F, cap=args.cap if args.cap is not None else CENSUS_CAP, workers=args.workers)
    res = rep.to_json()
    rows = [("type", "rank", "poles", "upper_radical_size", "spread", "singular_plane_free", "count")]
    for b in rep.buckets:
        s = b.signature
        rows.append((s.type, s.rank, s.poles, s.upper_radical_size, s.spread, s.singular_plane_free, b.count))
    code = EXIT_MISMATCH if rep.spread_partition_failures else EXIT_OK
    return res, code, rows


def cmd_canonical(args, F):
    from .hyperplane import TYPE_RANK, canonical_form, parse_label

    base, _ = parse_label(args.type)
    n = args.n if args.n is not None else TYPE_RANK[base]
    f = canonical_form(args.type, n, F, args.lam)
    return {"type": args.type, "n": n, "form": f.to_text(), "coefficients": f.to_json_map()}, EXIT_OK, None


def cmd_hexcheck(args, F):
    from .hyperplane import TYPE_LABELS, TYPE_RANK, Hyperplane, canonical_form, is_hexagonal, singular_plane_free

    f = _functional(args, F, required=False)
    if f is not None:
        if f.n != 7:
            raise WrongDimension("hexcheck needs n = 7")
        items = [("input", f)]
    else:
        items = [(lab, canonical_form(lab, 7, F)) for lab in TYPE_LABELS if TYPE_RANK[lab] <= 7]
    rows = [("label", "hexagonal", "singular_plane_free", "agree")]
    res = []
    ok = True
    for lab, g in items:
        H = Hyperplane(g)
        hx = is_hexagonal(H)
        spf = singular_plane_free(H)
        ok &= hx == spf
        res.append({"label": lab, "form": g.to_text(), "hexagonal": hx, "singular_plane_free": spf, "agree": hx == spf})
        rows.append((lab, hx, spf, hx == spf))
    return {"checks": res, "all_agree": ok}, EXIT_OK if ok else EXIT_MISMATCH, rows


def cmd_spreadcheck(args, F):
    from .hyperplane import (
        Hyperplane,
        build_canonical_eight,
        is_spread_like,
        normalize_eight,
        random_eigfree,
        pole_degrees,
        sigma_in_hyperplane,
    )
    from .delta import hyperplane_bases
    from .geometry import canonicalize, points_array

    f = _functional(args, F, required=False)
    if f is None:
        if args.n not in (None, 8):
            raise InputError("without --form only the n = 8 random canonical form is available")
        H = build_canonical_eight(normalize_eight(random_eigfree(F, args.seed)))
    else:
        H = Hyperplane(f)
    if H.n % 2:
        raise InputError("spreadcheck needs even n")
    spread = is_spread_like(H)
    out = {"form": H.functional.to_text(), "n": H.n, "spread": spread}
    code = EXIT_OK
    C = points_array(H.n, F)
    bases = hyperplane_bases(C, F)
    if H.n == 8:
        T = H.functional.tensor()
        from .delta import _hex_flags_chunk, _hex_flags_generic

        if F.m == 1:
            flags = np.concatenate([_hex_flags_chunk((T, bases[s : s + 64], F)) for s in range(0, len(C), 64)])
        else:
            flags = _hex_flags_generic(H.functional, bases, F)
        all_hex = bool(flags.all())
        out.update({"hyperplanes": len(C), "hexagonal_restrictions": int(flags.sum()), "all_restrictions_hexagonal": all_hex})
        out["equivalence_holds"] = spread == all_hex
        if spread != all_hex:
            code = EXIT_MISMATCH
    elif spread:
        # every pole of H(V') lies on a spread line inside V'
        from .hyperplane import pullback

        bad = 0
        for c, B in zip(C, bases):
            Vp = canonicalize(B.tolist(), F, H.n)
            lines = sigma_in_hyperplane(H, Vp)
            g = pullback(H.functional, Vp.basis)
            if g.is_zero():
                continue
            deg = pole_degrees(Hyperplane(g))
            pts = points_array(H.n - 1, F)
            for p in pts[deg > 0]:
                v = [0] * H.n
                for a, r in zip(p, Vp.basis):
                    v = [F.add(x, F.mul(int(a), y)) for x, y in zip(v, r)]
                if not any(L.contains_vector(v) for L in lines):
                    bad += 1
        out.update({"hyperplanes": len(C), "pole_coverage_violations": bad})
        if bad:
            code = EXIT_MISMATCH
    return out, code, None


def cmd_delta(args, F):
    from .delta import delta_polynomial, corrupt_delta_text, verify_delta_hexagonal, verify_ehom
    from .exactalg import field_make
    from .hyperplane import normalize_eight, random_eigfree

    D = delta_polynomial()
    if args.corrupt:
        D = delta_polynomial(corrupt_delta_text(D.source, args.seed))
    out = {"delta_sha256": D.sha256}
    code = EXIT_OK
    if args.mode in ("hex", "both"):
        reps = []
        rng = random.Random(args.seed)
        for _ in range(args.forms):
            c8 = normalize_eight(random_eigfree(F, rng.randrange(1 << 30)))
            r = verify_delta_hexagonal(c8, F, delta=D, workers=args.workers)
            reps.append(r.to_json() | {"ok": r.ok})
            if not r.ok:
                code = EXIT_MISMATCH
        out["hexagonal"] = reps
    if args.mode in ("ehom", "both"):
        p = int(args.ehom_field)
        E = field_make(p, large=p > (1 << 16))
        r = verify_ehom(E, args.trials, args.seed, delta=D)
        out["ehom"] = r.to_json() | {"ok": r.ok}
        if not r.ok:
            code = EXIT_MISMATCH
    return out, code, None


def cmd_count(args, F):
    from .counting import SWEEP_Q, residue_check, CSV_COLUMNS

    qs = [int(x) for x in args.q.split(",")] if args.q else list(SWEEP_Q)
    if args.ns:
        ns = [int(x) for x in args.ns.split(",")]
    elif args.n is not None:
        ns = [args.n]
    else:
        ns = list(range(6, 41, 2))
    reps = [residue_check(q, n) for q in qs for n in ns]
    rows = [CSV_COLUMNS] + [r.csv_row() for r in reps]
    return {"reports": [r.to_json() for r in reps]}, EXIT_OK, rows


def cmd_oracle(args, F):
    from .exterior import AlternatingFunctional
    from .hyperplane import Hyperplane, upper_radical
    from math import comb

    if args.n is None:
        raise InputError("--n is required")
    rng = random.Random(args.seed)
    N = comb(args.n, args.k)
    agree = 0
    bad = []
    for t in range(args.trials):
        while True:
            coeffs = tuple(rng.randrange(F.q) for _ in range(N))
            if any(coeffs):
                break
        H = Hyperplane(AlternatingFunctional(args.n, args.k, F, coeffs))
        a = upper_radical(H, "kernel", cap=args.cap)
        b = upper_radical(H, "brute", cap=args.cap)
        if a == b:
            agree += 1
        else:
            bad.append(H.functional.to_text())
    res = {"n": args.n, "k": args.k, "trials": args.trials, "agree": agree, "disagreements": bad}
    return res, EXIT_OK if not bad else EXIT_MISMATCH, None


COMMANDS = {
    "analyze": cmd_analyze,
    "census": cmd_census,
    "canonical": cmd_canonical,
    "hexcheck": cmd_hexcheck,
    "spreadcheck": cmd_spreadcheck,
    "delta-verify": cmd_delta,
    "count": cmd_count,
    "oracle": cmd_oracle,
}


def _emit(args, report, rows):
    if args.format == "csv":
        if rows is None:
            raise InputError(f"{args.command} has no CSV output")
        import csv
        import io

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for r in rows:
            w.writerow(r)
        text = buf.getvalue()
    else:
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    t0 = time.perf_counter()
    try:
        F = parse_field(args.field)
        if args.workers < 1:
            raise InputError("--workers must be positive")
        result, code, rows = COMMANDS[args.command](args, F)
        _emit(args, _envelope(args, F, result, t0), rows)
        return code
    except ArtifactError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return exc.exit_code
    except Exception as exc:  # anything unexpected is an internal failure
        print(json.dumps({"error": "InternalError", "message": f"{type(exc).__name__}: {exc}"}), file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
