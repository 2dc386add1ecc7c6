"""Command-line workbench: generate instances, apply functors, run suites.

Verbs:
  gen        build a random instance (fl | kisin-gls | breuil-from-fl |
             breuil-from-kisin) and write it as JSON
  apply      apply a functor to a stored instance (mls: FL -> S-module,
             mfl: S-module -> FL)
  section    compute the phi-equivariant section of a stored S-module
  roundtrip  run seeded round-trip checks in one direction
  verify     run verification suites over a seed range
  report     summarise a JSON-lines report file

Exit codes: 0 all checks pass, 1 check failures, 2 usage errors.
Reports are JSON lines (sorted keys, no timing inside the records), so a
fixed (params, seed) pair reproduces byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import campaign as CAM
from . import functors as FU
from . import kisin as KI
from . import serialize as SER
from .ambient import AmbientParams
from .breuil import BreuilModule
from .errors import KernelError
from .fl import FLModule, random_fl
from .kisin import KisinModule, random_gls


def _add_params(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--p", type=int, default=3, help="odd prime (p > 2)")
    ap.add_argument("--f", type=int, default=1, help="residue degree")
    ap.add_argument("--Np", type=int, default=6, help="public p-adic precision")
    ap.add_argument("--Ngamma", type=int, default=None, help="divided-power truncation")
    ap.add_argument("--r", type=int, default=None, help="Hodge range bound (default p-2)")
    ap.add_argument("--a", type=int, default=-1, help="unit a with E(u) = u + p*a")
    ap.add_argument("--headroom", type=int, default=None, help="internal extra precision")


def _amb_kwargs(args) -> dict:
    r = args.r if args.r is not None else max(args.p - 2, 1)
    kw = {"p": args.p, "r": r, "f": args.f, "N_p": args.Np, "a": args.a}
    if args.Ngamma is not None:
        kw["N_gamma"] = args.Ngamma
    if args.headroom is not None:
        kw["headroom"] = args.headroom
    return kw


def _parse_seeds(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError("empty seed list")
    return out


def _parse_jumps(text: str | None, d: int, rng, r: int):
    if text is None:
        return tuple(sorted(rng.randrange(r + 1) for _ in range(d)))
    return tuple(int(x) for x in text.split(","))


def _resolve_out(path: str | None) -> str | None:
    """Relative output paths land in $FLBREUIL_OUT when it is set."""
    import os

    base = os.environ.get("FLBREUIL_OUT")
    if path is None or os.path.isabs(path) or not base:
        return path
    os.makedirs(base, exist_ok=True)
    return os.path.join(base, path)


def _write(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    path = _resolve_out(path)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_gen(args) -> int:
    import random

    amb = AmbientParams(**_amb_kwargs(args))
    rng = random.Random(f"gen:{args.kind}:{args.seed}")
    jumps = _parse_jumps(args.jumps, args.d, rng, amb.r)
    if args.kind == "fl":
        obj = random_fl(amb, rng, args.d, jumps)
    elif args.kind == "kisin-gls":
        obj = random_gls(amb, rng, args.d, jumps=jumps)
    elif args.kind == "breuil-from-fl":
        obj = FU.fl_to_breuil(random_fl(amb, rng, args.d, jumps))
    elif args.kind == "breuil-from-kisin":
        obj = KI.kisin_to_breuil(random_gls(amb, rng, args.d, jumps=jumps))
    else:
        raise ValueError(f"unknown kind {args.kind}")
    _write(SER.to_json(obj), args.out)
    return 0


def cmd_apply(args) -> int:
    obj = SER.load(args.infile)
    if args.functor == "mls":
        if not isinstance(obj, FLModule):
            raise KernelError("apply mls expects an FLModule file")
        out = FU.fl_to_breuil(obj)
    elif args.functor == "mfl":
        if isinstance(obj, KisinModule):
            obj = KI.kisin_to_breuil(obj)
        if not isinstance(obj, BreuilModule):
            raise KernelError("apply mfl expects a BreuilModule (or KisinModule) file")
        out = FU.breuil_to_fl(obj, adjoin_zero_n=args.adjoin_zero_n)
    else:
        raise ValueError(args.functor)
    _write(SER.to_json(out), args.out)
    return 0


def cmd_section(args) -> int:
    obj = SER.load(args.infile)
    if isinstance(obj, KisinModule):
        obj = KI.kisin_to_breuil(obj)
    if not isinstance(obj, BreuilModule):
        raise KernelError("section expects a BreuilModule (or KisinModule) file")
    sec = FU.section_compute(obj)
    amb = obj.amb
    doc = {
        "schema": SER.SCHEMA,
        "kind": "SectionResult",
        "params": SER.params_to_json(amb),
        "data": {
            "Bmat": SER.matrix_to_json(sec.Bmat.truncate(amb.N_p)),
            "iterations": sec.iterations,
            "rate_bound": sec.rate_bound,
            "residual_valuation": sec.residual_valuation,
            "exact": sec.exact,
            "B0_claim_ok": sec.B0_claim_ok,
            "f0_identity": sec.f0_identity,
        },
    }
    _write(doc, args.out)
    return 0


def _emit_report(report: CAM.Report, out_path: str | None, elapsed: float) -> int:
    lines = []
    for rec in report.lines:
        lines.append(json.dumps(rec, sort_keys=True, separators=(",", ":"), default=str))
    text = "\n".join(lines) + "\n"
    out_path = _resolve_out(out_path)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for suite, s in report.summary.items():
        status = "ok" if s["fail"] == 0 else f"FAIL seeds={s['failing_seeds']}"
        print(f"# {suite:28s} pass={s['pass']:4d} fail={s['fail']:3d}  {status}",
              file=sys.stderr)
    print(f"# elapsed {elapsed:.1f}s", file=sys.stderr)
    return 0 if report.ok else 1


def cmd_roundtrip(args) -> int:
    suite = "roundtrip-fl" if args.direction == "fl" else "roundtrip-breuil"
    camp = CAM.Campaign(
        params=_amb_kwargs(args),
        suites=[suite],
        seeds=_parse_seeds(args.seeds),
    )
    t0 = time.time()
    report = CAM.run_campaign(camp, jobs=args.jobs)
    return _emit_report(report, args.out, time.time() - t0)


def cmd_verify(args) -> int:
    suites = args.suite or ["all"]
    if "all" in suites:
        suites = list(CAM.SUITES)
    camp = CAM.Campaign(
        params=_amb_kwargs(args),
        suites=suites,
        seeds=_parse_seeds(args.seeds),
        config={s: ({"samples": args.samples} if s in ("ring-laws", "easylemma") else
                    {"elements": args.samples} if s in ("lemfil1", "kisin-breuil-consistency")
                    else {})
                for s in suites} if args.samples else {},
    )
    t0 = time.time()
    report = CAM.run_campaign(camp, jobs=args.jobs)
    return _emit_report(report, args.out, time.time() - t0)


def cmd_report(args) -> int:
    counts: dict[str, dict] = {}
    with open(args.infile, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            s = counts.setdefault(rec["suite"], {"pass": 0, "fail": 0, "failing": set()})
            if rec["ok"]:
                s["pass"] += 1
            else:
                s["fail"] += 1
                s["failing"].add(rec["seed"])
    bad = 0
    for suite, s in sorted(counts.items()):
        status = "ok" if s["fail"] == 0 else f"FAIL seeds={sorted(s['failing'])}"
        print(f"{suite:28s} pass={s['pass']:4d} fail={s['fail']:3d}  {status}")
        bad += s["fail"]
    return 0 if bad == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flbreuil", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("kind", choices=["fl", "kisin-gls", "breuil-from-fl", "breuil-from-kisin"])
    g.add_argument("--d", type=int, default=2)
    g.add_argument("--jumps", type=str, default=None, help="comma list, ascending")
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--out", type=str, default=None)
    _add_params(g)
    g.set_defaults(fn=cmd_gen)

    a = sub.add_parser("apply", help="apply a functor to a stored instance")
    a.add_argument("functor", choices=["mls", "mfl"])
    a.add_argument("--in", dest="infile", required=True)
    a.add_argument("--out", type=str, default=None)
    a.add_argument("--adjoin-zero-n", action="store_true",
                   help="read a Frobenius-only module as crystalline with trivial N")
    a.set_defaults(fn=cmd_apply)

    s = sub.add_parser("section", help="compute the phi-equivariant section")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--out", type=str, default=None)
    s.set_defaults(fn=cmd_section)

    rt = sub.add_parser("roundtrip", help="seeded round-trip checks")
    rt.add_argument("--direction", choices=["fl", "breuil"], required=True)
    rt.add_argument("--seeds", type=str, default="1..10")
    rt.add_argument("--out", type=str, default=None)
    rt.add_argument("--jobs", type=int, default=1)
    _add_params(rt)
    rt.set_defaults(fn=cmd_roundtrip)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", action="append",
                   choices=sorted(CAM.SUITES) + ["all"],
                   help="repeatable; default all")
    v.add_argument("--seeds", type=str, default="1..10")
    v.add_argument("--samples", type=int, default=None,
                   help="per-seed sample count override")
    v.add_argument("--out", type=str, default=None)
    v.add_argument("--jobs", type=int, default=1)
    _add_params(v)
    v.set_defaults(fn=cmd_verify)

    rp = sub.add_parser("report", help="summarise a JSONL report")
    rp.add_argument("--in", dest="infile", required=True)
    rp.set_defaults(fn=cmd_report)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (KernelError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
