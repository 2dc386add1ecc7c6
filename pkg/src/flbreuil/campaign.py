"""Verification suites: randomized, seeded, reproducible.

Each suite function takes (amb, rng, cfg) and returns a list of check
records {"check": str, "ok": bool, ...}; a failing record carries enough
data (seed, instance JSON) to replay in isolation.  The campaign runner
fans seeds out (optionally over a process pool), merges results in seed
order and aggregates per-suite counts.  Randomness is derived from
"suite:seed" strings, so runs are reproducible across processes.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from . import breuil as BR
from . import fl as FL
from . import functors as FU
from . import kisin as KI
from . import pd as P
from . import serialize as SER
from .ambient import AmbientParams
from .errors import KernelError
from .matrix import PDOps, RingMatrix, WittOps


def _rec(check, ok, **detail):
    out = {"check": check, "ok": bool(ok)}
    if detail:
        out.update(detail)
    return out


# --- ring laws (criterion 1) ---

def suite_ring_laws(amb, rng, cfg):
    n = cfg.get("samples", 100)
    recs = []

    ok_assoc = ok_dist = ok_hom = ok_inv = ok_frobp = True
    for _ in range(n):
        x, y, z = (amb.ring.random(rng) for _ in range(3))
        ok_assoc &= ((x * y) * z) == (x * (y * z))
        ok_dist &= (x * (y + z)) == (x * y + x * z)
        sx, sy = x.frobenius(), y.frobenius()
        ok_hom &= ((x + y).frobenius() == sx + sy) and ((x * y).frobenius() == sx * sy)
        ok_frobp &= (sx - x ** amb.p).is_zero_at(1)
        u = amb.ring.random_unit(rng)
        ok_inv &= (u.invert() * u).eq_at(amb.ring.one(), u.prec)
    recs.append(_rec("witt-associativity", ok_assoc, n=n))
    recs.append(_rec("witt-distributivity", ok_dist, n=n))
    recs.append(_rec("witt-frobenius-hom", ok_hom, n=n))
    recs.append(_rec("witt-frobenius-mod-p", ok_frobp, n=n))
    recs.append(_rec("witt-invert", ok_inv, n=n))

    at = amb.N_p
    ok_leib = ok_phimul = ok_f0 = ok_filmul = ok_fpi = True
    for _ in range(n):
        x = P.pd_random_calibrated(amb, rng, 5, 2)
        y = P.pd_random_calibrated(amb, rng, 5, 2)
        lhs = P.n_S(x * y)
        rhs = P.n_S(x) * y + x * P.n_S(y)
        ok_leib &= lhs.eq_at(rhs, at, skip_dirty_top=True)
        lhs = P.phi_S(x * y)
        rhs = P.phi_S(x) * P.phi_S(y)
        ok_phimul &= lhs.eq_at(rhs, at, skip_dirty_top=True)
        ok_f0 &= P.eval_f0(P.phi_S(x)).eq_at(P.eval_f0(x).frobenius(), at)
        vx, vy = P.fil_valuation(x, at), P.fil_valuation(y, at)
        ok_filmul &= P.fil_valuation(x * y, at) >= min(vx + vy, amb.N_gamma)
        s = amb.useries([rng.randrange(amb.ring.pk[amb.cap]) for _ in range(4)])
        val = s.coeff(0)
        q = amb.neg_pa
        acc, qp = amb.ring.zero(), amb.ring.one()
        for i in range(4):
            acc = acc + s.coeff(i) * qp
            qp = qp * q
        ok_fpi &= P.eval_fpi(P.embed_sigma(s)).eq_at(acc, at)
    recs.append(_rec("pd-n-derivation", ok_leib, n=n))
    recs.append(_rec("pd-phi-multiplicative", ok_phimul, n=n))
    recs.append(_rec("pd-f0-phi-commutes", ok_f0, n=n))
    recs.append(_rec("pd-fil-multiplicative", ok_filmul, n=n))
    recs.append(_rec("pd-fpi-embed", ok_fpi, n=n))

    # N phi = p phi N on Fil^1, termwise on low gamma indices
    ok_nphi = True
    for i in range(1, min(6, amb.N_gamma)):
        g = P.pd_gamma(amb, i)
        lhs = P.n_S(P.phi_S(g))
        rhs = P.phi_S(P.n_S(g)).mul_p_pow(1)
        ok_nphi &= lhs.eq_at(rhs, at, skip_dirty_top=True)
    recs.append(_rec("pd-nphi-pphin", ok_nphi, n=min(5, amb.N_gamma - 1)))
    return recs


# --- the one-step filtration descent (criterion 2) ---

def easylemma_holds(amb, s, i: int, at: int | None = None) -> bool:
    """The implication: s and N(s) in Fil^i forces s into Fil^(i+1)."""
    at = amb.N_p if at is None else at
    hyp = P.fil_valuation(s, at) >= i and P.fil_valuation(P.n_S(s), at) >= i
    if not hyp:
        return True
    return P.fil_valuation(s, at) >= i + 1


def suite_easylemma(amb, rng, cfg):
    n = cfg.get("samples", 20)
    recs = []
    if amb.r < 2:
        return [_rec("easylemma-vacuous", True, note="r < 2 leaves no levels to test")]
    for i in range(1, amb.r):
        ok_pos = True
        for _ in range(n):
            # exact member of Fil^(i+1): hypothesis holds, conclusion must too
            body = P.pd_random_calibrated(amb, rng, amb.N_gamma - i - 2, 2)
            s = P.PDElement(
                amb, [amb.ring.zero()] * (i + 1) + list(body.coeffs[: amb.N_gamma - i - 1])
            )
            ok_pos &= easylemma_holds(amb, s, i)
        recs.append(_rec(f"easylemma-positive-i{i}", ok_pos, n=n))

        ok_neg = True
        for _ in range(n):
            # unit coefficient at gamma_i: N(s) must visibly leave Fil^i
            tail = P.pd_random_calibrated(amb, rng, amb.N_gamma - i - 2, 2)
            s = P.pd_gamma(amb, i, amb.ring.random_unit(rng)) + P.PDElement(
                amb, [amb.ring.zero()] * (i + 1) + list(tail.coeffs[: amb.N_gamma - i - 1])
            )
            ok_neg &= P.fil_valuation(P.n_S(s), amb.N_p) < i
            ok_neg &= P.fil_valuation(s, amb.N_p) < i + 1
        g = P.pd_gamma(amb, i)
        ok_neg &= P.fil_valuation(P.n_S(g), amb.N_p) == i - 1
        recs.append(_rec(f"easylemma-witness-i{i}", ok_neg, n=n))
    return recs


# --- the two filtrations agree (criteria 3 and 11) ---

def suite_lemfil1(amb, rng, cfg):
    n_elems = cfg.get("elements", 200)
    d = rng.randrange(1, cfg.get("d_max", 3) + 1)
    M = FL.random_fl(amb, rng, d)
    B = FU.fl_to_breuil(M)
    recs = []

    rep = BR.breuil_validate(B)
    recs.append(_rec("mls-image-validates", rep.all_true(),
                     strongly_divisible=rep.strongly_divisible,
                     griffiths=rep.griffiths, diagram=rep.diagram, cris=rep.cris,
                     instance=SER.to_json(M) if not rep.all_true() else None))

    bad = FL.FLModule(amb, d, M.jumps, M.Ftil.mul_p_pow(1))
    rep_bad = BR.breuil_validate(FU.fl_to_breuil(bad))
    recs.append(_rec("mls-notstrong-detected", not rep_bad.strongly_divisible))

    mism = 0
    for k in range(n_elems):
        if k % 2 == 0:
            level = rng.randrange(amb.r + 1)
            x = BR.random_fil_member(B, rng, level)
        else:
            x = BR.random_vector(B, rng, max_index=6)
        for nlev in range(amb.r + 1):
            tens = BR.fil_lower(B, nlev, x)
            hat = BR.hat_fil_membership(B, M.jumps, x, nlev)
            if tens != hat:
                mism += 1
    recs.append(_rec("tensor-vs-hat", mism == 0, elements=n_elems, mismatches=mism,
                     instance=SER.to_json(M) if mism else None))
    return recs


# --- section suite (criteria 4, 5, 6) ---

def suite_section(amb, rng, cfg):
    recs = []
    d = rng.randrange(1, cfg.get("d_max", 3) + 1)

    M = FL.random_fl(amb, rng, d)
    Bfl = FU.fl_to_breuil(M)
    sec = FU.section_compute(Bfl)
    ident = RingMatrix.identity(sec.Bmat.ops, d)
    prec = min(x.prec for row in sec.Bmat.entries for x in row)
    tele = (sec.iterations == 0 and sec.Bmat.eq_at(ident, prec)
            and sec.exact and sec.f0_identity)
    recs.append(_rec("section-telescopes-on-base-change", tele,
                     iterations=sec.iterations,
                     instance=SER.to_json(M) if not tele else None))

    K = KI.random_gls(amb, rng, d)
    B = KI.kisin_to_breuil(K)
    try:
        sec = FU.section_compute(B)
        ok_rate = sec.iterations <= sec.rate_bound
        ok_cert = sec.exact and sec.f0_identity and sec.Bmat.residue_invertible()
        recs.append(_rec("section-rate-bound", ok_rate,
                         iterations=sec.iterations, bound=sec.rate_bound,
                         instance=SER.to_json(K) if not ok_rate else None))
        recs.append(_rec("section-fixed-point-certificate", ok_cert,
                         residual_valuation=sec.residual_valuation,
                         instance=SER.to_json(K) if not ok_cert else None))
        recs.append(_rec("section-first-iterate-claim", sec.B0_claim_ok,
                         instance=SER.to_json(K) if not sec.B0_claim_ok else None))
    except KernelError as exc:
        recs.append(_rec("section-rate-bound", False, error=str(exc),
                         instance=SER.to_json(K)))
    return recs


# --- round trips (criteria 7, 8) ---

def suite_roundtrip_fl(amb, rng, cfg):
    d = rng.randrange(1, cfg.get("d_max", 3) + 1)
    if cfg.get("unipotent_only", amb.r == amb.p - 1):
        M = FL.random_unipotent_fl(amb, rng, d)
    else:
        M = FL.random_fl(amb, rng, d)
    rep = FU.roundtrip_fl(M)
    return [_rec("roundtrip-fl-exact", rep.success,
                 details=rep.details,
                 instance=SER.to_json(M) if not rep.success else None)]


def random_congruent_identity(amb, rng, d: int, support: int = 4) -> RingMatrix:
    """Random g = I + p*(small support) in GL_d(S)."""
    pops = PDOps(amb)
    while True:
        ent = [
            [
                (P.pd_one(amb) if i == j else P.pd_zero(amb))
                + P.pd_random_calibrated(amb, rng, support, 0).mul_p_pow(1)
                for j in range(d)
            ]
            for i in range(d)
        ]
        g = RingMatrix(pops, ent)
        if g.residue_invertible():
            return g


def suite_roundtrip_breuil(amb, rng, cfg):
    d = rng.randrange(1, cfg.get("d_max", 3) + 1)
    M = FL.random_fl(amb, rng, d)
    B = FU.fl_to_breuil(M)
    g = random_congruent_identity(amb, rng, d)
    rep = FU.roundtrip_breuil(B, g, rng=rng)
    converged = rep.matrix_relation != "non-convergent"
    ok = (not converged) or rep.success
    return [_rec("roundtrip-breuil", ok, converged=converged,
                 relation=rep.matrix_relation, details=rep.details,
                 instance=SER.to_json(M) if not ok else None)]


# --- unipotence preservation (criterion 9) ---

def _unipotence_agrees(M) -> tuple[bool, bool, bool]:
    fl_verdict = FL.fl_classify(M).unipotent.zero
    br_verdict = BR.breuil_classify(FU.fl_to_breuil(M)).unipotent.zero
    return fl_verdict == br_verdict, fl_verdict, br_verdict


def suite_unipotence(amb, rng, cfg):
    recs = []
    d = rng.randrange(1, cfg.get("d_max", 3) + 1)
    M = FL.random_fl(amb, rng, d)
    agree, flv, brv = _unipotence_agrees(M)
    recs.append(_rec("unipotence-random", agree, fl=flv, breuil=brv,
                     instance=SER.to_json(M) if not agree else None))
    if cfg.get("crafted", True):
        ok = True
        wops = WittOps(amb)
        for s in range(amb.r + 1):
            M1 = FL.FLModule(amb, 1, (s,), RingMatrix(wops, [[amb.ring.one()]]))
            agree, flv, brv = _unipotence_agrees(M1)
            ok &= agree
            ok &= flv == (s < amb.r)  # rank one: unipotent iff the jump is below r
        swap = FL.FLModule(
            amb, 2, (0, amb.r),
            RingMatrix(wops, [[amb.w(0), amb.w(1)], [amb.w(1), amb.w(0)]]),
        )
        agree, flv, brv = _unipotence_agrees(swap)
        ok &= agree and flv
        recs.append(_rec("unipotence-crafted-family", ok))
    return recs


# --- raw vs adapted top filtration after the Kisin transfer (criterion 10) ---

def suite_kisin_breuil(amb, rng, cfg):
    n_elems = cfg.get("elements", 200)
    d = rng.randrange(1, cfg.get("d_max", 3) + 1)
    K = KI.random_gls(amb, rng, d)
    B = KI.kisin_to_breuil(K)
    raw = KI.kisin_raw_fil_checker(K)
    mism = 0
    for k in range(n_elems):
        if k % 2 == 0:
            x = BR.random_fil_member(B, rng, amb.r)
        else:
            x = BR.random_vector(B, rng, max_index=6)
        if BR.fil_membership(B, x) != raw(x):
            mism += 1
    strongly = BR.breuil_validate(B).strongly_divisible
    return [
        _rec("kisin-breuil-fil-agreement", mism == 0, elements=n_elems,
             mismatches=mism, instance=SER.to_json(K) if mism else None),
        _rec("kisin-breuil-strong-divisibility", strongly,
             instance=SER.to_json(K) if not strongly else None),
    ]


SUITES = {
    "ring-laws": suite_ring_laws,
    "easylemma": suite_easylemma,
    "lemfil1": suite_lemfil1,
    "section": suite_section,
    "roundtrip-fl": suite_roundtrip_fl,
    "roundtrip-breuil": suite_roundtrip_breuil,
    "unipotence": suite_unipotence,
    "kisin-breuil-consistency": suite_kisin_breuil,
}


@dataclass
class Campaign:
    params: dict                      # keyword arguments for AmbientParams
    suites: list
    seeds: list
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        unknown = [s for s in self.suites if s not in SUITES]
        if unknown:
            raise ValueError(f"unknown suites: {unknown}")


@dataclass
class Report:
    lines: list                       # one dict per (suite, seed, check)
    summary: dict                     # suite -> {pass, fail, failing_seeds}

    @property
    def ok(self) -> bool:
        return all(v["fail"] == 0 for v in self.summary.values())


def run_suite_seed(params: dict, suite: str, seed: int, cfg: dict) -> list[dict]:
    amb = AmbientParams(**params)
    rng = random.Random(f"{suite}:{seed}")
    records = SUITES[suite](amb, rng, cfg)
    for rec in records:
        rec["suite"] = suite
        rec["seed"] = seed
    return records


def _worker(args):
    params, suite, seed, cfg = args
    return suite, seed, run_suite_seed(params, suite, seed, cfg)


def run_campaign(campaign: Campaign, jobs: int = 1) -> Report:
    tasks = [
        (campaign.params, suite, seed, campaign.config.get(suite, {}))
        for suite in campaign.suites
        for seed in campaign.seeds
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_worker, tasks))
    else:
        results = [_worker(t) for t in tasks]
    results.sort(key=lambda t: (campaign.suites.index(t[0]), t[1]))
    lines = [rec for _, _, recs in results for rec in recs]
    summary = {}
    for suite in campaign.suites:
        srecs = [r for r in lines if r["suite"] == suite]
        fails = [r for r in srecs if not r["ok"]]
        summary[suite] = {
            "pass": len(srecs) - len(fails),
            "fail": len(fails),
            "failing_seeds": sorted({r["seed"] for r in fails}),
        }
    return Report(lines=lines, summary=summary)
