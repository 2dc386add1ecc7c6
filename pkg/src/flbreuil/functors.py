"""The two functors between Fontaine-Laffaille and strongly divisible
modules, the phi-equivariant section, and the round-trip verifiers.

Forward direction: base change along W(k) -> S.  The Frobenius matrix
becomes Ftil * diag(p^{r_i}) (constant entries), the monodromy is the
derivation alone (zero matrix), and the tensor-product filtration is the
adapted presentation with the same jumps.

Backward direction: reduce mod u and split.  Writing A for the Frobenius
matrix and A_0 = f_0(A) its value at u = 0, the section's matrix is the
limit of

    B_{n+1} = A * phi(B_n) * A_0^{-1},     B_0 = A * A_0^{-1},

algebraically the partial products A phi(A) ... phi^n(A) phi^n(A_0^{-1})
... A_0^{-1}.  p^r A_0^{-1} is integral, every iterate is in GL_d(S) with
f_0(B_n) = I, and the increment B_{n+1} - B_n carries p-valuation at least
p + p^2 + ... + p^{n+1} - r(n+1), which gives the stabilisation bound.  The
first iterate satisfies p (B_0 - I) in u^p Mat(S); that membership is
checked in exact u-divided-power coordinates.

The limit solves B f_0(A) = A phi(B): the fixed-point certificate.  The
whole iteration runs at the internal precision (N_p plus headroom) because
each step divides by p^r once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .breuil import BreuilModule, breuil_validate, fil_lower, rebase
from .errors import (
    A0NotScaledIntegral,
    NonConvergent,
    NotCris,
    NotDirectSummand,
    NotDivisible,
    NotStrong,
    SingularMatrix,
)
from .fl import FLModule, fl_classify, fl_validate
from .matrix import PDOps, RingMatrix, WittOps, scaled_inverse
from .pd import (
    eval_f0,
    eval_fpi,
    fil_valuation,
    in_u_power_ideal,
    n_S,
    pd_from_scalar,
    phi_S,
)


def f0_matrix(M: RingMatrix) -> RingMatrix:
    """Entrywise evaluation at u = 0, landing over W(k)."""
    wops = WittOps(M.ops.amb)
    return RingMatrix(wops, [[eval_f0(x) for x in row] for row in M.entries], M.denom_exp)


def embed_w_matrix(amb, M: RingMatrix) -> RingMatrix:
    """Constants of W(k) viewed inside S."""
    pops = PDOps(amb)
    return RingMatrix(pops, [[pd_from_scalar(amb, x) for x in row] for row in M.entries], M.denom_exp)


def phi_matrix(M: RingMatrix) -> RingMatrix:
    return M.map_entries(lambda x: phi_S(x, 0))


def sigma_matrix(M: RingMatrix) -> RingMatrix:
    return M.map_entries(lambda x: x.frobenius())


def fpi_vector(vec) -> tuple:
    return tuple(eval_fpi(x) for x in vec)


# --- forward functor ---

def fl_to_breuil(M: FLModule) -> BreuilModule:
    """Base change to S: Phi = Ftil diag(p^{r_i}) as constants, N the bare
    derivation, identity adapted basis, unchanged jumps."""
    amb = M.amb
    pops = PDOps(amb)
    wops_mat = M.Ftil
    ent = [
        [pd_from_scalar(amb, wops_mat.entries[i][j].mul_p_pow(M.jumps[j])) for j in range(M.d)]
        for i in range(M.d)
    ]
    return BreuilModule(
        amb=amb,
        d=M.d,
        Phi=RingMatrix(pops, ent),
        Nmat=RingMatrix.zeros(pops, M.d, M.d),
        C=RingMatrix.identity(pops, M.d),
        jumps=M.jumps,
    )


# --- the section ---

@dataclass
class SectionResult:
    Bmat: RingMatrix            # section matrix at internal precision
    iterations: int             # first n with B_{n+1} = B_n mod p^N_p
    residual_valuation: int     # certified valuation of B f0(A) - A phi(B)
    exact: bool                 # residual vanishes at N_p
    B0_claim_ok: bool           # p (B_0 - I) lies in u^p Mat(S)
    f0_identity: bool           # f_0(B_n) = I held at every step
    rate_bound: int             # stabilisation bound from the p-power gain


def _matrix_zero_valuation(M: RingMatrix, cap: int) -> int:
    """Largest k <= cap with M = 0 mod p^k."""
    best = cap
    for row in M.entries:
        for x in row:
            for c in x.coeffs:
                best = min(best, c.valuation())
                if best == 0:
                    return 0
    return best


def section_compute(B: BreuilModule, basis_hint: RingMatrix | None = None,
                    max_steps: int | None = None) -> SectionResult:
    """Compute the unique phi-equivariant splitting of the reduction mod u.

    Runs the fixed-point iteration in the module's own basis (rebased first
    when ``basis_hint`` is given).  On presentations coming from the normal
    form the iteration count never exceeds the rate bound; elsewhere it is
    best effort and NonConvergent is raised after twice the bound plus a
    fixed cushion.
    """
    if basis_hint is not None:
        B = rebase(B, basis_hint)
    amb = B.amb
    at = amb.N_p
    d = B.d
    A = B.Phi
    pops = A.ops
    A0_w = f0_matrix(A)
    try:
        scaled = scaled_inverse(A0_w, amb.r)
    except (NotDivisible, SingularMatrix) as exc:
        raise A0NotScaledIntegral(f"p^r A_0^(-1) is not integral: {exc}") from exc
    A0inv = embed_w_matrix(amb, RingMatrix(A0_w.ops, scaled.entries, denom_exp=amb.r))
    A0_pd = embed_w_matrix(amb, A0_w)
    ident_w = RingMatrix.identity(A0_w.ops, d)
    ident_pd = RingMatrix.identity(pops, d)

    # The iteration runs with the p^r denominators tracked, not cleared:
    # away from the normal-form basis a finite iterate may leave the
    # integral lattice even though the limit never does.  Once the sequence
    # stabilises mod p^N_p the accumulated denominator divides the
    # numerator exactly (limit integral, discrepancy p-deep), so a single
    # final normalisation is always the right move.
    B0 = A @ A0inv
    try:
        claim = all(
            in_u_power_ideal(x.mul_p_pow(1), amb.p, at)
            for row in (B0.normalize() - ident_pd).entries for x in row
        )
    except NotDivisible:
        claim = False  # a non-integral first iterate certainly fails it
    rate = amb.rate_bound()
    if max_steps is None:
        max_steps = 2 * rate + 4

    f0_ok = f0_matrix(B0).eq_at(ident_w, at)
    cur = B0
    iterations = None
    for n in range(max_steps + 1):
        nxt = A @ phi_matrix(cur) @ A0inv
        f0_ok = f0_ok and f0_matrix(nxt).eq_at(ident_w, at)
        if nxt.eq_at(cur, at):
            iterations = n
            cur = nxt
            break
        cur = nxt
    if iterations is None:
        raise NonConvergent(
            f"no stabilisation mod p^{at} within {max_steps + 1} steps "
            f"(rate bound {rate}); expected only away from normal-form bases"
        )
    try:
        cur = cur.normalize()
    except NotDivisible as exc:
        raise NonConvergent(
            f"stabilised iterate failed to normalise: {exc}"
        ) from exc

    residual = cur @ A0_pd - A @ phi_matrix(cur)
    res_val = _matrix_zero_valuation(residual, at)
    return SectionResult(
        Bmat=cur,
        iterations=iterations,
        residual_valuation=res_val,
        exact=res_val >= at,
        B0_claim_ok=claim,
        f0_identity=f0_ok,
        rate_bound=rate,
    )


# --- flag adaptation over W ---

def flag_adapt(amb, gens_by_level) -> tuple[RingMatrix, tuple[int, ...]]:
    """Build a basis adapted to a nested flag of W-spans.

    ``gens_by_level[i]`` generates step i (i = 0 .. r, decreasing spans).
    Processes levels from the top down, reducing each generator against the
    basis found so far; a reduced generator must be zero at precision or
    expose a unit pivot, otherwise the step is not a direct summand.
    Returns (g, jumps) with jumps ascending and g's columns the adapted
    basis in matching order.
    """
    at = amb.N_p
    chosen: list[tuple[list, int, int]] = []   # (vector, pivot row, level)
    d = None
    for level in range(len(gens_by_level) - 1, -1, -1):
        for v in gens_by_level[level]:
            w = list(v)
            if d is None:
                d = len(w)
            for bvec, prow, _ in chosen:
                c = w[prow] * bvec[prow].invert()
                if any(c.coeffs):
                    w = [wi - c * bi for wi, bi in zip(w, bvec)]
            pivot = next((i for i, wi in enumerate(w) if wi.is_unit()), None)
            if pivot is None:
                if all(wi.is_zero_at(min(at, wi.prec)) for wi in w):
                    continue
                raise NotDirectSummand(level)
            chosen.append((w, pivot, level))
    if d is None or len(chosen) != d:
        raise NotDirectSummand(0, "generators do not span the full module")
    order = sorted(range(d), key=lambda t: chosen[t][2])
    wops = WittOps(amb)
    cols = [chosen[t][0] for t in order]
    g = RingMatrix(wops, [[cols[j][i] for j in range(d)] for i in range(d)])
    jumps = tuple(chosen[t][2] for t in order)
    return g, jumps


# --- backward functor ---

@dataclass
class FLTransport:
    """Everything needed to move between a module over S and its reduction."""

    M: FLModule
    section: SectionResult
    g_w: RingMatrix            # adapted basis change over W
    sec_basis_inv: RingMatrix  # (Bmat * embed(g_w))^(-1), over S


def breuil_to_fl(B: BreuilModule, section: SectionResult | None = None,
                 adjoin_zero_n: bool = False) -> FLModule:
    M, _ = breuil_to_fl_with_transport(B, section, adjoin_zero_n)
    return M


def breuil_to_fl_with_transport(B: BreuilModule, section: SectionResult | None = None,
                                adjoin_zero_n: bool = False) -> tuple[FLModule, FLTransport]:
    """Reduction mod u with the filtration pushed through the section.

    Requires the crystalline condition (monodromy inside u times the
    module) and strong divisibility.  A module without monodromy data is
    accepted only with ``adjoin_zero_n``, the crystalline-with-trivial-N
    reading of a Frobenius-only input.
    """
    amb = B.amb
    at = amb.N_p
    if B.Nmat is None:
        if not adjoin_zero_n:
            raise NotCris("no monodromy matrix; pass adjoin_zero_n=True to "
                          "read the module as crystalline with trivial N")
    else:
        if not all(eval_f0(x).is_zero_at(at) for row in B.Nmat.entries for x in row):
            raise NotCris("monodromy does not land in u times the module")
    if not breuil_validate(B).strongly_divisible:
        raise NotStrong("input is not strongly divisible")

    sec = section if section is not None else section_compute(B)
    Bm = sec.Bmat
    Bm_inv = Bm.invert()

    # Frobenius of the reduction: the section basis makes Phi constant.
    conj = Bm_inv @ B.Phi @ phi_matrix(Bm)
    FM = f0_matrix(conj)
    if not conj.eq_at(embed_w_matrix(amb, FM), at):
        raise NonConvergent("conjugated Frobenius is not constant at precision")

    # Filtration of the reduction: images at u = pi of the adapted columns,
    # expressed in the section basis, stepwise by jump threshold.
    T = Bm_inv @ B.C
    gens_by_level = []
    for i in range(amb.r + 1):
        gens_by_level.append(
            [fpi_vector(T.col(j)) for j in range(B.d) if B.jumps[j] >= i]
        )
    g, jumps = flag_adapt(amb, gens_by_level)

    F_new = g.invert() @ FM @ sigma_matrix(g)
    wops = F_new.ops
    try:
        ftil_ent = [
            [wops.div_p_exact(F_new.entries[i][j], jumps[j]) for j in range(B.d)]
            for i in range(B.d)
        ]
    except NotDivisible as exc:
        raise NotStrong(f"divided Frobenius is not integral: {exc}") from exc
    M = FLModule(amb, B.d, jumps, RingMatrix(wops, ftil_ent))
    if not fl_validate(M):
        raise NotStrong("reduction fails strongness")
    sec_basis_inv = (Bm @ embed_w_matrix(amb, g)).invert()
    return M, FLTransport(M=M, section=sec, g_w=g, sec_basis_inv=sec_basis_inv)


def tensor_membership_via_section(transport: FLTransport, x, n: int,
                                  at: int | None = None) -> bool:
    """Membership in the tensor-product filtration read in the section basis."""
    M = transport.M
    at = M.amb.N_p if at is None else at
    z = transport.sec_basis_inv.matvec(x)
    return all(
        fil_valuation(z[j], at) >= max(0, n - M.jumps[j]) for j in range(M.d)
    )


# --- round trips ---

@dataclass
class RoundTripReport:
    direction: str
    jumps_equal: bool
    matrix_relation: str        # "exact" | "failed" | "non-convergent"
    details: dict = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.jumps_equal and self.matrix_relation == "exact"


def roundtrip_fl(M: FLModule, allow_non_unipotent: bool = False) -> RoundTripReport:
    """FL -> S -> FL must reproduce jumps and Ftil on the nose."""
    amb = M.amb
    if not fl_validate(M):
        raise NotStrong("round trip needs a strong module")
    if amb.r == amb.p - 1 and not allow_non_unipotent:
        if not fl_classify(M).unipotent.zero:
            raise NotStrong("with r = p-1 the equivalence needs a unipotent module "
                            "(pass allow_non_unipotent=True to explore)")
    B = fl_to_breuil(M)
    sec = section_compute(B)
    M2 = breuil_to_fl(B, section=sec)
    jumps_equal = M2.jumps == M.jumps
    exact = jumps_equal and M2.Ftil.eq_at(M.Ftil, amb.N_p)
    sec_prec = min(x.prec for row in sec.Bmat.entries for x in row)
    return RoundTripReport(
        direction="fl->S->fl",
        jumps_equal=jumps_equal,
        matrix_relation="exact" if exact else "failed",
        details={
            "iterations": sec.iterations,
            "section_is_identity": sec.Bmat.eq_at(
                RingMatrix.identity(sec.Bmat.ops, M.d), sec_prec
            ),
            "jumps": list(M2.jumps),
        },
    )


def roundtrip_breuil(B: BreuilModule, g: RingMatrix, n_fil_samples: int = 8,
                     rng=None) -> RoundTripReport:
    """S -> FL -> S on a basis twist of a base-changed module.

    ``B`` must come from the forward functor; ``g`` (congruent to the
    identity mod p) re-presents it.  The computed section must equal the
    closed form g^(-1) f_0(g), the monodromy must be carried along
    (Nmat Bmat + N_S(Bmat) = 0), and top-filtration membership must agree
    between the twisted presentation and the tensor filtration read through
    the section.
    """
    amb = B.amb
    at = amb.N_p
    Bt = rebase(B, g)
    expected = g.invert() @ embed_w_matrix(amb, f0_matrix(g))
    try:
        sec = section_compute(Bt)
    except NonConvergent as exc:
        return RoundTripReport("S->fl->S", False, "non-convergent", {"error": str(exc)})
    matrix_exact = sec.Bmat.eq_at(expected, at)

    n_ok = True
    if Bt.Nmat is not None:
        Bm = sec.Bmat
        resid = Bt.Nmat @ Bm + Bm.map_entries(n_S)
        # the top gamma coefficient of N on a truncated element is the one
        # coordinate the dropped tail can reach; eq_at skips it when dirty
        n_ok = resid.eq_at(RingMatrix.zeros(resid.ops, resid.rows, resid.cols), at)

    fil_ok = True
    checked = 0
    try:
        _, transport = breuil_to_fl_with_transport(Bt, section=sec)
        jumps_equal = transport.M.jumps == B.jumps
        if rng is not None:
            from .breuil import random_fil_member, random_vector

            for _ in range(n_fil_samples):
                if rng.random() < 0.5:
                    x = random_fil_member(Bt, rng, amb.r)
                else:
                    x = random_vector(Bt, rng, 6)
                lhs = fil_lower(Bt, amb.r, x, at)
                rhs = tensor_membership_via_section(transport, x, amb.r, at)
                if lhs != rhs:
                    fil_ok = False
                checked += 1
    except (NotStrong, NotDirectSummand, NonConvergent) as exc:
        return RoundTripReport("S->fl->S", False, "failed", {"error": str(exc)})

    ok = matrix_exact and n_ok and fil_ok
    return RoundTripReport(
        direction="S->fl->S",
        jumps_equal=jumps_equal and fil_ok,
        matrix_relation="exact" if ok else "failed",
        details={
            "iterations": sec.iterations,
            "section_matches_closed_form": matrix_exact,
            "n_equivariant": n_ok,
            "fil_samples": checked,
        },
    )
