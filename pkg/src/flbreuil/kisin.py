"""Finite free Kisin modules of E(u)-height r over the truncated series ring.

A module is its Frobenius matrix A (phi of the basis row vector is the basis
times A).  The height condition asks for B with A B = E(u)^r I; it is
checked by factoring det(A) as a unit times a power of E through repeated
synthetic division, then dividing E^r times the adjugate by that power.

The diagonal normal form constructor takes X, Y in GL_d and jump exponents
and produces A = X * diag(E^{r_i}) * Y; such presentations are the input for
the transfer to the divided-power side, where the filtration becomes an
adapted (coordinate-wise) condition.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import breuil as breuil_mod
from .errors import MissingGLSForm, NotInvertible, SingularMatrix
from .matrix import (
    ConvergenceVerdict,
    PDOps,
    RingMatrix,
    SeriesOps,
    converges_to_zero,
)
from .pd import embed_sigma, fil_valuation
from .series import SigmaSeries, series_from_ints, series_inverse, weierstrass_divide


@dataclass
class KisinModule:
    amb: object
    d: int
    A: RingMatrix
    gls: tuple | None = None  # (X, jumps, Y) when built in normal form


@dataclass
class HeightResult:
    ok: bool
    B: RingMatrix | None = None
    e_power: int | None = None
    witness: dict | None = None


def _E_pow(amb, n: int) -> SigmaSeries:
    out = series_from_ints(amb, [1])
    for _ in range(n):
        out = out * amb.E_series
    return out


def kisin_height_check(amb, A: RingMatrix) -> HeightResult:
    """Decide whether A B = E^r I is solvable over the series ring.

    det(A) must be a unit times E^s with s <= r*d, and every entry of
    E^r * adj(A) must be divisible by det(A).  Remainder tests run at the
    public precision N_p, so the verdict is an at-precision semidecision.
    """
    d = A.rows
    at = amb.N_p
    det = A.det()
    if det.is_zero_at(min(at, det.prec)):
        raise SingularMatrix("det(A) vanishes at working precision")
    q = det
    s = 0
    while not q.is_unit():
        if s >= amb.r * d:
            return HeightResult(False, witness={"reason": "det needs more than r*d factors of E"})
        q2, rem = weierstrass_divide(q)
        if not rem.is_zero_at(min(at, rem.prec)):
            return HeightResult(
                False,
                witness={"reason": "det is not a unit times a power of E",
                         "division": s, "remainder": rem},
            )
        q, s = q2, s + 1
    unit_inv = series_inverse(q)
    adj = A.adjugate()
    Er = _E_pow(amb, amb.r)
    rows = []
    for i in range(d):
        row = []
        for j in range(d):
            y = Er * adj.entries[i][j]
            for k in range(s):
                y, rem = weierstrass_divide(y)
                if not rem.is_zero_at(min(at, rem.prec)):
                    return HeightResult(
                        False,
                        witness={"reason": "entry of E^r * adj(A) not divisible by det",
                                 "entry": (i, j), "division": k, "remainder": rem},
                    )
            row.append(y * unit_inv)
        rows.append(row)
    return HeightResult(True, B=RingMatrix(A.ops, rows), e_power=s)


def kisin_gls_construct(amb, X: RingMatrix, jumps, Y: RingMatrix) -> KisinModule:
    """A = X * diag(E^{r_1}, ..., E^{r_d}) * Y with X, Y invertible."""
    from .fl import check_jumps

    d = X.rows
    jumps = check_jumps(amb, d, jumps)
    if not X.residue_invertible() or not Y.residue_invertible():
        raise NotInvertible("X and Y must lie in GL_d of the series ring")
    ops = X.ops
    lam = RingMatrix(
        ops,
        [[_E_pow(amb, jumps[i]) if i == j else ops.zero() for j in range(d)] for i in range(d)],
    )
    A = X @ lam @ Y
    K = KisinModule(amb, d, A, gls=(X, jumps, Y))
    res = kisin_height_check(amb, A)
    if not res.ok:
        raise SingularMatrix(f"normal-form module failed its height check: {res.witness}")
    return K


@dataclass
class KisinClassification:
    etale: bool
    multiplicative: bool
    unipotent: ConvergenceVerdict


def kisin_classify(K: KisinModule, max_steps: int | None = None) -> KisinClassification:
    """Positional class: etale iff B is invertible, multiplicative iff A is,
    unipotent iff the twisted product of B dies (p, u)-adically."""
    amb = K.amb
    res = kisin_height_check(amb, K.A)
    if not res.ok:
        raise SingularMatrix(f"height check failed: {res.witness}")
    return KisinClassification(
        etale=res.B.residue_invertible(),
        multiplicative=K.A.residue_invertible(),
        unipotent=converges_to_zero(res.B, "phi", amb.N_p, max_steps),
    )


def _embed_matrix(A: RingMatrix) -> RingMatrix:
    amb = A.ops.amb
    pops = PDOps(amb)
    return RingMatrix(pops, [[embed_sigma(x) for x in row] for row in A.entries])


def kisin_to_breuil(K: KisinModule) -> "breuil_mod.BreuilModule":
    """Base change to the divided-power ring along the Frobenius.

    In the basis f = (1 (x) e) * Y^{-1} the Frobenius matrix becomes
    Y * phi(X Lambda) (Y embedded plainly, the rest through phi), and the
    top filtration is adapted with the normal-form jumps: a coordinate
    vector w lies in Fil^r exactly when w_i has filtration valuation at
    least r - r_i.
    """
    if K.gls is None:
        raise MissingGLSForm("transfer needs a diagonal normal form presentation")
    amb = K.amb
    X, jumps, Y = K.gls
    ops = X.ops
    d = K.d
    lam = RingMatrix(
        ops,
        [[_E_pow(amb, jumps[i]) if i == j else ops.zero() for j in range(d)] for i in range(d)],
    )
    XL = _embed_matrix(X @ lam)
    from .pd import phi_S

    phi_XL = XL.map_entries(lambda x: phi_S(x, 0))
    Phi = _embed_matrix(Y) @ phi_XL
    pops = Phi.ops
    return breuil_mod.BreuilModule(
        amb=amb,
        d=d,
        Phi=Phi,
        Nmat=None,
        C=RingMatrix.identity(pops, d),
        jumps=jumps,
    )


def kisin_raw_fil_checker(K: KisinModule):
    """Membership test for the top filtration straight from its definition.

    Returns a callable on coordinate vectors (in the transferred basis f):
    the linearised Frobenius of the element must land in Fil^r S tensor the
    module, i.e. every component of embed(X Lambda Y) * embed(Y)^{-1} * w
    must have filtration valuation at least r.  Independent of the adapted
    shortcut: it inverts embed(Y) by Newton iteration and multiplies out.
    """
    if K.gls is None:
        raise MissingGLSForm("raw membership needs the normal form data")
    amb = K.amb
    X, jumps, Y = K.gls
    ops = X.ops
    d = K.d
    lam = RingMatrix(
        ops,
        [[_E_pow(amb, jumps[i]) if i == j else ops.zero() for j in range(d)] for i in range(d)],
    )
    A_pd = _embed_matrix(X @ lam @ Y)
    Yinv_pd = _embed_matrix(Y).invert()
    full = A_pd @ Yinv_pd

    def check(w, at: int | None = None) -> bool:
        at = amb.N_p if at is None else at
        img = full.matvec(w)
        return all(fil_valuation(x, at) >= amb.r for x in img)

    return check


def random_gls(amb, rng, d: int, deg: int = 4, max_jump: int | None = None, jumps=None) -> KisinModule:
    """Random normal-form module: X, Y are degree <= deg perturbations of
    the identity, resampled until invertible.

    X is unconstrained.  Y's perturbation carries no u-terms of degree
    1 .. p-1: this is the crystalline shape of the normal form.  Only the
    Y factor enters the divided-power side untwisted, and killing its low
    u-degrees is exactly what makes the first section iterate congruent to
    the identity modulo (u^p/p) and the iteration converge at the stated
    rate; a plain degree-one term in Y already breaks both.
    """
    sops = SeriesOps(amb)
    if jumps is None:
        top = amb.r if max_jump is None else max_jump
        jumps = tuple(sorted(rng.randrange(top + 1) for _ in range(d)))

    def rand_entry(crystalline_shape: bool) -> SigmaSeries:
        coeffs = []
        for k in range(deg + 1):
            if crystalline_shape and 1 <= k < amb.p:
                coeffs.append(amb.ring.zero())
            else:
                coeffs.append(amb.ring.random(rng))
        return SigmaSeries(amb, coeffs)

    def rand_gl(crystalline_shape: bool) -> RingMatrix:
        while True:
            ident = RingMatrix.identity(sops, d)
            pert = RingMatrix(
                sops,
                [[rand_entry(crystalline_shape) for _ in range(d)] for _ in range(d)],
            )
            cand = ident + pert
            if cand.residue_invertible():
                return cand

    return kisin_gls_construct(amb, rand_gl(False), jumps, rand_gl(True))
