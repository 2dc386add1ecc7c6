"""Strongly divisible modules over the divided-power ring S.

A module of rank d is presented by the Frobenius matrix Phi over S (in the
normalisation phi, not the divided phi_r = phi / p^r), an optional
monodromy matrix Nmat (the operator acts on coordinates by x -> Nmat x +
N_S(x) applied entrywise), a basis change C into the adapted filtration
basis, and jumps r_1 <= ... <= r_d.  The top filtration is

    Fil^r = { C y : y_i has filtration valuation >= max(0, r - r_i) },

which automatically contains Fil^r S times the module.  Lower steps are
reconstructed by the same coordinate rule with r replaced by i; on adapted
presentations this agrees with the colon module { x : Fil^(r-i) S x inside
Fil^r } because binomial coefficients with both arguments below p are prime
to p.

Strong divisibility is decided on the d generators gamma_{max(0, r-r_i)}
times the i-th adapted column: modulo the maximal ideal every phi_r image
of a filtration element is a residue-linear combination of those (higher
gamma indices pick up strictly positive p-valuation under phi), so the
image generates exactly when the matrix of those d images is invertible.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    MalformedJumps,
    NotCris,
    NotDivisible,
    NotInFil,
    RecursionBudget,
)
from .matrix import RingMatrix, converges_to_zero, scaled_inverse
from .pd import (
    PDElement,
    eval_f0,
    eval_fpi,
    fil_valuation,
    n_S,
    pd_gamma,
    pd_random_calibrated,
    phi_S,
)


class BreuilModule:
    def __init__(self, amb, d: int, Phi: RingMatrix, Nmat: RingMatrix | None,
                 C: RingMatrix, jumps):
        from .fl import check_jumps

        self.amb = amb
        self.d = d
        self.Phi = Phi
        self.Nmat = Nmat
        self.C = C
        self.jumps = check_jumps(amb, d, jumps)
        if Phi.rows != d or Phi.cols != d or C.rows != d or C.cols != d:
            raise MalformedJumps("matrix dimensions do not match the rank")
        self._C_inv = None

    @property
    def C_inv(self) -> RingMatrix:
        if self._C_inv is None:
            self._C_inv = self.C.invert()
        return self._C_inv

    def fil_threshold(self, i: int, j: int) -> int:
        """Required valuation of coordinate j for membership in Fil^i."""
        return max(0, i - self.jumps[j])


def fil_membership(B: BreuilModule, x, at: int | None = None) -> bool:
    """x (coordinate vector over S) lies in Fil^r."""
    return fil_lower(B, B.amb.r, x, at)


def fil_lower(B: BreuilModule, i: int, x, at: int | None = None) -> bool:
    """Membership in the reconstructed lower step Fil^i."""
    at = B.amb.N_p if at is None else at
    y = B.C_inv.matvec(x)
    return all(fil_valuation(y[j], at) >= B.fil_threshold(i, j) for j in range(B.d))


def fil_lower_colon(B: BreuilModule, i: int, x, at: int | None = None) -> bool:
    """Colon-module form of the same test: gamma_{r-i} * x must lie in Fil^r.

    Agrees with fil_lower on adapted presentations (the gamma shift is by a
    binomial prime to p in the range i <= r <= p-1); kept as a cross-check.
    """
    amb = B.amb
    if i >= amb.r:
        return fil_lower(B, i, x, at)
    g = pd_gamma(amb, amb.r - i)
    return fil_membership(B, tuple(g * c for c in x), at)


def phi_module(B: BreuilModule, x):
    """The Frobenius of the module on coordinates: Phi applied to phi_S(x)."""
    return B.Phi.matvec(tuple(phi_S(c, 0) for c in x))


def phi_r_apply(B: BreuilModule, x):
    """Divided Frobenius phi_r = phi / p^r on Fil^r; division must be exact."""
    amb = B.amb
    if not fil_membership(B, x):
        raise NotInFil("phi_r needs an element of Fil^r")
    img = phi_module(B, x)
    try:
        return tuple(c.div_p_exact(amb.r) for c in img)
    except NotDivisible as exc:
        raise NotDivisible(f"phi(Fil^r) not divisible by p^r: {exc}") from exc


def n_apply(B: BreuilModule, x):
    """Monodromy on coordinates: Nmat x plus the derivation of the coordinates."""
    if B.Nmat is None:
        raise NotCris("module carries no monodromy matrix")
    lin = B.Nmat.matvec(x)
    return tuple(l + n_S(c) for l, c in zip(lin, x))


def fil_generators(B: BreuilModule):
    """The d standard generators gamma_{max(0, r-r_i)} * (C column i)."""
    amb = B.amb
    gens = []
    for i in range(B.d):
        g = pd_gamma(amb, B.fil_threshold(amb.r, i))
        gens.append(tuple(g * c for c in B.C.col(i)))
    return gens


@dataclass
class ValidationReport:
    strongly_divisible: bool
    griffiths: bool | None
    diagram: bool | None
    cris: bool | None

    def all_true(self) -> bool:
        return bool(self.strongly_divisible) and all(
            v is True for v in (self.griffiths, self.diagram, self.cris)
        )


def breuil_validate(B: BreuilModule) -> ValidationReport:
    """Check strong divisibility, transversality, the phi/N square and the
    crystalline condition; N-dependent checks report None when N is absent."""
    amb = B.amb
    at = amb.N_p
    gens = fil_generators(B)
    try:
        images = [phi_r_apply(B, g) for g in gens]
        cols = RingMatrix(B.Phi.ops, [[images[j][i] for j in range(B.d)] for i in range(B.d)])
        strongly = cols.residue_invertible()
    except (NotDivisible, NotInFil):
        strongly = False
        images = None
    if B.Nmat is None:
        return ValidationReport(strongly, None, None, None)

    griffiths = True
    diagram = True
    E = pd_gamma(amb, 1)
    for j, g in enumerate(gens):
        ENg = tuple(E * c for c in n_apply(B, g))
        if not fil_membership(B, ENg, at):
            griffiths = False
            diagram = False
            continue
        if images is None:
            diagram = False
            continue
        try:
            lhs = phi_r_apply(B, ENg)
        except (NotDivisible, NotInFil):
            diagram = False
            continue
        rhs = tuple(amb.c * c for c in n_apply(B, images[j]))
        if not all(a.eq_at(b, at, skip_dirty_top=True) for a, b in zip(lhs, rhs)):
            diagram = False
    cris = all(
        eval_f0(B.Nmat.entries[i][j]).is_zero_at(at)
        for i in range(B.d) for j in range(B.d)
    )
    return ValidationReport(strongly, griffiths, diagram, cris)


def hat_fil_membership(B: BreuilModule, m_jumps, x, n: int,
                       at: int | None = None, m_basis_inv: RingMatrix | None = None) -> bool:
    """The recursively defined filtration through N and evaluation at pi.

    Level 0 is everything; x lies in level n when N(x) lies in level n-1
    and the image of x under u -> pi lies in step n of the given filtration
    on the reduction (jumps m_jumps, optionally after a W-basis change).
    Memoised per call; levels beyond r are refused.
    """
    amb = B.amb
    if n < 0:
        raise RecursionBudget("negative filtration level")
    if n > amb.r:
        raise RecursionBudget(f"level {n} beyond the Hodge bound {amb.r}")
    at = amb.N_p if at is None else at
    cache: dict[tuple[int, int], bool] = {}

    def reduce_vec(vec):
        w = tuple(eval_fpi(c) for c in vec)
        if m_basis_inv is not None:
            w = m_basis_inv.matvec(w)
        return w

    def member(vec, level, key) -> bool:
        if level == 0:
            return True
        hit = cache.get((key, level))
        if hit is not None:
            return hit
        w = reduce_vec(vec)
        ok = all(w[j].is_zero_at(at) for j in range(B.d) if m_jumps[j] < level)
        if ok:
            ok = member(tuple(n_apply(B, vec)), level - 1, key + 1)
        cache[(key, level)] = ok
        return ok

    return member(tuple(x), n, 0)


@dataclass
class BreuilClassification:
    etale: bool
    multiplicative: bool
    unipotent: object


def breuil_bhat(B: BreuilModule) -> RingMatrix:
    """The matrix with Phi * Bhat = p^r I; integrality is asserted."""
    return scaled_inverse(B.Phi, B.amb.r)


def breuil_classify(B: BreuilModule, max_steps: int | None = None) -> BreuilClassification:
    amb = B.amb
    bhat = breuil_bhat(B)
    return BreuilClassification(
        etale=all(j == amb.r for j in B.jumps),
        multiplicative=all(j == 0 for j in B.jumps),
        unipotent=converges_to_zero(bhat, "phi", amb.N_p, max_steps),
    )


def rebase(B: BreuilModule, h: RingMatrix) -> BreuilModule:
    """The same module presented in the basis f h (h in GL_d(S))."""
    h_inv = h.invert()
    phi_h = h.map_entries(lambda x: phi_S(x, 0))
    Phi_new = h_inv @ B.Phi @ phi_h
    C_new = h_inv @ B.C
    Nmat_new = None
    if B.Nmat is not None:
        nh = h.map_entries(n_S)
        Nmat_new = h_inv @ (B.Nmat @ h + nh)
    return BreuilModule(B.amb, B.d, Phi_new, Nmat_new, C_new, B.jumps)


def random_fil_member(B: BreuilModule, rng, n: int, max_val: int = 2):
    """Random element of Fil^n with coefficients kept away from the
    precision boundary (exact zeros or valuation <= max_val)."""
    amb = B.amb
    y = []
    for j in range(B.d):
        t = B.fil_threshold(n, j)
        body = pd_random_calibrated(amb, rng, amb.N_gamma - t - 1, max_val)
        shifted = [amb.ring.zero()] * t + list(body.coeffs[: amb.N_gamma - t])
        y.append(PDElement(amb, shifted[: amb.N_gamma]))
    return B.C.matvec(tuple(y))


def random_vector(B: BreuilModule, rng, max_index: int | None = None, max_val: int = 2):
    """Random coordinate vector with calibrated coefficient valuations."""
    amb = B.amb
    top = amb.N_gamma - 1 if max_index is None else max_index
    return tuple(pd_random_calibrated(amb, rng, top, max_val) for _ in range(B.d))
