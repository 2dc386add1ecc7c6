"""Fontaine-Laffaille modules in adapted-basis presentation.

A module of rank d is stored through its filtration jumps r_1 <= ... <= r_d
(the basis vector e_i lies in Fil^{r_i} M but not Fil^{r_i+1} M) and the
divided-Frobenius matrix Ftil over W(k), whose column i is phi_{r_i}(e_i) in
the basis e.  The plain Frobenius phi = phi_0 then has matrix

    F = Ftil * diag(p^{r_i}).

With an adapted basis, the sum of the images phi_i(Fil^i M) is exactly the
column span of Ftil (the arithmetic Frobenius is bijective on W), so the
module is strong precisely when Ftil is invertible.  Classification is by
matrix products: V = diag(p^{r - r_i}) * Ftil^{-1} satisfies F V = p^r I,
the module is unipotent exactly when the twisted product of V tends to
zero, and nilpotent exactly when the twisted product of F does.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MalformedJumps, NotStrong
from .matrix import ConvergenceVerdict, RingMatrix, WittOps, converges_to_zero


def check_jumps(amb, d: int, jumps) -> tuple[int, ...]:
    jumps = tuple(int(j) for j in jumps)
    if len(jumps) != d:
        raise MalformedJumps(f"expected {d} jumps, got {len(jumps)}")
    if any(not 0 <= j <= amb.r for j in jumps):
        raise MalformedJumps(f"jumps {jumps} outside [0, {amb.r}]")
    if any(jumps[i] > jumps[i + 1] for i in range(d - 1)):
        raise MalformedJumps(f"jumps {jumps} not sorted ascending")
    return jumps


@dataclass(frozen=True)
class FLModule:
    amb: object
    d: int
    jumps: tuple[int, ...]
    Ftil: RingMatrix

    def __post_init__(self):
        check_jumps(self.amb, self.d, self.jumps)
        if self.Ftil.rows != self.d or self.Ftil.cols != self.d:
            raise MalformedJumps("Ftil dimension does not match the rank")
        if self.Ftil.denom_exp:
            raise MalformedJumps("Ftil must be integral")


@dataclass
class FLClassification:
    etale: bool
    multiplicative: bool
    nilpotent: ConvergenceVerdict
    unipotent: ConvergenceVerdict


def fl_validate(M: FLModule) -> bool:
    """Strongness: the images of the divided Frobenii span the module,
    which for an adapted presentation means Ftil is invertible over W."""
    return M.Ftil.residue_invertible()


def fl_frobenius_matrix(M: FLModule) -> RingMatrix:
    """Matrix of phi = phi_0: column j of Ftil scaled by p^{r_j}."""
    ops = M.Ftil.ops
    cols = M.jumps
    return RingMatrix(
        ops,
        [[ops.mul_p_pow(M.Ftil.entries[i][j], cols[j]) for j in range(M.d)] for i in range(M.d)],
    )


def fl_v_matrix(M: FLModule) -> tuple[RingMatrix, RingMatrix]:
    """Returns (F, V) with F V = V F = p^r I; V = diag(p^{r-r_i}) Ftil^{-1}."""
    if not fl_validate(M):
        raise NotStrong("V-matrix needs an invertible Ftil")
    amb = M.amb
    F = fl_frobenius_matrix(M)
    inv = M.Ftil.invert()
    ops = inv.ops
    V = RingMatrix(
        ops,
        [[ops.mul_p_pow(inv.entries[i][j], amb.r - M.jumps[i]) for j in range(M.d)] for i in range(M.d)],
    )
    return F, V


def fl_classify(M: FLModule) -> FLClassification:
    amb = M.amb
    F, V = fl_v_matrix(M)
    return FLClassification(
        etale=all(j == amb.r for j in M.jumps),
        multiplicative=all(j == 0 for j in M.jumps),
        nilpotent=converges_to_zero(F, "sigma", amb.N_p),
        unipotent=converges_to_zero(V, "sigma", amb.N_p),
    )


def random_fl(amb, rng, d: int, jumps=None) -> FLModule:
    """Random strong module: Ftil sampled in GL_d(W)."""
    if jumps is None:
        jumps = tuple(sorted(rng.randrange(amb.r + 1) for _ in range(d)))
    jumps = check_jumps(amb, d, jumps)
    ops = WittOps(amb)
    while True:
        Ftil = RingMatrix(ops, [[amb.ring.random(rng) for _ in range(d)] for _ in range(d)])
        if Ftil.residue_invertible():
            return FLModule(amb, d, jumps, Ftil)


def random_unipotent_fl(amb, rng, d: int, allow_top_jump: bool = True) -> FLModule:
    """Random strong module screened to be unipotent via the V-product."""
    while True:
        if allow_top_jump:
            jumps = tuple(sorted(rng.randrange(amb.r + 1) for _ in range(d)))
        else:
            jumps = tuple(sorted(rng.randrange(amb.r) for _ in range(d)))
        M = random_fl(amb, rng, d, jumps)
        if fl_classify(M).unipotent.zero:
            return M


def random_flag_preserving(amb, rng, jumps) -> RingMatrix:
    """Random g in GL_d(W) with g_{ij} = 0 unless r_i >= r_j, so the change
    of basis e -> e g preserves every filtration step."""
    d = len(jumps)
    ops = WittOps(amb)
    while True:
        ent = [[amb.ring.random(rng) if jumps[i] >= jumps[j] else amb.ring.zero()
                for j in range(d)] for i in range(d)]
        g = RingMatrix(ops, ent)
        if g.residue_invertible():
            return g


def fl_transport(M: FLModule, g: RingMatrix) -> FLModule:
    """The same module in the basis e g, for flag-preserving g.

    F transforms semilinearly, F' = g^{-1} F sigma(g), and the divided
    matrix follows by the exact p-power shifts; integrality of the shifts
    is the flag condition."""
    amb = M.amb
    sg = g.map_entries(lambda x: x.frobenius())
    ops = g.ops
    mid = RingMatrix(
        ops,
        [
            [
                ops.mul_p_pow(sg.entries[i][j], M.jumps[i] - M.jumps[j])
                if M.jumps[i] >= M.jumps[j]
                else ops.div_p_exact(sg.entries[i][j], M.jumps[j] - M.jumps[i])
                for j in range(M.d)
            ]
            for i in range(M.d)
        ],
    )
    Ftil_new = g.invert() @ M.Ftil @ mid
    return FLModule(amb, M.d, M.jumps, Ftil_new)
