"""Product-formula error bounds, slice counts and error-budget splitting."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ..compiler.pauli import PauliTerm
from ..compiler.transpile import synthesis_t_count
from ..errors import InfeasibleError, ValidationError

log = logging.getLogger(__name__)

# ||[P,[P,Q]]|| = 4 for anticommuting Paulis, so the 1/24 commutator term gives 1/6
ORDER2_DOUBLE_COEFF = 1.0 / 6.0
ORDER2_DOUBLE_COEFF_LITERAL = 1.0 / 8.0


def _active(terms: Sequence[PauliTerm]) -> list:
    if not terms:
        raise ValidationError("empty Hamiltonian")
    return [t for t in terms if set(t.word) != {"I"}]


def anticommutation_matrix(terms: Sequence[PauliTerm]) -> np.ndarray:
    """Boolean L x L matrix, True where two Pauli words anticommute."""
    if not terms:
        return np.zeros((0, 0), bool)
    xs = np.array([[c in "XY" for c in t.word] for t in terms], dtype=np.int64)
    zs = np.array([[c in "ZY" for c in t.word] for t in terms], dtype=np.int64)
    return ((xs @ zs.T + zs @ xs.T) % 2).astype(bool)


@dataclass(frozen=True)
class CommutatorSums:
    """Coefficient sums entering the product-formula bounds.

    ``pair`` is sum over l<j of C_lj |g_l g_j|.  For order 2 the nesting runs
    from the outermost term of the emitted step (the last term) inwards:
    ``triple`` sums C_{l1 l2 l3} |g1 g2 g3| over l2, l3 after l1 and
    ``double`` sums C_{l1 l2} g1^2 |g2| over l2 after l1.
    """

    pair: float
    triple: float
    double: float
    gamma: float
    n_terms: int


def commutator_sums(terms: Sequence[PauliTerm]) -> CommutatorSums:
    active = _active(terms)
    g = np.abs(np.array([t.coeff for t in active], float))
    ac = anticommutation_matrix(active)
    pair = float(np.sum(np.triu(ac, 1) * np.outer(g, g)))
    # order-2 nesting: the step is palindromic with term 0 in the middle, so
    # the outermost exponential is the last term
    rg = g[::-1]
    rac = ac[::-1, ::-1].astype(float)
    triple = 0.0
    double = 0.0
    L = len(rg)
    for l1 in range(L - 1):
        a1 = rac[l1, l1 + 1:]
        gg = rg[l1 + 1:]
        sub = rac[l1 + 1:, l1 + 1:]
        # C = ac(2,1) and (ac(3,2) xor ac(3,1)); xor(a, b) = a + b - 2ab
        inner = gg @ sub + gg @ a1 - 2.0 * (gg * a1) @ sub
        triple += rg[l1] * float(np.sum(gg * a1 * inner))
        double += rg[l1] ** 2 * float(gg @ a1)
    return CommutatorSums(pair, triple, double, float(np.sum(np.abs([t.coeff for t in terms]))),
                          len(active))


def _order2_k(s: CommutatorSums, literal: bool) -> float:
    c = ORDER2_DOUBLE_COEFF_LITERAL if literal else ORDER2_DOUBLE_COEFF
    return s.triple / 3.0 + c * s.double


def trotter_bound(terms: Sequence[PauliTerm], tau: float, order: int = 1,
                  literal: bool = False) -> float:
    """Upper bound on ||S_p(tau) - exp(-i tau H)|| in the spectral norm."""
    if order not in (1, 2):
        raise ValidationError(f"order must be 1 or 2, got {order}")
    s = commutator_sums(terms)
    if order == 1:
        return tau ** 2 * s.pair
    return abs(tau) ** 3 * _order2_k(s, literal)


def energy_error(s: CommutatorSums, tau: float, order: int, literal: bool = False) -> float:
    """Energy error Delta E_TS[p] per unit time at slice length tau."""
    if order == 1:
        return tau * s.pair
    return tau ** 2 * _order2_k(s, literal)


def trotter_slices(terms: Sequence[PauliTerm], eps1: float, order: int = 1,
                   literal: bool = False) -> Tuple[float, int]:
    """(t, r): t = 2 pi / Gamma and the least r >= 1 meeting Delta E_TS <= eps1."""
    if not eps1 > 0:
        raise ValidationError(f"eps1 must be > 0, got {eps1}")
    if order not in (1, 2):
        raise ValidationError(f"order must be 1 or 2, got {order}")
    s = commutator_sums(terms)
    return _slices(s, eps1, order, literal)


def _slices(s: CommutatorSums, eps1: float, order: int, literal: bool) -> Tuple[float, int]:
    if s.gamma == 0:
        raise ValidationError("Hamiltonian has zero 1-norm")
    t = 2.0 * math.pi / s.gamma
    if order == 1:
        r = math.ceil(t * s.pair / eps1) if s.pair > 0 else 1
    else:
        k = _order2_k(s, literal)
        r = math.ceil(t * math.sqrt(k / eps1)) if k > 0 else 1
    r = max(1, r)
    # guard the ceiling against rounding in either direction
    while r > 1 and energy_error(s, t / (r - 1), order, literal) <= eps1:
        r -= 1
    while energy_error(s, t / r, order, literal) > eps1:
        r += 1
    return t, r


def synthesis_budget(eps2: float, r: int, L: int, gamma: float, order: int = 1) -> float:
    """Per-rotation synthesis error delta for the given eps2 share."""
    for name, v in (("eps2", eps2), ("r", r), ("L", L), ("gamma", gamma)):
        if not v > 0:
            raise ValidationError(f"{name} must be > 0, got {v}")
    n_rot = L if order == 1 else 2 * L - 1
    delta = 2.0 * math.pi * eps2 / (r * n_rot * gamma)
    if delta >= 1.0:
        log.warning("synthesis budget %.3g >= 1; clamped", delta)
        delta = 1.0 - 1e-9
    return delta


def qpe_repetitions(eps_qpe: float) -> int:
    """M = ceil(pi / (2 eps_qpe))."""
    if not eps_qpe > 0:
        raise ValidationError(f"eps_qpe must be > 0, got {eps_qpe}")
    x = math.pi / (2.0 * eps_qpe)
    return max(1, int(math.ceil(x - 1e-12 * x)))


@dataclass(frozen=True)
class BudgetSplit:
    eps1: float
    eps2: float
    eps3: float

    @property
    def total(self) -> float:
        return self.eps1 + self.eps2 + self.eps3


@dataclass(frozen=True)
class TrotterPlan:
    order: int
    t: float
    r: int
    rotations_per_slice: int
    delta: float
    t_per_rotation: int
    qpe_repetitions: int
    t_count: int
    gamma: float
    split: BudgetSplit

    def to_dict(self) -> dict:
        d = asdict(self)
        d["split"] = asdict(self.split)
        return d


def plan_trotter(terms: Sequence[PauliTerm], split: BudgetSplit, order: int = 2,
                 literal: bool = False, _sums: Optional[CommutatorSums] = None) -> TrotterPlan:
    s = _sums or commutator_sums(terms)
    if s.n_terms == 0:
        raise ValidationError("Hamiltonian has only identity terms")
    t, r = _slices(s, split.eps1, order, literal)
    n_rot = s.n_terms if order == 1 else 2 * s.n_terms - 1
    delta = synthesis_budget(split.eps2, r, s.n_terms, s.gamma, order)
    per = synthesis_t_count(delta)
    M = qpe_repetitions(split.eps3)
    return TrotterPlan(order, t, r, n_rot, delta, per, M, M * r * n_rot * per, s.gamma, split)


def optimize_budget(terms: Sequence[PauliTerm], eps_total: float, order: int = 2,
                    grid: int = 100, refine: int = 3, literal: bool = False
                    ) -> Tuple[BudgetSplit, TrotterPlan]:
    """Split eps_total into (eps1, eps2, eps3) minimizing the total T count.

    Scans the simplex on a ``grid`` lattice of fractions, then refines around
    the best cell ``refine`` times with a tenfold finer lattice.
    """
    if not eps_total > 0:
        raise ValidationError(f"eps_total must be > 0, got {eps_total}")
    s = commutator_sums(terms)
    if s.n_terms == 0:
        raise ValidationError("Hamiltonian has only identity terms")
    best: Optional[TrotterPlan] = None

    def consider(f1: float, f2: float) -> None:
        nonlocal best
        f3 = 1.0 - f1 - f2
        if min(f1, f2, f3) <= 0:
            return
        split = BudgetSplit(eps_total * f1, eps_total * f2, eps_total - eps_total * f1 - eps_total * f2)
        if split.eps3 <= 0:
            return
        plan = plan_trotter(terms, split, order, literal, s)
        if best is None or plan.t_count < best.t_count:
            best = plan

    for i in range(1, grid):
        for j in range(1, grid - i):
            consider(i / grid, j / grid)
    if best is None:
        raise InfeasibleError("budget search found no feasible split")
    step = 1.0 / grid
    for _ in range(refine):
        c1, c2 = best.split.eps1 / eps_total, best.split.eps2 / eps_total
        fine = step / 10
        for a in range(-10, 11):
            for b in range(-10, 11):
                consider(c1 + a * fine, c2 + b * fine)
        step = fine
    return best.split, best
