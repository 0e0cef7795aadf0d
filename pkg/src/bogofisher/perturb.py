"""First-order transformed states under a Bogoliubov model.

The transformation is realized as U(theta) = U0 (1 + theta K) + O(theta^2),
where U0 multiplies each basis state by prod_n G_n^occupation and K is
the quadratic anti-Hermitian generator determined by the first-order
coefficients:

    K = sum_mn G_n conj(alpha1_mn) a_m^dag a_n
      + (1/2) sum_pq C_pq a_p^dag a_q^dag
      - (1/2) sum_pq conj(C_pq) a_p a_q,       C_pq = -conj(G_q) conj(beta1_pq).

Sign convention: the coefficient blocks are pinned so that K equals the
theta-derivative of the exact propagator exp(-i theta H) of the matching
quadratic Hamiltonian (see the oracle module).  With beta1_kk = 1 and
trivial phases this gives K|0> = -(1/sqrt 2)|2>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bogoliubov import BogoliubovFirstOrder, ensure_validated
from .errors import BudgetError, UnitarityError
from .fock import StateVector, inner_product

VALIDITY_THRESHOLD = 0.01
CUTOFF_HEADROOM = 2

_ANTIHERM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GeneratorK:
    """Quadratic anti-Hermitian first-order generator.

    ``number[m, n]`` multiplies a_m^dag a_n, ``pair_create[p, q]`` is the
    symmetric coefficient C of (1/2) sum C_pq a_p^dag a_q^dag; the pair
    annihilation block is fixed to -conj(C) by anti-Hermiticity.
    """

    number: np.ndarray
    pair_create: np.ndarray

    def __post_init__(self) -> None:
        number = np.array(self.number, dtype=np.complex128)
        pair = np.array(self.pair_create, dtype=np.complex128)
        for arr in (number, pair):
            arr.flags.writeable = False
        object.__setattr__(self, "number", number)
        object.__setattr__(self, "pair_create", pair)

    @property
    def mode_count(self) -> int:
        return int(self.number.shape[0])

    def antihermiticity_residual(self) -> float:
        """Coefficient-level residual of K^dag = -K (pair blocks exact by form)."""
        num = float(np.max(np.abs(self.number + self.number.conj().T)))
        sym = float(np.max(np.abs(self.pair_create - self.pair_create.T)))
        return max(num, sym)


@dataclass(frozen=True, eq=False)
class FirstOrderPair:
    """Zeroth- and first-order transformed states.

    psi0 is normalized; psi1 generally is not.  <psi0|psi1> is purely
    imaginary because K is anti-Hermitian.
    """

    psi0: StateVector
    psi1: StateVector

    def overlap(self) -> complex:
        return inner_product(self.psi0, self.psi1)


def build_generator(model: BogoliubovFirstOrder) -> GeneratorK:
    """Construct K from a validated model; asserts anti-Hermiticity."""
    ensure_validated(model)
    G = model.G
    number = G[None, :] * model.alpha1.conj()
    raw = -(G.conj()[None, :] * model.beta1.conj())
    pair_create = 0.5 * (raw + raw.T)
    gen = GeneratorK(number, pair_create)
    if gen.antihermiticity_residual() > _ANTIHERM_TOL:
        raise UnitarityError(
            "constructed generator is not anti-Hermitian; "
            "first-order data mixes incompatible sign conventions"
        )
    return gen


def apply_generator(gen: GeneratorK, state: StateVector) -> StateVector:
    """Sparse application of K to a state; over-cutoff terms leak."""
    layout = state.layout
    if gen.mode_count != layout.mode_count:
        raise ValueError("generator and state have different mode counts")
    cutoff = layout.cutoff
    number_entries = [
        (m, n, gen.number[m, n])
        for m in range(gen.mode_count)
        for n in range(gen.mode_count)
        if gen.number[m, n] != 0
    ]
    pair_entries = [
        (p, q, gen.pair_create[p, q])
        for p in range(gen.mode_count)
        for q in range(p, gen.mode_count)
        if gen.pair_create[p, q] != 0
    ]
    amp: dict[tuple[int, ...], complex] = {}
    lost = 0.0

    def accumulate(occ: tuple[int, ...], value: complex) -> None:
        nonlocal lost
        if max(occ) > cutoff:
            lost += abs(value) ** 2
            return
        amp[occ] = amp.get(occ, 0.0) + value

    for occ, c in state.items():
        for m, n, coeff in number_entries:
            if occ[n] == 0:
                continue
            if m == n:
                accumulate(occ, c * coeff * occ[n])
            else:
                factor = math.sqrt(occ[n] * (occ[m] + 1))
                new = list(occ)
                new[n] -= 1
                new[m] += 1
                accumulate(tuple(new), c * coeff * factor)
        for p, q, coeff in pair_entries:
            # creation: for p < q the symmetric pair contributes twice,
            # cancelling the 1/2; the diagonal keeps it.
            if p == q:
                up = c * coeff * 0.5 * math.sqrt((occ[p] + 1) * (occ[p] + 2))
                new = list(occ)
                new[p] += 2
                accumulate(tuple(new), up)
                if occ[p] >= 2:
                    down = -c * coeff.conjugate() * 0.5 * math.sqrt(
                        occ[p] * (occ[p] - 1)
                    )
                    new = list(occ)
                    new[p] -= 2
                    accumulate(tuple(new), down)
            else:
                up = c * coeff * math.sqrt((occ[p] + 1) * (occ[q] + 1))
                new = list(occ)
                new[p] += 1
                new[q] += 1
                accumulate(tuple(new), up)
                if occ[p] >= 1 and occ[q] >= 1:
                    down = -c * coeff.conjugate() * math.sqrt(occ[p] * occ[q])
                    new = list(occ)
                    new[p] -= 1
                    new[q] -= 1
                    accumulate(tuple(new), down)
    return StateVector(layout, amp, leakage=state.leakage + lost)


def free_evolution(model: BogoliubovFirstOrder, state: StateVector) -> StateVector:
    """Multiply each basis term by prod_n G_n^occupation."""
    if model.mode_count != state.layout.mode_count:
        raise ValueError("model and state have different mode counts")
    amp = {}
    for occ, c in state.items():
        phase = 1.0 + 0.0j
        for n, g in zip(occ, model.G):
            if n:
                phase *= g**n
        amp[occ] = c * phase
    return StateVector(state.layout, amp, leakage=state.leakage)


def transform_first_order(
    model: BogoliubovFirstOrder, state: StateVector
) -> FirstOrderPair:
    """Zeroth- and first-order output states for a normalized input.

    Requires cutoff headroom of two above the largest input occupation,
    so the pair-creation terms of psi1 are represented without leakage.
    """
    if not state.is_normalized(1e-9):
        raise ValueError("input state must be normalized")
    needed = state.max_occupation() + CUTOFF_HEADROOM
    if needed > state.layout.cutoff:
        raise BudgetError(
            f"cutoff {state.layout.cutoff} too small: occupations up to "
            f"{state.max_occupation()} require cutoff >= {needed}"
        )
    gen = build_generator(model)
    k_psi = apply_generator(gen, state)
    if k_psi.leakage - state.leakage > 1e-10:
        raise BudgetError(
            f"first-order truncation leakage {k_psi.leakage:.3e} exceeds budget"
        )
    psi0 = free_evolution(model, state)
    psi1 = free_evolution(model, k_psi)
    return FirstOrderPair(psi0, psi1)


def validity_check(theta: float, qfi: float) -> tuple[float, bool]:
    """Perturbative smallness monitor: ratio = theta^2 * qfi / 4.

    The expansion is trusted while the ratio stays below 0.01.
    """
    if qfi < 0:
        raise ValueError("qfi must be non-negative")
    ratio = theta * theta * qfi / 4.0
    return ratio, ratio < VALIDITY_THRESHOLD
