"""Brute-force ground truth on the truncated Fock space.

A quadratic Hermitian Hamiltonian

    H = sum_mn h_mn a_m^dag a_n
      + (1/2) sum_pq g_pq a_p^dag a_q^dag + (1/2) sum_pq conj(g_pq) a_p a_q

generates the exact propagator U(theta) = exp(-i theta H), realized by
Hermitian eigendecomposition on the truncated basis (exactly unitary up
to roundoff).  Everything downstream is obtained nonperturbatively:
fidelity-based QFI with Richardson extrapolation, Uhlmann fidelity for
reduced states, finite-difference state and density-operator
derivatives, and Bogoliubov coefficients from the classical 2M x 2M
mode-transformation exponential.

Convention pinned here and mirrored by the perturbative module: the
mode operators transform as a_m -> U^dag a_m U, so the single-mode
squeezing Hamiltonian i(a^2 - a^dag^2)/2 has alpha_kk = cosh(theta),
beta_kk = sinh(theta).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .bogoliubov import BogoliubovFirstOrder, ensure_validated
from .errors import BudgetError, ModelFormatError
from .fock import (
    DENSE_DIM_BUDGET,
    DensityOperator,
    ModeLayout,
    ModeSubset,
    StateVector,
)

DEFAULT_DTHETA_FIRST = 1e-4
DEFAULT_DTHETA_SECOND = 1e-3
DEFAULT_DTHETA_FIDELITY = 1e-3
SHELL_BUDGET = 1e-10

_HERMITIAN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class GeneratorSpec:
    """Coefficients of a quadratic Hermitian Hamiltonian.

    ``h`` is the Hermitian number-conserving block, ``g`` the symmetric
    pair-creation block (its conjugate closes the Hermitian form).
    """

    h: np.ndarray
    g: np.ndarray

    def __post_init__(self) -> None:
        h = np.array(self.h, dtype=np.complex128)
        g = np.array(self.g, dtype=np.complex128)
        if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape != g.shape:
            raise ValueError("h and g must be square matrices of equal dimension")
        scale_h = max(1.0, float(np.max(np.abs(h))) if h.size else 1.0)
        if float(np.max(np.abs(h - h.conj().T))) > _HERMITIAN_TOL * scale_h:
            raise ValueError("h block must be Hermitian")
        scale_g = max(1.0, float(np.max(np.abs(g))) if g.size else 1.0)
        if float(np.max(np.abs(g - g.T))) > _HERMITIAN_TOL * scale_g:
            raise ValueError("g block must be symmetric")
        for arr in (h, g):
            arr.flags.writeable = False
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)

    @property
    def mode_count(self) -> int:
        return int(self.h.shape[0])


@dataclass(frozen=True, eq=False)
class ExactUnitary:
    """Dense propagator at one parameter value, with quality monitors.

    ``unitarity_residual`` is the worst column-norm deviation from 1;
    ``shell_coupling`` bounds the amplitude the propagator moves from
    interior states into the two boundary levels of the cutoff.
    """

    matrix: np.ndarray
    theta: float
    layout: ModeLayout
    unitarity_residual: float
    shell_coupling: float


def squeezer_generator(k: int, mode_count: int, strength: float = 1.0) -> GeneratorSpec:
    """H = strength * i(a_k^2 - a_k^dag^2)/2; beta_kk = sinh(strength*theta)."""
    g = np.zeros((mode_count, mode_count), dtype=np.complex128)
    g[k, k] = -1j * strength
    return GeneratorSpec(np.zeros((mode_count, mode_count)), g)


def two_mode_squeezer_generator(k: int, kprime: int, mode_count: int) -> GeneratorSpec:
    """H = i(a_k a_k' - a_k^dag a_k'^dag); beta_kk' = beta_k'k = sinh(theta)."""
    if k == kprime:
        raise ValueError("the two modes must be distinct")
    g = np.zeros((mode_count, mode_count), dtype=np.complex128)
    g[k, kprime] = -1j
    g[kprime, k] = -1j
    return GeneratorSpec(np.zeros((mode_count, mode_count)), g)


def beam_splitter_generator(k: int, kprime: int, mode_count: int) -> GeneratorSpec:
    """H = i(a_k^dag a_k' - a_k a_k'^dag); alpha1_kk' = 1, alpha1_k'k = -1."""
    if k == kprime:
        raise ValueError("the two modes must be distinct")
    h = np.zeros((mode_count, mode_count), dtype=np.complex128)
    h[k, kprime] = 1j
    h[kprime, k] = -1j
    return GeneratorSpec(h, np.zeros((mode_count, mode_count)))


def independent_squeezers_generator(strengths) -> GeneratorSpec:
    """One diagonal squeezer per mode with the given strengths."""
    strengths = np.asarray(strengths, dtype=float)
    g = np.diag(-1j * strengths).astype(np.complex128)
    return GeneratorSpec(np.zeros_like(g), g)


def generator_from_model(model: BogoliubovFirstOrder) -> GeneratorSpec:
    """Quadratic Hamiltonian whose propagator realizes a trivial-phase model.

    Only models with G identically 1 admit a single-generator propagator
    (U(0) must be the identity).
    """
    ensure_validated(model)
    if float(np.max(np.abs(model.G - 1.0))) > 1e-9:
        raise ModelFormatError(
            "oracle generator requires trivial free-evolution phases (G = 1)"
        )
    number = model.alpha1.conj()
    raw = -model.beta1.conj()
    pair = 0.5 * (raw + raw.T)
    return GeneratorSpec(1j * number, 1j * pair)


@functools.lru_cache(maxsize=16)
def _dense_ladders(mode_count: int, cutoff: int) -> tuple[np.ndarray, ...]:
    dim = cutoff + 1
    single = np.zeros((dim, dim), dtype=np.complex128)
    for n in range(1, dim):
        single[n - 1, n] = math.sqrt(n)
    eye = np.eye(dim, dtype=np.complex128)
    ops = []
    for m in range(mode_count):
        mats = [eye] * mode_count
        mats[m] = single
        out = mats[0]
        for x in mats[1:]:
            out = np.kron(out, x)
        out.flags.writeable = False
        ops.append(out)
    return tuple(ops)


def dense_hamiltonian(gen: GeneratorSpec, layout: ModeLayout) -> np.ndarray:
    """Dense truncated realization of the quadratic Hamiltonian.

    Entries are filled by occupation arithmetic, which is the truncation
    P H P of the untruncated operator (couplings past the cutoff drop).
    """
    if gen.mode_count != layout.mode_count:
        raise ValueError("generator and layout have different mode counts")
    modes = gen.mode_count
    cutoff = layout.cutoff
    dim = layout.basis_size
    number = np.zeros((dim, dim), dtype=np.complex128)
    creation = np.zeros((dim, dim), dtype=np.complex128)
    h_entries = [
        (m, n, gen.h[m, n])
        for m in range(modes)
        for n in range(modes)
        if gen.h[m, n] != 0
    ]
    # (1/2) sum_pq g_pq adag_p adag_q collapses to g_pq per unordered pair
    # (g symmetric) and g_pp / 2 on the diagonal.
    g_entries = [
        (p, q, gen.g[p, q] if p != q else 0.5 * gen.g[p, p])
        for p in range(modes)
        for q in range(p, modes)
        if gen.g[p, q] != 0
    ]
    for j, occ in enumerate(layout.basis()):
        for m, n, value in h_entries:
            if occ[n] == 0:
                continue
            if m == n:
                number[j, j] += value * occ[n]
                continue
            if occ[m] + 1 > cutoff:
                continue
            target = list(occ)
            target[n] -= 1
            target[m] += 1
            number[layout.index_of(tuple(target)), j] += value * math.sqrt(
                occ[n] * (occ[m] + 1)
            )
        for p, q, value in g_entries:
            if p == q:
                if occ[p] + 2 > cutoff:
                    continue
                target = list(occ)
                target[p] += 2
                factor = math.sqrt((occ[p] + 1) * (occ[p] + 2))
            else:
                if occ[p] + 1 > cutoff or occ[q] + 1 > cutoff:
                    continue
                target = list(occ)
                target[p] += 1
                target[q] += 1
                factor = math.sqrt((occ[p] + 1) * (occ[q] + 1))
            creation[layout.index_of(tuple(target)), j] += value * factor
    return number + creation + creation.conj().T


class _Propagator:
    """Eigendecomposition of the dense Hamiltonian, reused across theta."""

    def __init__(self, gen: GeneratorSpec, layout: ModeLayout) -> None:
        if layout.basis_size > DENSE_DIM_BUDGET:
            raise BudgetError(
                f"dense dimension {layout.basis_size} over budget {DENSE_DIM_BUDGET}"
            )
        self.layout = layout
        H = dense_hamiltonian(gen, layout)
        self.eigenvalues, self.eigenvectors = np.linalg.eigh(H)
        shell_floor = layout.cutoff - 1
        self.shell_mask = np.array(
            [any(n >= shell_floor for n in occ) for occ in layout.basis()]
        )

    def unitary(self, theta: float) -> np.ndarray:
        phases = np.exp(-1j * theta * self.eigenvalues)
        return (self.eigenvectors * phases) @ self.eigenvectors.conj().T

    def evolve(self, vec: np.ndarray, theta: float) -> np.ndarray:
        coeffs = self.eigenvectors.conj().T @ vec
        return self.eigenvectors @ (np.exp(-1j * theta * self.eigenvalues) * coeffs)

    def shell_weight(self, vec: np.ndarray) -> float:
        return float(np.sum(np.abs(vec[self.shell_mask]) ** 2))


@functools.lru_cache(maxsize=16)
def _cached_propagator(
    h_bytes: bytes, g_bytes: bytes, mode_count: int, cutoff: int
) -> _Propagator:
    h = np.frombuffer(h_bytes, dtype=np.complex128).reshape(mode_count, mode_count)
    g = np.frombuffer(g_bytes, dtype=np.complex128).reshape(mode_count, mode_count)
    return _Propagator(GeneratorSpec(h, g), ModeLayout(mode_count, cutoff))


def _propagator(gen: GeneratorSpec, layout: ModeLayout) -> _Propagator:
    if gen.mode_count != layout.mode_count:
        raise ValueError("generator and layout have different mode counts")
    return _cached_propagator(
        gen.h.tobytes(), gen.g.tobytes(), layout.mode_count, layout.cutoff
    )


def exact_unitary(gen: GeneratorSpec, theta: float, layout: ModeLayout) -> ExactUnitary:
    """Dense U(theta) = exp(-i theta H) with unitarity and leakage monitors."""
    prop = _propagator(gen, layout)
    matrix = prop.unitary(theta)
    col_norms = np.linalg.norm(matrix, axis=0)
    unitarity_residual = float(np.max(np.abs(col_norms - 1.0)))
    interior = ~prop.shell_mask
    if prop.shell_mask.any() and interior.any():
        block = matrix[np.ix_(prop.shell_mask, interior)]
        shell_coupling = float(np.linalg.norm(block, ord=2))
    else:
        shell_coupling = 0.0
    return ExactUnitary(matrix, theta, layout, unitarity_residual, shell_coupling)


def evolve_state(
    gen: GeneratorSpec,
    state: StateVector,
    theta: float,
    shell_budget: float = SHELL_BUDGET,
) -> StateVector:
    """Apply the exact propagator to a sparse state, monitoring leakage."""
    prop = _propagator(gen, state.layout)
    vec = state.to_dense()
    out = prop.evolve(vec, theta)
    _check_shell(prop, vec, out, shell_budget)
    return StateVector.from_dense(state.layout, out)


def _check_shell(
    prop: _Propagator, vec_in: np.ndarray, vec_out: np.ndarray, budget: float
) -> None:
    w_in = prop.shell_weight(vec_in)
    w_out = prop.shell_weight(vec_out)
    if max(w_in, w_out) > budget:
        raise BudgetError(
            f"boundary-shell weight {max(w_in, w_out):.3e} exceeds the leakage "
            f"budget {budget:.1e}; raise the cutoff"
        )


@dataclass(frozen=True)
class FidelityEstimate:
    """Richardson-extrapolated QFI estimate with an error estimate."""

    value: float
    error: float


def qfi_fidelity_pure(
    gen: GeneratorSpec,
    state: StateVector,
    dtheta: float = DEFAULT_DTHETA_FIDELITY,
    shell_budget: float = SHELL_BUDGET,
) -> FidelityEstimate:
    """Fidelity-based QFI at theta = 0 for a pure state with all modes kept.

    Evaluates 8(1 - |<psi(0)|psi(dtheta)>|)/dtheta^2 at dtheta and
    dtheta/2 and Richardson-extrapolates the O(dtheta^2) error away.
    """
    if not state.is_normalized(1e-9):
        raise ValueError("input state must be normalized")
    prop = _propagator(gen, state.layout)
    v0 = state.to_dense()

    def estimate(h: float) -> float:
        evolved = prop.evolve(v0, h)
        _check_shell(prop, v0, evolved, shell_budget)
        overlap = abs(np.vdot(v0, evolved))
        return 8.0 * (1.0 - overlap) / h**2

    coarse = estimate(dtheta)
    fine = estimate(dtheta / 2.0)
    value = (4.0 * fine - coarse) / 3.0
    error = abs(fine - coarse) / 3.0 + 64.0 * np.finfo(float).eps / dtheta**2
    return FidelityEstimate(max(value, 0.0), error)


def uhlmann_fidelity(rho_a: np.ndarray, rho_b: np.ndarray) -> float:
    """(Tr sqrt(sqrt(rho_a) rho_b sqrt(rho_a)))^2 via Hermitian square roots.

    Small negative eigenvalues from finite differencing are clamped to
    zero; genuinely negative operators are rejected.
    """
    sqrt_a = _psd_sqrt(rho_a)
    mid = sqrt_a @ rho_b @ sqrt_a
    eigs = np.linalg.eigvalsh(0.5 * (mid + mid.conj().T))
    _check_positive(eigs, "fidelity kernel")
    return float(np.sum(np.sqrt(np.clip(eigs, 0.0, None))) ** 2)


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    eigs, vecs = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    _check_positive(eigs, "density operator")
    root = np.sqrt(np.clip(eigs, 0.0, None))
    return (vecs * root) @ vecs.conj().T


def _check_positive(eigs: np.ndarray, what: str) -> None:
    scale = max(float(np.max(np.abs(eigs))), 1e-300)
    if float(eigs.min()) < -1e-10 * scale and float(eigs.min()) < -1e-12:
        raise BudgetError(
            f"{what} is not positive within tolerance (min eigenvalue {eigs.min():.3e})"
        )


def _reduced_dense(
    vec: np.ndarray, layout: ModeLayout, keep: ModeSubset
) -> np.ndarray:
    dim = layout.cutoff + 1
    kept = list(keep.indices)
    comp = list(keep.complement(layout.mode_count))
    tensor = vec.reshape((dim,) * layout.mode_count)
    rearranged = np.transpose(tensor, axes=kept + comp)
    flat = rearranged.reshape(dim ** len(kept), dim ** len(comp))
    return flat @ flat.conj().T


def qfi_fidelity_mixed(
    gen: GeneratorSpec,
    state: StateVector,
    keep: ModeSubset,
    dtheta: float = DEFAULT_DTHETA_FIDELITY,
    shell_budget: float = SHELL_BUDGET,
) -> FidelityEstimate:
    """Fidelity-based QFI of the reduced state on ``keep`` at theta = 0."""
    if not state.is_normalized(1e-9):
        raise ValueError("input state must be normalized")
    keep.validate_for(state.layout)
    ModeLayout(len(keep.indices), state.layout.cutoff)  # dense budget check
    prop = _propagator(gen, state.layout)
    v0 = state.to_dense()
    rho0 = _reduced_dense(v0, state.layout, keep)

    def estimate(h: float) -> float:
        evolved = prop.evolve(v0, h)
        _check_shell(prop, v0, evolved, shell_budget)
        rho_h = _reduced_dense(evolved, state.layout, keep)
        fidelity = uhlmann_fidelity(rho0, rho_h)
        return 8.0 * (1.0 - math.sqrt(min(fidelity, 1.0))) / h**2

    coarse = estimate(dtheta)
    fine = estimate(dtheta / 2.0)
    value = (4.0 * fine - coarse) / 3.0
    error = abs(fine - coarse) / 3.0 + 64.0 * np.finfo(float).eps / dtheta**2
    return FidelityEstimate(max(value, 0.0), error)


@dataclass(frozen=True, eq=False)
class DerivativeStates:
    """Finite-difference first-order state and reduced-state corrections."""

    psi1: StateVector
    rho1: DensityOperator
    rho2: DensityOperator


def derivative_states(
    gen: GeneratorSpec,
    state: StateVector,
    dtheta: float = DEFAULT_DTHETA_FIRST,
    dtheta2: float = DEFAULT_DTHETA_SECOND,
    keep: ModeSubset | None = None,
    richardson: bool = True,
    shell_budget: float = SHELL_BUDGET,
) -> DerivativeStates:
    """Central-difference psi1 plus the reduced-state corrections rho1, rho2.

    rho1 and rho2 are the linear and quadratic coefficients of the
    reduced-state expansion in theta, taken on ``keep`` (all modes when
    omitted).  Richardson extrapolation removes the leading O(h^2)
    finite-difference error.
    """
    layout = state.layout
    keep = keep if keep is not None else ModeSubset.of(range(layout.mode_count))
    keep.validate_for(layout)
    prop = _propagator(gen, layout)
    v0 = state.to_dense()

    def psi(h: float) -> np.ndarray:
        out = prop.evolve(v0, h)
        _check_shell(prop, v0, out, shell_budget)
        return out

    def psi1_estimate(h: float) -> np.ndarray:
        return (psi(h) - psi(-h)) / (2.0 * h)

    def rho(h: float) -> np.ndarray:
        return _reduced_dense(psi(h), layout, keep)

    def rho1_estimate(h: float) -> np.ndarray:
        return (rho(h) - rho(-h)) / (2.0 * h)

    rho_0 = rho(0.0)

    def rho2_estimate(h: float) -> np.ndarray:
        return (rho(h) - 2.0 * rho_0 + rho(-h)) / (2.0 * h * h)

    psi1 = _extrapolate(psi1_estimate, dtheta, richardson)
    rho1 = _extrapolate(rho1_estimate, dtheta, richardson)
    rho2 = _extrapolate(rho2_estimate, dtheta2, richardson)
    sub_layout = ModeLayout(len(keep.indices), layout.cutoff)
    return DerivativeStates(
        StateVector.from_dense(layout, psi1),
        DensityOperator(sub_layout, _hermitize(rho1)),
        DensityOperator(sub_layout, _hermitize(rho2)),
    )


def _extrapolate(estimator, h: float, richardson: bool) -> np.ndarray:
    coarse = estimator(h)
    if not richardson:
        return coarse
    fine = estimator(h / 2.0)
    return (4.0 * fine - coarse) / 3.0


def _hermitize(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.conj().T)


def coherent_state(
    layout: ModeLayout,
    mode: int,
    alpha: complex,
    shell_budget: float = SHELL_BUDGET,
) -> StateVector:
    """Truncated coherent state from the displacement exp(alpha a^dag - conj(alpha) a).

    The displacement is applied through the same Hermitian
    eigendecomposition path as the propagator, with the leakage budget
    enforced on the result.
    """
    if not 0 <= mode < layout.mode_count:
        raise ValueError(f"mode {mode} out of range")
    ladders = _dense_ladders(layout.mode_count, layout.cutoff)
    a = ladders[mode]
    displacement_h = 1j * (alpha * a.conj().T - np.conj(alpha) * a)
    eigs, vecs = np.linalg.eigh(displacement_h)
    vac = StateVector.vacuum(layout).to_dense()
    out = vecs @ (np.exp(-1j * eigs) * (vecs.conj().T @ vac))
    shell_floor = layout.cutoff - 1
    shell_mask = np.array(
        [any(n >= shell_floor for n in occ) for occ in layout.basis()]
    )
    if float(np.sum(np.abs(out[shell_mask]) ** 2)) > shell_budget:
        raise BudgetError(
            "coherent state reaches the cutoff boundary; raise the cutoff"
        )
    return StateVector.from_dense(layout, out)


def classical_transfer_matrix(gen: GeneratorSpec) -> np.ndarray:
    """2M x 2M coefficient matrix of the Heisenberg mode equations."""
    h, g = gen.h, gen.g
    return np.block([[-1j * h, -1j * g], [1j * g.conj(), 1j * h.conj()]])


def extract_bogoliubov(gen: GeneratorSpec, theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact alpha(theta), beta(theta) from the classical exponential.

    Works at the mode-operator level, free of any Fock truncation.
    """
    E = scipy.linalg.expm(theta * classical_transfer_matrix(gen))
    M = gen.mode_count
    alpha = E[:M, :M].conj()
    beta = -E[:M, M:].conj()
    return alpha, beta


def extract_first_order(
    gen: GeneratorSpec, dtheta: float = 1e-5
) -> BogoliubovFirstOrder:
    """First-order coefficient model by central differencing at theta = 0."""
    alpha_p, beta_p = extract_bogoliubov(gen, dtheta)
    alpha_m, beta_m = extract_bogoliubov(gen, -dtheta)
    alpha1 = (alpha_p - alpha_m) / (2.0 * dtheta)
    beta1 = (beta_p - beta_m) / (2.0 * dtheta)
    return BogoliubovFirstOrder(np.ones(gen.mode_count), alpha1, beta1)
