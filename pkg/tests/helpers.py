"""Shared test utilities: dense realizations and hand-coded golden expansions.

The golden first-order expansions below are written out term by term,
independently of the package's sparse generator machinery, so the two
constructions cross-check each other.  The sign convention is the one
pinned by the exact propagator exp(-i theta H): with trivial phases and
beta1_kk = 1 the vacuum acquires -(1/sqrt 2)|2> at first order.
"""

from __future__ import annotations

import math

import numpy as np

from bogofisher import (
    BogoliubovFirstOrder,
    GeneratorK,
    GeneratorSpec,
    ModeLayout,
    StateVector,
    extract_first_order,
)


def dense_ladders(mode_count: int, cutoff: int) -> list[np.ndarray]:
    dim = cutoff + 1
    single = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        single[n - 1, n] = math.sqrt(n)
    eye = np.eye(dim)
    ops = []
    for m in range(mode_count):
        mats = [eye] * mode_count
        mats[m] = single
        out = mats[0]
        for x in mats[1:]:
            out = np.kron(out, x)
        ops.append(out)
    return ops


def dense_generator_matrix(gen: GeneratorK, layout: ModeLayout) -> np.ndarray:
    """Dense realization of a GeneratorK on the truncated basis."""
    ladders = dense_ladders(layout.mode_count, layout.cutoff)
    dim = layout.basis_size
    K = np.zeros((dim, dim), dtype=complex)
    for m in range(gen.mode_count):
        for n in range(gen.mode_count):
            if gen.number[m, n] != 0:
                K += gen.number[m, n] * ladders[m].conj().T @ ladders[n]
            c = gen.pair_create[m, n]
            if c != 0:
                K += 0.5 * c * ladders[m].conj().T @ ladders[n].conj().T
                K -= 0.5 * np.conj(c) * ladders[m] @ ladders[n]
    return K


def random_generator(rng: np.random.Generator, modes: int, scale: float) -> GeneratorSpec:
    h_raw = rng.normal(size=(modes, modes)) + 1j * rng.normal(size=(modes, modes))
    g_raw = rng.normal(size=(modes, modes)) + 1j * rng.normal(size=(modes, modes))
    h = scale * 0.5 * (h_raw + h_raw.conj().T)
    g = scale * 0.5 * (g_raw + g_raw.T)
    return GeneratorSpec(h, g)


def random_model(rng: np.random.Generator, modes: int, scale: float = 0.4) -> BogoliubovFirstOrder:
    """Random validated model with trivial phases, via symplectic extraction."""
    return extract_first_order(random_generator(rng, modes, scale))


def rephased(model: BogoliubovFirstOrder, chis: np.ndarray) -> BogoliubovFirstOrder:
    """Consistently re-phased model: G_m -> e^{i chi_m} G_m with row phases."""
    phases = np.exp(1j * np.asarray(chis))
    return BogoliubovFirstOrder(
        phases * model.G,
        phases[:, None] * model.alpha1,
        phases[:, None] * model.beta1,
    )


def random_state(
    rng: np.random.Generator,
    layout: ModeLayout,
    modes: list[int] | None = None,
    terms: int = 3,
    max_occ: int | None = None,
    parity: int | None = None,
) -> StateVector:
    """Random normalized superposition supported on the given modes.

    With ``parity`` set, every component has that total-occupation parity,
    which excludes superpositions differing by a single excitation.
    """
    modes = list(range(layout.mode_count)) if modes is None else list(modes)
    max_occ = layout.cutoff - 2 if max_occ is None else max_occ
    amplitudes: dict[tuple[int, ...], complex] = {}
    guard = 0
    while len(amplitudes) < terms:
        guard += 1
        if guard > 200 * terms:
            break
        occ = [0] * layout.mode_count
        for m in modes:
            occ[m] = int(rng.integers(0, max_occ + 1))
        if parity is not None and sum(occ) % 2 != parity:
            continue
        amplitudes[tuple(occ)] = complex(rng.normal(), rng.normal())
    state = StateVector(layout, amplitudes, prune=0.0)
    return state.normalized()


def _put(amp: dict, occ: tuple[int, ...], value: complex) -> None:
    if value != 0:
        amp[occ] = amp.get(occ, 0.0) + value


def golden_vacuum(model: BogoliubovFirstOrder, layout: ModeLayout):
    """Hand expansion of the transformed vacuum: psi0 and psi1."""
    M = model.mode_count
    G = model.G
    beta = model.beta1
    psi0 = StateVector.vacuum(layout)
    amp: dict[tuple[int, ...], complex] = {}
    for p in range(M):
        for q in range(p, M):
            b = np.conj(beta[p, q])
            if b == 0:
                continue
            if p == q:
                occ = [0] * M
                occ[p] = 2
                _put(amp, tuple(occ), -G[p] * b / math.sqrt(2.0))
            else:
                occ = [0] * M
                occ[p] = 1
                occ[q] = 1
                _put(amp, tuple(occ), -G[p] * b)
    return psi0, StateVector(layout, amp)


def golden_single_mode(model: BogoliubovFirstOrder, n: int, k: int, layout: ModeLayout):
    """Hand expansion for the input |n_k> with all other modes in vacuum."""
    M = model.mode_count
    G, alpha, beta = model.G, model.alpha1, model.beta1
    gk = G[k]

    def base(nk: int, **extra: int) -> tuple[int, ...]:
        occ = [0] * M
        occ[k] = nk
        for key, value in extra.items():
            occ[int(key)] = value
        return tuple(occ)

    psi0 = StateVector(layout, {base(n): gk**n})
    amp: dict[tuple[int, ...], complex] = {}
    if n >= 2:
        _put(amp, base(n - 2), 0.5 * math.sqrt(n * (n - 1)) * gk ** (n - 1) * beta[k, k])
    _put(amp, base(n), n * gk ** (n + 1) * np.conj(alpha[k, k]))
    _put(
        amp,
        base(n + 2),
        -0.5 * math.sqrt((n + 1) * (n + 2)) * gk ** (n + 1) * np.conj(beta[k, k]),
    )
    for p in range(M):
        if p == k:
            continue
        if n >= 1:
            _put(
                amp,
                base(n - 1, **{str(p): 1}),
                math.sqrt(n) * gk**n * G[p] * np.conj(alpha[p, k]),
            )
        _put(
            amp,
            base(n + 1, **{str(p): 1}),
            -math.sqrt(n + 1) * gk**n * G[p] * np.conj(beta[p, k]),
        )
        _put(
            amp,
            base(n, **{str(p): 2}),
            -gk**n * G[p] * np.conj(beta[p, p]) / math.sqrt(2.0),
        )
        for q in range(p + 1, M):
            if q == k:
                continue
            _put(
                amp,
                base(n, **{str(p): 1, str(q): 1}),
                -gk**n * G[p] * np.conj(beta[p, q]),
            )
    return psi0, StateVector(layout, amp)


def golden_two_mode(
    model: BogoliubovFirstOrder,
    n: int,
    k: int,
    m: int,
    kprime: int,
    layout: ModeLayout,
):
    """Hand expansion for the input |n_k>|m_k'> with other modes in vacuum."""
    M = model.mode_count
    G, alpha, beta = model.G, model.alpha1, model.beta1
    gk, gq = G[k], G[kprime]

    def base(nk: int, mk: int, **extra: int) -> tuple[int, ...]:
        occ = [0] * M
        occ[k] = nk
        occ[kprime] = mk
        for key, value in extra.items():
            occ[int(key)] = value
        return tuple(occ)

    phase0 = gk**n * gq**m
    psi0 = StateVector(layout, {base(n, m): phase0})
    amp: dict[tuple[int, ...], complex] = {}
    _put(
        amp,
        base(n, m),
        n * gk ** (n + 1) * gq**m * np.conj(alpha[k, k])
        + m * gk**n * gq ** (m + 1) * np.conj(alpha[kprime, kprime]),
    )
    if n >= 2:
        _put(amp, base(n - 2, m), 0.5 * math.sqrt(n * (n - 1)) * gk ** (n - 1) * gq**m * beta[k, k])
    _put(
        amp,
        base(n + 2, m),
        -0.5 * math.sqrt((n + 1) * (n + 2)) * gk ** (n + 1) * gq**m * np.conj(beta[k, k]),
    )
    if m >= 2:
        _put(
            amp,
            base(n, m - 2),
            0.5 * math.sqrt(m * (m - 1)) * gk**n * gq ** (m - 1) * beta[kprime, kprime],
        )
    _put(
        amp,
        base(n, m + 2),
        -0.5 * math.sqrt((m + 1) * (m + 2)) * gk**n * gq ** (m + 1) * np.conj(beta[kprime, kprime]),
    )
    if m >= 1:
        _put(
            amp,
            base(n + 1, m - 1),
            math.sqrt(m * (n + 1)) * gk ** (n + 1) * gq**m * np.conj(alpha[k, kprime]),
        )
    if n >= 1:
        _put(
            amp,
            base(n - 1, m + 1),
            math.sqrt(n * (m + 1)) * gk**n * gq ** (m + 1) * np.conj(alpha[kprime, k]),
        )
    if n >= 1 and m >= 1:
        _put(
            amp,
            base(n - 1, m - 1),
            math.sqrt(n * m) * gk ** (n - 1) * gq**m * beta[k, kprime],
        )
    _put(
        amp,
        base(n + 1, m + 1),
        -math.sqrt((n + 1) * (m + 1)) * gk ** (n + 1) * gq**m * np.conj(beta[k, kprime]),
    )
    for p in range(M):
        if p in (k, kprime):
            continue
        if n >= 1:
            _put(
                amp,
                base(n - 1, m, **{str(p): 1}),
                math.sqrt(n) * phase0 * G[p] * np.conj(alpha[p, k]),
            )
        if m >= 1:
            _put(
                amp,
                base(n, m - 1, **{str(p): 1}),
                math.sqrt(m) * phase0 * G[p] * np.conj(alpha[p, kprime]),
            )
        _put(
            amp,
            base(n + 1, m, **{str(p): 1}),
            -math.sqrt(n + 1) * phase0 * G[p] * np.conj(beta[p, k]),
        )
        _put(
            amp,
            base(n, m + 1, **{str(p): 1}),
            -math.sqrt(m + 1) * phase0 * G[p] * np.conj(beta[p, kprime]),
        )
        _put(
            amp,
            base(n, m, **{str(p): 2}),
            -phase0 * G[p] * np.conj(beta[p, p]) / math.sqrt(2.0),
        )
        for q in range(p + 1, M):
            if q in (k, kprime):
                continue
            _put(
                amp,
                base(n, m, **{str(p): 1, str(q): 1}),
                -phase0 * G[p] * np.conj(beta[p, q]),
            )
    return psi0, StateVector(layout, amp)


def state_distance(a: StateVector, b: StateVector) -> float:
    return a.add(b.scaled(-1.0)).norm()
