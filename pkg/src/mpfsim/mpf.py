"""Multi-product formulas: Childs-Wiebe, matching and closed-form kinds.

A multi-product formula combines order-2chi product-formula blocks so the
Taylor expansion of the combination matches the exact propagator to a higher
order.  Childs-Wiebe specs sum repeated blocks ``sum_q C_q S(t/l_q)^l_q``;
the matching kind multiplies R node blocks ``prod_r sum_q C_q^(r) S(b_q^(r) t)``
whose target coefficient vectors are solved jointly; the closed-form kind
sums powers of a fixed shift block against correction blocks with explicit
coefficient vectors.

Block weights ``C`` come from Vandermonde systems in the node vector ``b``;
the resolution factor (sum / product of block 1-norms) is the sampling
overhead each combination incurs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ensembles import EnsembleBranch, EnsembleEntry, EnsembleLayer, SamplingEnsemble
from .operators import HamiltonianSpec
from .schedules import merge_adjacent, repeat_schedule, schedule_matrices, suzuki_schedule

__all__ = [
    "IllConditionedSystemError",
    "MatchingSolveError",
    "LBlock",
    "ChildsWiebe",
    "MatchingMPF",
    "ClosedFormMPF",
    "MPFSpec",
    "solve_vandermonde",
    "cw_coefficients",
    "matching_nu",
    "closedform_nu",
    "build_lblock",
    "build_matching",
    "build_closedform",
    "mpf_matrix",
    "mpf_matrices",
    "scalar_series",
    "lblock_scalar_series",
    "mpf_ensemble",
]

CONDITION_LIMIT = 1e14
RESIDUAL_RTOL = 1e-9
REFINEMENT_STEPS = 2


class IllConditionedSystemError(ValueError):
    """Vandermonde system too ill-conditioned to produce trustworthy weights."""


class MatchingSolveError(RuntimeError):
    """The matching coefficient system admitted no real solution in budget."""


def _vandermonde(b: np.ndarray) -> np.ndarray:
    """B[j, q] = b_q ** j."""
    return np.vander(b, len(b), increasing=True).T


def solve_vandermonde(b: np.ndarray, nu: np.ndarray) -> tuple[np.ndarray, float]:
    """Solve B C = nu for the block weights; returns (C, condition estimate).

    Partial-pivot LU through ``numpy.linalg.solve`` plus a couple of
    refinement sweeps with extended-precision residuals.  Systems whose
    condition estimate exceeds ``CONDITION_LIMIT`` or whose refined residual
    stays above ``RESIDUAL_RTOL`` relative are rejected: their weights would
    be garbage and every downstream quantity with them.
    """
    b = np.asarray(b, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if b.ndim != 1 or b.shape != nu.shape:
        raise ValueError("b and nu must be 1-d vectors of equal length")
    n = len(b)
    if n == 0:
        raise ValueError("empty system")
    sep = np.abs(np.subtract.outer(b, b))[~np.eye(n, dtype=bool)]
    if n > 1 and np.min(sep) == 0.0:
        raise IllConditionedSystemError("coincident b nodes")
    B = _vandermonde(b)
    cond = float(np.linalg.cond(B))
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise IllConditionedSystemError(f"condition estimate {cond:.3e} exceeds {CONDITION_LIMIT:.0e}")
    C = np.linalg.solve(B, nu)
    B_hi = B.astype(np.longdouble)
    nu_hi = nu.astype(np.longdouble)

    def resid_of(x: np.ndarray) -> float:
        return float(np.max(np.abs(B_hi @ x.astype(np.longdouble) - nu_hi)))

    best, best_resid = C, resid_of(C)
    for _ in range(REFINEMENT_STEPS):
        resid = B_hi @ best.astype(np.longdouble) - nu_hi
        trial = best - np.linalg.solve(B, resid.astype(float))
        trial_resid = resid_of(trial)
        if trial_resid >= best_resid:
            break
        best, best_resid = trial, trial_resid
    if best_resid > RESIDUAL_RTOL * max(1.0, float(np.max(np.abs(nu)))):
        raise IllConditionedSystemError(
            f"residual {best_resid:.3e} above {RESIDUAL_RTOL:g} relative"
        )
    return best, cond


@dataclass(frozen=True)
class LBlock:
    """One node block: weights C realizing target coefficients nu at nodes b."""

    chi: int
    R: int
    b: np.ndarray
    nu: np.ndarray
    C: np.ndarray
    one_norm: float
    cond: float


def build_lblock(chi: int, R: int, b: np.ndarray, nu: np.ndarray) -> LBlock:
    b = np.asarray(b, dtype=float)
    nu = np.asarray(nu, dtype=float)
    m = 2 * chi * R + 1
    if len(b) != m or len(nu) != m:
        raise ValueError(f"block vectors must have length 2*chi*R+1 = {m}")
    C, cond = solve_vandermonde(b, nu)
    return LBlock(chi=chi, R=R, b=b, nu=nu, C=C, one_norm=float(np.sum(np.abs(C))), cond=cond)


@dataclass(frozen=True)
class ChildsWiebe:
    chi: int
    K: int
    ells: tuple[int, ...]
    C: np.ndarray
    resolution: float


@dataclass(frozen=True)
class MatchingMPF:
    chi: int
    R: int
    blocks: tuple[LBlock, ...]
    resolution: float


@dataclass(frozen=True)
class ClosedFormMPF:
    chi: int
    R: int
    block0: LBlock
    blocks: tuple[LBlock, ...]
    resolution: float


MPFSpec = ChildsWiebe | MatchingMPF | ClosedFormMPF


def cw_coefficients(chi: int, K: int, ells: tuple[int, ...] | None = None) -> ChildsWiebe:
    """Childs-Wiebe weights from the (K+1) x (K+1) cancellation system.

    Row zero forces sum C_q = 1; row i forces sum_q C_q / l_q^(2chi+2(i-1))
    to vanish.  The default node choice is l_q = q.
    """
    if chi < 1 or K < 0:
        raise ValueError("need chi >= 1 and K >= 0")
    if ells is None:
        ells = tuple(range(1, K + 2))
    if len(ells) != K + 1 or len(set(ells)) != K + 1 or any(l < 1 for l in ells):
        raise ValueError("ells must be K+1 distinct positive integers")
    n = K + 1
    A = np.ones((n, n))
    for i in range(1, n):
        A[i] = [float(l) ** -(2 * chi + 2 * (i - 1)) for l in ells]
    rhs = np.zeros(n)
    rhs[0] = 1.0
    C = np.linalg.solve(A, rhs)
    for _ in range(REFINEMENT_STEPS):
        resid = A.astype(np.longdouble) @ C.astype(np.longdouble) - rhs.astype(np.longdouble)
        C = C - np.linalg.solve(A, resid.astype(float))
    return ChildsWiebe(chi=chi, K=K, ells=ells, C=C, resolution=float(np.sum(np.abs(C))))


# ---------------------------------------------------------------------------
# Truncated power-series helpers (coefficient arrays in x^k).


def _poly_mul(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    out = np.zeros(order + 1)
    for i in range(min(len(a), order + 1)):
        ai = a[i]
        if ai == 0.0:
            continue
        top = min(len(b), order + 1 - i)
        out[i : i + top] += ai * b[:top]
    return out


def _exp_series(scale: float, order: int) -> np.ndarray:
    out = np.empty(order + 1)
    out[0] = 1.0
    for k in range(1, order + 1):
        out[k] = out[k - 1] * scale / k
    return out


def _nu_series(nu: np.ndarray, order: int) -> np.ndarray:
    """Series sum_k nu_k x^k / k! truncated at ``order``."""
    out = np.zeros(order + 1)
    for k in range(min(len(nu), order + 1)):
        out[k] = nu[k] / math.factorial(k)
    return out


def lblock_scalar_series(b: np.ndarray, C: np.ndarray, order: int) -> np.ndarray:
    """Scalar series of a block: sum_q C_q exp(b_q x), truncated."""
    out = np.zeros(order + 1)
    for bq, cq in zip(b, C):
        out += cq * _exp_series(float(bq), order)
    return out


# ---------------------------------------------------------------------------
# Matching coefficient system.


def _matching_residual(nus: list[np.ndarray], chi: int, R: int) -> np.ndarray:
    """Per-order defects k! * mu_k - 1 of the block-product series, k = 1..2chiR."""
    order = 2 * chi * R
    prod = np.zeros(order + 1)
    prod[0] = 1.0
    for nu in nus:
        prod = _poly_mul(prod, _nu_series(nu, order), order)
    return np.array([prod[k] * math.factorial(k) - 1.0 for k in range(1, order + 1)])


def _matching_jacobian(nus: list[np.ndarray], chi: int, R: int) -> np.ndarray:
    order = 2 * chi * R
    m = 2 * chi * R
    J = np.empty((m, m))
    series = [_nu_series(nu, order) for nu in nus]
    for r in range(R):
        rest = np.zeros(order + 1)
        rest[0] = 1.0
        for rp in range(R):
            if rp != r:
                rest = _poly_mul(rest, series[rp], order)
        for j in range(1, 2 * chi + 1):
            col = r * 2 * chi + (j - 1)
            for k in range(1, order + 1):
                J[k - 1, col] = (rest[k - j] / math.factorial(j)) * math.factorial(k) if k >= j else 0.0
    return J


def _matching_unpack(x: np.ndarray, chi: int, R: int) -> list[np.ndarray]:
    nus = []
    for r in range(R):
        nu = np.zeros(2 * chi * R + 1)
        nu[0] = 1.0
        nu[1 : 2 * chi + 1] = x[r * 2 * chi : (r + 1) * 2 * chi]
        nus.append(nu)
    return nus


_MATCHING_TILTS = (1e-2, -1e-2, 5e-2, -5e-2, 0.1, -0.1, 0.3)
_matching_cache: dict[tuple[int, int], tuple[np.ndarray, ...]] = {}


def matching_nu(
    chi: int,
    R: int,
    max_iterations: int = 200,
    residual_target: float = 1e-12,
) -> list[np.ndarray]:
    """Solve the joint coefficient system of the matching formula.

    Newton iteration on truncated formal power series: the product of the R
    block series must match the exponential series through order 2*chi*R.
    The base guess nu_k^(r) = R^-k makes every block the truncation of
    exp(x/R), already correct through order 2chi, but it is symmetric under
    block permutation and the Jacobian is exactly singular there; a small
    deterministic per-block tilt breaks the symmetry.  Several tilt
    magnitudes are tried in a fixed order, with step halving on divergence.
    """
    if chi < 1 or R < 1:
        raise ValueError("need chi >= 1 and R >= 1")
    key = (chi, R)
    if key in _matching_cache:
        return [nu.copy() for nu in _matching_cache[key]]
    m = 2 * chi * R
    for tilt in _MATCHING_TILTS:
        x = np.empty(m)
        for r in range(R):
            for j, k in enumerate(range(1, 2 * chi + 1)):
                x[r * 2 * chi + j] = R ** (-float(k)) * (1.0 + tilt * (r - (R - 1) / 2.0) * k)
        converged = False
        for _ in range(max_iterations):
            F = _matching_residual(_matching_unpack(x, chi, R), chi, R)
            norm = float(np.max(np.abs(F)))
            if norm <= residual_target:
                converged = True
                break
            J = _matching_jacobian(_matching_unpack(x, chi, R), chi, R)
            try:
                dx = np.linalg.solve(J, F)
            except np.linalg.LinAlgError:
                break
            step = 1.0
            improved = False
            for _ in range(30):
                xn = x - step * dx
                fn = float(np.max(np.abs(_matching_residual(_matching_unpack(xn, chi, R), chi, R))))
                if fn < norm:
                    x = xn
                    improved = True
                    break
                step *= 0.5
            if not improved:
                break
        if converged:
            nus = _matching_unpack(x, chi, R)
            for nu in nus:
                nu.setflags(write=False)
            _matching_cache[key] = tuple(nus)
            return [nu.copy() for nu in nus]
    raise MatchingSolveError(
        f"no real matching solution found for chi={chi}, R={R} within "
        f"{max_iterations} iterations (consider the closed-form kind instead)"
    )


def closedform_nu(chi: int, R: int, n: int) -> np.ndarray:
    """Target coefficient vector of closed-form block ``n`` (0 = shift block)."""
    if not 0 <= n <= R:
        raise ValueError("need 0 <= n <= R")
    m = 2 * chi * R + 1
    nu = np.zeros(m)
    if n == 0:
        nu[2 * chi] = 1.0
    elif n == 1:
        nu[: 2 * chi + 1] = 1.0
    else:
        for k in range(1, 2 * chi + 1):
            nu[k] = (
                math.factorial(k)
                * math.factorial(2 * chi) ** (n - 1)
                / math.factorial(2 * chi * (n - 1) + k)
            )
    return nu


def build_matching(chi: int, R: int, b_list) -> MatchingMPF:
    """Assemble a matching formula from R node vectors (length 2*chi*R+1 each)."""
    if len(b_list) != R:
        raise ValueError(f"matching needs {R} node vectors, got {len(b_list)}")
    nus = matching_nu(chi, R)
    blocks = tuple(build_lblock(chi, R, b, nu) for b, nu in zip(b_list, nus))
    resolution = float(np.prod([blk.one_norm for blk in blocks]))
    return MatchingMPF(chi=chi, R=R, blocks=blocks, resolution=resolution)


def build_closedform(chi: int, R: int, b_list) -> ClosedFormMPF:
    """Assemble a closed-form formula from R+1 node vectors (shift block first)."""
    if len(b_list) != R + 1:
        raise ValueError(f"closed-form needs {R + 1} node vectors, got {len(b_list)}")
    block0 = build_lblock(chi, R, b_list[0], closedform_nu(chi, R, 0))
    blocks = tuple(
        build_lblock(chi, R, b_list[n], closedform_nu(chi, R, n)) for n in range(1, R + 1)
    )
    resolution = float(
        sum(block0.one_norm ** (r - 1) * blocks[r - 1].one_norm for r in range(1, R + 1))
    )
    return ClosedFormMPF(chi=chi, R=R, block0=block0, blocks=blocks, resolution=resolution)


# ---------------------------------------------------------------------------
# Materialization.


def _suzuki_cached(chi: int, L: int):
    return merge_adjacent(suzuki_schedule(chi, L))


def mpf_matrix(spec: MPFSpec, H: HamiltonianSpec, t: float) -> np.ndarray:
    """The averaged (generally non-unitary) operator of the formula at time t."""
    return mpf_matrices(spec, H, np.array([t]))[0]


def mpf_matrices(spec: MPFSpec, H: HamiltonianSpec, ts: np.ndarray) -> np.ndarray:
    """Batched :func:`mpf_matrix` over a time grid, shape (B, d, d)."""
    ts = np.asarray(ts, dtype=float)
    sched = _suzuki_cached(spec.chi, H.L)
    memo: dict[float, np.ndarray] = {}

    def smat(scale: float) -> np.ndarray:
        if scale not in memo:
            memo[scale] = schedule_matrices(sched, H, scale * ts)
        return memo[scale]

    if isinstance(spec, ChildsWiebe):
        out = np.zeros((len(ts), H.dim, H.dim), dtype=complex)
        for cq, ell in zip(spec.C, spec.ells):
            power = smat(1.0 / ell)
            acc = power
            for _ in range(ell - 1):
                acc = acc @ power
            out += cq * acc
        return out
    if isinstance(spec, MatchingMPF):
        out = None
        for blk in spec.blocks:
            block_op = np.zeros((len(ts), H.dim, H.dim), dtype=complex)
            for cq, bq in zip(blk.C, blk.b):
                block_op += cq * smat(float(bq))
            out = block_op if out is None else out @ block_op
        return out
    if isinstance(spec, ClosedFormMPF):
        def block_of(blk: LBlock) -> np.ndarray:
            acc = np.zeros((len(ts), H.dim, H.dim), dtype=complex)
            for cq, bq in zip(blk.C, blk.b):
                acc += cq * smat(float(bq))
            return acc

        shift = block_of(spec.block0)
        out = np.zeros((len(ts), H.dim, H.dim), dtype=complex)
        shift_pow = np.broadcast_to(np.eye(H.dim, dtype=complex), (len(ts), H.dim, H.dim)).copy()
        for r in range(1, spec.R + 1):
            out += shift_pow @ block_of(spec.blocks[r - 1])
            if r < spec.R:
                shift_pow = shift_pow @ shift
        return out
    raise TypeError(f"unknown MPF spec type {type(spec)!r}")


def scalar_series(spec: MPFSpec, order: int) -> np.ndarray:
    """Formal series of the formula with every block replaced by exact exponentials.

    On a single-term Hamiltonian the order-2chi schedule is exact, so the
    formula collapses to scalar combinations of exp(b x); the returned
    coefficients c_k (in x^k) must equal 1/k! through order 2*chi*R for any
    valid spec.  This is the construction's independent correctness oracle.
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    if isinstance(spec, ChildsWiebe):
        out = np.zeros(order + 1)
        for cq, ell in zip(spec.C, spec.ells):
            factor = _exp_series(1.0 / ell, order)
            acc = np.zeros(order + 1)
            acc[0] = 1.0
            for _ in range(ell):
                acc = _poly_mul(acc, factor, order)
            out += cq * acc
        return out
    if isinstance(spec, MatchingMPF):
        out = np.zeros(order + 1)
        out[0] = 1.0
        for blk in spec.blocks:
            out = _poly_mul(out, lblock_scalar_series(blk.b, blk.C, order), order)
        return out
    if isinstance(spec, ClosedFormMPF):
        shift = lblock_scalar_series(spec.block0.b, spec.block0.C, order)
        out = np.zeros(order + 1)
        shift_pow = np.zeros(order + 1)
        shift_pow[0] = 1.0
        for r in range(1, spec.R + 1):
            block = lblock_scalar_series(spec.blocks[r - 1].b, spec.blocks[r - 1].C, order)
            out += _poly_mul(shift_pow, block, order)
            if r < spec.R:
                shift_pow = _poly_mul(shift_pow, shift, order)
        return out
    raise TypeError(f"unknown MPF spec type {type(spec)!r}")


# ---------------------------------------------------------------------------
# Sampling ensembles.


def _block_layer(blk: LBlock, sched) -> EnsembleLayer:
    probs = np.abs(blk.C) / blk.one_norm
    return EnsembleLayer(
        tuple(
            EnsembleEntry(float(p), 1 if c >= 0 else -1, sched, float(b))
            for p, c, b in zip(probs, blk.C, blk.b)
        )
    )


def mpf_ensemble(spec: MPFSpec, L: int) -> SamplingEnsemble:
    """Turn a formula into a layered sampling ensemble over L-term schedules.

    Negative weights are absorbed as sign tags on the entries, probabilities
    are the normalized absolute weights, and the resolution factor records
    the total 1-norm inflation, so that
    ``resolution * E[sign * V] = mpf_matrix``.
    """
    sched = _suzuki_cached(spec.chi, L)
    if isinstance(spec, ChildsWiebe):
        entries = []
        for cq, ell in zip(spec.C, spec.ells):
            entries.append(
                EnsembleEntry(
                    float(abs(cq) / spec.resolution),
                    1 if cq >= 0 else -1,
                    repeat_schedule(sched, ell),
                    1.0,
                )
            )
        return SamplingEnsemble(
            (EnsembleBranch(1.0, (EnsembleLayer(tuple(entries)),)),), resolution=spec.resolution
        )
    if isinstance(spec, MatchingMPF):
        layers = tuple(_block_layer(blk, sched) for blk in spec.blocks)
        return SamplingEnsemble((EnsembleBranch(1.0, layers),), resolution=spec.resolution)
    if isinstance(spec, ClosedFormMPF):
        shift_layer = _block_layer(spec.block0, sched)
        branches = []
        for r in range(1, spec.R + 1):
            weight = spec.block0.one_norm ** (r - 1) * spec.blocks[r - 1].one_norm
            layers = (shift_layer,) * (r - 1) + (_block_layer(spec.blocks[r - 1], sched),)
            branches.append(EnsembleBranch(weight / spec.resolution, layers))
        return SamplingEnsemble(tuple(branches), resolution=spec.resolution)
    raise TypeError(f"unknown MPF spec type {type(spec)!r}")
