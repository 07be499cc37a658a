"""Search over conservation-respecting interactions for low-noise readouts.

Feasibility is exact by construction: interactions are generated as
exp(i sum_k theta_k G_k) where the G_k span the hermitian commutant of the
total conserved quantity, so every candidate satisfies the conservation law
to rounding. The search itself is plain local descent on numerically
estimated gradients with seeded random restarts; the lower bounds provide
the certificate on the other side, so no global-optimality claim is needed
or made.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .bounds import (
    ConservationPair,
    TheoremViolation,
    YANASE_PRECONDITION_TOL,
    yanase_bound,
    yanase_residual,
)
from .linalg import (
    DEGENERACY_TOL,
    Ket,
    Operator,
    PreconditionError,
    frobenius_norm,
)
from .measurement import MeasurementModel, noise, sup_noise
from .oscillator import (
    CoherentAmplitudes,
    FockSpace,
    m_z_operator,
    two_mode_coherent_state,
)

COMMUTANT_MERGE_TOL = 1e-12
GENERATOR_COMMUTATION_TOL = 1e-11
SOUNDNESS_SLACK = 1e-9
MAX_OSCILLATOR_N_MAX = 5


@dataclass(frozen=True, eq=False)
class CommutantBasis:
    """Frobenius-orthonormal hermitian generators commuting with a fixed operator."""

    generators: tuple
    conserved: Operator

    def __post_init__(self):
        l = self.conserved.matrix
        for k, g in enumerate(self.generators):
            r = frobenius_norm(g.matrix @ l - l @ g.matrix)
            if r > GENERATOR_COMMUTATION_TOL:
                raise ValueError(f"generator {k} fails to commute, residual {r:.3e}")

    @property
    def size(self) -> int:
        return len(self.generators)


def commutant_basis(l_total: Operator) -> CommutantBasis:
    """Hermitian commutant of l_total, one d^2 block of generators per eigenspace."""
    if not l_total.has("hermitian"):
        raise ValueError("commutant_basis needs a hermitian operator")
    w, vecs = np.linalg.eigh(l_total.matrix)
    generators = []
    start = 0
    for k in range(1, len(w) + 1):
        if k == len(w) or (w[k] - w[k - 1]) > COMMUTANT_MERGE_TOL:
            block = vecs[:, start:k]
            d = block.shape[1]
            for i in range(d):
                vi = block[:, i:i + 1]
                generators.append(Operator.hermitian(vi @ vi.conj().T))
                for j in range(i + 1, d):
                    vj = block[:, j:j + 1]
                    cross = vi @ vj.conj().T
                    generators.append(Operator.hermitian(
                        (cross + cross.conj().T) / np.sqrt(2.0)))
                    generators.append(Operator.hermitian(
                        (1j * cross - 1j * cross.conj().T) / np.sqrt(2.0)))
            start = k
    return CommutantBasis(tuple(generators), l_total)


def conservative_unitary(basis: CommutantBasis, theta: Sequence[float]) -> Operator:
    """exp(i sum theta_k G_k); conserves the basis's operator by construction."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (basis.size,):
        raise ValueError(f"theta has length {theta.size}, expected {basis.size}")
    dim = basis.conserved.dim
    h = np.zeros((dim, dim), dtype=np.complex128)
    for t, g in zip(theta, basis.generators):
        if t != 0.0:
            h += t * g.matrix
    h = (h + h.conj().T) / 2.0
    w, vecs = np.linalg.eigh(h)
    u = (vecs * np.exp(1j * w)) @ vecs.conj().T
    return Operator.unitary(u)


def hermitian_coordinates(basis: CommutantBasis, h: Operator) -> np.ndarray:
    """Coefficients of a hermitian matrix in the basis; fails if it lies outside."""
    theta = np.array([float(np.real(np.trace(g.matrix.conj().T @ h.matrix)))
                      for g in basis.generators])
    recon = np.zeros_like(h.matrix)
    for t, g in zip(theta, basis.generators):
        recon = recon + t * g.matrix
    r = frobenius_norm(recon - h.matrix)
    if r > 1e-9:
        raise ValueError(f"matrix lies outside the commutant span, residual {r:.3e}")
    return theta


def record_observable(l2: Operator) -> Operator:
    """Parity pointer for a probe: +/-1/2 alternating up the spectrum of L2.

    A function of L2, so the Yanase condition holds by construction, and
    +/-1/2 valued, matching the readout it is meant to record. The
    alternation matters: it puts a sign boundary in every conserved sector,
    which is what lets larger probes push the achievable noise down; a
    single-step sign pattern pins the optimum at 1/4 regardless of size.
    """
    w, vecs = np.linalg.eigh(l2.matrix)
    level = np.zeros(len(w), dtype=int)
    for i in range(1, len(w)):
        level[i] = level[i - 1] + (1 if w[i] - w[i - 1] > DEGENERACY_TOL else 0)
    # anchor +1/2 at the top of the spectrum; for a spin-1/2 probe this
    # reproduces the spin itself
    f = 0.5 * (-1.0) ** (level[-1] - level)
    return Operator.hermitian((vecs * f) @ vecs.conj().T)


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 16
    max_iters: int = 80
    grad_step: float = 1e-5
    tol: float = 1e-10
    seed: int = 0
    objective: str = "state"          # "state" minimizes eps(psi)^2, "sup" the worst case
    optimize_xi: bool = False
    theta0: Optional[tuple] = None    # None means the zero vector (U = identity)
    init_step: float = 0.5
    max_backtracks: int = 40

    def __post_init__(self):
        if self.objective not in ("state", "sup"):
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.max_iters < 0 or self.grad_step <= 0 or self.init_step <= 0:
            raise ValueError("invalid optimizer parameters")


@dataclass(frozen=True, eq=False)
class OptimizationRun:
    """Record of one optimization: winning restart plus per-restart summaries."""

    seed: int
    theta: np.ndarray
    objective_trace: tuple
    result_model: MeasurementModel
    bound_value: float
    final_objective: float
    converged: bool
    restart_final_objectives: tuple


def numerical_gradient(f: Callable[[np.ndarray], float], x: np.ndarray,
                       step: float) -> np.ndarray:
    """Central-difference gradient, evaluated coordinate by coordinate in order."""
    g = np.zeros_like(x)
    for i in range(x.size):
        forward = x.copy()
        forward[i] += step
        backward = x.copy()
        backward[i] -= step
        g[i] = (f(forward) - f(backward)) / (2.0 * step)
    return g


def _worker_count(tasks: int) -> int:
    raw = os.environ.get("WAYLIMIT_THREADS", "1")
    try:
        cap = max(1, int(raw))
    except ValueError:
        cap = 1
    return min(tasks, cap)


class _Problem:
    """Fixed data of one optimization: spaces, observables, commutant basis."""

    def __init__(self, a: Operator, pair: ConservationPair, m: Operator,
                 xi0: Ket, psi: Ket, config: OptimizerConfig):
        r = yanase_residual(m, pair.L2)
        if r >= YANASE_PRECONDITION_TOL:
            raise PreconditionError(
                f"optimizer requires the Yanase condition, [M, L2] residual {r:.3e}")
        self.a = a
        self.pair = pair
        self.m = m
        self.xi0 = xi0
        self.psi = psi
        self.config = config
        self.object_dim = a.dim
        self.probe_dim = pair.L2.dim
        self.basis = commutant_basis(pair.total())
        self.n_theta = self.basis.size
        self.n_params = self.n_theta + (2 * self.probe_dim if config.optimize_xi else 0)

    def split(self, x: np.ndarray):
        theta = x[:self.n_theta]
        if not self.config.optimize_xi:
            return theta, self.xi0
        raw = x[self.n_theta:self.n_theta + self.probe_dim] \
            + 1j * x[self.n_theta + self.probe_dim:]
        nrm = np.linalg.norm(raw)
        if nrm < 1e-12:
            raise ArithmeticError("probe-state parameters collapsed to zero")
        return theta, Ket(raw / nrm)

    def model_at(self, x: np.ndarray) -> MeasurementModel:
        theta, xi = self.split(x)
        u = conservative_unitary(self.basis, theta)
        return MeasurementModel(self.object_dim, self.probe_dim, xi, u, self.m, self.a)

    def objective(self, x: np.ndarray) -> float:
        model = self.model_at(x)
        if self.config.objective == "sup":
            s = sup_noise(model)
            return s * s
        e = noise(model, self.psi)
        return e * e

    def check_soundness(self, x: np.ndarray, value: float):
        model = self.model_at(x)
        e = noise(model, self.psi)
        floor = yanase_bound(model, self.pair, self.psi)
        if e * e < floor - SOUNDNESS_SLACK:
            raise TheoremViolation(
                f"accepted iterate has squared noise {e * e:.17g} below the "
                f"bound {floor:.17g}")

    def initial_point(self, restart: int) -> np.ndarray:
        x = np.zeros(self.n_params)
        if self.config.theta0 is not None:
            t0 = np.asarray(self.config.theta0, dtype=float)
            if t0.shape != (self.n_theta,):
                raise ValueError(
                    f"theta0 has length {t0.size}, expected {self.n_theta}")
            x[:self.n_theta] = t0
        if self.config.optimize_xi:
            x[self.n_theta:self.n_theta + self.probe_dim] = np.real(self.xi0.amplitudes)
            x[self.n_theta + self.probe_dim:] = np.imag(self.xi0.amplitudes)
        if restart > 0:
            rng = np.random.default_rng([self.config.seed, restart])
            x[:self.n_theta] = rng.uniform(-np.pi, np.pi, size=self.n_theta)
            if self.config.optimize_xi:
                raw = rng.standard_normal(self.probe_dim) \
                    + 1j * rng.standard_normal(self.probe_dim)
                raw /= np.linalg.norm(raw)
                x[self.n_theta:self.n_theta + self.probe_dim] = np.real(raw)
                x[self.n_theta + self.probe_dim:] = np.imag(raw)
        return x

    def _regauge(self, x: np.ndarray) -> np.ndarray:
        # The probe-state block is scale invariant; keep it on the unit sphere.
        if not self.config.optimize_xi:
            return x
        raw = x[self.n_theta:self.n_theta + self.probe_dim] \
            + 1j * x[self.n_theta + self.probe_dim:]
        nrm = np.linalg.norm(raw)
        out = x.copy()
        out[self.n_theta:self.n_theta + self.probe_dim] /= nrm
        out[self.n_theta + self.probe_dim:] /= nrm
        return out

    def descend(self, restart: int):
        cfg = self.config
        x = self.initial_point(restart)
        f = self.objective(x)
        self.check_soundness(x, f)
        trace = [f]
        step = cfg.init_step
        converged = False
        for _ in range(cfg.max_iters):
            g = numerical_gradient(self.objective, x, cfg.grad_step)
            gnorm = float(np.linalg.norm(g))
            if gnorm < cfg.tol:
                converged = True
                break
            alpha = step / max(gnorm, 1.0)
            accepted = False
            for _ in range(cfg.max_backtracks):
                x_try = self._regauge(x - alpha * g)
                f_try = self.objective(x_try)
                if f_try < f - 1e-15:
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                converged = True
                break
            x, f = x_try, f_try
            trace.append(f)
            self.check_soundness(x, f)
            step = min(alpha * max(gnorm, 1.0) * 2.0, 4.0)
        return f, tuple(trace), x, converged


def optimize_noise(a: Operator, pair: ConservationPair, m: Operator, xi0: Ket,
                   psi: Ket, config: OptimizerConfig) -> OptimizationRun:
    """Minimize the (squared) noise over conservative interactions.

    Restart 0 starts from theta0 (the identity interaction by default); the
    remaining restarts start from seeded random coefficients. Restarts are
    independent, may run in parallel (capped by WAYLIMIT_THREADS), and the
    winner is selected by lowest objective with the restart index as the
    deterministic tie break.
    """
    problem = _Problem(a, pair, m, xi0, psi, config)
    workers = _worker_count(config.restarts)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(problem.descend, range(config.restarts)))
    else:
        results = [problem.descend(r) for r in range(config.restarts)]

    best_index = min(range(len(results)), key=lambda r: (results[r][0], r))
    best_f, best_trace, best_x, best_converged = results[best_index]
    theta, _ = problem.split(best_x)
    model = problem.model_at(best_x)
    floor = yanase_bound(model, pair, psi)
    return OptimizationRun(
        seed=config.seed,
        theta=np.array(theta, dtype=float),
        objective_trace=best_trace,
        result_model=model,
        bound_value=floor,
        final_objective=best_f,
        converged=best_converged,
        restart_final_objectives=tuple(r[0] for r in results),
    )


def spin_ladder_probe(levels: int):
    """Ladder probe: conserved quantity diag(j .. -j), parity record, and a
    sine-profile probe state.

    The sine profile maximizes the total nearest-level overlap, which is the
    quantity the best conservative interaction converts into record
    correlation; for two levels it reduces to the equal superposition.
    """
    if levels < 2:
        raise ValueError("ladder probe needs at least two levels")
    j = (levels - 1) / 2.0
    values = j - np.arange(levels, dtype=float)
    l2 = Operator.hermitian(np.diag(values))
    xi = np.sin(np.arange(1, levels + 1) * np.pi / (levels + 1)).astype(np.complex128)
    xi /= np.linalg.norm(xi)
    return l2, record_observable(l2), Ket(xi)


def oscillator_probe(n_max: int, amps: CoherentAmplitudes):
    """Truncated two-mode oscillator probe with a coherent initial state.

    Building a full interaction on this space scales as the fourth power of
    the cutoff, so it is only offered for n_max <= 5; the variance law itself
    is validated at much larger cutoffs elsewhere.
    """
    if n_max > MAX_OSCILLATOR_N_MAX:
        raise ValueError(
            f"full oscillator interactions are limited to n_max <= {MAX_OSCILLATOR_N_MAX}")
    space = FockSpace(n_max)
    l2 = m_z_operator(space)
    return l2, record_observable(l2), two_mode_coherent_state(amps, space)


@dataclass(frozen=True)
class SweepRow:
    """One size of the probe-size sweep; achieved is NaN when that size failed."""

    family: str
    size: float
    var_mz: float
    bound: float
    achieved: float
    gap_ratio: float
    seed: int
    error: str = ""


def sweep_probe_size(family: str, sizes: Sequence, config: OptimizerConfig,
                     n_max: int = 2) -> list:
    """Bound versus best achieved error for a family of growing probes.

    The spin scenario is fixed (A = S_x, L1 = S_z, input state y-up); per-size
    failures are recorded in the row and the sweep continues.
    """
    from .bounds import optimal_spin_bound
    from .linalg import variance
    from .spin import named_state, spin_operators

    if family not in ("spin_ladder", "oscillator"):
        raise ValueError(f"unknown probe family {family!r}")
    sx, _, sz = spin_operators()
    psi = named_state("alpha_y")
    rows = []
    for index, size in enumerate(sizes):
        try:
            if family == "spin_ladder":
                l2, m, xi = spin_ladder_probe(int(size))
            else:
                half = np.sqrt(float(size) / 2.0)
                l2, m, xi = oscillator_probe(n_max, CoherentAmplitudes(half, half))
            pair = ConservationPair(L1=sz, L2=l2)
            var = variance(l2, xi)
            bound = optimal_spin_bound(var)
            run = optimize_noise(sx, pair, m, xi, psi,
                                 replace(config, seed=config.seed + index))
            achieved = run.final_objective
            rows.append(SweepRow(family, float(size), var, bound, achieved,
                                 achieved / bound, config.seed))
        except (ValueError, PreconditionError, ArithmeticError) as exc:
            var = float(size) if family == "oscillator" else \
                ((int(size) - 1) / 2.0) ** 2
            rows.append(SweepRow(family, float(size), var,
                                 optimal_spin_bound(var), math.nan, math.nan,
                                 config.seed, error=str(exc)))
    return rows
