"""Indirect measurement models and their noise figures.

A model is the tuple (probe state xi, interaction U, record observable M)
together with the object observable A it is meant to measure. All statistics
are computed in the Heisenberg picture: the recorded quantity after the
interaction is U^dag (I x M) U and the noise operator is its mismatch with
A x I.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DimensionMismatch,
    Ket,
    Operator,
    PreconditionError,
    StructureError,
    identity,
    spectral,
    tensor,
)

PROBABILITY_CLAMP_TOL = 1e-12
PROBABILITY_SUM_TOL = 1e-9
OUTCOME_MATCH_TOL = 1e-9
SPIN_HALF_SPECTRUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    """Probe state, interaction unitary, record observable, measured observable."""

    object_dim: int
    probe_dim: int
    xi: Ket
    U: Operator
    M: Operator
    A: Operator

    def __post_init__(self):
        if self.object_dim < 1 or self.probe_dim < 1:
            raise ValueError("dimensions must be positive")
        if self.xi.dim != self.probe_dim:
            raise DimensionMismatch(f"xi has dim {self.xi.dim}, expected probe_dim {self.probe_dim}")
        if not self.xi.normalized:
            raise StructureError("probe state xi must be normalized")
        if self.U.dim != self.object_dim * self.probe_dim:
            raise DimensionMismatch(
                f"U has dim {self.U.dim}, expected {self.object_dim * self.probe_dim}")
        if not self.U.has("unitary"):
            raise StructureError("U must carry the unitary tag")
        if self.M.dim != self.probe_dim:
            raise DimensionMismatch(f"M has dim {self.M.dim}, expected probe_dim {self.probe_dim}")
        if not self.M.has("hermitian"):
            raise StructureError("M must carry the hermitian tag")
        if self.A.dim != self.object_dim:
            raise DimensionMismatch(f"A has dim {self.A.dim}, expected object_dim {self.object_dim}")
        if not self.A.has("hermitian"):
            raise StructureError("A must carry the hermitian tag")

    def composite_state(self, psi: Ket) -> Ket:
        if psi.dim != self.object_dim:
            raise DimensionMismatch(f"psi has dim {psi.dim}, expected object_dim {self.object_dim}")
        if not psi.normalized:
            raise StructureError("object state psi must be normalized")
        return tensor(psi, self.xi)


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Finitely many (value, probability) outcomes of one measurement."""

    outcomes: tuple

    def __post_init__(self):
        total = 0.0
        for value, p in self.outcomes:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p!r} for outcome {value!r} outside [0, 1]")
            total += p
        if abs(total - 1.0) > PROBABILITY_SUM_TOL:
            raise ValueError(f"probabilities sum to {total:.17g}, not 1")

    def probability_near(self, value: float, tol: float = OUTCOME_MATCH_TOL) -> float:
        return sum(p for v, p in self.outcomes if abs(v - value) <= tol)

    def probability_in_interval(self, lo: float, hi: float) -> float:
        """Mass of the spectral values contained in [lo, hi].

        Finite dimensions make every interval a finite union of spectral
        values, so this is the general event probability.
        """
        if lo > hi:
            raise ValueError(f"empty interval [{lo!r}, {hi!r}]")
        return sum(p for v, p in self.outcomes if lo <= v <= hi)


def heisenberg_probe(model: MeasurementModel) -> Operator:
    """The record observable propagated back through the interaction: U^dag (I x M) U."""
    im = tensor(identity(model.object_dim), model.M).matrix
    u = model.U.matrix
    return Operator.hermitian(u.conj().T @ im @ u)


def outcome_distribution(model: MeasurementModel, psi: Ket) -> OutcomeDistribution:
    """Probability of each spectral value of the propagated record observable."""
    v = model.composite_state(psi).amplitudes
    decomp = spectral(heisenberg_probe(model))
    outcomes = []
    for value, proj in zip(decomp.eigenvalues, decomp.projectors):
        p = float(np.real(np.vdot(proj.matrix @ v, proj.matrix @ v)))
        if p < -PROBABILITY_CLAMP_TOL or p > 1.0 + PROBABILITY_CLAMP_TOL:
            raise ArithmeticError(f"outcome probability {p:.17g} outside clamp tolerance")
        outcomes.append((value, min(max(p, 0.0), 1.0)))
    return OutcomeDistribution(tuple(outcomes))


def bsf_deviation(model: MeasurementModel, psi: Ket) -> float:
    """Worst-case mismatch with the Born statistical formula for A.

    Outcome values are matched to spectral values of A within a small
    tolerance; the probability mass on outcomes with no counterpart in the
    spectrum of A is an unambiguous violation and enters the maximum whole.
    """
    dist = outcome_distribution(model, psi)
    a_decomp = spectral(model.A)
    deviation = 0.0
    matched = [False] * len(dist.outcomes)
    for value, proj in zip(a_decomp.eigenvalues, a_decomp.projectors):
        pv = proj.matrix @ psi.amplitudes
        born = float(np.real(np.vdot(pv, pv)))
        measured = 0.0
        for k, (outcome, p) in enumerate(dist.outcomes):
            if abs(outcome - value) <= OUTCOME_MATCH_TOL:
                measured += p
                matched[k] = True
        deviation = max(deviation, abs(measured - born))
    stray = sum(p for k, (_, p) in enumerate(dist.outcomes) if not matched[k])
    return max(deviation, stray)


def noise_operator(model: MeasurementModel) -> Operator:
    """Mismatch between the recorded and the measured quantity on the composite space."""
    ai = tensor(model.A, identity(model.probe_dim)).matrix
    return Operator.hermitian(heisenberg_probe(model).matrix - ai)


def noise(model: MeasurementModel, psi: Ket) -> float:
    """Root-mean-square error of the record for input state psi."""
    v = model.composite_state(psi).amplitudes
    nv = noise_operator(model).matrix @ v
    return float(np.linalg.norm(nv))


def sup_noise(model: MeasurementModel) -> float:
    """Least upper bound of the noise over all input states.

    Computed exactly as the largest eigenvalue of the object-space partial
    expectation of the squared noise operator in the probe state.
    """
    n = noise_operator(model).matrix
    n2 = n @ n
    do, dp = model.object_dim, model.probe_dim
    t = n2.reshape(do, dp, do, dp)
    xi = model.xi.amplitudes
    b = np.einsum("p,ipjq,q->ij", xi.conj(), t, xi)
    top = float(np.linalg.eigvalsh(b)[-1])
    return float(np.sqrt(max(top, 0.0)))


def error_probability(model: MeasurementModel, psi: Ket) -> float:
    """Squared noise read as an error probability; spin-1/2 readouts only."""
    if model.object_dim != 2:
        raise PreconditionError("error probability is defined for two-level objects only")
    values = spectral(model.A).eigenvalues
    if len(values) != 2 or abs(values[0] + 0.5) > SPIN_HALF_SPECTRUM_TOL \
            or abs(values[1] - 0.5) > SPIN_HALF_SPECTRUM_TOL:
        raise PreconditionError(
            f"error probability needs spectrum {{-1/2, +1/2}}, got {values}")
    e = noise(model, psi)
    return e * e
