"""Predictive and retrodictive probabilities and the source transform.

The transform conjugates states by the inverse square root of the source
function and detectors by its square root, producing a retrodictive POVM
indexed like the ensemble and retrodictive states indexed like the POVM.
Born's rule on the transformed pair reproduces the Bayes conditionals for
arbitrary (biased) sources; for an unbiased source it reduces to the familiar
construction Pi_i^ret = D eta_i rho_i, rho_j^ret = Pi_j / Tr(Pi_j).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .ensembles import (
    DensityOperator,
    Ensemble,
    Povm,
    SourceFunction,
    require_same_dim,
    source_from_ensemble,
)
from .errors import (
    NumericIntegrityError,
    ValidationError,
    ZeroProbabilityOutcome,
)

MU_FLOOR = 1e-12
PROB_CLAMP_TOL = 1e-12
OMEGA_MIN_EIG = 1e-10


def _clamp_probability(value: float, what: str) -> float:
    """Clip into [0, 1], allowing only +-1e-12 of roundoff outside it."""
    if not (-PROB_CLAMP_TOL <= value <= 1.0 + PROB_CLAMP_TOL):
        raise NumericIntegrityError(f"{what} = {value!r} is outside [0, 1] beyond clamp tolerance")
    return min(max(value, 0.0), 1.0)


def _real_trace_product(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.einsum("ij,ji->", a, b).real)


def predictive_prob(povm_element, state) -> float:
    """Born-rule probability Tr(Pi rho) of one outcome given one state."""
    pi = np.asarray(povm_element, dtype=np.complex128)
    rho = state.matrix if isinstance(state, DensityOperator) else np.asarray(state, dtype=np.complex128)
    require_same_dim(pi.shape[0], rho.shape[0], "POVM element vs state")
    return _clamp_probability(_real_trace_product(pi, rho), "predictive probability")


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Unconditional click probabilities of the detectors against the source."""

    mu: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64).copy()
        if np.any(mu < -PROB_CLAMP_TOL):
            raise NumericIntegrityError(f"negative outcome probability {mu.min():.3e}")
        mu = np.clip(mu, 0.0, None)
        total = float(mu.sum())
        if abs(total - 1.0) > 1e-10:
            raise NumericIntegrityError(f"outcome probabilities sum to {total!r}")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)

    def __len__(self) -> int:
        return self.mu.shape[0]

    def __getitem__(self, j: int) -> float:
        return float(self.mu[j])


def outcome_probs(povm: Povm, omega: SourceFunction) -> OutcomeDistribution:
    """Click probabilities mu_j = Tr(Pi_j Omega)."""
    require_same_dim(povm.dim, omega.dim, "POVM vs source")
    mu = [_real_trace_product(e, omega.matrix) for e in povm.elements]
    return OutcomeDistribution(np.array(mu))


def retrodictive_prob_bayes(ensemble: Ensemble, povm: Povm, i: int, j: int) -> float:
    """Bayes conditional P(state i | outcome j) from the predictive quantities."""
    require_same_dim(ensemble.dim, povm.dim, "ensemble vs POVM")
    joint = [
        float(ensemble.priors[k]) * predictive_prob(povm.elements[j], ensemble.states[k])
        for k in range(len(ensemble))
    ]
    mu_j = sum(joint)
    if mu_j <= MU_FLOOR:
        raise ZeroProbabilityOutcome(
            f"outcome {j} has probability {mu_j:.3e} <= {MU_FLOOR:.0e}; cannot condition on it"
        )
    return _clamp_probability(joint[i] / mu_j, "retrodictive probability")


@dataclass(frozen=True, eq=False)
class RetroDual:
    """The transformed pair: retrodictive POVM, states, and their weights.

    retro_states[j] is None exactly when mu_j is below the floor, in which
    case conditioning on outcome j is rejected rather than divided by ~0.
    """

    retro_povm: Povm
    retro_states: tuple[DensityOperator | None, ...]
    mu: OutcomeDistribution
    omega: SourceFunction

    def completeness_residual(self) -> float:
        """Max-abs residual of sum_i Pi_i^ret against the identity."""
        total = sum(self.retro_povm.elements)
        return linalg.maxabs(total - np.eye(self.retro_povm.dim))

    def trace_residual(self) -> float:
        """Worst |Tr(rho_j^ret) - 1| over the defined retrodictive states."""
        residuals = [
            abs(float(np.trace(s.matrix).real) - 1.0)
            for s in self.retro_states
            if s is not None
        ]
        return max(residuals, default=0.0)

    def source_residual(self) -> float:
        """Max-abs residual of sum_j mu_j rho_j^ret against the source function."""
        total = np.zeros((self.omega.dim, self.omega.dim), dtype=np.complex128)
        for j, state in enumerate(self.retro_states):
            if state is not None:
                total = total + self.mu[j] * state.matrix
        return linalg.maxabs(total - self.omega.matrix)


def retro_transform(
    ensemble: Ensemble,
    povm: Povm,
    support_restricted: bool = False,
) -> RetroDual:
    """Build the retrodictive dual of a prepare-and-measure pair.

    Pi_i^ret = Omega^{-1/2} eta_i rho_i Omega^{-1/2} and
    rho_j^ret = sqrt(Omega) Pi_j sqrt(Omega) / mu_j.

    Raises SingularOperator when the source function has an eigenvalue below
    1e-10, unless support_restricted=True, in which case the inversion acts on
    the support only (the completeness identity then holds on the support
    projector rather than the identity).  A source that clears the eigenvalue
    floor but is conditioned badly enough that the transformed operators miss
    their invariants raises NumericIntegrityError instead of returning a
    silently degraded dual.
    """
    require_same_dim(ensemble.dim, povm.dim, "ensemble vs POVM")
    omega = source_from_ensemble(ensemble)
    om = omega.matrix
    inv_root = linalg.inv_sqrtm_psd(
        om, min_eig=OMEGA_MIN_EIG, support_restricted=support_restricted
    )
    root = linalg.sqrtm_psd(om)

    retro_elements = []
    for eta, state in zip(ensemble.priors, ensemble.states):
        e = inv_root @ (float(eta) * state.matrix) @ inv_root
        retro_elements.append((e + linalg.dag(e)) / 2.0)
    try:
        if support_restricted:
            support = inv_root @ om @ inv_root
            retro_povm = Povm(retro_elements, sum_target=(support + linalg.dag(support)) / 2.0)
        else:
            retro_povm = Povm(retro_elements)
    except ValidationError as exc:
        raise NumericIntegrityError(
            f"retrodictive POVM violates its invariants: {exc}"
        ) from exc

    mu = outcome_probs(povm, omega)
    retro_states: list[DensityOperator | None] = []
    for j, element in enumerate(povm.elements):
        if mu[j] <= MU_FLOOR:
            retro_states.append(None)
            continue
        s = root @ element @ root
        # Tr(s) equals mu_j analytically; normalizing by the sandwich's own
        # trace keeps the state's trace at 1 even when mu_j is tiny.
        s = s / float(np.trace(s).real)
        try:
            retro_states.append(DensityOperator((s + linalg.dag(s)) / 2.0))
        except ValidationError as exc:
            raise NumericIntegrityError(
                f"retrodictive state {j} violates its invariants: {exc}"
            ) from exc

    return RetroDual(retro_povm, tuple(retro_states), mu, omega)


def retrodictive_prob_symmetric(dual: RetroDual, i: int, j: int) -> float:
    """Born-rule conditional Tr(Pi_i^ret rho_j^ret) on the transformed pair."""
    state = dual.retro_states[j]
    if state is None:
        raise ZeroProbabilityOutcome(
            f"outcome {j} has probability below {MU_FLOOR:.0e}; its retrodictive state is undefined"
        )
    return _clamp_probability(
        _real_trace_product(dual.retro_povm.elements[i], state.matrix),
        "retrodictive probability",
    )


def unbiased_dual(ensemble: Ensemble, povm: Povm) -> RetroDual:
    """The unbiased-source construction, for comparison with the transform.

    Only meaningful when the source is unbiased; no transform is applied.
    """
    omega = source_from_ensemble(ensemble)
    d = ensemble.dim
    retro_povm = Povm(
        [d * float(eta) * s.matrix for eta, s in zip(ensemble.priors, ensemble.states)]
    )
    mu = outcome_probs(povm, omega)
    retro_states: list[DensityOperator | None] = []
    for j, element in enumerate(povm.elements):
        tr = float(np.trace(element).real)
        if mu[j] <= MU_FLOOR or tr <= MU_FLOOR:
            retro_states.append(None)
        else:
            retro_states.append(DensityOperator(element / tr))
    return RetroDual(retro_povm, tuple(retro_states), mu, omega)
