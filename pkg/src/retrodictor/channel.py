"""The entangled two-qubit channel behind the discrimination protocol.

Alice can prepare Bob's states by measuring her half of a shared entangled
state.  Preparing in the computational basis gives the standard asymmetric
channel; preparing in the retrodictive basis gives a state that is invariant
under swapping the two parties, whose reduced state on either side is the
source function.  The no-signaling statement -- Bob's measurement cannot
change Alice's reduced state -- is the same constraint that bounds the dual
optimization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .ensembles import DensityOperator, Violation, validate_state_vector
from .errors import ValidationError
from .ud import UdInstance, omega_matrix, optimal_dual, retro_basis, ud_states

# Basis order of the amplitudes: |0a 0b>, |0a 1b>, |1a 0b>, |1a 1b>.
_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
)


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    """Unit vector on the two-qubit product space, subsystem a first."""

    amplitudes: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.amplitudes, dtype=np.complex128)
        report = validate_state_vector(arr, "two-qubit state")
        violations = list(report.violations)
        if arr.ndim == 1 and arr.shape[0] != 4:
            violations.append(
                Violation("vector_length", float(arr.shape[0]), "amplitudes must have length 4")
            )
        if violations:
            raise ValidationError(violations)
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)

    def density_matrix(self) -> np.ndarray:
        return linalg.outer(self.amplitudes)

    def reduced(self, trace_out: int) -> DensityOperator:
        """Reduced state of one qubit (trace_out=0 removes a, 1 removes b)."""
        m = linalg.partial_trace(self.density_matrix(), (2, 2), trace_out)
        return DensityOperator((m + linalg.dag(m)) / 2.0)

    def swapped(self) -> "TwoQubitState":
        return TwoQubitState(_SWAP @ self.amplitudes)

    def swap_residual(self) -> float:
        """Norm distance between the state and its a<->b swap."""
        return float(np.linalg.norm(self.amplitudes - _SWAP @ self.amplitudes))


def entangled_state(instance: UdInstance) -> TwoQubitState:
    """Shared state whose computational-basis preparation on a emits the UD pair."""
    psi1, psi2 = ud_states(instance)
    zero = np.array([1.0, 0.0])
    one = np.array([0.0, 1.0])
    amp = math.sqrt(instance.eta[0]) * np.kron(zero, psi1.amplitudes) + math.sqrt(
        instance.eta[1]
    ) * np.kron(one, psi2.amplitudes)
    return TwoQubitState(amp)


def symmetric_state(instance: UdInstance) -> TwoQubitState:
    """Shared state prepared in the retrodictive basis; invariant under the a<->b swap."""
    psi1, psi2 = ud_states(instance)
    basis = retro_basis(instance)
    amp = math.sqrt(instance.eta[0]) * np.kron(
        basis.phi1.amplitudes, psi1.amplitudes
    ) + math.sqrt(instance.eta[1]) * np.kron(basis.phi2.amplitudes, psi2.amplitudes)
    return TwoQubitState(amp)


def sqrt_omega_in_retro_basis(instance: UdInstance) -> np.ndarray:
    """Matrix of sqrt(Omega) in the retrodictive basis (symmetric off-diagonal)."""
    basis = retro_basis(instance)
    u = basis.matrix()
    root = linalg.sqrtm_psd(omega_matrix(instance))
    return linalg.dag(u) @ root @ u


@dataclass(frozen=True, eq=False)
class NoSignalingReport:
    """Alice's reduced state against her outcome-averaged post-measurement state.

    max_residual is recomputed from the two operators on construction; a value
    at roundoff scale is the no-signaling statement for this channel.
    """

    rho_a: DensityOperator
    rho_a_tilde: DensityOperator
    rho_b: DensityOperator
    max_residual: float = field(init=False)

    def __post_init__(self):
        res = linalg.maxabs(self.rho_a.matrix - self.rho_a_tilde.matrix)
        object.__setattr__(self, "max_residual", res)


def no_signaling_check(
    instance: UdInstance,
    mu: tuple[float, float] | None = None,
) -> NoSignalingReport:
    """Compare Alice's reduced state with the mu-weighted decomposition.

    mu defaults to the optimal dual weights; any feasible pair may be passed.
    The failure contribution is the remainder of the source after removing the
    conclusive weights; if the remainder fails positivity (an infeasible mu),
    a ValidationError naming the PSD violation is raised.
    """
    e1, e2 = instance.eta
    if mu is None:
        opt = optimal_dual(instance)
        mu1, mu2 = opt.mu1, opt.mu2
    else:
        mu1, mu2 = float(mu[0]), float(mu[1])

    off = math.sqrt(e1 * e2) * instance.s
    remainder = np.array([[e1 - mu1, off], [off, e2 - mu2]])
    violations = []
    if min(e1 - mu1, e2 - mu2) < -1e-12:
        violations.append(
            Violation("psd", -min(e1 - mu1, e2 - mu2),
                      "weighted failure state has a negative diagonal entry")
        )
    det = (e1 - mu1) * (e2 - mu2) - off * off
    if det < -1e-12:
        violations.append(
            Violation("psd", -det, "weighted failure state has negative determinant")
        )
    if violations:
        raise ValidationError(violations)

    state = symmetric_state(instance)
    rho_a = state.reduced(trace_out=1)
    rho_b = state.reduced(trace_out=0)

    basis = retro_basis(instance)
    u = basis.matrix()
    tilde = (
        mu1 * basis.phi1.projector()
        + mu2 * basis.phi2.projector()
        + u @ remainder.astype(np.complex128) @ linalg.dag(u)
    )
    rho_a_tilde = DensityOperator((tilde + linalg.dag(tilde)) / 2.0)
    return NoSignalingReport(rho_a, rho_a_tilde, rho_b)
