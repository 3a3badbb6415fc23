"""Schrodinger integration of the interpolated Hamiltonian.

``evolve`` integrates d psi/dt = -i H(t/T) psi from the uniform superposition
with an adaptive Dormand-Prince 5(4) pair and PI step-size control.  The
propagated solution is the 5th-order one; the embedded 4th-order solution only
feeds the error estimate.  The state is never renormalized: the end-to-end
norm drift is the accuracy diagnostic.

``dense_oracle_evolve`` is a slow, independent check for small n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.linalg import expm

from .errors import AccuracyError, BudgetError, CapacityError, DimensionError, InvalidParameterError
from .hamiltonian import BitDegrees, DiagonalProblem, build_degrees, build_problem, dense_hamiltonian, initial_state
from .instances import Instance


@dataclass(frozen=True)
class EvolutionConfig:
    T: float
    local_error_tol: float = 1e-9
    norm_drift_limit: float = 1e-3
    max_steps: int = 10**7

    def __post_init__(self):
        if not self.T >= 0:
            raise InvalidParameterError(f"T must be >= 0, got {self.T}")
        if not (self.local_error_tol > 0 and self.norm_drift_limit > 0):
            raise InvalidParameterError("tolerances must be positive")
        if self.max_steps < 1:
            raise InvalidParameterError("max_steps must be >= 1")


@dataclass
class EvolutionResult:
    T: float
    final_state: np.ndarray = field(repr=False)
    success_probability: float
    steps_taken: int
    final_norm_drift: float
    rejected_steps: int = 0

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "probability": self.success_probability,
            "steps": self.steps_taken,
            "norm_drift": self.final_norm_drift,
        }

    def dump_state(self, path) -> None:
        """Write amplitudes as little-endian interleaved (re, im) float64 pairs."""
        np.ascontiguousarray(self.final_state, dtype="<c16").tofile(path)


def load_state(path) -> np.ndarray:
    return np.fromfile(path, dtype="<c16").astype(np.complex128)


def success_probability(psi: np.ndarray, satisfying) -> float:
    idx = np.asarray(list(satisfying), dtype=np.int64)
    if idx.size == 0:
        return 0.0
    if idx.min() < 0 or idx.max() >= psi.size:
        raise DimensionError("satisfying assignment index out of range")
    amp = psi[idx]
    return float(np.sum(amp.real**2 + amp.imag**2))


# Dormand-Prince 5(4) tableau.
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# 5th-order minus embedded 4th-order weights
_E1, _E3, _E4, _E5, _E6, _E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40

_OK, _BUDGET = 0, 1


@njit(cache=True)
def _rhs(s, energies, flips, weights, half_total, psi, out):
    # out = -i [ s*E + (1-s) H_B ] psi
    a = 1.0 - s
    dim = psi.size
    for z in range(dim):
        acc = (s * energies[z] + a * half_total) * psi[z]
        for j in range(flips.size):
            acc -= a * weights[j] * psi[z ^ flips[j]]
        out[z] = complex(acc.imag, -acc.real)


@njit(cache=True)
def _dopri5(psi, energies, flips, weights, half_total, T, tol, max_steps, h):
    dim = psi.size
    y = psi.copy()
    y_new = np.empty_like(y)
    tmp = np.empty_like(y)
    k1 = np.empty_like(y)
    k2 = np.empty_like(y)
    k3 = np.empty_like(y)
    k4 = np.empty_like(y)
    k5 = np.empty_like(y)
    k6 = np.empty_like(y)
    k7 = np.empty_like(y)

    safe, fac_min, fac_max, beta = 0.9, 0.2, 10.0, 0.04
    expo = 0.2 - 0.75 * beta
    err_old = 1e-4
    rejected_last = False

    t = 0.0
    accepted = 0
    rejected = 0
    _rhs(0.0, energies, flips, weights, half_total, y, k1)
    while t < T:
        if accepted + rejected >= max_steps:
            return y, accepted, rejected, _BUDGET
        last = False
        if t + h >= T or t + 1.01 * h >= T:
            h = T - t
            last = True

        for z in range(dim):
            tmp[z] = y[z] + h * _A21 * k1[z]
        _rhs((t + _C2 * h) / T, energies, flips, weights, half_total, tmp, k2)
        for z in range(dim):
            tmp[z] = y[z] + h * (_A31 * k1[z] + _A32 * k2[z])
        _rhs((t + _C3 * h) / T, energies, flips, weights, half_total, tmp, k3)
        for z in range(dim):
            tmp[z] = y[z] + h * (_A41 * k1[z] + _A42 * k2[z] + _A43 * k3[z])
        _rhs((t + _C4 * h) / T, energies, flips, weights, half_total, tmp, k4)
        for z in range(dim):
            tmp[z] = y[z] + h * (_A51 * k1[z] + _A52 * k2[z] + _A53 * k3[z] + _A54 * k4[z])
        _rhs((t + _C5 * h) / T, energies, flips, weights, half_total, tmp, k5)
        for z in range(dim):
            tmp[z] = y[z] + h * (_A61 * k1[z] + _A62 * k2[z] + _A63 * k3[z] + _A64 * k4[z] + _A65 * k5[z])
        _rhs((t + h) / T, energies, flips, weights, half_total, tmp, k6)
        for z in range(dim):
            y_new[z] = y[z] + h * (_B1 * k1[z] + _B3 * k3[z] + _B4 * k4[z] + _B5 * k5[z] + _B6 * k6[z])
        t_end = T if last else t + h
        _rhs(t_end / T, energies, flips, weights, half_total, y_new, k7)

        err2 = 0.0
        ny = 0.0
        nyn = 0.0
        for z in range(dim):
            e = h * (_E1 * k1[z] + _E3 * k3[z] + _E4 * k4[z] + _E5 * k5[z] + _E6 * k6[z] + _E7 * k7[z])
            err2 += e.real * e.real + e.imag * e.imag
            ny += y[z].real * y[z].real + y[z].imag * y[z].imag
            nyn += y_new[z].real * y_new[z].real + y_new[z].imag * y_new[z].imag
        err = math.sqrt(err2) / (tol * math.sqrt(max(ny, nyn)))

        fac11 = err**expo if err > 0.0 else 0.0
        if err <= 1.0:
            accepted += 1
            t = t_end
            y, y_new = y_new, y
            k1, k7 = k7, k1
            fac = fac11 / err_old**beta / safe
            fac = max(1.0 / fac_max, min(1.0 / fac_min, fac))
            h_next = h / fac if fac > 0.0 else h * fac_max
            if rejected_last:
                h_next = min(h_next, h)
            err_old = max(err, 1e-4)
            rejected_last = False
            h = h_next
        else:
            rejected += 1
            h = h / min(1.0 / fac_min, fac11 / safe)
            rejected_last = True
    return y, accepted, rejected, _OK


def _bit_arrays(deg: BitDegrees):
    active = np.flatnonzero(deg.degrees)
    flips = (np.int64(1) << active.astype(np.int64)).astype(np.int64)
    weights = 0.5 * deg.degrees[active].astype(np.float64)
    return flips, weights


def evolve(diag: DiagonalProblem, deg: BitDegrees, satisfying, config: EvolutionConfig) -> EvolutionResult:
    """Run the adiabatic evolution for time ``config.T`` and measure success."""
    if deg.n != diag.n:
        raise DimensionError(f"degrees describe {deg.n} bits, diagonal {diag.n}")
    psi = initial_state(diag.n)
    T = float(config.T)
    steps = rejected = 0
    if T > 0:
        flips, weights = _bit_arrays(deg)
        h0 = min(max(T / 1000.0, 1e-6), T)
        psi, steps, rejected, status = _dopri5(
            psi,
            diag.energies.astype(np.float64),
            flips,
            weights,
            0.5 * deg.total,
            T,
            float(config.local_error_tol),
            int(config.max_steps),
            h0,
        )
        if status == _BUDGET:
            raise BudgetError(f"step budget {config.max_steps} exhausted before t=T={T}")
    drift = abs(float(np.vdot(psi, psi).real) - 1.0)
    if drift > config.norm_drift_limit:
        raise AccuracyError(
            f"norm drift {drift:.3e} exceeds limit {config.norm_drift_limit:.1e}; tighten local_error_tol",
            drift=drift,
        )
    return EvolutionResult(T, psi, success_probability(psi, satisfying), int(steps), drift, int(rejected))


def evolve_instance(instance: Instance, T: float, scramble_seed: int | None = None, **config) -> EvolutionResult:
    from .hamiltonian import scramble

    diag = build_problem(instance)
    if scramble_seed is not None:
        diag = scramble(diag, scramble_seed)
    return evolve(diag, build_degrees(instance), diag.ground_states(), EvolutionConfig(T, **config))


def default_substeps(T: float) -> int:
    return max(64, int(math.ceil(200.0 * T)))


def dense_oracle_evolve(instance: Instance, T: float, substeps: int | None = None,
                        diag: DiagonalProblem | None = None, cap: int = 6) -> np.ndarray:
    """Fixed-step 4th-order Magnus propagation with explicit dense matrices.

    Each step exponentiates the two-point Gauss-Legendre Magnus generator,
    which is symmetric about the step midpoint.
    """
    if instance.n > cap:
        raise CapacityError(f"dense oracle limited to n <= {cap}")
    diag = build_problem(instance) if diag is None else diag
    deg = build_degrees(instance)
    psi = initial_state(instance.n)
    if T == 0:
        return psi
    substeps = default_substeps(T) if substeps is None else int(substeps)
    h_b = dense_hamiltonian(0.0, diag, deg, cap)
    h_p = dense_hamiltonian(1.0, diag, deg, cap)
    dt = T / substeps
    off = math.sqrt(3.0) / 6.0
    for k in range(substeps):
        s1 = (k + 0.5 - off) * dt / T
        s2 = (k + 0.5 + off) * dt / T
        h1 = (1 - s1) * h_b + s1 * h_p
        h2 = (1 - s2) * h_b + s2 * h_p
        omega = -0.5j * dt * (h1 + h2) - (math.sqrt(3.0) / 12.0) * dt**2 * (h2 @ h1 - h1 @ h2)
        psi = expm(omega) @ psi
    return psi
