"""LTI plants, continuous-time LQR synthesis and closed-loop simulation.

The Riccati solver is a Newton-Kleinman iteration with exact line search,
started from a stabilizing gain built by shifting the spectrum of A. Every
Newton step is a Lyapunov equation, which at the sizes used here (n <= 6)
is solved directly as an n^2 x n^2 Kronecker-product linear system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidWeights, NoConvergence, NonControllable

R_EPS = 1e-9
BLOWUP_LIMIT = 1e12


@dataclass(eq=False)
class StateSpaceModel:
    """Continuous LTI plant ``x' = Ax + Bu``, ``y = Cx + Du``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray | None = None
    D: np.ndarray | None = None
    state_names: Sequence[str] = ()
    input_names: Sequence[str] = ()

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        self.B = B
        n, m = self.n, self.m
        if self.A.shape != (n, n):
            raise DimensionMismatch(f"A must be square, got {self.A.shape}")
        if self.B.shape[0] != n:
            raise DimensionMismatch(f"B has {self.B.shape[0]} rows, A has {n}")
        if n < 1 or m < 1:
            raise DimensionMismatch("need n >= 1 and m >= 1")
        self.C = np.eye(n) if self.C is None else np.atleast_2d(np.asarray(self.C, dtype=float))
        r = self.C.shape[0]
        self.D = np.zeros((r, m)) if self.D is None else np.atleast_2d(np.asarray(self.D, dtype=float))
        if self.C.shape[1] != n:
            raise DimensionMismatch(f"C must have {n} columns, got {self.C.shape}")
        if self.D.shape != (r, m):
            raise DimensionMismatch(f"D must be {(r, m)}, got {self.D.shape}")
        self.state_names = tuple(self.state_names) or tuple(f"x{i + 1}" for i in range(n))
        self.input_names = tuple(self.input_names) or tuple(f"u{j + 1}" for j in range(m))
        if len(self.state_names) != n or len(self.input_names) != m:
            raise DimensionMismatch("label counts do not match model dimensions")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    def controllability_matrix(self) -> np.ndarray:
        blocks = [self.B]
        for _ in range(self.n - 1):
            blocks.append(self.A @ blocks[-1])
        return np.hstack(blocks)

    def is_controllable(self) -> bool:
        ctrb = self.controllability_matrix()
        return np.linalg.matrix_rank(ctrb) == self.n

    def to_dict(self) -> dict:
        return {
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "D": self.D.tolist(),
            "state_names": list(self.state_names),
            "input_names": list(self.input_names),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "StateSpaceModel":
        return cls(
            A=doc["A"],
            B=doc["B"],
            C=doc.get("C"),
            D=doc.get("D"),
            state_names=doc.get("state_names", ()),
            input_names=doc.get("input_names", ()),
        )

    def __eq__(self, other):
        if not isinstance(other, StateSpaceModel):
            return NotImplemented
        return self.to_dict() == other.to_dict()


@dataclass(frozen=True)
class WeightingConfig:
    """Diagonal LQR weights."""

    q_diag: tuple
    r_diag: tuple

    def __post_init__(self):
        object.__setattr__(self, "q_diag", tuple(float(v) for v in np.ravel(self.q_diag)))
        object.__setattr__(self, "r_diag", tuple(float(v) for v in np.ravel(self.r_diag)))

    @property
    def Q(self) -> np.ndarray:
        return np.diag(self.q_diag)

    @property
    def R(self) -> np.ndarray:
        return np.diag(self.r_diag)

    def validate(self, model: StateSpaceModel | None = None) -> None:
        q = np.asarray(self.q_diag)
        r = np.asarray(self.r_diag)
        if model is not None and (q.size != model.n or r.size != model.m):
            raise DimensionMismatch(
                f"weights are {q.size}+{r.size}, model needs {model.n}+{model.m}"
            )
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(r))):
            raise InvalidWeights("weights must be finite")
        if np.any(q < 0):
            raise InvalidWeights("Q diagonal must be nonnegative")
        if np.any(r < R_EPS):
            raise InvalidWeights(f"R diagonal must be >= {R_EPS}")


@dataclass(frozen=True)
class GainMatrix:
    K: np.ndarray

    @property
    def shape(self):
        return self.K.shape


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    inputs: np.ndarray
    dt: float
    horizon: float
    blown_up: bool = False
    state_names: tuple = field(default=())
    input_names: tuple = field(default=())


def spectral_abscissa(M: np.ndarray) -> float:
    return float(np.max(np.linalg.eigvals(M).real))


def solve_lyapunov(Ac: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Solve ``Ac^T X + X Ac + M = 0`` for X."""
    n = Ac.shape[0]
    At = Ac.T
    eye = np.eye(n)
    # kron(At, I) + kron(I, At) assembled by broadcasting
    kron = (At[:, None, :, None] * eye[None, :, None, :] + eye[:, None, :, None] * At[None, :, None, :])
    X = np.linalg.solve(kron.reshape(n * n, n * n), -M.reshape(-1)).reshape(n, n)
    return 0.5 * (X + X.T)


def _care_residual(P, A, Q, S):
    return P @ A + A.T @ P + Q - P @ S @ P


def _initial_gain(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """A stabilizing gain for (A, B) via Bass' spectrum-shift construction."""
    n = A.shape[0]
    abscissa = spectral_abscissa(A)
    if abscissa < 0:
        return np.zeros((B.shape[1], n))
    beta = abscissa + max(1.0, np.linalg.norm(A, 2))
    # (A + beta I) Z + Z (A + beta I)^T = 2 B B^T, then A - B B^T Z^-1 is Hurwitz
    Z = solve_lyapunov(-(A + beta * np.eye(n)).T, 2.0 * B @ B.T)
    return B.T @ np.linalg.inv(Z)


def _newton_step_length(res_mat: np.ndarray, V: np.ndarray) -> float:
    """Exact line search on the Newton direction.

    Along the step, ``Res(P + tN) = (1 - t) Res(P) - t^2 N S N``; the
    squared Frobenius norm is a quartic in t, minimized over (0, 2].
    """
    a = float(np.sum(res_mat * res_mat))
    b = float(np.sum(V * V))
    c = float(np.sum(res_mat * V))

    def f(t):
        return (1 - t) ** 2 * a - 2 * (1 - t) * t * t * c + t**4 * b

    # stationary point of the quartic by scalar Newton from the full step
    t = 1.0
    for _ in range(20):
        d1 = 4 * b * t**3 + 6 * c * t * t + (2 * a - 4 * c) * t - 2 * a
        d2 = 12 * b * t * t + 12 * c * t + 2 * a - 4 * c
        if d2 <= 0:
            break
        t_new = min(max(t - d1 / d2, 1e-3), 2.0)
        if abs(t_new - t) < 1e-12:
            t = t_new
            break
        t = t_new
    return t if f(t) < f(1.0) else 1.0


def solve_care(
    model: StateSpaceModel,
    weights: WeightingConfig,
    max_iter: int = 100,
    tol: float = 1e-10,
    check_controllability: bool = True,
) -> np.ndarray:
    """Stabilizing solution of ``PA + A^T P + Q - P B R^-1 B^T P = 0``.

    Raises:
        InvalidWeights: Q or R violates its definiteness constraint.
        NonControllable: (A, B) fails the controllability rank test.
        NoConvergence: Newton-Kleinman hit the iteration cap or stalled
            above the acceptance residual.
    """
    weights.validate(model)
    if check_controllability and not model.is_controllable():
        raise NonControllable("(A, B) is not controllable")
    A, B = model.A, model.B
    Q = weights.Q
    r = np.asarray(weights.r_diag)
    r_inv = 1.0 / r
    S = (B * r_inv) @ B.T

    try:
        K = _initial_gain(A, B)
        P = solve_lyapunov(A - B @ K, Q + K.T @ (r[:, None] * K))
        best_res = np.inf
        stalls = 0
        for _ in range(max_iter):
            res_mat = _care_residual(P, A, Q, S)
            res = np.linalg.norm(res_mat)
            if not np.isfinite(res):
                raise NoConvergence("non-finite Riccati residual")
            if res < tol * max(1.0, np.linalg.norm(P)):
                break
            if res >= best_res:
                stalls += 1
                if stalls >= 3:
                    break
            else:
                stalls = 0
                best_res = res
            # Newton direction: (A - SP)^T N + N (A - SP) + Res(P) = 0
            N = solve_lyapunov(A - S @ P, res_mat)
            P = P + _newton_step_length(res_mat, N @ S @ N) * N
            P = 0.5 * (P + P.T)
        else:
            raise NoConvergence(f"Newton-Kleinman exceeded {max_iter} iterations")
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc

    res = np.linalg.norm(_care_residual(P, A, Q, S))
    if res >= 1e-8 * max(1.0, np.linalg.norm(P)):
        raise NoConvergence(f"residual stalled at {res:.3e}")
    if spectral_abscissa(A - S @ P) >= 0:
        raise NoConvergence("Riccati solution is not stabilizing")
    return P


def compute_gain(P: np.ndarray, model: StateSpaceModel, weights: WeightingConfig) -> GainMatrix:
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if P.shape != (model.n, model.n) or len(weights.r_diag) != model.m:
        raise DimensionMismatch("P, model and weights disagree on dimensions")
    r_inv = 1.0 / np.asarray(weights.r_diag)
    return GainMatrix(r_inv[:, None] * (model.B.T @ P))


def _gain_array(model: StateSpaceModel, gain) -> np.ndarray:
    K = gain.K if isinstance(gain, GainMatrix) else gain
    K = np.atleast_2d(np.asarray(K, dtype=float))
    if K.shape != (model.m, model.n):
        raise DimensionMismatch(f"gain must be {(model.m, model.n)}, got {K.shape}")
    return K


def stability_check(model: StateSpaceModel, gain) -> float:
    """Spectral abscissa of ``A - BK``; negative iff the closed loop is stable."""
    K = _gain_array(model, gain)
    return spectral_abscissa(model.A - model.B @ K)


def rk4_step_matrix(Ac: np.ndarray, dt: float) -> np.ndarray:
    """One classical RK4 step of ``x' = Ac x`` as a matrix.

    For a linear vector field the four RK4 stages collapse exactly into the
    degree-4 Taylor polynomial of ``dt * Ac``.
    """
    n = Ac.shape[0]
    H = dt * Ac
    H2 = H @ H
    return np.eye(n) + H + H2 / 2.0 + H2 @ H / 6.0 + H2 @ H2 / 24.0


def simulate_closed_loop(
    model: StateSpaceModel,
    gain,
    x0,
    horizon: float,
    dt: float,
) -> Trajectory:
    """Integrate ``x' = (A - BK) x`` with fixed-step RK4 and record ``u = -Kx``.

    A state magnitude above 1e12 truncates the trajectory at the last good
    sample and sets ``blown_up``.
    """
    if dt <= 0 or horizon < dt:
        raise ValueError("need dt > 0 and horizon >= dt")
    K = _gain_array(model, gain)
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.size != model.n:
        raise DimensionMismatch(f"x0 has length {x0.size}, model has n={model.n}")

    steps = int(round(horizon / dt))
    count = steps + 1
    M = rk4_step_matrix(model.A - model.B @ K, dt)

    # doubling: rows [2^j, 2^(j+1)) are rows [0, 2^j) advanced by M^(2^j)
    states = x0[None, :]
    power = M
    with np.errstate(over="ignore", invalid="ignore"):
        while states.shape[0] < count:
            states = np.vstack([states, states @ power.T])
            power = power @ power
    states = states[:count]

    blown_up = False
    with np.errstate(invalid="ignore"):
        bad = ~np.all(np.abs(states) <= BLOWUP_LIMIT, axis=1)
    if bad.any():
        blown_up = True
        states = states[: int(np.argmax(bad))]
    n_kept = states.shape[0]
    times = np.arange(n_kept) * dt
    inputs = -states @ K.T
    return Trajectory(
        times=times,
        states=states,
        inputs=inputs,
        dt=dt,
        horizon=steps * dt,
        blown_up=blown_up,
        state_names=tuple(model.state_names),
        input_names=tuple(model.input_names),
    )


def quadratic_index(traj: Trajectory, weights: WeightingConfig) -> float:
    """Trapezoidal ``integral of x^T Q x + u^T R u`` over the horizon; inf if blown up."""
    if traj.blown_up:
        return float("inf")
    q = np.asarray(weights.q_diag)
    r = np.asarray(weights.r_diag)
    integrand = (traj.states**2) @ q + (traj.inputs**2) @ r
    if integrand.size < 2:
        return 0.0
    return float(max(np.trapezoid(integrand, dx=traj.dt), 0.0))


def lqr(model: StateSpaceModel, weights: WeightingConfig) -> tuple[np.ndarray, GainMatrix]:
    P = solve_care(model, weights)
    return P, compute_gain(P, model, weights)
