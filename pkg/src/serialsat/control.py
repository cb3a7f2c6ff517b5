"""Controller synthesis: LQR via the continuous algebraic Riccati equation
and robust pole assignment via determinant-maximizing eigenstructure
selection.

The pole assignment maximizes |det(X)| over unit-norm closed-loop
eigenvectors, each constrained to its pole's achievable subspace, by
cyclic per-pole updates; a large |det| of the eigenvector matrix keeps the
assigned spectrum insensitive to plant error.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (DegenerateError, NotStabilizableError, UncontrollableError)

CARE_RESIDUAL_TOL = 1e-8
RANK_TOL = 1e-10
DET_FLOOR = 1e-12
SWEEP_IMPROVE_TOL = 1e-10
MAX_SWEEPS = 200
TIE_TOL = 1e-14


def _check_symmetric(m, name, tol=1e-12):
    m = np.asarray(m, dtype=float)
    scale = max(np.max(np.abs(m)), 1.0)
    if np.max(np.abs(m - m.T)) > tol * scale:
        raise ValueError(f"{name} must be symmetric")
    return m


@dataclass(frozen=True)
class LqrWeights:
    """State and input weights of the quadratic cost."""

    q: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        q = _check_symmetric(self.q, "Q")
        r = _check_symmetric(self.r, "R")
        if np.any(np.linalg.eigvalsh(q) < -1e-12 * max(np.max(np.abs(q)), 1.0)):
            raise ValueError("Q must be positive semidefinite")
        if np.any(np.linalg.eigvalsh(r) <= 0.0):
            raise ValueError("R must be positive definite")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class PoleSet:
    """Desired closed-loop eigenvalues: stable and closed under conjugation."""

    poles: tuple
    max_multiplicity: int = 5

    def __post_init__(self):
        poles = tuple(complex(p) for p in self.poles)
        if any(p.real >= 0.0 for p in poles):
            raise ValueError("all prescribed poles must have negative real part")
        remaining = list(poles)
        while remaining:
            p = remaining.pop()
            if abs(p.imag) == 0.0:
                continue
            try:
                remaining.remove(p.conjugate())
            except ValueError:
                raise ValueError(f"pole {p} has no conjugate partner") from None
        for p in set(poles):
            if sum(1 for q in poles if q == p) > self.max_multiplicity:
                raise ValueError(f"pole {p} repeated more than {self.max_multiplicity} times")
        object.__setattr__(self, "poles", poles)

    def __len__(self):
        return len(self.poles)


@dataclass(frozen=True)
class GainDesign:
    """Feedback gain with design metadata."""

    k: np.ndarray  # m x n
    method: str  # "lqr" | "rpa"
    closed_loop_eigenvalues: np.ndarray
    riccati_residual: float | None = None
    eigenvector_matrix: np.ndarray | None = None  # rpa only (real block form)
    abs_det_x: float | None = None
    det_history: tuple = field(default=())


def solve_care(a, b, q, r) -> np.ndarray:
    """Stabilizing solution of A'P + PA - P B R^-1 B' P + Q = 0.

    Ordered real Schur decomposition of the Hamiltonian, followed by Newton
    (Lyapunov) refinement steps; the relative residual against |Q| must come
    out below 1e-8.  The equation is solved in scaled form P = rho * P_hat
    with rho^2 = |Q|/|G|, which balances the Hamiltonian blocks when the
    input matrix is orders of magnitude smaller than the state weights.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).reshape(a.shape[0], -1)
    q = np.asarray(q, dtype=float)
    r = np.asarray(r, dtype=float)
    n = a.shape[0]
    g = b @ np.linalg.solve(r, b.T)

    norm_q = np.linalg.norm(q)
    norm_g = np.linalg.norm(g)
    rho = np.sqrt(max(norm_q, 1e-300) / max(norm_g, 1e-300))
    rho = min(max(rho, 1e-15), 1e15)
    g_hat = rho * g
    q_hat = q / rho

    ham = np.block([[a, -g_hat], [-q_hat, -a.T]])
    _, u, ndim = scipy.linalg.schur(ham, sort=lambda re, im: re < 0.0, output="real")
    if ndim != n:
        raise NotStabilizableError(
            f"stable invariant subspace has dimension {ndim}, expected {n}")
    u11, u21 = u[:n, :n], u[n:, :n]
    try:
        with np.errstate(divide="ignore", invalid="ignore"):
            p = scipy.linalg.solve(u11.T, u21.T, check_finite=False).T
    except scipy.linalg.LinAlgError as exc:
        raise NotStabilizableError(f"singular subspace basis: {exc}") from exc
    if not np.all(np.isfinite(p)):
        raise NotStabilizableError("stable subspace is not a graph over the "
                                   "state space (hidden unstabilizable mode)")
    p = rho * 0.5 * (p + p.T)

    def residual(pm):
        return a.T @ pm + pm @ a - pm @ g @ pm + q

    # Newton defect correction: each step solves the closed-loop Lyapunov
    # equation for the residual; quadratic convergence from the Schur seed.
    res_norm = np.linalg.norm(residual(p))
    for _ in range(20):
        if res_norm <= 0.1 * CARE_RESIDUAL_TOL * max(norm_q, 1e-300):
            break
        acl = a - g @ p
        try:
            delta = scipy.linalg.solve_sylvester(acl.T, acl, -residual(p))
        except (scipy.linalg.LinAlgError, ValueError):
            break
        p_new = 0.5 * ((p + delta) + (p + delta).T)
        new_norm = np.linalg.norm(residual(p_new))
        if not np.isfinite(new_norm) or new_norm >= res_norm:
            break
        p, res_norm = p_new, new_norm

    rel = res_norm / max(norm_q, 1e-300)
    if not rel <= CARE_RESIDUAL_TOL:  # also catches nan
        raise NotStabilizableError(f"Riccati residual {rel:.3e} exceeds {CARE_RESIDUAL_TOL:.1e}")
    return p


def lqr_gain(a, b, weights: LqrWeights) -> GainDesign:
    """Optimal state feedback K = R^-1 B' P for the quadratic cost."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).reshape(a.shape[0], -1)
    p = solve_care(a, b, weights.q, weights.r)
    k = np.linalg.solve(weights.r, b.T @ p)
    g = b @ np.linalg.solve(weights.r, b.T)
    res = np.linalg.norm(a.T @ p + p @ a - p @ g @ p + weights.q)
    rel = res / max(np.linalg.norm(weights.q), 1e-300)
    eig = np.linalg.eigvals(a - b @ k)
    if np.any(eig.real >= 0.0):
        raise NotStabilizableError("closed loop is not strictly stable")
    return GainDesign(k=k, method="lqr", closed_loop_eigenvalues=eig,
                      riccati_residual=rel)


def _allowable_subspace(a, b_unit, pole):
    """Orthonormal basis of {x : (A - pole I) x in range(B)}.

    Computed from the null space of [A - pole I, -B] with B column-
    normalized; the x-parts of the null basis are re-orthonormalized.
    """
    n = a.shape[0]
    if pole.imag == 0.0:
        m = np.hstack([a - pole.real * np.eye(n), -b_unit])
    else:
        m = np.hstack([a - pole * np.eye(n), -b_unit.astype(complex)])
    _, sv, vh = np.linalg.svd(m)
    tol = RANK_TOL * sv[0]
    rank = int(np.sum(sv > tol))
    null = vh[rank:].conj().T  # (n+m) x k
    x_part = null[:n, :]
    if x_part.shape[1] == 0:
        raise UncontrollableError(pole)
    basis = scipy.linalg.orth(x_part, rcond=RANK_TOL)
    if basis.shape[1] == 0:
        raise UncontrollableError(pole)
    return basis


def _pair_groups(poles):
    """Group pole indices into real singles and conjugate pairs (i, j)."""
    groups = []
    used = [False] * len(poles)
    for i, p in enumerate(poles):
        if used[i]:
            continue
        used[i] = True
        if p.imag == 0.0:
            groups.append(("real", (i,)))
            continue
        for j in range(i + 1, len(poles)):
            if not used[j] and poles[j] == p.conjugate():
                used[j] = True
                groups.append(("pair", (i, j)))
                break
        else:
            raise ValueError(f"unpaired complex pole {p}")
    return groups


def _logabsdet(x):
    sign, logdet = np.linalg.slogdet(x)
    if sign == 0.0:
        return -np.inf
    return logdet


def _complement_basis(x, cols):
    """Orthonormal basis of the orthogonal complement of the other columns."""
    others = np.delete(x, cols, axis=1)
    q_full, _ = np.linalg.qr(others, mode="complete")
    return q_full[:, others.shape[1]:]


def robust_pole_assignment(a, b, pole_set: PoleSet, max_sweeps: int = MAX_SWEEPS,
                           improve_tol: float = SWEEP_IMPROVE_TOL) -> GainDesign:
    """Assign `pole_set` while maximizing |det(X)| over unit eigenvectors.

    Cyclic per-pole updates: a real pole's eigenvector is replaced by the
    normalized projection of its cofactor direction onto the pole's
    achievable subspace (the per-pole optimum given the other columns);
    a conjugate pair is re-optimized jointly through a small symmetric
    eigenproblem over its complex subspace coefficients.  |det(X)| is
    non-decreasing across updates.  Conjugate pairs are carried as 2x2
    real blocks, so the gain is exactly real.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).reshape(a.shape[0], -1)
    n, m = b.shape
    poles = pole_set.poles
    if len(poles) != n:
        raise ValueError(f"need exactly {n} poles, got {len(poles)}")
    rank_b = np.linalg.matrix_rank(b, tol=RANK_TOL * max(np.linalg.norm(b), 1e-300))
    for p in set(poles):
        if sum(1 for q in poles if q == p) > rank_b:
            raise UncontrollableError(p, f"pole {p} repeated beyond rank(B) = {rank_b}")

    col_norms = np.linalg.norm(b, axis=0)
    col_norms[col_norms == 0.0] = 1.0
    b_unit = b / col_norms

    groups = _pair_groups(poles)
    bases = {}
    for kind, idx in groups:
        bases[idx] = _allowable_subspace(a, b_unit, poles[idx[0]])

    # Greedy deterministic start: per group, the achievable basis vector (or
    # coefficient axis) most orthogonal to the span of already-chosen columns.
    x = np.zeros((n, n))
    chosen = []

    def residual_norm(vec):
        if not chosen:
            return np.linalg.norm(vec)
        qc = np.linalg.qr(np.column_stack(chosen), mode="reduced")[0]
        return np.linalg.norm(vec - qc @ (qc.T @ vec))

    for kind, idx in groups:
        s = bases[idx]
        if kind == "real":
            scores = [residual_norm(s[:, j]) for j in range(s.shape[1])]
            pick = int(np.argmax(scores))
            x[:, idx[0]] = s[:, pick]
            chosen.append(s[:, pick])
        else:
            k2 = s.shape[1]
            best, pick = -1.0, 0
            for j in range(k2):
                vec = s[:, j]
                score = residual_norm(vec.real) + residual_norm(vec.imag)
                if score > best + TIE_TOL:
                    best, pick = score, j
            vec = s[:, pick]
            nv = np.linalg.norm(np.concatenate([vec.real, vec.imag]))
            vec = vec / nv
            x[:, idx[0]] = vec.real
            x[:, idx[1]] = vec.imag
            chosen.append(vec.real)
            chosen.append(vec.imag)

    det_history = [float(np.exp(_logabsdet(x)))]
    if det_history[0] < DET_FLOOR:
        raise DegenerateError(
            f"initial |det X| = {det_history[0]:.3e} is singular; the pole "
            "subspaces do not span the state space (plant may be "
            "uncontrollable for this pole set)")

    for _ in range(max_sweeps):
        for kind, idx in groups:
            s = bases[idx]
            if kind == "real":
                i = idx[0]
                e = np.zeros(n)
                e[i] = 1.0
                try:
                    cof = np.linalg.solve(x.T, e)  # cofactor direction of column i
                except np.linalg.LinAlgError as exc:
                    raise DegenerateError(f"eigenvector matrix singular: {exc}") from exc
                proj = s @ (s.T @ cof)
                gain = np.linalg.norm(proj)
                if gain <= 1.0 + TIE_TOL:
                    continue  # no improvement: keep the current vector
                x[:, i] = proj / gain
            else:
                i, j = idx
                q2 = _complement_basis(x, [i, j]) if n > 2 else np.eye(2)
                if q2.shape[1] != 2:
                    raise DegenerateError("pair update lost its 2-dimensional complement")
                # det([others, y1, y2]) = c0 * (b1 ^ b2) with b = Q2' y, so the
                # pair objective is a quadratic form in the real subspace
                # coefficients z = [Re w; Im w] of the eigenvector x = S w.
                g1 = np.column_stack([q2.T @ s.real, -(q2.T @ s.imag)])
                g2 = np.column_stack([q2.T @ s.imag, q2.T @ s.real])
                eps2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
                quad = g1.T @ eps2 @ g2
                quad = 0.5 * (quad + quad.T)
                evals, evecs = np.linalg.eigh(quad)
                pick = int(np.argmax(np.abs(evals)))
                old = abs((q2.T @ x[:, i]) @ (eps2 @ (q2.T @ x[:, j])))
                new = abs(evals[pick])
                if new <= old * (1.0 + TIE_TOL):
                    continue
                k2 = s.shape[1]
                z = evecs[:, pick]
                vec = s @ (z[:k2] + 1.0j * z[k2:])
                x[:, i] = vec.real
                x[:, j] = vec.imag
        det_history.append(float(np.exp(_logabsdet(x))))
        if det_history[-1] < DET_FLOOR:
            raise DegenerateError(f"|det X| = {det_history[-1]:.3e} became singular")
        if det_history[-1] - det_history[-2] < improve_tol * det_history[-2]:
            break

    # Gain recovery: K X = M with per-pole input directions from B m = (A - pole I) x.
    m_mat = np.zeros((m, n))
    for kind, idx in groups:
        if kind == "real":
            i = idx[0]
            rhs = (a - poles[i].real * np.eye(n)) @ x[:, i]
            m_mat[:, i] = np.linalg.lstsq(b, rhs, rcond=None)[0]
        else:
            i, j = idx
            vec = x[:, i] + 1.0j * x[:, j]
            rhs = (a - poles[i] * np.eye(n)) @ vec
            mi = np.linalg.lstsq(b.astype(complex), rhs, rcond=None)[0]
            m_mat[:, i] = mi.real
            m_mat[:, j] = mi.imag
    try:
        k = np.linalg.solve(x.T, m_mat.T).T
    except np.linalg.LinAlgError as exc:
        raise DegenerateError(f"eigenvector matrix singular at gain recovery: {exc}") from exc

    eig = np.linalg.eigvals(a - b @ k)
    return GainDesign(k=k, method="rpa", closed_loop_eigenvalues=eig,
                      eigenvector_matrix=x.copy(),
                      abs_det_x=det_history[-1],
                      det_history=tuple(det_history))


@dataclass(frozen=True)
class ConditioningReport:
    abs_det: float
    condition_number: float
    eigenvalue_conditions: np.ndarray


def conditioning_report(x) -> ConditioningReport:
    """|det X|, 2-norm condition number, and 1/|y_i^H x_i| per column with
    unit-normalized right/left vectors."""
    x = np.asarray(x)
    if x.shape[0] != x.shape[1]:
        raise ValueError("X must be square")
    sign, logdet = np.linalg.slogdet(x)
    if sign == 0 or not np.isfinite(logdet):
        raise DegenerateError("X is singular")
    abs_det = float(np.exp(logdet))
    if abs_det < DET_FLOOR:
        raise DegenerateError(f"|det X| = {abs_det:.3e} is singular")
    cond = float(np.linalg.cond(x, 2))
    y = np.linalg.inv(x).conj().T  # columns are left vectors, y_i^H x_i = 1
    xs = x / np.linalg.norm(x, axis=0)
    ys = y / np.linalg.norm(y, axis=0)
    overlaps = np.abs(np.sum(ys.conj() * xs, axis=0))
    return ConditioningReport(abs_det=abs_det, condition_number=cond,
                              eigenvalue_conditions=1.0 / overlaps)
