"""Exception types shared across the toolkit."""


class SerialSatError(Exception):
    """Base class for all serialsat errors."""


class GimbalLockError(SerialSatError):
    """Pitch angle inside the guard band around +/- pi/2 where the 3-2-1
    rate kinematics are singular."""


class InvalidRotationError(SerialSatError):
    """Matrix failed the orthogonality / unit-determinant check."""


class SingularMassError(SerialSatError):
    """Generalized mass matrix is not positive definite (e.g. a zero-mass
    body); the Kane system cannot be solved."""


class SingularBlockError(SerialSatError):
    """A diagonal block or Schur complement in the partitioned solve is not
    positive definite."""


class NotStabilizableError(SerialSatError):
    """The Riccati equation has no stabilizing solution for (A, B, Q, R)."""


class UncontrollableError(SerialSatError):
    """A prescribed eigenvalue admits no achievable eigenvector direction."""

    def __init__(self, pole, message=None):
        self.pole = pole
        super().__init__(message or f"no achievable eigenvector for pole {pole}")


class DegenerateError(SerialSatError):
    """Eigenvector matrix became numerically singular during assignment."""


class DivergedError(SerialSatError):
    """Simulated state exceeded the divergence guard."""

    def __init__(self, step, norm=None):
        self.step = step
        self.norm = norm
        msg = f"state diverged at step {step}"
        if norm is not None:
            msg += f" (|x|_inf = {norm:.3e})"
        super().__init__(msg)


class ConfigError(SerialSatError):
    """Scenario file failed to parse or validate."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")
