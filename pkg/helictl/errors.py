"""Error hierarchy. Every error the CLI can surface carries its exit code."""

from collections.abc import Sequence


class HelictlError(Exception):
    """Base error. `exit_code` is what `helictl` returns when this escapes a command."""

    exit_code: int = 1

    def __init__(self, detail: str) -> None:
        super().__init__(detail)
        self.detail = detail


class ConfigError(HelictlError, ValueError):
    """Scenario file or command-line input failed validation."""

    exit_code = 2

    def __init__(self, detail: str, line: int | None = None, source: str | None = None) -> None:
        where = ""
        if source is not None:
            where = f"{source}:{line}: " if line is not None else f"{source}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(f"{where}{detail}")
        self.line = line
        self.source = source


class SimulationDivergenceError(HelictlError):
    """State became non-finite or left the divergence envelope."""

    exit_code = 3

    def __init__(self, t: float, detail: str = "state diverged") -> None:
        super().__init__(f"{detail} at t={t:.6f} s")
        self.t = t


class UnstableClosedLoopError(HelictlError):
    """The refined linear matrix has an eigenvalue with non-negative real part."""

    exit_code = 4

    def __init__(self, eigenvalues: Sequence[complex]) -> None:
        offending = [lam for lam in eigenvalues if lam.real >= 0]
        listed = ", ".join(f"{lam.real:+.6g}{lam.imag:+.6g}j" for lam in offending)
        super().__init__(f"closed loop is not stable; offending eigenvalues: {listed}")
        self.eigenvalues = tuple(eigenvalues)
        self.offending = tuple(offending)


class DimensionError(HelictlError, ValueError):
    """Plant order and gain vector length disagree."""


class RootFindingError(HelictlError, ArithmeticError):
    """Polynomial root iteration hit its cap without meeting the residual bound."""

    def __init__(self, detail: str, residuals: Sequence[float]) -> None:
        super().__init__(detail)
        self.residuals = tuple(residuals)


class NonHurwitzError(HelictlError, ArithmeticError):
    """Closed loop not Hurwitz: the final value theorem does not apply."""

    def __init__(self, detail: str = "final value theorem inapplicable") -> None:
        super().__init__(detail)


class DefectiveMatrixError(HelictlError, ArithmeticError):
    """Matrix is not (numerically) diagonalizable."""

    def __init__(
        self, detail: str = "certificate requires diagonalizable A; perturb gains"
    ) -> None:
        super().__init__(detail)


class SamplingError(HelictlError, ValueError):
    """Discrete filter would be sampled too coarsely for its cutoff."""
