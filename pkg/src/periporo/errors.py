"""Exception types shared across the simulator."""


class SimulationError(Exception):
    """Base class for all simulator errors."""


class ParseError(SimulationError):
    """Configuration text could not be parsed.

    Carries the offending line number and section when known.
    """

    def __init__(self, message, line=None, section=None):
        self.line = line
        self.section = section
        where = []
        if section:
            where.append(f"section [{section}]")
        if line is not None:
            where.append(f"line {line}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class ValidationError(SimulationError):
    """A parsed configuration violates an invariant."""


class DomainError(SimulationError, ValueError):
    """A constitutive evaluation left its mathematical domain."""


class NonConvergence(SimulationError):
    """The stress return mapping failed to converge.

    Attributes:
        iterations: Newton iterations performed.
        residual:   last residual norm (scaled).
        trace:      per-iteration residual norms when available.
        point:      material point index (solver context) or None.
        step:       time step index (solver context) or None.
    """

    def __init__(self, message, iterations=0, residual=float("nan"),
                 trace=None, point=None, step=None):
        self.iterations = iterations
        self.residual = residual
        self.trace = list(trace) if trace is not None else []
        self.point = point
        self.step = step
        ctx = []
        if point is not None:
            ctx.append(f"point {point}")
        if step is not None:
            ctx.append(f"step {step}")
        suffix = f" ({', '.join(ctx)})" if ctx else ""
        super().__init__(f"{message}{suffix}: {iterations} iterations, "
                         f"residual {residual:.3e}")


class SingularShapeTensor(SimulationError):
    """Shape tensor is numerically singular; point is inert for correspondence."""

    def __init__(self, point=None, condition=float("inf")):
        self.point = point
        self.condition = condition
        where = f" at point {point}" if point is not None else ""
        super().__init__(f"singular shape tensor{where} "
                         f"(condition {condition:.3e})")


class InvertedElement(SimulationError):
    """Nonlocal deformation gradient has non-positive determinant."""

    def __init__(self, point=None, step=None, determinant=float("nan")):
        self.point = point
        self.step = step
        ctx = []
        if point is not None:
            ctx.append(f"point {point}")
        if step is not None:
            ctx.append(f"step {step}")
        suffix = f" ({', '.join(ctx)})" if ctx else ""
        super().__init__(f"deformation gradient inverted{suffix}: "
                         f"det F = {determinant:.3e}")


class ZeroMass(SimulationError):
    """A material point has zero or negative mass."""


class EnergyImbalance(SimulationError):
    """The step-wise energy balance check failed; the run is halted.

    Attributes record the step and the three energies at failure.
    """

    def __init__(self, step, kinetic, external, internal, tolerance):
        self.step = step
        self.kinetic = kinetic
        self.external = external
        self.internal = internal
        self.tolerance = tolerance
        super().__init__(
            f"energy balance violated at step {step}: "
            f"kinetic {kinetic:.6e} J, external {external:.6e} J, "
            f"internal {internal:.6e} J (tolerance {tolerance:.1e})")
