class DpgError(RuntimeError):
    """Base class for failures inside the solver stack."""


class SolverError(DpgError):
    """A factorisation or linear solve broke down (singular or badly conditioned system)."""
