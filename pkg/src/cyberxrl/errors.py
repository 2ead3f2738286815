"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    pass


class IllegalAction(ValueError):
    """Raised when an action's source node is not owned or its target is unknown."""


class NoLegalAction(RuntimeError):
    pass


class EmptyBuffer(RuntimeError):
    pass


class TraceWriteError(OSError):
    def __init__(self, run_id, cause):
        super().__init__(f"failed writing trace for run {run_id!r}: {cause}")
        self.run_id = run_id


class IntegrityError(RuntimeError):
    """Replay of a recorded trace disagreed with the recording."""
