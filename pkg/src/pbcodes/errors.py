"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Code parameters outside the admissible range."""


class DecodeError(ValueError):
    """A decoding or repair step could not produce the requested symbols."""


class SingularMatrixError(DecodeError):
    def __init__(self, rank, size):
        self.rank = rank
        self.size = size
        super().__init__(f"singular system (rank {rank} of {size})")


class InsufficientSymbolsError(DecodeError):
    pass


class InconsistentSymbolsError(DecodeError):
    pass


class UnrecoverableError(DecodeError):
    """More nodes lost than the code tolerates."""


class StoreError(OSError):
    """Reading or writing a node store failed."""

    def __init__(self, node, message):
        self.node = node
        super().__init__(f"node {node}: {message}")
