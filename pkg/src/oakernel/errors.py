"""Exception hierarchy shared by all modules."""


class OAKernelError(Exception):
    pass


class ParseError(OAKernelError, ValueError):
    def __init__(self, message, file=None, line=None):
        self.file = file
        self.line = line
        where = ""
        if file is not None:
            where = str(file) if line is None else f"{file}:{line}"
        super().__init__(f"{where}: {message}" if where else message)


class InvalidKernelMatrix(OAKernelError, ValueError):
    pass


class InvalidMatrix(OAKernelError, ValueError):
    pass


class InvalidParameter(OAKernelError, ValueError):
    pass


class NotStrongError(OAKernelError, ValueError):
    """Raised when a kernel matrix violates the strong-kernel inequality.

    ``witness`` is a triple ``(x, y, z)`` with ``K[x, y] < min(K[x, z], K[z, y])``.
    """

    def __init__(self, witness, message=None):
        self.witness = tuple(witness)
        x, y, z = self.witness
        super().__init__(message or f"kernel is not strong: k({x},{y}) < min(k({x},{z}), k({z},{y}))")


class UnknownObject(OAKernelError, KeyError):
    pass


class UnknownNode(OAKernelError, KeyError):
    pass


class UnknownGraph(OAKernelError, IndexError):
    pass


class UnknownKernel(OAKernelError, ValueError):
    pass


class InstanceError(OAKernelError, ValueError):
    pass


class HierarchyMismatch(OAKernelError, ValueError):
    pass


class TooLarge(OAKernelError, ValueError):
    pass
