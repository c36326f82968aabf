"""Exception types shared across opclass."""


class OpclassError(Exception):
    """Base class for all errors raised by opclass."""


class NonSquareError(OpclassError, ValueError):
    pass


class NotHermitianError(OpclassError, ValueError):
    def __init__(self, deviation: float):
        super().__init__(f"matrix is not Hermitian: ||M - M*||_inf = {deviation:.3e}")
        self.deviation = deviation


class DimensionMismatchError(OpclassError, ValueError):
    pass


class EmptyInputError(OpclassError, ValueError):
    pass


class NotNormalError(OpclassError, ValueError):
    pass


class NotPositiveError(OpclassError, ValueError):
    pass


class NotCommutingError(OpclassError, ValueError):
    pass


class NotOrthonormalError(OpclassError, ValueError):
    pass


class InvarianceViolatedError(OpclassError, ValueError):
    def __init__(self, defect: float):
        super().__init__(f"subspace is not invariant: ||(I - P) S P||_inf = {defect:.3e}")
        self.defect = defect


class NotNNormalError(OpclassError, ValueError):
    pass


class NotIntertwiningError(OpclassError, ValueError):
    pass


class GramMismatchError(OpclassError, ValueError):
    pass


class TruncationTooSmallError(OpclassError, ValueError):
    pass


class OrderTooSmallError(OpclassError, ValueError):
    pass


class SeedLengthError(OpclassError, ValueError):
    pass


class InvalidWeightsError(OpclassError, ValueError):
    pass


class SpecParseError(OpclassError, ValueError):
    """Input document failed to parse or validate.

    ``pointer`` is a JSON pointer to the offending location when known.
    """

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer}: {message}" if pointer else message)
        self.pointer = pointer
