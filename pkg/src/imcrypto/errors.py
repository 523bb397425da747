"""Exception hierarchy shared by every part of the simulator."""


class ImcryptoError(Exception):
    """Base class for all simulator errors."""


class InvalidKeyError(ImcryptoError, ValueError):
    pass


class LengthError(ImcryptoError, ValueError):
    pass


class AddressError(ImcryptoError, IndexError):
    pass


class NoMatchError(ImcryptoError):
    """CAM search found no row holding the pattern (corrupt or missing table)."""


class MultiMatchError(ImcryptoError):
    """CAM search found several rows holding the pattern (non-bijective table)."""


class TableError(ImcryptoError):
    pass


class EncodeError(ImcryptoError, ValueError):
    pass


class IllegalInstructionError(ImcryptoError):
    pass


class AsmSyntaxError(ImcryptoError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class ConfigError(ImcryptoError, ValueError):
    pass


class ExecutionError(ImcryptoError):
    """Raised by the controller when an instruction fails; records where."""

    def __init__(self, pc, cause):
        super().__init__(f"pc={pc}: {type(cause).__name__}: {cause}")
        self.pc = pc
        self.cause = cause


class OracleMismatchError(ImcryptoError):
    pass
