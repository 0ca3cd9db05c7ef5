"""Engine exception hierarchy.

Every error that can surface on the wire carries a short protocol code
(PROTO, PARSE, NOTABLE, NOCOL, TYPE, EXISTS, TOOBIG, INTERNAL); the server
maps an EngineError to an ``ERR <code> <message>`` response line.
"""


class EngineError(Exception):
    code = "INTERNAL"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ProtocolError(EngineError):
    code = "PROTO"


class ParseError(EngineError):
    """Tokenizer or parser failure; ``offset`` is a byte position in the line."""

    code = "PARSE"

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset


class TableMissingError(EngineError):
    code = "NOTABLE"


class UnknownColumnError(EngineError):
    code = "NOCOL"


class AmbiguousColumnError(EngineError):
    code = "NOCOL"


class TypeMismatchError(EngineError):
    code = "TYPE"


class UnknownFunctionError(EngineError):
    code = "TYPE"


class ArityMismatchError(EngineError):
    code = "TYPE"


class AggregateMisuseError(EngineError):
    code = "TYPE"


class DuplicateTableError(EngineError):
    code = "EXISTS"


class DuplicateIndexError(EngineError):
    code = "EXISTS"


class DuplicateKeyError(EngineError):
    code = "INTERNAL"


class ResponseTooLargeError(EngineError):
    code = "TOOBIG"
