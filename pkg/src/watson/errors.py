"""Error types shared across the engine.

Every error carries a machine-readable ``code`` (the class name) and an
optional ``detail`` mapping; the HTTP layer serializes both verbatim.
"""

from __future__ import annotations


class WatsonError(Exception):
    """Base class for all engine errors."""

    def __init__(self, message: str, **detail):
        super().__init__(message)
        self.message = message
        self.detail = dict(detail)

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_json(self) -> dict:
        body = {"code": self.code, "message": self.message}
        if self.detail:
            body["detail"] = self.detail
        return body


# ingest
class EmptyInput(WatsonError): ...
class RaggedRow(WatsonError): ...
class EncodingError(WatsonError): ...
class TooManyCategories(WatsonError): ...
class CodebookMismatch(WatsonError): ...


# freqtable
class UnknownCategory(WatsonError): ...
class UnknownVariable(WatsonError): ...
class EmptyKeepList(WatsonError): ...
class NotAPermutation(WatsonError): ...
class DuplicateLabel(WatsonError): ...
class LastCategory(WatsonError): ...
class WrongArity(WatsonError): ...


# seriation / plots
class LengthMismatch(WatsonError): ...
class TooLarge(WatsonError): ...
class EmptyTable(WatsonError): ...
class ZeroMass(WatsonError): ...


# knn
class SchemaMismatch(WatsonError): ...
class DegenerateRange(WatsonError): ...
class UnknownTherapy(WatsonError): ...
class EmptyNeighborList(WatsonError): ...
class NoEligibleTherapy(WatsonError): ...


# server
class UnknownDataset(WatsonError): ...
class NothingToUndo(WatsonError): ...
class InvalidRequest(WatsonError): ...
