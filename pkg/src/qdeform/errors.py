"""Exceptions raised by the construction and verification routines."""
from __future__ import annotations


class QDeformError(Exception):
    """Base class; the CLI maps these to the input-error exit code."""


class InvalidEndo(QDeformError, ValueError):
    pass


class NotInvertible(QDeformError, ValueError):
    pass


class InvalidAction(QDeformError, ValueError):
    pass


class Unsupported(QDeformError, ValueError):
    pass


class InvalidEmbedding(QDeformError, ValueError):
    pass


class InvalidGroup(QDeformError, ValueError):
    pass


class ActionCheckFailed(QDeformError):
    def __init__(self, message: str, element=None):
        super().__init__(message)
        self.element = element


class AlgebraCheckFailed(QDeformError):
    def __init__(self, message: str, axiom: str = "", witness=None):
        super().__init__(message)
        self.axiom = axiom
        self.witness = witness


class HopfCheckFailed(AlgebraCheckFailed):
    pass


class NotEquivariant(QDeformError, ValueError):
    pass


class NotGroupLike(QDeformError, ValueError):
    pass


class DecompositionUnstable(QDeformError, RuntimeError):
    pass


class DimensionMismatch(QDeformError, ValueError):
    pass
