class GwaeError(Exception):
    """
    Base class for every error raised by the pipeline
    """


class ValidationError(GwaeError, ValueError):
    """
    Invalid input: config keys or values, shapes, grid sizes, missing stats
    """


class ShapeError(ValidationError):
    """
    Tensor shapes are incompatible for a primitive
    """


class FormatError(ValidationError):
    """
    A binary file has the wrong magic, version or length
    """


class NumericalError(GwaeError, ArithmeticError):
    """
    Non-finite values, solver non-convergence or a blown step cap
    """


class GenerationError(GwaeError, RuntimeError):
    """
    The geomodel generator ran out of retries
    """
