class CadError(Exception):
    """Base class for pipeline errors"""


class InputError(CadError, ValueError):
    """Bad argument, image, manifest or config value"""


class NumericError(CadError, ArithmeticError):
    """Non-finite value produced by a numeric stage"""


class GraphError(CadError):
    """Shortest path requested between disconnected vertices"""
