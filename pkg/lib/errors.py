"""
Exception hierarchy shared by the library and the command-line driver.

Library code raises, the driver maps ConfigError to exit code 2 and every
NumericalFailure to exit code 3.
"""


class LabError(Exception):
    pass


class ConfigError(LabError, ValueError):
    pass


class InvalidDyck(LabError, ValueError):

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class NumericalFailure(LabError, ArithmeticError):
    pass


class DivergentModel(NumericalFailure):
    pass


class DivergentSeries(NumericalFailure):

    def __init__(self, message, abscissa):
        super().__init__(message)
        self.abscissa = abscissa


class IntegrationFailure(NumericalFailure):
    pass


class StagnationError(NumericalFailure):
    pass


class RootNotBracketed(NumericalFailure):
    pass
