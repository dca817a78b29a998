"""Coverage and rate of multi-operator networks under infrastructure, spectrum and full sharing."""

__version__ = "0.1.0"
