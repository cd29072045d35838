"""Design-to-G-code toolkit for hydrogel injection into foam blocks."""
from ._accel import backend

__version__ = "0.1.0"
__all__ = ["backend", "__version__"]
