"""tracelens-tracer: record runtime values from Python programs."""

from .live import LiveController, LiveWriter
from .tracer import TracerConfig, Tracer, bounded_str, run_traced

__version__ = "0.1.0"
