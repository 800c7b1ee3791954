"""Decision support for building energy retrofits.

Converts heterogeneous energy inputs to an annual Energy Use Intensity,
benchmarks it against peer groups from an EPC-style building dataset, and
quantifies which input factors drive EUI through surrogate-model-based
variance sensitivity analysis.
"""

__version__ = "0.1.0"
