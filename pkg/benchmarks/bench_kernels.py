#!/usr/bin/env python3
"""Compare the compiled kernel backend against the pure-Python fallback.

Prints a CSV of best-of-3 timings per grid shape and asserts that both
backends produce identical outputs. Also available as
`interseg bench --kind kernels`.
"""

from interseg.benchmark_kernels import kernel_benchmark_csv

if __name__ == "__main__":
    print(kernel_benchmark_csv(), end="")
