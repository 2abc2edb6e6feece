#!/usr/bin/env python3
"""Print the five-POI walkthrough (same output as `esrs trace-example`)."""

from esrs.trace import format_trace, trace_example

if __name__ == "__main__":
    print(format_trace(trace_example()))
