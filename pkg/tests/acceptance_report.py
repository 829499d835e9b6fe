"""Collects one PASS/FAIL line per acceptance criterion."""

import sys

RESULTS = []


def record(number, title, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title}: {detail}"
    RESULTS.append(line)
    print(line, file=sys.__stdout__, flush=True)
    return passed
