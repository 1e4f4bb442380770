"""Collects one PASS/FAIL line per acceptance criterion."""

LINES = []


def report(cid, passed, detail):
    line = f"{cid} {'PASS' if passed else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)
    return passed
