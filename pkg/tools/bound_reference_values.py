#!/usr/bin/env python3
"""Extended-precision reference evaluation of the bound formulas.

Evaluates the two worked bound values with mpmath at 50 significant digits,
entirely independently of the library implementation (no pacmlp imports).
The test suite imports these constants; run directly to print them.

Case 1, general saturating-envelope bound with a loss range [a, b]:
    (b - a) / (1 - e^(a-b)) * (1 - exp(-risk - (kl + ln(1/delta))/n + a))
    at a=0, b=1, risk=0.1, kl=2, n=100, delta=0.05.

Case 2, the rearranged evidence form with a = 0:
    b / (1 - e^-b) * (1 - exp(ln(delta)/n + log_pyx - mean_split))
    at b=1, delta=0.05, n=100, log_pyx=ln(0.1), mean_split=0.5,
    where mean_split is the mean of per-sample (energy + log partition).
"""
from mpmath import exp, log, mp, mpf

mp.dps = 50


def general_bound(risk, kl, n, delta, a, b):
    risk, kl, delta, a, b = map(mpf, (risk, kl, delta, a, b))
    envelope = (b - a) / (1 - exp(a - b))
    return envelope * (1 - exp(-risk - (kl + log(1 / delta)) / n + a))


def evidence_bound(mean_split, n, delta, b, log_pyx):
    mean_split, delta, b, log_pyx = map(mpf, (mean_split, delta, b, log_pyx))
    envelope = b / (1 - exp(-b))
    return envelope * (1 - exp(log(delta) / n + log_pyx - mean_split))


GENERAL_CASE = dict(risk="0.1", kl="2", n=100, delta="0.05", a="0", b="1")
EVIDENCE_CASE = dict(mean_split="0.5", n=100, delta="0.05", b="1", log_pyx=log(mpf("0.1")))

GENERAL_VALUE = float(general_bound(**GENERAL_CASE))
EVIDENCE_VALUE = float(evidence_bound(**EVIDENCE_CASE))


if __name__ == "__main__":
    print(f"general  bound (50-digit eval, rounded to float64): {GENERAL_VALUE!r}")
    print(f"         full precision: {general_bound(**GENERAL_CASE)}")
    print(f"evidence bound (50-digit eval, rounded to float64): {EVIDENCE_VALUE!r}")
    print(f"         full precision: {evidence_bound(**EVIDENCE_CASE)}")
