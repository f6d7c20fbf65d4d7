#!/usr/bin/env python3
"""Extended-precision Taylor-series oracle for E_{alpha,beta}(z).

Writes CSV rows `set,alpha,beta,z_re,z_im,e_re,e_im,terms` where every input is
an exactly representable double and the reference value is the partial sum of
at most 4000 series terms evaluated with enough decimal digits to absorb the
cancellation of the largest term. Samples whose series cannot converge within
4000 terms are redrawn.

Usage: python3 gen_ml_oracle.py > ../data/ml_oracle.csv
"""
import math
import random
import sys

import mpmath as mp

MAX_TERMS = 4000
TARGET_DIGITS = 30


def log_term(k, alpha, beta, logz):
    return k * logz - math.lgamma(alpha * k + beta)


def plan(alpha, beta, r):
    """Return (decimal digits, ok) for |z| = r, or ok False if 4000 terms do not suffice."""
    if r == 0.0:
        return TARGET_DIGITS + 10, True
    logz = math.log(r)
    peak = max(log_term(k, alpha, beta, logz) for k in range(0, MAX_TERMS + 1, 1))
    last = log_term(MAX_TERMS, alpha, beta, logz)
    # reference magnitude is at least ~1e-6 in every sampled region of interest
    if last > -(TARGET_DIGITS + 8) * math.log(10):
        return 0, False
    digits = TARGET_DIGITS + 15 + max(0, int(peak / math.log(10)))
    return digits, True


def series(alpha, beta, z, digits):
    with mp.workdps(digits):
        a = mp.mpf(alpha)
        b = mp.mpf(beta)
        zz = mp.mpc(z.real, z.imag)
        total = mp.mpc(0)
        power = mp.mpc(1)
        k = 0
        small = 0
        while k <= MAX_TERMS:
            term = power * mp.rgamma(a * k + b)
            total += term
            if abs(total) > 0 and abs(term) < mp.mpf(10) ** (-(TARGET_DIGITS + 5)) * abs(total):
                small += 1
                if small >= 3 and k > 2:
                    break
            else:
                small = 0
            power *= zz
            k += 1
        if k > MAX_TERMS:
            return None, k
        return complex(total), k + 1


def mu_default(alpha):
    return 0.5 * (math.pi * alpha / 2 + min(math.pi, math.pi * alpha))


def draw(rng, which):
    while True:
        alpha = rng.uniform(0.25, 1.75)
        beta = rng.uniform(0.2, 2.0)
        mu = mu_default(alpha)
        if which == "cut":
            theta = rng.uniform(mu, math.pi)
            r = 50.0 * math.sqrt(rng.random())
        else:
            theta = rng.uniform(0.0, mu)
            r = 10.0 * math.sqrt(rng.random())
        if rng.random() < 0.5:
            theta = -theta
        z = complex(r * math.cos(theta), r * math.sin(theta))
        if abs(z) == 0.0:
            continue
        # cut-sector membership must hold for the rounded double input
        arg = abs(math.atan2(z.imag, z.real))
        if which == "cut" and arg < mu:
            continue
        if which == "growth" and arg >= mu:
            continue
        digits, ok = plan(alpha, beta, abs(z))
        if not ok:
            continue
        val, terms = series(alpha, beta, z, digits)
        if val is None:
            continue
        return alpha, beta, z, val, terms


def main():
    rng = random.Random(20261014)
    out = sys.stdout
    out.write("set,alpha,beta,z_re,z_im,e_re,e_im,terms\n")
    for which, count in (("cut", 10000), ("growth", 2000)):
        for _ in range(count):
            alpha, beta, z, val, terms = draw(rng, which)
            out.write(
                f"{which},{alpha!r},{beta!r},{z.real!r},{z.imag!r},{val.real!r},{val.imag!r},{terms}\n"
            )
            out.flush()


if __name__ == "__main__":
    main()
