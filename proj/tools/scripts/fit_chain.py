#!/usr/bin/env python3
"""Fit zero-temperature chain pseudomodes to a thermal ohmic correlation.

The chain correlation is v^dag exp(-i H_eff t) v with H_eff tridiagonal
(diagonal Omega_k - i Gamma_k / 2, off-diagonal g_k) and v = sqrt(c) e_1.
The target is C(t) = int_0^inf J(w) [coth(w / 2T) cos(wt) - i sin(wt)] dw for
J(w) = pi w exp(-w / cutoff). Prints a [bath] block for the run configs.
"""
import argparse

import numpy as np
from scipy.integrate import quad
from scipy.optimize import least_squares


def target(t, cutoff, temperature):
    def sym(w):
        x = w / (2.0 * temperature)
        xc = 1.0 + x * x / 3.0 if x < 1e-4 else x / np.tanh(x)
        return np.pi * np.exp(-w / cutoff) * 2.0 * temperature * xc

    def odd(w):
        return np.pi * w * np.exp(-w / cutoff)

    w_max = 40.0 * cutoff
    if t == 0.0:
        return quad(sym, 0.0, w_max, limit=400, epsabs=1e-12)[0]
    re = quad(sym, 0.0, w_max, weight="cos", wvar=t, limit=400, epsabs=1e-12)[0]
    im = -quad(odd, 0.0, w_max, weight="sin", wvar=t, limit=400, epsabs=1e-12)[0]
    return re + 1j * im


def unpack(p, n):
    omega = p[:n]
    gamma = np.exp(p[n:2 * n])
    g = p[2 * n:3 * n - 1]
    c = np.exp(p[3 * n - 1])
    return omega, gamma, g, c


def chain(p, n, times):
    omega, gamma, g, c = unpack(p, n)
    h = np.diag(omega - 0.5j * gamma).astype(complex)
    for k in range(n - 1):
        h[k, k + 1] = g[k]
        h[k + 1, k] = g[k]
    w, r = np.linalg.eig(h)
    left = np.linalg.inv(r)
    weights = c * r[0, :] * left[:, 0]
    return np.exp(-1j * np.outer(times, w)) @ weights


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--modes", type=int, default=3)
    ap.add_argument("--cutoff", type=float, default=1.0)
    ap.add_argument("--temperature", type=float, default=1.0)
    ap.add_argument("--window", type=float, default=20.0)
    ap.add_argument("--samples", type=int, default=401)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--restarts", type=int, default=20)
    args = ap.parse_args()

    times = np.linspace(0.0, args.window, args.samples)
    y = np.array([target(t, args.cutoff, args.temperature) for t in times])
    n = args.modes
    scale = abs(y[0])

    def resid(p):
        d = (chain(p, n, times) - y) / scale
        return np.concatenate([d.real, d.imag])

    rng = np.random.default_rng(args.seed)
    best = None
    lower = np.concatenate([np.full(n, -10.0 * args.cutoff), np.full(n, np.log(1e-3 * args.cutoff)),
                            np.full(n - 1, -10.0 * args.cutoff), [np.log(1e-3 * scale)]])
    upper = -lower
    upper[n:2 * n] = np.log(20.0 * args.cutoff)
    upper[-1] = np.log(10.0 * scale)
    for _ in range(args.restarts):
        p0 = np.concatenate([
            rng.uniform(-1.0, 3.0, n) * args.cutoff,
            np.log(rng.uniform(0.3, 4.0, n) * args.cutoff),
            rng.uniform(0.2, 2.0, n - 1) * args.cutoff,
            [np.log(scale)],
        ])
        p0 = np.clip(p0, lower + 1e-9, upper - 1e-9)
        sol = least_squares(resid, p0, bounds=(lower, upper), xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=5000)
        if best is None or sol.cost < best.cost:
            best = sol
    omega, gamma, g, c = unpack(best.x, n)
    err = np.abs(chain(best.x, n, times) - y)
    print(f"# max |C_chain - C| = {err.max():.3e} (|C(0)| = {scale:.6f}) over [0, {args.window}]")
    print("frequencies = [" + ", ".join(f"{v:.17g}" for v in omega) + "]")
    print("dampings = [" + ", ".join(f"{v:.17g}" for v in gamma) + "]")
    print("couplings = [" + ", ".join(f"{v:.17g}" for v in [c] + [0.0] * (n - 1)) + "]")
    print("links = [" + ", ".join(f"{v:.17g}" for v in g) + "]")


if __name__ == "__main__":
    main()
