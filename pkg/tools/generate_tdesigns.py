#!/usr/bin/env python3
"""Numerically construct symmetric spherical t-designs and write point files.

A point set X is a spherical t-design when equal weights 1/|X| integrate
every spherical polynomial of degree <= t exactly. For antipodally symmetric
sets the odd-degree moments vanish identically, so the construction solves
the even-degree moment equations

    (1/N) * sum_i Y_(k,l)(x_i) = 0,   k = 2, 4, ..., t-1 (t odd)

over the free half of the points (antipodal partners contribute the same
value for even k). Free points are parameterized by spherical angles and the
system is solved with trust-region nonlinear least squares and an analytic
Jacobian, restarting from jittered symmetric spirals until the residual hits
the target.

Writes spherefit/data/tdesign_t###.txt. Run with --only to build a subset:

    python tools/generate_tdesigns.py --only 47 63
"""

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from spherefit.geometry import PointSet  # noqa: E402
from spherefit.harmonics import harmonic_basis, harmonic_dim  # noqa: E402

# t -> (free antipodal pairs, include fixed poles). Sizes follow
# N = t^2/2 + t/2 + O(1); generously slack degrees of freedom where nothing
# pins the exact count, minimal counts where it does (t=15 -> 122 so the
# pole-free base has 120 points, t=47 -> 1130, t=63 -> 2018).
DESIGN_TABLE = {
    3: (3, True),      # N = 8
    7: (16, True),     # N = 34
    11: (36, True),    # N = 74
    15: (60, True),    # N = 122
    19: (97, True),    # N = 196
    31: (252, True),   # N = 506
    45: (522, True),   # N = 1046
    47: (564, True),   # N = 1130
    63: (1008, True),  # N = 2018
}

TARGETS = {47: 2e-9, 63: 1e-8}
DEFAULT_TARGET = 1e-11


def norm_legendre_tables(s, theta, want_deriv=True):
    """Normalized associated Legendre values (and d/dtheta) at angles theta.

    Normalization matches 4pi-orthonormal spherical harmonics. Returns
    dict[(k, m)] -> array; derivative table uses the recurrence
    dP(k,m)/dtheta = (k*cos*P(k,m) - c(k,m)*P(k-1,m)) / sin, with
    c(k,m) = sqrt((k^2-m^2)(2k+1)/(2k-1)).
    """
    z = np.cos(theta)
    sin = np.sin(theta)
    p = {}
    p[(0, 0)] = np.full_like(z, 1.0 / math.sqrt(4.0 * math.pi))
    for m in range(1, s + 1):
        p[(m, m)] = math.sqrt((2 * m + 1) / (2.0 * m)) * sin * p[(m - 1, m - 1)]
    for m in range(0, s):
        p[(m + 1, m)] = math.sqrt(2 * m + 3.0) * z * p[(m, m)]
    for m in range(0, s + 1):
        for k in range(m + 2, s + 1):
            a = math.sqrt((4.0 * k * k - 1.0) / (k * k - m * m))
            b = math.sqrt(
                ((2.0 * k + 1.0) * ((k - 1.0) ** 2 - m * m))
                / ((2.0 * k - 3.0) * (k * k - m * m))
            )
            p[(k, m)] = a * z * p[(k - 1, m)] - b * p[(k - 2, m)]
    if not want_deriv:
        return p, None
    inv_sin = 1.0 / np.maximum(sin, 1e-12)
    dp = {}
    for (k, m), val in p.items():
        if k == 0:
            dp[(k, m)] = np.zeros_like(val)
            continue
        c = math.sqrt((k * k - m * m) * (2.0 * k + 1.0) / (2.0 * k - 1.0))
        lower = p[(k - 1, m)] if k - 1 >= m else 0.0
        dp[(k, m)] = (k * z * val - c * lower) * inv_sin
    return p, dp


def even_harmonics_with_derivs(t, theta, phi):
    """Values and angle-derivatives of every even-degree harmonic 2..t-1.

    Returns (Y, dY_dtheta, dY_dphi), each shaped (n_harmonics, n_points),
    under the probability-measure normalization (constant harmonic = 1).
    """
    degrees = list(range(2, t + 1, 2))
    p, dp = norm_legendre_tables(t, theta)
    scale = math.sqrt(4.0 * math.pi)
    n_rows = sum(2 * k + 1 for k in degrees)
    n_pts = theta.shape[0]
    Y = np.empty((n_rows, n_pts))
    dYt = np.empty((n_rows, n_pts))
    dYp = np.empty((n_rows, n_pts))
    r = 0
    for k in degrees:
        Y[r] = scale * p[(k, 0)]
        dYt[r] = scale * dp[(k, 0)]
        dYp[r] = 0.0
        r += 1
        for m in range(1, k + 1):
            amp = scale * math.sqrt(2.0)
            c, s_ = np.cos(m * phi), np.sin(m * phi)
            Y[r] = amp * p[(k, m)] * c
            dYt[r] = amp * dp[(k, m)] * c
            dYp[r] = -m * amp * p[(k, m)] * s_
            Y[r + 1] = amp * p[(k, m)] * s_
            dYt[r + 1] = amp * dp[(k, m)] * s_
            dYp[r + 1] = m * amp * p[(k, m)] * c
            r += 2
    return Y, dYt, dYp


def pole_moment(t, n_total, with_poles):
    """Fixed contribution of the two poles to each even-degree moment."""
    degrees = list(range(2, t + 1, 2))
    rows = []
    for k in degrees:
        block = np.zeros(2 * k + 1)
        if with_poles:
            # Only m = 0 harmonics are nonzero at the poles; value sqrt(2k+1)
            # at each pole and even degrees match at the antipode.
            block[0] = 2.0 * math.sqrt(2 * k + 1.0) / n_total
        rows.append(block)
    return np.concatenate(rows)


class MomentSystem:
    def __init__(self, t, n_pairs, with_poles):
        self.t = t
        self.n_pairs = n_pairs
        self.with_poles = with_poles
        self.n_total = 2 * n_pairs + (2 if with_poles else 0)
        self.base = pole_moment(t, self.n_total, with_poles)

    def residual(self, params):
        theta, phi = params[: self.n_pairs], params[self.n_pairs :]
        Y, _, _ = even_harmonics_with_derivs(self.t, theta, phi)
        return self.base + (2.0 / self.n_total) * Y.sum(axis=1)

    def residual_and_jac(self, params):
        theta, phi = params[: self.n_pairs], params[self.n_pairs :]
        Y, dYt, dYp = even_harmonics_with_derivs(self.t, theta, phi)
        r = self.base + (2.0 / self.n_total) * Y.sum(axis=1)
        jac = np.concatenate([dYt, dYp], axis=1) * (2.0 / self.n_total)
        return r, jac

    def full_points(self, params):
        theta, phi = params[: self.n_pairs], params[self.n_pairs :]
        sin = np.sin(theta)
        half = np.column_stack([sin * np.cos(phi), sin * np.sin(phi), np.cos(theta)])
        blocks = [half, -half]
        if self.with_poles:
            blocks.append(np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]))
        return np.vstack(blocks)


def init_params(n_pairs, rng, jitter):
    """Half-sphere Fibonacci spiral with multiplicative jitter."""
    i = np.arange(n_pairs)
    z = (i + 0.5) / n_pairs  # open (0, 1): poles excluded
    theta = np.arccos(z)
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    theta = np.clip(theta + jitter * rng.normal(size=n_pairs), 1e-3, math.pi / 2)
    phi = phi + jitter * rng.normal(size=n_pairs)
    return np.concatenate([theta, phi])


def check_jacobian(system, rng):
    """Central-difference spot check of the analytic Jacobian."""
    params = init_params(system.n_pairs, rng, 0.05)
    _, jac = system.residual_and_jac(params)
    h = 1e-6
    cols = rng.choice(params.size, size=min(6, params.size), replace=False)
    for c in cols:
        up, down = params.copy(), params.copy()
        up[c] += h
        down[c] -= h
        fd = (system.residual(up) - system.residual(down)) / (2 * h)
        err = np.abs(fd - jac[:, c]).max()
        if err > 1e-5:
            raise AssertionError(f"jacobian column {c} off by {err:.2e}")


def exactness_residual(points, t):
    """Independent check: equal-weight moment residual over ALL degrees <= t."""
    V = harmonic_basis(points, t)
    moments = V.mean(axis=1)
    moments[0] -= 1.0
    return float(np.abs(moments).max())


def solve_design(t, n_pairs, with_poles, target, max_restarts, log):
    system = MomentSystem(t, n_pairs, with_poles)
    rng = np.random.default_rng(20240000 + t)
    check_jacobian(system, rng)
    best = (math.inf, None, None)
    for attempt in range(max_restarts):
        if attempt % 2 == 1 and best[2] is not None and best[0] > 1e-13:
            # Basin hop: jiggle the best stall point instead of restarting.
            params = best[2] + 2e-3 * rng.normal(size=best[2].shape)
        else:
            params = init_params(n_pairs, rng, 0.002 if attempt == 0 else 0.05)
        # Warm start large systems at a lower degree first.
        if t >= 31:
            coarse = MomentSystem(min(19, t), n_pairs, with_poles)
            res = least_squares(
                lambda q: coarse.residual_and_jac(q)[0],
                params,
                jac=lambda q: coarse.residual_and_jac(q)[1],
                method="trf",
                max_nfev=60,
                xtol=1e-12,
                ftol=None,
                gtol=None,
            )
            params = res.x
        res = least_squares(
            lambda q: system.residual_and_jac(q)[0],
            params,
            jac=lambda q: system.residual_and_jac(q)[1],
            method="trf",
            max_nfev=600,
            xtol=5e-16,
            ftol=None,
            gtol=None,
        )
        pts = system.full_points(res.x)
        resid = exactness_residual(pts, t)
        log(f"  t={t} attempt {attempt}: max moment residual {resid:.3e} "
            f"({res.nfev} evals)")
        if resid < best[0]:
            best = (resid, pts, res.x)
        if resid <= target:
            break
    return best[0], best[1]


def write_design(path, points, t, resid):
    n = len(points)
    lines = [f"# symmetric spherical design: t={t} n={n} residual={resid:.3e}"]
    for x, y, z in points:
        lines.append(f"{x:.17g} {y:.17g} {z:.17g}")
    path.write_text("\n".join(lines) + "\n")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--only", type=int, nargs="*", help="subset of t values")
    parser.add_argument("--out-dir", default=str(REPO / "src/spherefit/data"))
    parser.add_argument("--max-restarts", type=int, default=8)
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    wanted = args.only or sorted(DESIGN_TABLE)
    failures = []
    for t in wanted:
        n_pairs, with_poles = DESIGN_TABLE[t]
        target = TARGETS.get(t, DEFAULT_TARGET)
        started = time.time()
        print(f"t={t}: {2 * n_pairs + (2 if with_poles else 0)} points, "
              f"target {target:.1e}")
        resid, pts = solve_design(
            t, n_pairs, with_poles, target, args.max_restarts, print
        )
        elapsed = time.time() - started
        if pts is None or resid > target:
            failures.append((t, resid))
            print(f"t={t}: FAILED to reach {target:.1e} (best {resid:.3e}, "
                  f"{elapsed:.0f}s)")
            if pts is None:
                continue
        sep = PointSet(pts).separation_radius()
        path = out_dir / f"tdesign_t{t:03d}.txt"
        write_design(path, pts, t, resid)
        print(f"t={t}: wrote {path.name} residual={resid:.3e} "
              f"separation={sep:.4f} rad ({elapsed:.0f}s)")
    if failures:
        sys.exit(f"designs below target: {failures}")


if __name__ == "__main__":
    main()
