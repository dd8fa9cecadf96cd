"""Chromatic roots: extraction, real-root audit and ensemble statistics."""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import mpmath
import numpy as np
import sympy

from .weights import Weight

SWEEP_TOL = 1e-12
MAX_SWEEPS = 1000
START_OFFSET = 0.1
EPS = float(np.finfo(float).eps)
NOISE_FACTOR = 4.0
POLISH_SCALES = (2, 4)
POLISH_SWEEPS = 100
RESIDUAL_THRESHOLD = 1e-8
REAL_TOL = 1e-6
COMPLEX_BIN = 0.1
REAL_BIN = 0.02
BERAHA_TOL = 1e-3
BERAHA_KS = tuple(range(2, 11))
JACKSON_BOUND = Fraction(32, 27)
BIRKHOFF_LEWIS = 5.0


def beraha(k: int) -> float:
    """B_k = (2 cos(pi/k))^2, computed as 2 + 2 cos(2 pi/k) so B_2 = 0 exactly."""
    return 2.0 + 2.0 * math.cos(2.0 * math.pi / k)


@dataclass
class RootSet:
    roots: list[complex]
    residuals: list[float]
    degree: int
    converged: bool
    sweeps: int = 0

    def real_roots(self, tol: float = REAL_TOL) -> list[float]:
        return [z.real for z in self.roots if is_real(z, tol)]


def is_real(z: complex, tol: float = REAL_TOL) -> bool:
    return abs(z.imag) < tol * (1.0 + abs(z))


def _to_floats(coeffs: Sequence[int]) -> np.ndarray:
    """Scale by a power of two so the largest coefficient is about 2^60."""
    top = max(abs(c) for c in coeffs).bit_length()
    shift = max(top - 60, 0)
    den = 1 << shift
    # int / int is correctly rounded however large the operands
    return np.array([c / den for c in coeffs], dtype=float)


def _newton_ratio(c: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """p(z)/p'(z) for ascending float coefficients, safe for large |z|.

    Also flags the points where |p(z)| is within rounding error of zero,
    i.e. where double precision cannot locate the root any better.
    """
    d = len(c) - 1
    ac = np.abs(c)
    out = np.empty_like(z)
    noisy = np.empty(z.shape, dtype=bool)
    small = np.abs(z) <= 1.0
    if small.any():
        zs = z[small]
        az = np.abs(zs)
        p = np.full_like(zs, c[-1])
        dp = np.zeros_like(zs)
        mag = np.full(zs.shape, ac[-1])
        for k in range(d - 1, -1, -1):
            dp = dp * zs + p
            p = p * zs + c[k]
            mag = mag * az + ac[k]
        out[small] = p / dp
        noisy[small] = np.abs(p) <= NOISE_FACTOR * d * EPS * mag
    big = ~small
    if big.any():
        # p(z) = z^d r(1/z) with r the reversed polynomial
        zb = z[big]
        w = 1.0 / zb
        aw = np.abs(w)
        r = np.full_like(w, c[0])
        dr = np.zeros_like(w)
        mag = np.full(w.shape, ac[0])
        for k in range(1, d + 1):
            dr = dr * w + r
            r = r * w + c[k]
            mag = mag * aw + ac[k]
        out[big] = zb / (d - w * dr / r)
        noisy[big] = np.abs(r) <= NOISE_FACTOR * d * EPS * mag
    return out, noisy


def _root_bound(c: np.ndarray) -> float:
    """Fujiwara bound 2 max |c_{d-i}/c_d|^(1/i), with c_0 halved.

    Much tighter than 1 + max|c_i/c_d| when coefficients span many orders
    of magnitude, which keeps the start circle near the roots.
    """
    d = len(c) - 1
    terms = [abs(c[d - i] / c[d]) ** (1.0 / i) for i in range(1, d)]
    terms.append(abs(c[0] / (2.0 * c[d])) ** (1.0 / d))
    return 2.0 * max(terms)


def _aberth(coeffs: Sequence[int], tol=SWEEP_TOL, max_sweeps=MAX_SWEEPS):
    """Aberth-Ehrlich on one square-free factor; returns (roots, converged, sweeps).

    Double-precision sweeps (Jacobi style, vectorised) run until every
    update is below tolerance or every point sits where |p| is rounding
    noise. High-degree chromatic factors are badly conditioned in the
    monomial basis, so the second case is common; the iterates are then
    finished by the same iteration in multiprecision on the exact
    coefficients.
    """
    d = len(coeffs) - 1
    if d == 1:
        return [complex(-Fraction(coeffs[0], coeffs[1]))], True, 0
    c = _to_floats(coeffs)
    k = np.arange(d)
    # the extra offset breaks conjugate symmetry of the start circle
    z = _root_bound(c) * np.exp(2j * np.pi * (k / d + 1.0 / (2 * d)) + 1j * START_OFFSET)
    sweep = 0
    with np.errstate(all="ignore"):
        while sweep < max_sweeps:
            sweep += 1
            ratio, noisy = _newton_ratio(c, z)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            step = ratio / (1.0 - ratio * inv.sum(axis=1))
            step[~np.isfinite(step) | noisy] = 0.0
            z = z - step
            small = np.abs(step) < tol * (1.0 + np.abs(z))
            if small.all() and not noisy.any():
                return [complex(x) for x in z], True, sweep
            if (small | noisy).all():
                break
    digits = len(str(max(abs(x) for x in coeffs)))
    # cancellation near clustered roots eats roughly the coefficient width
    for scale in POLISH_SCALES:
        zs, ok, n = _polish(coeffs, z, tol, POLISH_SWEEPS, scale * digits + 20)
        if ok:
            return zs, True, sweep + n
    return zs, False, sweep + n


def _polish(coeffs: Sequence[int], z0, tol, max_sweeps, dps):
    """Gauss-Seidel Aberth sweeps in ``dps``-digit arithmetic."""
    d = len(coeffs) - 1
    with mpmath.workdps(dps):
        c = [mpmath.mpf(x) for x in coeffs]
        z = [mpmath.mpc(complex(x)) for x in z0]
        for sweep in range(1, max_sweeps + 1):
            ok = True
            for i in range(d):
                zi = z[i]
                p, dp = c[d], mpmath.mpc(0)
                for a in reversed(c[:-1]):
                    dp = dp * zi + p
                    p = p * zi + a
                if p == 0:
                    continue
                ratio = p / dp
                s = mpmath.fsum(1 / (zi - z[j]) for j in range(d) if j != i)
                step = ratio / (1 - ratio * s)
                z[i] = zi - step
                if abs(step) >= tol * (1 + abs(z[i])):
                    ok = False
            if ok:
                return [complex(x) for x in z], True, sweep
        return [complex(x) for x in z], False, max_sweeps


def scaled_residual(coeffs: Sequence[int], z: complex) -> float:
    """|p(z)| / (sum |c_i| * max(1, |z|)^d)."""
    c = _to_floats(coeffs)
    d = len(c) - 1
    norm = float(np.abs(c).sum())
    if abs(z) <= 1.0:
        acc = 0j
        for x in reversed(c):
            acc = acc * z + x
        return abs(acc) / norm
    w = 1.0 / z
    acc = 0j
    for x in c:
        acc = acc * w + x
    return abs(acc) / norm


def find_roots(chi: Weight | Sequence[int], tol: float = SWEEP_TOL, max_sweeps: int = MAX_SWEEPS,
               threshold: float = RESIDUAL_THRESHOLD) -> RootSet:
    """All complex roots of an integer polynomial, with multiplicity.

    Zero roots are split off exactly, the rest is made square-free over the
    integers so repeated roots (Q=1 once per block, repeated blocks, ...)
    do not stall the float iteration; each distinct factor then goes
    through Aberth-Ehrlich.
    """
    coeffs = list(chi.coeffs if isinstance(chi, Weight) else chi)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if not coeffs:
        raise ValueError("the zero polynomial has no root set")
    degree = len(coeffs) - 1
    zeros = next(i for i, c in enumerate(coeffs) if c)
    roots: list[complex] = [0j] * zeros
    rest = coeffs[zeros:]
    converged = True
    sweeps = 0
    if len(rest) > 1:
        x = sympy.Symbol("x")
        _, factors = sympy.Poly(list(reversed(rest)), x, domain="ZZ").sqf_list()
        for factor, mult in factors:
            fc = [int(a) for a in reversed(factor.all_coeffs())]
            if len(fc) < 2:
                continue
            zs, ok, n = _aberth(fc, tol, max_sweeps)
            converged &= ok
            sweeps = max(sweeps, n)
            for r in zs:
                roots.extend([complex(r)] * mult)
    roots.sort(key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    residuals = [scaled_residual(coeffs, z) for z in roots]
    if len(roots) != degree:
        converged = False
    if any(r >= threshold for r in residuals):
        converged = False
    return RootSet(roots, residuals, degree, converged, sweeps)


# ------------------------------------------------------------------ audit


@dataclass(frozen=True)
class Violation:
    root: float
    interval: str


def audit_real_roots(rs: RootSet, planar: bool = True, tol: float = REAL_TOL) -> list[Violation]:
    """Real roots inside the root-free zones of chromatic polynomials.

    Flags (-inf, 0), (0, 1), (1, 32/27] and, for planar graphs, [5, inf).
    Endpoints 0 and 1 are allowed within ``tol``; 32/27 itself is flagged.
    """
    out = []
    hi = float(JACKSON_BOUND)
    for x in rs.real_roots(tol):
        if x < -tol:
            out.append(Violation(x, "(-inf,0)"))
        elif tol < x < 1 - tol:
            out.append(Violation(x, "(0,1)"))
        elif 1 + tol < x <= hi:
            out.append(Violation(x, "(1,32/27]"))
        elif planar and x >= BIRKHOFF_LEWIS:
            out.append(Violation(x, "[5,inf)"))
    return out


# ------------------------------------------------------------------ ensembles


def _bin(x: float, width: float) -> int:
    return math.floor(x / width + 0.5)


def _center(i: int, width: float) -> str:
    return repr(round(i * width, 10) + 0.0)


@dataclass
class EnsembleStats:
    """Root counts over many graphs.

    ``complex_counts`` bins every root (multiplicity included) into
    0.1 x 0.1 cells centred on multiples of 0.1; divide by ``n_graphs`` for
    the expected number of roots per graph in a cell. Real roots go into
    0.02-wide bins centred on multiples of 0.02 and are reported as a
    density of unit total area. Root sets that did not converge are
    counted in ``n_skipped`` and otherwise ignored.
    """

    n_graphs: int = 0
    n_roots: int = 0
    complex_counts: Counter = field(default_factory=Counter)
    real_counts: Counter = field(default_factory=Counter)
    n_real: int = 0
    beraha_counts: Counter = field(default_factory=Counter)
    n_skipped: int = 0

    def add(self, rs: RootSet):
        if not rs.converged:
            self.n_skipped += 1
            return
        self.n_graphs += 1
        self.n_roots += len(rs.roots)
        for z in rs.roots:
            real = is_real(z)
            y = 0.0 if real else z.imag
            self.complex_counts[(_bin(z.real, COMPLEX_BIN), _bin(y, COMPLEX_BIN))] += 1
            if real:
                self.n_real += 1
                self.real_counts[_bin(z.real, REAL_BIN)] += 1
                for k in BERAHA_KS:
                    if abs(z.real - beraha(k)) < BERAHA_TOL:
                        self.beraha_counts[k] += 1

    def merge(self, other: "EnsembleStats") -> "EnsembleStats":
        return EnsembleStats(
            self.n_graphs + other.n_graphs,
            self.n_roots + other.n_roots,
            self.complex_counts + other.complex_counts,
            self.real_counts + other.real_counts,
            self.n_real + other.n_real,
            self.beraha_counts + other.beraha_counts,
            self.n_skipped + other.n_skipped,
        )

    def real_density(self) -> list[tuple[float, float]]:
        if not self.n_real:
            return []
        scale = self.n_real * REAL_BIN
        return [(i * REAL_BIN, c / scale) for i, c in sorted(self.real_counts.items())]

    def expected_per_graph(self) -> dict[tuple[int, int], float]:
        return {k: c / self.n_graphs for k, c in self.complex_counts.items()} if self.n_graphs else {}

    def write_csv(self, outdir: str | Path):
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        with open(outdir / "complex_density.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x_bin_center", "y_bin_center", "count"])
            for (ix, iy), c in sorted(self.complex_counts.items()):
                w.writerow([_center(ix, COMPLEX_BIN), _center(iy, COMPLEX_BIN), c])
        with open(outdir / "real_hist.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["q_bin_center", "density"])
            scale = self.n_real * REAL_BIN
            for i, c in sorted(self.real_counts.items()):
                w.writerow([_center(i, REAL_BIN), repr(c / scale)])
        with open(outdir / "beraha.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "B_k", "count_within_tol"])
            for k in BERAHA_KS:
                w.writerow([k, repr(beraha(k)), self.beraha_counts.get(k, 0)])


def accumulate_ensemble(root_sets: Iterable[RootSet]) -> EnsembleStats:
    stats = EnsembleStats()
    for rs in root_sets:
        stats.add(rs)
    return stats
