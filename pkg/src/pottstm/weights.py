"""Coefficient ring for transfer-matrix weights, and CRT reconstruction.

Four modes share one :class:`Weight` type:

``UNIVARIATE``  integer polynomial in Q (v fixed), ascending coefficients
``BIVARIATE``   integer polynomial in Q and v; ``coeffs[j][k]`` is the v^j Q^k term
``MODULAR``     polynomial in Q with residues modulo ``prime``
``SCALAR``      a float, Q and v both fixed

Polynomials are dense and normalised (no trailing zeros, zero is ``()``).
"""

from __future__ import annotations

import enum
import logging
import os
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Sequence

log = logging.getLogger(__name__)

PRIME_LIMIT = 2**31
DEFAULT_MAX_PRIMES = 64


class Mode(str, enum.Enum):
    UNIVARIATE = "univariate"
    BIVARIATE = "bivariate"
    MODULAR = "modular"
    SCALAR = "scalar"


class WeightError(ValueError):
    pass


class CRTError(RuntimeError):
    pass


def _trim(coeffs) -> tuple:
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def _trim2(rows) -> tuple:
    rows = [_trim(r) for r in rows]
    while rows and not rows[-1]:
        rows.pop()
    return tuple(rows)


@dataclass(frozen=True)
class Weight:
    mode: Mode
    coeffs: object
    prime: int | None = None

    def __post_init__(self):
        mode = Mode(self.mode)
        object.__setattr__(self, "mode", mode)
        if mode is Mode.SCALAR:
            object.__setattr__(self, "coeffs", float(self.coeffs))
        elif mode is Mode.BIVARIATE:
            object.__setattr__(self, "coeffs", _trim2(tuple(int(c) for c in r) for r in self.coeffs))
        elif mode is Mode.MODULAR:
            p = self.prime
            if not p or p < 2:
                raise WeightError("MODULAR weight needs a prime")
            object.__setattr__(self, "coeffs", _trim(int(c) % p for c in self.coeffs))
        else:
            object.__setattr__(self, "coeffs", _trim(int(c) for c in self.coeffs))
        if mode is not Mode.MODULAR and self.prime is not None:
            raise WeightError(f"{mode.value} weight takes no prime")

    @classmethod
    def univariate(cls, coeffs: Sequence[int]) -> "Weight":
        return cls(Mode.UNIVARIATE, coeffs)

    @classmethod
    def bivariate(cls, rows: Sequence[Sequence[int]]) -> "Weight":
        return cls(Mode.BIVARIATE, rows)

    @classmethod
    def modular(cls, coeffs: Sequence[int], prime: int) -> "Weight":
        return cls(Mode.MODULAR, coeffs, prime)

    @classmethod
    def scalar(cls, x: float) -> "Weight":
        return cls(Mode.SCALAR, x)

    def is_zero(self) -> bool:
        return self.coeffs == 0.0 if self.mode is Mode.SCALAR else not self.coeffs

    @property
    def degree(self) -> int:
        """Degree in Q (-1 for zero); for BIVARIATE the max over rows."""
        if self.mode is Mode.SCALAR:
            return 0
        if self.mode is Mode.BIVARIATE:
            return max((len(r) - 1 for r in self.coeffs), default=-1)
        return len(self.coeffs) - 1

    def __str__(self):
        return format_weight(self)


def zero(mode: Mode, prime: int | None = None) -> Weight:
    return Weight(mode, 0.0 if Mode(mode) is Mode.SCALAR else (), prime)


def one(mode: Mode, prime: int | None = None) -> Weight:
    mode = Mode(mode)
    if mode is Mode.SCALAR:
        return Weight(mode, 1.0)
    if mode is Mode.BIVARIATE:
        return Weight(mode, ((1,),))
    return Weight(mode, (1,), prime)


def _check(a: Weight, b: Weight):
    if a.mode is not b.mode:
        raise WeightError(f"mode mismatch: {a.mode.value} vs {b.mode.value}")
    if a.prime != b.prime:
        raise WeightError(f"prime mismatch: {a.prime} vs {b.prime}")


def _add(x, y):
    if len(x) < len(y):
        x, y = y, x
    out = list(x)
    for i, c in enumerate(y):
        out[i] += c
    return out


def _mul(x, y):
    if not x or not y:
        return []
    out = [0] * (len(x) + len(y) - 1)
    for i, a in enumerate(x):
        if a:
            for j, b in enumerate(y):
                out[i + j] += a * b
    return out


def weight_add(a: Weight, b: Weight) -> Weight:
    _check(a, b)
    if a.mode is Mode.SCALAR:
        return Weight(a.mode, a.coeffs + b.coeffs)
    if a.mode is Mode.BIVARIATE:
        rows = [_add(r, s) for r, s in zip(a.coeffs, b.coeffs)]
        longer = a.coeffs if len(a.coeffs) > len(b.coeffs) else b.coeffs
        rows += longer[len(rows):]
        return Weight(a.mode, rows)
    return Weight(a.mode, _add(a.coeffs, b.coeffs), a.prime)


def weight_mul(a: Weight, b: Weight) -> Weight:
    _check(a, b)
    if a.mode is Mode.SCALAR:
        return Weight(a.mode, a.coeffs * b.coeffs)
    if a.mode is Mode.BIVARIATE:
        if not a.coeffs or not b.coeffs:
            return zero(a.mode)
        rows: list[list[int]] = [[] for _ in range(len(a.coeffs) + len(b.coeffs) - 1)]
        for i, r in enumerate(a.coeffs):
            for j, s in enumerate(b.coeffs):
                rows[i + j] = _add(rows[i + j], _mul(r, s))
        return Weight(a.mode, rows)
    return Weight(a.mode, _mul(a.coeffs, b.coeffs), a.prime)


def weight_neg(a: Weight) -> Weight:
    if a.mode is Mode.SCALAR:
        return Weight(a.mode, -a.coeffs)
    if a.mode is Mode.BIVARIATE:
        return Weight(a.mode, [[-c for c in r] for r in a.coeffs])
    return Weight(a.mode, [-c for c in a.coeffs], a.prime)


def scale_by_Q(a: Weight, q: float | None = None) -> Weight:
    """Multiply by Q. SCALAR mode needs the bound numeric ``q``."""
    if a.mode is Mode.SCALAR:
        if q is None:
            raise WeightError("SCALAR mode needs a bound Q value")
        return Weight(a.mode, a.coeffs * q)
    if a.mode is Mode.BIVARIATE:
        return Weight(a.mode, [(0,) + r if r else r for r in a.coeffs])
    return Weight(a.mode, (0,) + a.coeffs if a.coeffs else (), a.prime)


def scale_by_v(a: Weight, v=None) -> Weight:
    """Multiply by v: a shift in BIVARIATE mode, the bound value otherwise."""
    if a.mode is Mode.BIVARIATE:
        return Weight(a.mode, ((),) + a.coeffs if a.coeffs else ())
    if v is None:
        raise WeightError(f"{a.mode.value} mode needs a bound v value")
    if a.mode is Mode.SCALAR:
        return Weight(a.mode, a.coeffs * v)
    if isinstance(v, Fraction):
        if v.denominator != 1:
            raise WeightError("non-integral v; scale the edge weights instead")
        v = v.numerator
    return Weight(a.mode, [c * v for c in a.coeffs], a.prime)


def evaluate(w: Weight, q, v=None):
    """Evaluate at Q=q (and v for BIVARIATE). MODULAR results are residues."""
    if w.mode is Mode.SCALAR:
        return w.coeffs

    def horner(cs, x):
        acc = 0
        for c in reversed(cs):
            acc = acc * x + c
        return acc

    if w.mode is Mode.BIVARIATE:
        if v is None:
            raise WeightError("BIVARIATE evaluation needs v")
        return horner([horner(r, q) for r in w.coeffs], v)
    val = horner(w.coeffs, q)
    return val % w.prime if w.mode is Mode.MODULAR else val


def specialise_v(w: Weight, v) -> list:
    """Substitute a value for v in a BIVARIATE weight; returns Q coefficients."""
    if w.mode is not Mode.BIVARIATE:
        raise WeightError("specialise_v needs a BIVARIATE weight")
    deg = w.degree
    out = [0] * (deg + 1)
    vp = 1
    for row in w.coeffs:
        for k, c in enumerate(row):
            out[k] += c * vp
        vp *= v
    return list(_trim(out))


def reduce_mod(w: Weight, p: int) -> Weight:
    if w.mode is not Mode.UNIVARIATE:
        raise WeightError("only UNIVARIATE weights reduce to MODULAR")
    return Weight.modular(w.coeffs, p)


# ---------------------------------------------------------------- primes


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # these bases are deterministic far beyond 2**64
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def iter_primes(below: int = PRIME_LIMIT) -> Iterator[int]:
    """Primes strictly below ``below``, descending."""
    n = below - 1
    while n >= 2:
        if is_prime(n):
            yield n
        n -= 1


def prime_schedule(count: int, below: int = PRIME_LIMIT) -> list[int]:
    out = []
    for p in iter_primes(below):
        if len(out) == count:
            break
        out.append(p)
    return out


# ---------------------------------------------------------------- CRT


def crt_reconstruct(residue_polys: Sequence[tuple[int, Sequence[int]]]) -> Weight:
    """Lift per-prime residue polynomials to signed integer coefficients.

    Each coefficient is combined incrementally over the primes and then
    mapped into the symmetric range ``(-P/2, P/2]`` of the prime product.
    """
    primes = [p for p, _ in residue_polys]
    if len(set(primes)) != len(primes):
        raise WeightError(f"duplicate primes in {primes}")
    if not residue_polys:
        return zero(Mode.UNIVARIATE)
    width = max(len(cs) for _, cs in residue_polys)
    total = 1
    acc = [0] * width
    for p, cs in residue_polys:
        cs = list(cs) + [0] * (width - len(cs))
        inv = pow(total % p, -1, p)
        for k in range(width):
            # acc[k] ≡ target mod total; adjust so it also matches mod p
            t = ((cs[k] - acc[k]) % p) * inv % p
            acc[k] += total * t
        total *= p
    half = total // 2
    return Weight.univariate([c - total if c > half else c for c in acc])


def _prime_cap() -> int:
    env = os.environ.get("POTTS_TM_PRIME_COUNT_MAX")
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise CRTError(f"POTTS_TM_PRIME_COUNT_MAX={env!r} is not an integer") from None
        if cap < 2:
            raise CRTError("POTTS_TM_PRIME_COUNT_MAX must be at least 2")
        return cap
    return DEFAULT_MAX_PRIMES


def adaptive_crt_run(
    compute_mod: Callable[[int], Sequence[int] | Weight],
    verify_eval: Callable[[int, int], int],
    max_primes: int | None = None,
    n_checks: int = 3,
) -> Weight:
    """Reconstruct an integer polynomial from modular runs, adding primes until stable.

    A reconstruction is accepted once it equals the previous one and its
    values at ``n_checks`` pseudorandom points modulo a prime not used in
    the lift agree with ``verify_eval(q0, prime)``. A failed check costs
    nothing extra: the checking prime is simply consumed by the next lift.
    """
    cap = _prime_cap() if max_primes is None else max_primes
    primes = iter_primes()
    residues: list[tuple[int, list[int]]] = []
    previous = None
    pending = None
    while len(residues) < cap:
        p = pending if pending is not None else next(primes)
        pending = None
        res = compute_mod(p)
        if isinstance(res, Weight):
            res = list(res.coeffs)
        residues.append((p, [c % p for c in res]))
        current = crt_reconstruct(residues)
        log.debug("CRT: %d primes, degree %d", len(residues), current.degree)
        if previous is not None and current == previous:
            check_p = next(primes)
            rng = random.Random(check_p)
            ok = True
            for _ in range(n_checks):
                q0 = rng.randrange(check_p)
                if evaluate(current, q0) % check_p != verify_eval(q0, check_p) % check_p:
                    ok = False
                    break
            if ok:
                return current
            log.info("CRT: verification failed at prime %d, continuing", check_p)
            pending = check_p
        previous = current
    raise CRTError(f"no stable reconstruction after {cap} primes")


# ---------------------------------------------------------------- text IO


def format_coeffs(coeffs: Sequence) -> str:
    return " ".join(str(c) for c in coeffs) if len(coeffs) else "0"


def format_weight(w: Weight) -> str:
    """Text form: ascending coefficients, one line per v-degree for BIVARIATE."""
    if w.mode is Mode.SCALAR:
        return format(w.coeffs, ".17g")
    if w.mode is Mode.BIVARIATE:
        return "\n".join(format_coeffs(r) for r in w.coeffs) if w.coeffs else "0"
    return format_coeffs(w.coeffs)


def parse_polynomial(text: str) -> list[int]:
    return list(_trim(int(tok) for tok in text.split()))


def parse_bivariate(text: str) -> Weight:
    return Weight.bivariate([parse_polynomial(line) for line in text.strip().splitlines()])
