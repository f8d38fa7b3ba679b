"""Closed-form predictors for cliques, colorings and the HG window of G(n, p).

These are finite-n formulas standing in for asymptotic statements. They
are predictions, not certificates. Logarithms are natural and converted
to other bases explicitly.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from hatguess.bounds import book_lower_value, choose_d
from hatguess.graph import as_fraction


def _log(n) -> float:
    # math.log accepts arbitrarily large ints, so n = 10**300 stays exact here
    return math.log(n)


def xx_solve(n, tol: float = 1e-15, max_iter: int = 200) -> float:
    """Solve ``x**x = n`` (``x ln x = ln n``) for ``n > 1``.

    Newton steps are kept inside a shrinking bracket ``[1, ln n + 2]`` and
    replaced by bisection whenever they would leave it. Integer roots of
    perfect powers (``27 -> 3``) are returned exactly.
    """
    if not n > 1:
        raise ValueError("xx_solve needs n > 1")
    target = _log(n)
    lo, hi = 1.0, target + 2.0
    x = min(max(1.0 + target / max(1.0, math.log1p(target)), lo), hi)
    for _ in range(max_iter):
        f = x * math.log(x) - target
        if f == 0:
            break
        if f > 0:
            hi = x
        else:
            lo = x
        step = f / (math.log(x) + 1.0)
        nxt = x - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - x) <= tol * max(1.0, x):
            x = nxt
            break
        x = nxt
    r = round(x)
    if r >= 1 and isinstance(n, int) and r**r == n:
        return float(r)
    return x


def xx_residual(x: float, n) -> float:
    """``|x ln x - ln n|``."""
    return abs(x * math.log(x) - _log(n))


def chernoff_tail(t: float, ranges) -> float:
    """``exp(-2 t^2 / sum c_i^2)`` capped at 1."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    cs = [float(c) for c in ranges]
    if any(c < 0 for c in cs):
        raise ValueError("ranges must be nonnegative")
    s = math.fsum(c * c for c in cs)
    if t == 0:
        return 1.0
    if s == 0:
        raise ValueError("ranges must not all be zero when t > 0")
    return min(1.0, math.exp(-2.0 * t * t / s))


def _check_ndp(n, p, d):
    if not 0 < p < 1:
        raise ValueError("p must lie strictly between 0 and 1")
    # d = n/2 is admitted as the limiting case, where the bound is exactly 1
    if not 0 <= d <= n / 2 or n < 1:
        raise ValueError("need n >= 1 and 0 <= d <= n/2")


def common_neighbor_tail_bound(n: int, p: float, d: int) -> float:
    """Tail bound on ``N <= n p^d / 2`` for the common neighbors of a fixed ``d``-set.

    Uses ``t = (n/2 - d) p^d`` and divides by ``n``, as stated in the source
    argument, although only ``n - d`` indicators exist. See
    :func:`common_neighbor_tail_bound_exact` for the ``n - d`` form.
    """
    p = float(p)
    _check_ndp(n, p, d)
    return math.exp(-2.0 * (0.5 * n - d) ** 2 * p ** (2 * d) / n)


def common_neighbor_tail_bound_exact(n: int, p: float, d: int) -> float:
    """Same bound with the indicator count ``n - d`` in the denominator (slightly stronger)."""
    p = float(p)
    _check_ndp(n, p, d)
    return math.exp(-2.0 * (0.5 * n - d) ** 2 * p ** (2 * d) / (n - d))


def predicted_omega(n, p) -> float:
    """``2 log_{1/p} n``."""
    p = float(p)
    if n < 2 or not 0 < p < 1:
        raise ValueError("need n >= 2 and 0 < p < 1")
    return 2.0 * _log(n) / -math.log(p)


def predicted_chi(n, p) -> float:
    """``n / (2 log_{1/(1-p)} n)``."""
    p = float(p)
    if n < 2 or not 0 < p < 1:
        raise ValueError("need n >= 2 and 0 < p < 1")
    return n / (2.0 * _log(n) / -math.log1p(-p))


@dataclass(frozen=True)
class PredictionWindow:
    n: int
    p: str
    d_used: int
    lower_value: int
    chi_pred: float
    omega_pred: float
    upper_value: float

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["lower_value"] = str(self.lower_value)
        doc["kind"] = "prediction"
        return doc


def theorem_window(n: int, p) -> PredictionWindow:
    """Predicted ``[lower, upper]`` window for HG(G(n, p)).

    The lower end is the book value for ``d = choose_d(n, p)`` (1 when no
    ``d`` fits), the upper end the coloring bound at the predicted
    chromatic number.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    pf = as_fraction(p)
    d = choose_d(n, pf)
    lower = book_lower_value(d) if d >= 1 else 1
    chi = predicted_chi(n, float(pf))
    upper = (1.0 - 1.0 / (2.0 * chi)) * n
    return PredictionWindow(
        n=n,
        p=f"{pf.numerator}/{pf.denominator}",
        d_used=d,
        lower_value=lower,
        chi_pred=chi,
        omega_pred=predicted_omega(n, float(pf)),
        upper_value=upper,
    )
