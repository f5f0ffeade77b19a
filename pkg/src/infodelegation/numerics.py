"""Scalar quadrature and root/maximum finding used throughout the package.

Adaptive Simpson and bisection are deliberately plain: every integrand here
is piecewise smooth and every solved function is monotone or single-crossing
on its bracket, so unconditional robustness beats speed.
"""

from __future__ import annotations

from typing import Callable

from .errors import DomainError, NumericsError

SIMPSON_TOL = 1e-12
SIMPSON_MAX_DEPTH = 40
BISECT_XTOL = 1e-12


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, *,
                     tol: float = SIMPSON_TOL,
                     max_depth: int = SIMPSON_MAX_DEPTH) -> float:
    """Integrate ``f`` on [a, b] to absolute tolerance ``tol``.

    Raises NumericsError carrying the achieved residual if some subinterval
    still exceeds its local tolerance at ``max_depth``.
    """
    if b < a:
        raise DomainError(f"integration bounds out of order: [{a}, {b}]")
    if a == b:
        return 0.0
    unconverged: list[float] = []
    fa, fb = f(a), f(b)
    mid = 0.5 * (a + b)
    fm = f(mid)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    value = _simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth, unconverged)
    if unconverged:
        worst = max(unconverged)
        raise NumericsError(
            f"quadrature did not converge on [{a}, {b}]; residual {worst:.3e}",
            residual=worst,
        )
    return value


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth, unconverged):
    mid = 0.5 * (a + b)
    lm = 0.5 * (a + mid)
    rm = 0.5 * (mid + b)
    flm, frm = f(lm), f(rm)
    left = (mid - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - mid) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol or (b - a) < 1e-15:
        return left + right + delta / 15.0
    if depth <= 0:
        unconverged.append(abs(delta) / 15.0)
        return left + right + delta / 15.0
    half = 0.5 * tol
    return (_simpson_rec(f, a, mid, fa, flm, fm, left, half, depth - 1, unconverged)
            + _simpson_rec(f, mid, b, fm, frm, fb, right, half, depth - 1, unconverged))


def bisect_root(f: Callable[[float], float], lo: float, hi: float, *,
                xtol: float = BISECT_XTOL, max_iter: int = 256) -> float:
    """Root of ``f`` on [lo, hi] by bisection; the bracket is verified first.

    Accepts a root at either endpoint. Raises NumericsError when the
    endpoints carry the same strict sign.
    """
    if hi < lo:
        raise DomainError(f"bracket out of order: [{lo}, {hi}]")
    flo = f(lo)
    if flo == 0.0:
        return lo
    fhi = f(hi)
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise NumericsError(
            f"no sign change on [{lo}, {hi}]: f(lo)={flo:.3e}, f(hi)={fhi:.3e}",
            residual=min(abs(flo), abs(fhi)),
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol:
            return mid
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0.0) == (flo > 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, *,
                       xtol: float = 1e-9) -> tuple[float, float]:
    """Maximize ``f`` on [lo, hi]; returns (argmax, value).

    Assumes unimodality on the bracket (callers pre-locate the bracket with a
    grid scan). Ties break toward the smaller argument.
    """
    invphi = 0.6180339887498949
    a, b = lo, hi
    best_x, best_f = lo, f(lo)
    fhi = f(hi)
    if fhi > best_f:
        best_x, best_f = hi, fhi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        for x, fx in ((c, fc), (d, fd)):
            if fx > best_f or (fx == best_f and x < best_x):
                best_x, best_f = x, fx
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    mid = 0.5 * (a + b)
    fmid = f(mid)
    if fmid > best_f or (fmid == best_f and mid < best_x):
        best_x, best_f = mid, fmid
    return best_x, best_f
