"""Adaptive Simpson quadrature for scalar integrands."""
from __future__ import annotations

import math

from .errors import NumericalError


def adaptive_simpson(f, a: float, b: float, rtol: float = 1e-10, atol: float = 0.0,
                     max_depth: int = 60, max_evals: int = 2_000_000) -> float:
    """Integrate ``f`` over ``[a, b]``.

    Uses the classical Richardson-corrected Simpson rule with an explicit
    stack.  The tolerance budget is ``max(atol, rtol * |I|)`` where ``I`` is
    the whole-interval Simpson estimate refined once.

    Raises
    ------
    NumericalError
        If intervals at ``max_depth`` still miss their share of the budget
        by more than the total budget, or the evaluation cap is hit.
    """
    if a == b:
        return 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) * (fa + 4 * fm + fb) / 6.0
    # one refinement to get a less aliased scale estimate
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    scale = abs((m - a) * (fa + 4 * flm + fm) / 6.0 + (b - m) * (fm + 4 * frm + fb) / 6.0)
    if scale == 0.0:
        scale = abs(whole)
    budget = max(atol, rtol * scale)
    if budget == 0.0:
        budget = 1e-300

    total = 0.0
    unresolved = 0.0
    evals = 5
    stack = [(a, b, fa, fm, fb, whole, budget, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, tol, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        l_mid, r_mid = 0.5 * (lo + mid), 0.5 * (mid + hi)
        fl, fr = f(l_mid), f(r_mid)
        evals += 2
        left = (mid - lo) * (flo + 4 * fl + fmid) / 6.0
        right = (hi - mid) * (fmid + 4 * fr + fhi) / 6.0
        err = left + right - s
        if abs(err) <= 15.0 * tol or depth >= max_depth or not math.isfinite(err):
            if depth >= max_depth and abs(err) > 15.0 * tol:
                unresolved += abs(err) / 15.0
            total += left + right + err / 15.0
            continue
        if evals > max_evals:
            raise NumericalError("adaptive Simpson evaluation cap reached",
                                 {"a": a, "b": b, "partial": total, "evals": evals})
        stack.append((mid, hi, fmid, fr, fhi, right, 0.5 * tol, depth + 1))
        stack.append((lo, mid, flo, fl, fmid, left, 0.5 * tol, depth + 1))
    if not math.isfinite(total):
        raise NumericalError("integral is not finite", {"a": a, "b": b, "value": total})
    if unresolved > budget:
        raise NumericalError("adaptive Simpson did not reach tolerance within depth cap",
                             {"a": a, "b": b, "value": total, "unresolved": unresolved,
                              "budget": budget})
    return sign * total
