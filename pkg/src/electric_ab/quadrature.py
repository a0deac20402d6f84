"""Adaptive Simpson quadrature.

The integrands met here (drive waveforms and their derivatives) are smooth on
each panel, so a Richardson-corrected adaptive Simpson rule converges fast and
is easy to audit against closed forms.
"""

import math

from .errors import DomainError, QuadratureError

__all__ = ["adaptive_simpson"]


def _simpson(fa, fm, fb, h):
    return h * (fa + 4.0 * fm + fb) / 6.0


def adaptive_simpson(f, a, b, rtol=1e-9, *, initial_panels=16, max_depth=48, max_evals=2_000_000):
    """Integrate a scalar function ``f`` over ``[a, b]``.

    The requested accuracy is relative to the larger of ``|I|`` and the
    integral of ``|f|`` (estimated on the initial panels), so integrals that
    cancel to zero still terminate.

    Returns the integral estimate. Raises :class:`QuadratureError`, carrying
    the best estimate and the achieved error bound, when a panel hits
    ``max_depth`` or the evaluation budget runs out.
    """
    if not (rtol > 0.0):
        raise DomainError(f"rtol must be positive, got {rtol!r}")
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, rtol, initial_panels=initial_panels,
                                 max_depth=max_depth, max_evals=max_evals)

    n0 = max(1, int(initial_panels))
    edges = [a + (b - a) * i / n0 for i in range(n0)] + [b]
    fvals = [float(f(x)) for x in edges]
    panels = []
    coarse = 0.0
    scale = 0.0
    evals = len(edges)
    for i in range(n0):
        x0, x1 = edges[i], edges[i + 1]
        xm = 0.5 * (x0 + x1)
        fm = float(f(xm))
        evals += 1
        s = _simpson(fvals[i], fm, fvals[i + 1], x1 - x0)
        coarse += s
        scale += _simpson(abs(fvals[i]), abs(fm), abs(fvals[i + 1]), x1 - x0)
        panels.append((x0, x1, fvals[i], fm, fvals[i + 1], s, 0))

    ref = max(abs(coarse), scale)
    if not math.isfinite(ref):
        raise QuadratureError(coarse, math.inf, math.nan)
    # zero on every initial node: any nonzero panel difference forces refinement
    abs_tol = rtol * ref if ref > 0.0 else 1e-300
    span = b - a

    pieces = []
    err_total = 0.0
    failed = False
    stack = panels[::-1]  # left-to-right processing order
    while stack:
        x0, x1, fa, fm, fb, whole, depth = stack.pop()
        h = x1 - x0
        xl = x0 + 0.25 * h
        xr = x0 + 0.75 * h
        fl = float(f(xl))
        fr = float(f(xr))
        evals += 2
        xm = 0.5 * (x0 + x1)
        left = _simpson(fa, fl, fm, 0.5 * h)
        right = _simpson(fm, fr, fb, 0.5 * h)
        delta = left + right - whole
        # tolerance share proportional to panel width
        local_tol = abs_tol * (h / span)
        if abs(delta) <= 15.0 * local_tol or depth >= max_depth or evals >= max_evals:
            if abs(delta) > 15.0 * local_tol:
                failed = True
            pieces.append(left + right + delta / 15.0)
            err_total += abs(delta) / 15.0
            continue
        stack.append((xm, x1, fm, fr, fb, right, depth + 1))
        stack.append((x0, xm, fa, fl, fm, left, depth + 1))

    estimate = math.fsum(pieces)
    if failed or not math.isfinite(estimate):
        raise QuadratureError(estimate, err_total, abs_tol)
    return estimate
