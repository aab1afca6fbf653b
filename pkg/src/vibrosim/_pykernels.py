"""Pure-numpy fallback for the compiled loops in ``_ckernels``.

Same signatures and in-place semantics, except that after a divergence the
state left in ``prev``/``curr`` is unspecified. The FDM update evaluates the same
arithmetic expression in the same order as the compiled loop, so both
backends produce bit-identical FDM histories. The FEM mass solve goes
through LAPACK's symmetric tridiagonal routines instead of a hand-written
Thomas sweep, so FEM results agree to rounding only.
"""

import numpy as np
from scipy.linalg import lapack


def _first_bad(rows, limit):
    with np.errstate(invalid="ignore"):
        bad = ~(np.abs(rows) <= limit)
    hits = np.flatnonzero(bad.any(axis=1))
    return int(hits[0]) if hits.size else -1


def fdm_advance(prev, curr, out, a, b, c, limit):
    steps = out.shape[0]
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps):
            row = out[k]
            row[0] = 0.0
            row[-1] = 0.0
            row[1:-1] = a * (curr[:-2] + curr[2:]) + b * curr[1:-1] + c * prev[1:-1]
            prev[:] = curr
            curr[:] = row
            if k % 256 == 255 or k == steps - 1:
                bad = _first_bad(out[k - (k % 256):k + 1], limit)
                if bad >= 0:
                    return bad + k - (k % 256)
    return -1


def factor_mass(m_sub, m_diag, m_sup):
    """LDL^T factorisation of the symmetric tridiagonal mass matrix."""
    d, e, info = lapack.dpttrf(np.asarray(m_diag, dtype=float),
                               np.asarray(m_sup, dtype=float)[:-1])
    if info != 0:
        raise ZeroDivisionError(f"mass matrix factorisation failed (info={info})")
    return d, e


def fem_advance(prev, curr, out, k_sub, k_diag, k_sup, factor, dt2, limit):
    d, e = factor
    steps = out.shape[0]
    kd = k_diag
    ku = k_sup[:-1]
    kl = k_sub[1:]
    r = np.empty_like(curr)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps):
            np.multiply(kd, curr, out=r)
            r[:-1] += ku * curr[1:]
            r[1:] += kl * curr[:-1]
            y, info = lapack.dpttrs(d, e, r)
            row = out[k]
            row[:] = 2.0 * curr - prev - dt2 * y
            row[0] = 0.0
            row[-1] = 0.0
            prev[:] = curr
            curr[:] = row
            if k % 256 == 255 or k == steps - 1:
                bad = _first_bad(out[k - (k % 256):k + 1], limit)
                if bad >= 0:
                    return bad + k - (k % 256)
    return -1
