"""Pure-Python (numpy) cyclic Jacobi kernel; fallback for the Cython core.

The compiled module `opineq._jacobi_cy` implements the identical sweep
loop; this version vectorizes the two-sided rotation over matrix columns
so it stays usable (if much slower) when the extension is not built.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"


def jacobi_sweeps(a: np.ndarray, v: np.ndarray, off_tol: float, max_sweeps: int) -> int:
    """Run cyclic Jacobi sweeps in place until off(a) <= off_tol.

    `a` is reduced toward diagonal form, `v` accumulates the rotations
    (a_in == v @ a_out @ v.T). Returns the number of sweeps used, or -1
    if the sweep cap was hit first.
    """
    n = a.shape[0]
    if n < 2:
        return 0
    for sweep in range(1, max_sweeps + 1):
        off2 = float(np.sum(np.triu(a, 1) ** 2))
        if math.sqrt(2.0 * off2) <= off_tol:
            return sweep - 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                app = a[p, p]
                aqq = a[q, q]
                colp = c * a[:, p] - s * a[:, q]
                colq = s * a[:, p] + c * a[:, q]
                a[:, p] = colp
                a[p, :] = colp
                a[:, q] = colq
                a[q, :] = colq
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = c * v[:, p] - s * v[:, q]
                vq = s * v[:, p] + c * v[:, q]
                v[:, p] = vp
                v[:, q] = vq
    off2 = float(np.sum(np.triu(a, 1) ** 2))
    if math.sqrt(2.0 * off2) <= off_tol:
        return max_sweeps
    return -1
