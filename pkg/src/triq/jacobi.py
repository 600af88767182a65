"""Cyclic Jacobi eigenvalues for real symmetric 3x3 matrices."""

from __future__ import annotations

import math

_PAIRS = ((0, 1), (0, 2), (1, 2))


def eigvalsh3(m, max_sweeps: int = 50) -> tuple[float, float, float]:
    """Eigenvalues of a symmetric 3x3 matrix, sorted descending.

    Only the upper triangle is read. Sweeps stop once every off-diagonal
    entry is negligible against the adjacent diagonal entries, which gives
    eigenvalues with backward error at the level of machine epsilon.
    """
    a = [[float(x) for x in row] for row in (m.tolist() if hasattr(m, "tolist") else m)]
    for i in range(3):
        for j in range(i):
            a[i][j] = a[j][i]
    for _ in range(max_sweeps):
        off = abs(a[0][1]) + abs(a[0][2]) + abs(a[1][2])
        if off == 0.0:
            break
        for p, q in _PAIRS:
            apq = a[p][q]
            if apq == 0.0:
                continue
            app, aqq = a[p][p], a[q][q]
            if abs(apq) * 1e18 < min(abs(app), abs(aqq)):
                a[p][q] = a[q][p] = 0.0
                continue
            # Rutishauser's stable rotation: t = tan of the rotation angle
            theta = (aqq - app) / (2.0 * apq)
            t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            tau = s / (1.0 + c)
            a[p][p] = app - t * apq
            a[q][q] = aqq + t * apq
            a[p][q] = a[q][p] = 0.0
            r = 3 - p - q
            arp, arq = a[r][p], a[r][q]
            a[r][p] = a[p][r] = arp - s * (arq + tau * arp)
            a[r][q] = a[q][r] = arq + s * (arp - tau * arq)
    d = sorted((a[0][0], a[1][1], a[2][2]), reverse=True)
    return d[0], d[1], d[2]
