"""Independent high-precision evaluation of the bound formulas, written from the formula tree."""

from __future__ import annotations

import mpmath as mp

mp.mp.dps = 60


def bound_values(t, C, v0_h1, th0_h1, v0_h2, th0_h2, w0_l2, v0_l2, th0_l2, eps):
    t, C, eps = mp.mpf(t), mp.mpf(C), mp.mpf(eps)
    nv1, nt1 = mp.mpf(v0_h1) ** 2, mp.mpf(th0_h1) ** 2
    nv2, nt2 = mp.mpf(v0_h2) ** 2, mp.mpf(th0_h2) ** 2
    a = {}
    a[1] = (8 * t + 1) * (nv1 + nt1)
    a[2] = (t + 2) * mp.exp(C * (t + 2) * (a[1] ** 2 + a[1] + 1)) * (nv1**2 + nt1**2 + a[1])
    a[3] = C * mp.exp(C * t * a[2] ** 2) * (nv1 + t * a[1])
    a[4] = C * mp.exp(C * t * (1 + a[2] ** 2)) * (nt1 + (mp.sqrt(a[2]) + t * a[2] ** 2 + 1) * a[3])
    a[5] = C * mp.exp(C * (a[1] ** 2 + a[3] ** 2)) * (nv1 + a[1])
    a[6] = C * mp.exp(C * (a[1] ** 2 + a[3] ** 2)) * (nt1 + a[4] ** 2 + a[5] ** 2)
    a[7] = C * (t + 1) * mp.exp(C * a[5] ** 2) * (nv2 + a[6])
    a[8] = C * mp.exp(C * a[5] ** 2) * (nt2 + a[6] ** 2 + a[7] ** 2)
    data = mp.mpf(v0_l2) ** 2 + eps**2 * mp.mpf(w0_l2) ** 2 + t * mp.mpf(th0_l2) ** 2
    b1 = C * mp.exp(C * (t + a[5] ** 2 + a[6] ** 2)) * (a[5] + a[5] ** 2 + data**2)
    b2 = C * mp.exp(C * (t + a[8] ** 2 + (1 + eps**4) * a[7] ** 2)) * (a[7] + a[7] ** 2)
    return [a[i] for i in range(1, 9)] + [b1, b2]
