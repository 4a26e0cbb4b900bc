"""Independent reference implementations used by the tests.

None of these call into the package's own geometry helpers.
"""

import itertools
import math

import numpy as np

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

# octants listed in index order 1..8: x sign varies slowest, + before -
SIGN_TABLE = list(itertools.product((1, -1), repeat=3))


def octant_of(v):
    signs = tuple(1 if c >= 0 else -1 for c in v)
    return SIGN_TABLE.index(signs) + 1


def hamming_neighbours(octant, eta):
    a = SIGN_TABLE[octant - 1]
    return {i + 1 for i, b in enumerate(SIGN_TABLE) if sum(x != y for x, y in zip(a, b)) <= eta}


def best_cos_in_octant(v, octant):
    """Largest cosine between unit ``v`` and any unit vector of the closed octant.

    Inside the octant it is 1. Outside, the optimum lies on one of the three
    boundary quarter circles; on the arc spanned by axes a, b the cosine is
    p cos t + q sin t for t in [0, pi/2], maximised analytically.
    """
    s = SIGN_TABLE[octant - 1]
    if all(si * vi >= 0 for si, vi in zip(s, v)):
        return 1.0
    best = -2.0
    for a, b in ((0, 1), (0, 2), (1, 2)):
        p, q = s[a] * v[a], s[b] * v[b]
        cands = [p, q]  # endpoints t = 0 and t = pi/2
        if p > 0 and q > 0:
            cands.append(math.hypot(p, q))
        best = max(best, *cands)
    return best


def sphere_octant_samples(octant, n=200):
    """Dense grid over the closed spherical triangle of ``octant``."""
    s = np.array(SIGN_TABLE[octant - 1], dtype=float)
    th = np.linspace(0.0, np.pi / 2, n)
    ph = np.linspace(0.0, np.pi / 2, n)
    T, P = np.meshgrid(th, ph)
    pts = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1).reshape(-1, 3)
    return pts * s


def trapezoid_clamped_area(seg, width, height, n=1 << 15):
    """Numeric integral of the clamped projected line over its clipped x range."""
    (x1, y1), (x2, y2) = seg
    if x1 == x2:
        return 0.0
    if x1 > x2:
        x1, y1, x2, y2 = x2, y2, x1, y1
    lo, hi = max(x1, 0.0), min(x2, width)
    if lo >= hi:
        return 0.0
    x = np.linspace(lo, hi, n)
    y = y1 + (y2 - y1) * (x - x1) / (x2 - x1)
    return float(_trapezoid(np.clip(y, 0.0, height), x))


def fabrik_reference(joints, lengths, target, iterations):
    """Textbook FABRIK on plain numpy arrays, for cross-checking passes."""
    j = np.array(joints, dtype=float)
    base = j[0].copy()
    for _ in range(iterations):
        j[-1] = target
        for i in range(len(j) - 2, -1, -1):
            d = j[i] - j[i + 1]
            j[i] = j[i + 1] + lengths[i] * d / np.linalg.norm(d)
        j[0] = base
        for i in range(len(j) - 1):
            d = j[i + 1] - j[i]
            j[i + 1] = j[i] + lengths[i] * d / np.linalg.norm(d)
    return j


def random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )
