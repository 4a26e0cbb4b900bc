"""Vector helpers, octant classification and octant-face projection.

Octants are addressed by an integer in 1..8 with a binary sign encoding::

    index = 1 + 4*[x < 0] + 2*[y < 0] + 1*[z < 0]

so octant 1 is (+,+,+) and octant 8 is (-,-,-). A component equal to zero
counts as positive. Every frame that an octant refers to is world aligned and
centred on a joint, so only directions matter here.
"""

from __future__ import annotations

import math
from typing import Iterable, Iterator, Sequence, Tuple

import numpy as np

__all__ = [
    "DegenerateDirection",
    "GEOM_TOL",
    "OCTANTS",
    "OctantSet",
    "as_vec3",
    "normalize",
    "angle_between",
    "octant_index",
    "octant_signs",
    "octant_from_signs",
    "octant_contains",
    "in_octant_closure",
    "octant_diagonal",
    "project_into_octant",
]

GEOM_TOL = 1e-9
OCTANTS = tuple(range(1, 9))

# Stand-in for a clamped component on a negative axis. It keeps the result on
# the face (to ~1e-300) while the zero-is-positive rule still classifies it
# inside the target octant.
_NEG_FACE = -1e-300

Signs = Tuple[int, int, int]


class DegenerateDirection(ValueError):
    """Raised when a direction is requested from a zero-length vector."""

    def __init__(self, message: str = "degenerate direction"):
        super().__init__(message)


def as_vec3(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must have 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite components: {arr.tolist()}")
    return arr


def _nonzero(v) -> np.ndarray:
    arr = as_vec3(v)
    if not (arr[0] or arr[1] or arr[2]):
        raise DegenerateDirection()
    return arr


def normalize(v) -> np.ndarray:
    arr = _nonzero(v)
    return arr / math.sqrt(arr[0] * arr[0] + arr[1] * arr[1] + arr[2] * arr[2])


def angle_between(u, v) -> float:
    """Angle in radians, in [0, pi], between two non-zero vectors."""
    a = normalize(u)
    b = normalize(v)
    # atan2 keeps precision near 0 and pi where acos does not
    c = float(a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
    cx = a[1] * b[2] - a[2] * b[1]
    cy = a[2] * b[0] - a[0] * b[2]
    cz = a[0] * b[1] - a[1] * b[0]
    return math.atan2(math.sqrt(cx * cx + cy * cy + cz * cz), c)


def octant_signs(octant: int) -> Signs:
    """Sign triple of an octant, each entry +1 or -1."""
    if octant not in OCTANTS:
        raise ValueError(f"octant index must be in 1..8, got {octant!r}")
    k = octant - 1
    return (-1 if k & 4 else 1, -1 if k & 2 else 1, -1 if k & 1 else 1)


def octant_from_signs(signs: Sequence[int]) -> int:
    sx, sy, sz = signs
    return 1 + 4 * (sx < 0) + 2 * (sy < 0) + (sz < 0)


def _index_unchecked(x: float, y: float, z: float) -> int:
    return 1 + 4 * (x < 0) + 2 * (y < 0) + (z < 0)


def octant_index(v) -> int:
    x, y, z = _nonzero(v)
    return _index_unchecked(float(x), float(y), float(z))


def octant_contains(octant: int, v) -> bool:
    octant_signs(octant)
    return octant_index(v) == octant


def in_octant_closure(octant: int, v, tol: float = GEOM_TOL) -> bool:
    """True when the unit direction of ``v`` lies in the closed octant.

    Components on the wrong side are tolerated up to ``tol`` after
    normalisation, which absorbs the rounding left by rebuilding a link
    direction from joint positions.
    """
    d = normalize(v)
    s = octant_signs(octant)
    return all(si * di >= -tol for si, di in zip(s, d))


def octant_diagonal(octant: int) -> np.ndarray:
    return np.asarray(octant_signs(octant), dtype=float) / math.sqrt(3.0)


def _project_xyz(x: float, y: float, z: float, octant: int) -> Tuple[float, float, float]:
    # (x, y, z) must already be unit length.
    if _index_unchecked(x, y, z) == octant:
        return x, y, z
    k = octant - 1
    neg = (k & 4, k & 2, k & 1)
    comps = [x, y, z]
    violated = []
    on_face = []  # exact zeros on a negative axis already sit on that face
    for i in range(3):
        c = comps[i]
        if neg[i] and c == 0.0:
            on_face.append(i)
        elif (c > 0) if neg[i] else (c < 0):
            comps[i] = 0.0
            violated.append(i)
    if len(violated) == 3:
        r = 1.0 / math.sqrt(3.0)
        return (-r if neg[0] else r, -r if neg[1] else r, -r if neg[2] else r)
    n = math.sqrt(comps[0] * comps[0] + comps[1] * comps[1] + comps[2] * comps[2])
    if n == 0.0:
        # Only zero components survive: every direction orthogonal to v on the
        # remaining face is equally near, so take that face's diagonal.
        comps = [0.0 if i in violated else (-1.0 if neg[i] else 1.0) for i in range(3)]
        n = math.sqrt(3 - len(violated))
    comps = [c / n for c in comps]
    for i in violated + on_face:
        if neg[i] and comps[i] == 0.0:
            comps[i] = _NEG_FACE
    return comps[0], comps[1], comps[2]


def project_into_octant(v, octant: int) -> np.ndarray:
    """Nearest unit direction to ``v`` inside ``octant``.

    Sign-violating components are clamped onto the octant's faces and the
    result renormalised, which is the Euclidean projection onto the closed
    cone. When every component violates, the octant diagonal is returned.
    """
    octant_signs(octant)
    d = normalize(v)
    return np.array(_project_xyz(d[0], d[1], d[2], octant))


class OctantSet:
    """Immutable set of octant indices stored as an 8-bit mask."""

    __slots__ = ("_mask",)

    def __init__(self, members: Iterable[int] = ()):
        mask = 0
        for o in members:
            octant_signs(o)
            mask |= 1 << (o - 1)
        self._mask = mask

    @classmethod
    def from_mask(cls, mask: int) -> "OctantSet":
        if not 0 <= mask <= 0xFF:
            raise ValueError(f"octant mask out of range: {mask}")
        out = cls.__new__(cls)
        out._mask = mask
        return out

    @classmethod
    def full(cls) -> "OctantSet":
        return cls.from_mask(0xFF)

    @property
    def mask(self) -> int:
        return self._mask

    @property
    def is_full(self) -> bool:
        return self._mask == 0xFF

    def __contains__(self, octant) -> bool:
        return isinstance(octant, (int, np.integer)) and 1 <= octant <= 8 and bool(
            self._mask >> (int(octant) - 1) & 1
        )

    def __iter__(self) -> Iterator[int]:
        return (o for o in OCTANTS if self._mask >> (o - 1) & 1)

    def __len__(self) -> int:
        return bin(self._mask).count("1")

    def __bool__(self) -> bool:
        return self._mask != 0

    def __or__(self, other: "OctantSet") -> "OctantSet":
        return OctantSet.from_mask(self._mask | other._mask)

    def __and__(self, other: "OctantSet") -> "OctantSet":
        return OctantSet.from_mask(self._mask & other._mask)

    def __le__(self, other: "OctantSet") -> bool:
        return self._mask & ~other._mask == 0

    def __lt__(self, other: "OctantSet") -> bool:
        return self <= other and self._mask != other._mask

    def __eq__(self, other) -> bool:
        return isinstance(other, OctantSet) and self._mask == other._mask

    def __hash__(self) -> int:
        return hash(self._mask)

    def __repr__(self) -> str:
        return f"OctantSet({list(self)})"

    def contains_direction(self, v) -> bool:
        """Membership of a non-zero direction under the zero-is-positive rule."""
        return octant_index(v) in self
