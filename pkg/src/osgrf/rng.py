"""Counter-based randomness keyed by lattice coordinates.

Every random quantity in a simulated field is a pure function of
(seed, tag, lattice point).  Two simulations with the same seed agree on
every site they both touch, regardless of traversal order, window shape,
or worker count.  The mixer is the splitmix64 finalizer applied to a
running state absorbing one 64-bit word per coordinate.
"""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D49BDB133111EB)

# stream tags; distinct tags give independent streams for the same point
TAG_STEP = 0x10
TAG_SIGN = 0x20
TAG_GAUSS = 0x30


def _mix(x):
    """splitmix64 finalizer, vectorized over uint64 arrays."""
    x = x.astype(np.uint64, copy=True) if isinstance(x, np.ndarray) else np.uint64(x)
    with np.errstate(over="ignore"):
        x = x ^ (x >> np.uint64(30))
        x = x * _MIX1
        x = x ^ (x >> np.uint64(27))
        x = x * _MIX2
        x = x ^ (x >> np.uint64(31))
    return x


def hash_point(seed, tag, *coords):
    """Return uint64 hash words for lattice points.

    coords are integer arrays (broadcastable against each other), one per
    axis.  Negative coordinates are fine; they are reinterpreted as uint64.
    """
    with np.errstate(over="ignore"):
        h = _mix(np.uint64(seed) + _GOLDEN * np.uint64(tag & 0xFFFFFFFFFFFFFFFF))
        for c in coords:
            w = np.asarray(c).astype(np.int64).view(np.uint64) \
                if isinstance(c, np.ndarray) else np.int64(c).view(np.uint64)
            h = _mix((h + _GOLDEN) ^ (w * _MIX1))
        return h


def uniform_from_hash(h):
    """Map uint64 hash words to uniforms on the half-open interval (0, 1].

    The closed right end matters: these uniforms feed U**(-1/alpha), which
    must never divide by zero and attains value 1 with probability 2^-53.
    """
    return (np.right_shift(h, np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def point_uniforms(seed, tag, *coords):
    """Uniforms on (0,1] keyed to lattice points: shorthand composition."""
    return uniform_from_hash(hash_point(seed, tag, *coords))


def derive_seed(seed, index):
    """A child seed for replica / worker streams; pure function of inputs."""
    with np.errstate(over="ignore"):
        return int(_mix(np.uint64(seed) ^ (_GOLDEN * np.uint64(np.int64(index).view(np.uint64)))))
