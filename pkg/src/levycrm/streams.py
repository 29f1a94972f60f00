"""Counter-based random streams with hierarchical splitting.

Every random quantity in this package is drawn from a :class:`RandomStream`,
which is an immutable (seed, path) pair.  The path is a tuple of nonnegative
integers; ``stream.child(k)`` appends ``k``.  Streams at distinct paths are
statistically independent, and the draws produced under a given (seed, path)
are a pure function of that pair, independent of call order, process layout,
or how many sibling streams exist.

The generator is Philox4x64-10, a counter-based block cipher.  A stream's
128-bit key is derived by absorbing the path elements one at a time into the
seed through a 64-bit finalizer; the absorb step is bijective in the path
element, so sibling streams always receive distinct keys.  Block ``j`` of the
stream is the Philox output for counter ``(j, 0, 0, 0)``, giving random access
to any position without sequential state.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF

# Weyl constants and round multipliers from the Philox4x64 reference.
_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_MASK32 = np.uint64(0xFFFFFFFF)
_SH32 = np.uint64(32)

_GOLDEN = 0x9E3779B97F4A7C15
_SALT = 0x3C6EF372FE94F82A

# Largest Poisson rate drawn in a single inversion pass; larger rates are
# split into equal chunks so the search loop stays short.
_POISSON_CHUNK = 16.0

# Integer gamma shapes up to this bound are drawn as sums of exponentials.
_GAMMA_INT_SHAPE_MAX = 16


def _mix64(z: int) -> int:
    """Finalizer of splitmix64, a bijection on 64-bit integers."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _absorb(k0: int, k1: int, e: int) -> tuple[int, int]:
    # Bijective in e for fixed (k0, k1), so siblings can never collide.
    k0 = _mix64(k0 ^ _mix64((e + _GOLDEN) & _MASK64))
    k1 = _mix64((k1 + _mix64(e ^ _SALT)) & _MASK64)
    return k0, k1


def _derive_key(seed: int, path: tuple[int, ...]) -> tuple[int, int]:
    k0 = _mix64(seed)
    k1 = _mix64((seed + _GOLDEN) & _MASK64)
    for e in path:
        k0, k1 = _absorb(k0, k1, e)
    return k0, k1


def _mix64_arr(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _absorb_arr(k0, k1, e: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    e = np.asarray(e, dtype=np.uint64)
    k0 = np.asarray(k0, dtype=np.uint64)
    k1 = np.asarray(k1, dtype=np.uint64)
    a = _mix64_arr(k0 ^ _mix64_arr(e + np.uint64(_GOLDEN)))
    b = _mix64_arr(k1 + _mix64_arr(e ^ np.uint64(_SALT)))
    return a, b


def _mulhilo(a, b):
    """Full 64x64 -> 128 bit product as (hi, lo) uint64 arrays."""
    lo = a * b
    ah = a >> _SH32
    al = a & _MASK32
    bh = b >> _SH32
    bl = b & _MASK32
    albl = al * bl
    albh = al * bh
    ahbl = ah * bl
    carry = ((albl >> _SH32) + (albh & _MASK32) + (ahbl & _MASK32)) >> _SH32
    hi = ah * bh + (albh >> _SH32) + (ahbl >> _SH32) + carry
    return hi, lo


def _philox4x64(key0, key1, c0, c1, c2, c3):
    """Philox4x64-10 block function, vectorized over counters.

    All inputs are uint64 arrays (or scalars) broadcast to a common shape;
    returns the four output words.
    """
    k0 = np.asarray(key0, dtype=np.uint64).copy()
    k1 = np.asarray(key1, dtype=np.uint64).copy()
    x0 = np.asarray(c0, dtype=np.uint64).copy()
    x1 = np.asarray(c1, dtype=np.uint64).copy()
    x2 = np.asarray(c2, dtype=np.uint64).copy()
    x3 = np.asarray(c3, dtype=np.uint64).copy()
    k0, k1, x0, x1, x2, x3 = np.broadcast_arrays(k0, k1, x0, x1, x2, x3)
    k0 = k0.copy()
    k1 = k1.copy()
    for r in range(10):
        if r > 0:
            k0 = k0 + _W0
            k1 = k1 + _W1
        hi0, lo0 = _mulhilo(_M0, x0)
        hi1, lo1 = _mulhilo(_M1, x2)
        x0 = hi1 ^ x1 ^ k0
        x1 = lo1
        x2 = hi0 ^ x3 ^ k1
        x3 = lo0
    return x0, x1, x2, x3


def _words_to_uniform(w: np.ndarray) -> np.ndarray:
    # 53-bit mantissa, shifted to the open interval (0, 1).
    return ((w >> np.uint64(11)).astype(np.float64) + 0.5) * (2.0 ** -53)


def _stream_words(k0: int, k1: int, start: int, n: int) -> np.ndarray:
    """Words ``start .. start+n-1`` of the stream keyed by (k0, k1).

    Word ``i`` is word ``i % 4`` of the Philox block with counter ``i // 4``.
    """
    if n <= 0:
        return np.empty(0, dtype=np.uint64)
    b0 = start >> 2
    b1 = (start + n - 1) >> 2
    blocks = np.arange(b0, b1 + 1, dtype=np.uint64)
    z = np.uint64(0)
    x0, x1, x2, x3 = _philox4x64(np.uint64(k0), np.uint64(k1), blocks, z, z, z)
    words = np.stack([x0, x1, x2, x3], axis=1).reshape(-1)
    off = start - 4 * b0
    return words[off:off + n]


class RandomStream:
    """Immutable handle for the random stream at (seed, path)."""

    __slots__ = ("seed", "path", "_k0", "_k1")

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        if not isinstance(seed, int) or not (0 <= seed <= _MASK64):
            raise ValueError("seed must be an integer in [0, 2**64)")
        path = tuple(path)
        for e in path:
            if not isinstance(e, int) or e < 0 or e > _MASK64:
                raise ValueError("path elements must be integers in [0, 2**64)")
        object.__setattr__(self, "seed", seed)
        object.__setattr__(self, "path", path)
        k0, k1 = _derive_key(seed, path)
        object.__setattr__(self, "_k0", k0)
        object.__setattr__(self, "_k1", k1)

    def __setattr__(self, name, value):
        raise AttributeError("RandomStream is immutable")

    def child(self, *indices: int) -> "RandomStream":
        """Stream at this path extended by ``indices``.

        ``s.child(a, b)`` equals ``s.child(a).child(b)``.
        """
        return RandomStream(self.seed, self.path + tuple(indices))

    @property
    def key(self) -> tuple[int, int]:
        return self._k0, self._k1

    def cursor(self, start: int = 0) -> "StreamCursor":
        return StreamCursor(self._k0, self._k1, start)

    def child_keys(self, indices) -> tuple[np.ndarray, np.ndarray]:
        """Keys of ``self.child(i)`` for an array of indices, vectorized."""
        return _absorb_arr(np.uint64(self._k0), np.uint64(self._k1), indices)

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, path={self.path})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, RandomStream):
            return NotImplemented
        return self.seed == other.seed and self.path == other.path

    def __hash__(self) -> int:
        return hash((self.seed, self.path))


_CURSOR_BUFFER = 128


class StreamCursor:
    """Sequential reader over one stream's word sequence.

    The cursor tracks how many 64-bit words have been consumed; every draw
    advances it by a count that depends only on the requested quantities and
    the values drawn, so a fixed request sequence always reads fixed stream
    positions.

    Word values depend only on (key, position), so small reads are served
    from a prefetched block; the values are identical to unbuffered reads.
    """

    __slots__ = ("_k0", "_k1", "pos", "_buf", "_buf_start")

    def __init__(self, k0: int, k1: int, pos: int = 0):
        self._k0 = int(k0)
        self._k1 = int(k1)
        self.pos = pos
        self._buf = None
        self._buf_start = 0

    def words(self, n: int) -> np.ndarray:
        if n <= 0:
            return np.empty(0, dtype=np.uint64)
        start = self.pos
        self.pos += n
        if n >= _CURSOR_BUFFER:
            return _stream_words(self._k0, self._k1, start, n)
        buf = self._buf
        if (
            buf is None
            or start < self._buf_start
            or start + n > self._buf_start + buf.size
        ):
            buf = _stream_words(self._k0, self._k1, start, _CURSOR_BUFFER)
            self._buf = buf
            self._buf_start = start
        off = start - self._buf_start
        return buf[off:off + n]

    def uniforms(self, n: int) -> np.ndarray:
        """n independent uniforms on the open interval (0, 1)."""
        return _words_to_uniform(self.words(n))

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def poisson(self, rate: float) -> int:
        """Poisson count by CDF inversion.

        Rates above a fixed chunk size are split into ``m`` equal pieces and
        the chunk counts summed, which keeps the inversion loop short; the
        number of uniforms consumed is exactly ``m``.
        """
        if rate < 0 or not math.isfinite(rate):
            raise ValueError(f"Poisson rate must be finite and >= 0, got {rate}")
        if rate == 0.0:
            return 0
        m = max(1, math.ceil(rate / _POISSON_CHUNK))
        u = self.uniforms(m)
        return int(_poisson_invert(np.full(m, rate / m), u).sum())

    def exponential(self) -> float:
        return -math.log(self.uniform())

    def beta_one(self, b: float) -> float:
        """Draw from Beta(1, b) by inverting the CDF 1 - (1-x)^b.

        Uses numpy's log1p/expm1 (they differ from libm by an ulp on
        some inputs) so scalar draws match vectorized ones exactly.
        """
        return float(-np.expm1(np.log1p(-self.uniform()) / b))

    def normal(self) -> float:
        u = self.uniforms(2)
        return math.sqrt(-2.0 * math.log(u[0])) * math.cos(2.0 * math.pi * u[1])

    def sign(self) -> float:
        return 1.0 if self.uniform() < 0.5 else -1.0

    def gamma(self, shape: float, scale: float = 1.0) -> float:
        """Draw from Gamma(shape, scale).

        Integer shapes up to 16 are sums of exponentials; other shapes use
        the Marsaglia-Tsang squeeze, with the boost ``G(a) = G(a+1) U^{1/a}``
        for shape below one.
        """
        if shape <= 0 or scale <= 0:
            raise ValueError("gamma shape and scale must be positive")
        if shape == int(shape) and shape <= _GAMMA_INT_SHAPE_MAX:
            u = self.uniforms(int(shape))
            return -float(np.log(u).sum()) * scale
        if shape < 1.0:
            g = self._gamma_mt(shape + 1.0)
            return g * self.uniform() ** (1.0 / shape) * scale
        return self._gamma_mt(shape) * scale

    def _gamma_mt(self, a: float) -> float:
        d = a - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        while True:
            x = self.normal()
            v = (1.0 + c * x) ** 3
            if v <= 0.0:
                continue
            u = self.uniform()
            if math.log(u) < 0.5 * x * x + d - d * v + d * math.log(v):
                return d * v


def _poisson_invert(rates: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Vectorized Poisson CDF inversion; one uniform per entry.

    Counts satisfy ``P(N <= n) >= u`` minimally.  The loop runs to the
    largest count drawn, so callers keep rates small (see _POISSON_CHUNK).
    """
    lam = np.asarray(rates, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    p = np.exp(-lam)
    cdf = p.copy()
    n = np.zeros(lam.shape, dtype=np.int64)
    k = 0
    while True:
        active = u > cdf
        # Once the term underflows the CDF can no longer grow; stop rather
        # than loop forever on a pathological uniform.
        active &= p > 0.0
        if not active.any():
            break
        n[active] += 1
        k += 1
        p = p * (lam / k)
        cdf = cdf + np.where(active, p, 0.0)
    return n


def batch_uniforms(k0s: np.ndarray, k1s: np.ndarray, word: int = 0) -> np.ndarray:
    """One uniform from each of many streams: word ``word`` of block 0."""
    j = np.uint64(word >> 2)
    x = _philox4x64(k0s, k1s, j, np.uint64(0), np.uint64(0), np.uint64(0))
    return _words_to_uniform(x[word & 3])


def batch_words(k0s: np.ndarray, k1s: np.ndarray, n_words: int) -> np.ndarray:
    """Words ``0 .. n_words-1`` of every keyed stream, shape (keys, n_words).

    Row ``i`` equals what a cursor on key ``i`` would read from position 0,
    so bulk samplers built on this match their one-stream-at-a-time twins
    word for word.
    """
    if n_words <= 0:
        return np.empty((np.size(k0s), 0), dtype=np.uint64)
    n_blocks = (n_words + 3) // 4
    blocks = np.arange(n_blocks, dtype=np.uint64)
    z = np.uint64(0)
    k0s = np.asarray(k0s, dtype=np.uint64)
    k1s = np.asarray(k1s, dtype=np.uint64)
    x0, x1, x2, x3 = _philox4x64(
        k0s[:, None], k1s[:, None], blocks[None, :], z, z, z
    )
    words = np.stack([x0, x1, x2, x3], axis=2).reshape(k0s.size, 4 * n_blocks)
    return words[:, :n_words]


def batch_poisson(rates: np.ndarray, k0s: np.ndarray, k1s: np.ndarray) -> np.ndarray:
    """Poisson counts for many streams at once, one per stream.

    Each count reads the same stream prefix that ``cursor.poisson`` would
    read for the same rate, so scalar and batched paths agree draw for draw.
    Rates must not exceed the single-chunk bound.
    """
    rates = np.asarray(rates, dtype=np.float64)
    if rates.size and rates.max() > _POISSON_CHUNK:
        raise ValueError("batch_poisson requires rates within one chunk")
    u = batch_uniforms(k0s, k1s, 0)
    return _poisson_invert(rates, u)
