"""Linear algebra over GF(2) and GF(q) for boundary operators.

Dense GF(2) matrices are bit-packed row-major into uint64 words; elimination
XORs whole word slices. Large boundary matrices are never materialized:
their columns are streamed from the simplex enumerator into a
``ColumnReducer`` holding one Python-int bitset per pivot.
"""

from __future__ import annotations

from math import comb
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .model import ComplexSample
from .simplex import facet_rank_array

WORD = 64
_ONE = np.uint64(1)

# boundary matrices with more rows than this are rank-reduced by streaming
STREAM_ROW_THRESHOLD = 512

Field = Union[str, int]


def _nwords(cols: int) -> int:
    return (cols + WORD - 1) // WORD


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


def parse_field(field: Field) -> int:
    """Return the characteristic: 2 for "gf2", q for "gfp:q" or an int."""
    if isinstance(field, str):
        if field == "gf2":
            return 2
        if field.startswith("gfp:"):
            field = int(field[4:])
        else:
            raise ValueError(f"unknown field {field!r}")
    q = int(field)
    if not is_prime(q) or q >= 2**31:
        raise ValueError(f"modulus must be a prime below 2^31, got {q}")
    return q


class BitMatrix:
    """Dense GF(2) matrix, rows packed into ceil(cols/64) uint64 words."""

    __slots__ = ("rows", "cols", "words")

    def __init__(self, rows: int, cols: int, words: Optional[np.ndarray] = None):
        self.rows = rows
        self.cols = cols
        if words is None:
            words = np.zeros((rows, _nwords(cols)), dtype=np.uint64)
        if words.shape != (rows, _nwords(cols)):
            raise ValueError("payload shape does not match rows x words")
        self.words = words

    @classmethod
    def from_dense(cls, a) -> "BitMatrix":
        a = np.asarray(a, dtype=np.uint8) & 1
        rows, cols = a.shape
        m = cls(rows, cols)
        if cols:
            padded = np.zeros((rows, _nwords(cols) * WORD), dtype=np.uint8)
            padded[:, :cols] = a
            bits = padded.reshape(rows, -1, WORD).astype(np.uint64)
            shifts = np.arange(WORD, dtype=np.uint64)
            m.words = np.bitwise_or.reduce(bits << shifts, axis=2)
        return m

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[Iterable[int]]) -> "BitMatrix":
        m = cls(rows, len(columns))
        ii, jj = [], []
        for j, col in enumerate(columns):
            for i in col:
                ii.append(i)
                jj.append(j)
        if ii:
            jj = np.asarray(jj, dtype=np.uint64)
            np.bitwise_xor.at(m.words, (np.asarray(ii), (jj >> np.uint64(6)).astype(np.int64)),
                              _ONE << (jj & np.uint64(63)))
        return m

    def to_dense(self) -> np.ndarray:
        if self.cols == 0:
            return np.zeros((self.rows, 0), dtype=np.uint8)
        shifts = np.arange(WORD, dtype=np.uint64)
        bits = (self.words[:, :, None] >> shifts) & _ONE
        return bits.reshape(self.rows, -1)[:, : self.cols].astype(np.uint8)

    def get(self, i: int, j: int) -> int:
        w, b = divmod(j, WORD)
        return int((self.words[i, w] >> np.uint64(b)) & _ONE)

    def copy(self) -> "BitMatrix":
        return BitMatrix(self.rows, self.cols, self.words.copy())

    def pack_vector(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.uint8) & 1
        if x.shape != (self.cols,):
            raise ValueError(f"vector length {x.shape} != cols {self.cols}")
        return BitMatrix.from_dense(x[None, :]).words[0]

    def matvec(self, x) -> np.ndarray:
        """M x over GF(2) as a 0/1 vector of length rows."""
        xp = self.pack_vector(x)
        counts = np.bitwise_count(self.words & xp[None, :]).sum(axis=1)
        return (counts & 1).astype(np.uint8)

    def hstack_column(self, t) -> "BitMatrix":
        t = np.asarray(t, dtype=np.uint8) & 1
        if t.shape != (self.rows,):
            raise ValueError(f"target length {t.shape} != rows {self.rows}")
        dense = np.concatenate([self.to_dense(), t[:, None]], axis=1)
        return BitMatrix.from_dense(dense)

    @property
    def padding_clean(self) -> bool:
        extra = _nwords(self.cols) * WORD - self.cols
        if extra == 0 or self.rows == 0:
            return True
        mask = ~np.uint64(0) << np.uint64(WORD - extra)
        return not np.any(self.words[:, -1] & mask)

    def __repr__(self):
        return f"BitMatrix({self.rows}x{self.cols})"


class GFpMatrix:
    """Dense matrix over the prime field GF(q), entries in [0, q)."""

    __slots__ = ("rows", "cols", "q", "entries")

    def __init__(self, entries, q: int):
        q = parse_field(q)
        a = np.asarray(entries, dtype=np.int64)
        if a.ndim != 2:
            raise ValueError("entries must be two-dimensional")
        self.entries = a % q
        self.rows, self.cols = a.shape
        self.q = q

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64) % self.q
        acc = np.zeros(self.rows, dtype=np.int64)
        for j in np.flatnonzero(x):
            acc = (acc + self.entries[:, j] * x[j]) % self.q
        return acc

    def __repr__(self):
        return f"GFpMatrix({self.rows}x{self.cols}, q={self.q})"


Matrix = Union[BitMatrix, GFpMatrix]


def _eliminate_gf2(m: BitMatrix, full: bool):
    """Row reduction on a copy; returns (reduced words, pivot columns)."""
    W = m.words.copy()
    rows = m.rows
    r = 0
    pivots = []
    for j in range(m.cols):
        if r == rows:
            break
        w = j >> 6
        bit = _ONE << np.uint64(j & 63)
        below = np.flatnonzero(W[r:, w] & bit)
        if below.size == 0:
            continue
        p = r + int(below[0])
        if p != r:
            W[[r, p]] = W[[p, r]]
        if full:
            hits = np.flatnonzero(W[:, w] & bit)
            hits = hits[hits != r]
        else:
            hits = r + 1 + np.flatnonzero(W[r + 1:, w] & bit)
        if hits.size:
            W[hits, w:] ^= W[r, w:]
        pivots.append(j)
        r += 1
    return W, pivots


def _eliminate_gfp(m: GFpMatrix, full: bool):
    A = m.entries.copy()
    q = m.q
    r = 0
    pivots = []
    for j in range(m.cols):
        if r == m.rows:
            break
        nz = np.flatnonzero(A[r:, j])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            A[[r, p]] = A[[p, r]]
        A[r] = (A[r] * pow(int(A[r, j]), -1, q)) % q
        if full:
            hits = np.flatnonzero(A[:, j])
            hits = hits[hits != r]
        else:
            hits = r + 1 + np.flatnonzero(A[r + 1:, j])
        if hits.size:
            A[hits] = (A[hits] - A[hits, j : j + 1] * A[r]) % q
        pivots.append(j)
        r += 1
    return A, pivots


def rank(m: Matrix) -> int:
    """Rank over the matrix's field; the input is left untouched."""
    if isinstance(m, BitMatrix):
        return len(_eliminate_gf2(m, full=False)[1])
    return len(_eliminate_gfp(m, full=False)[1])


def kernel_basis(m: Matrix) -> list[np.ndarray]:
    """Basis of {x : M x = 0}; one vector per non-pivot column."""
    if isinstance(m, BitMatrix):
        W, pivots = _eliminate_gf2(m, full=True)
        R = BitMatrix(m.rows, m.cols, W).to_dense()[: len(pivots)]
        q = 2
    else:
        R, pivots = _eliminate_gfp(m, full=True)
        R = R[: len(pivots)]
        q = m.q
    pivot_set = set(pivots)
    basis = []
    for f in range(m.cols):
        if f in pivot_set:
            continue
        x = np.zeros(m.cols, dtype=np.int64)
        x[f] = 1
        for i, c in enumerate(pivots):
            x[c] = (-int(R[i, f])) % q
        basis.append(x.astype(np.uint8) if q == 2 else x)
    return basis


def in_column_span(m: Matrix, target) -> tuple[bool, Optional[np.ndarray]]:
    """Decide whether target = M x has a solution; return (decision, x)."""
    target = np.asarray(target, dtype=np.int64)
    if target.shape != (m.rows,):
        raise ValueError(f"target length {target.shape} != rows {m.rows}")
    if isinstance(m, BitMatrix):
        aug = m.hstack_column(target & 1)
        W, pivots = _eliminate_gf2(aug, full=True)
        R = BitMatrix(aug.rows, aug.cols, W).to_dense()
        q = 2
    else:
        aug = GFpMatrix(np.concatenate([m.entries, target[:, None]], axis=1), m.q)
        R, pivots = _eliminate_gfp(aug, full=True)
        q = m.q
    if pivots and pivots[-1] == m.cols:
        return False, None
    x = np.zeros(m.cols, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = int(R[i, m.cols]) % q
    return True, (x.astype(np.uint8) if q == 2 else x)


class ColumnReducer:
    """Incremental GF(2) column basis over Python-int bitsets.

    Each stored pivot column is keyed by its highest set bit, so reducing a
    new column only ever XORs columns with strictly lower leading rows.
    """

    __slots__ = ("pivots",)

    def __init__(self):
        self.pivots: dict[int, int] = {}

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, v: int) -> int:
        pivots = self.pivots
        while v:
            q = pivots.get(v.bit_length() - 1)
            if q is None:
                return v
            v ^= q
        return 0

    def add(self, v: int) -> bool:
        """Insert a column; True if it was independent of the basis."""
        v = self.reduce(v)
        if v:
            self.pivots[v.bit_length() - 1] = v
            return True
        return False

    def contains(self, v: int) -> bool:
        return self.reduce(v) == 0


def column_masks(n: int, k: int, ranks: np.ndarray) -> list[int]:
    """GF(2) columns of the k-boundary as bitsets over (k-1)-simplex ranks.

    For k = 0 this is the augmentation: every vertex maps to the single row 0.
    """
    ranks = np.asarray(ranks, dtype=np.int64)
    if k == 0:
        return [1] * len(ranks)
    faces = facet_rank_array(ranks, n, k).tolist()
    out = []
    for row in faces:
        v = 0
        for f in row:
            v |= 1 << f
        out.append(v)
    return out


def stream_rank_gf2(n: int, k: int, ranks: np.ndarray, max_rank: Optional[int] = None,
                    batch: int = 1 << 16) -> int:
    """GF(2) rank of the k-boundary restricted to the given k-simplices.

    Columns are generated in batches; stops early once max_rank is reached.
    """
    red = ColumnReducer()
    ranks = np.asarray(ranks, dtype=np.int64)
    for start in range(0, len(ranks), batch):
        for v in column_masks(n, k, ranks[start : start + batch]):
            red.add(v)
            if max_rank is not None and red.rank >= max_rank:
                return red.rank
    return red.rank


def boundary_matrix(sample: ComplexSample, k: int, field: Field = "gf2") -> Matrix:
    """Matrix of the k-boundary: rows are (k-1)-simplex ranks.

    For k = d the columns are the present d-simplices in rank order; for
    k < d every k-simplex is a column (full skeleton). k = 0 gives the
    1 x n augmentation row.
    """
    n, d = sample.params.n, sample.params.d
    if not 0 <= k <= d:
        raise ValueError(f"boundary degree {k} outside [0, {d}]")
    cols = sample.ranks if k == d else np.arange(comb(n, k + 1), dtype=np.int64)
    rows = 1 if k == 0 else comb(n, k)
    q = parse_field(field)
    if k == 0:
        facets = np.zeros((len(cols), 1), dtype=np.int64)
        signs = np.ones(1, dtype=np.int64)
    else:
        facets = facet_rank_array(cols, n, k)
        signs = np.array([(-1) ** i for i in range(k + 1)], dtype=np.int64)
    if q == 2:
        return BitMatrix.from_columns(rows, facets.tolist())
    a = np.zeros((rows, len(cols)), dtype=np.int64)
    jj = np.repeat(np.arange(len(cols)), facets.shape[1])
    a[facets.ravel(), jj] = np.tile(signs, len(cols))
    return GFpMatrix(a, q)
