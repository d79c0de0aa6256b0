"""Numpy implementations of the hot kernels (fallback when the extension is absent)."""
import numpy as np

_CHUNK = 1 << 22


def clog_table(n):
    """c * log2(c) for c = 0..n, with 0 log 0 = 0."""
    c = np.arange(n + 1, dtype=float)
    out = np.zeros(n + 1)
    out[1:] = c[1:] * np.log2(c[1:])
    return out


def _one_hot(seqs, k):
    return (seqs[..., None] == np.arange(k)).astype(np.float64)


def mi_matrix(xs, ys, kx, ky):
    """Empirical mutual information (bits) between every row of ``xs`` and every row of ``ys``."""
    xs = np.ascontiguousarray(xs, dtype=np.int64)
    ys = np.ascontiguousarray(ys, dtype=np.int64)
    a, n = xs.shape
    b = ys.shape[0]
    if ys.shape[1] != n:
        raise ValueError("sequence lengths differ")
    table = clog_table(n)
    ox, oy = _one_hot(xs, kx), _one_hot(ys, ky)
    cx = ox.sum(axis=1).astype(np.int64)
    cy = oy.sum(axis=1).astype(np.int64)
    hx = table[cx].sum(axis=1)
    hy = table[cy].sum(axis=1)
    out = np.empty((a, b))
    step = max(1, _CHUNK // max(1, b * kx * ky))
    for lo in range(0, a, step):
        hi = min(a, lo + step)
        joint = np.einsum("ati,btj->abij", ox[lo:hi], oy, optimize=True)
        hxy = table[np.rint(joint).astype(np.int64)].sum(axis=(2, 3))
        out[lo:hi] = hxy - hx[lo:hi, None] - hy[None, :] + table[n]
    out /= n
    np.maximum(out, 0.0, out=out)
    return out


def mi_rows(x, ys, kx, ky):
    return mi_matrix(np.asarray(x, dtype=np.int64)[None, :], ys, kx, ky)[0]


def row_matches(y, entries):
    """1 where a row of ``entries`` equals ``y``, else 0."""
    entries = np.asarray(entries, dtype=np.int64)
    return np.all(entries == np.asarray(y, dtype=np.int64)[None, :], axis=1).astype(np.int64)
