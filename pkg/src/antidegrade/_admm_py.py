"""Pure-numpy ADMM iteration kernel (fallback for ``_admm_core``)."""

import numpy as np

KIND_PSD = 0
KIND_FREE = 1

_SQRT2 = np.sqrt(2.0)
_groups_cache = {}


def _groups(offsets, sizes, kinds):
    key = (offsets.tobytes(), sizes.tobytes(), kinds.tobytes())
    g = _groups_cache.get(key)
    if g is None:
        g = []
        psd = [(int(o), int(n)) for o, n, k in zip(offsets, sizes, kinds) if k == KIND_PSD]
        for n in sorted({n for _, n in psd}):
            offs = np.array([o for o, m in psd if m == n], dtype=np.int64)
            idx = offs[:, None] + np.arange(n * n)[None, :]
            iu = np.triu_indices(n, 1)
            g.append((n, idx, iu))
        if len(_groups_cache) > 256:
            _groups_cache.clear()
        _groups_cache[key] = g
    return g


def project_cone(w, offsets, sizes, kinds):
    """Project a stacked svec vector onto the product of PSD / free blocks, in place."""
    for n, idx, iu in _groups(offsets, sizes, kinds):
        v = w[idx]
        if n == 1:
            w[idx] = np.maximum(v, 0.0)
            continue
        k = len(iu[0])
        h = np.zeros((len(idx), n, n), dtype=complex)
        up = (v[:, n : n + k] + 1j * v[:, n + k :]) / _SQRT2
        h[:, iu[0], iu[1]] = up
        h[:, iu[1], iu[0]] = np.conj(up)
        di = np.arange(n)
        h[:, di, di] = v[:, :n]
        lam, vec = np.linalg.eigh(h)
        lam = np.maximum(lam, 0.0)
        p = np.einsum("bik,bk,bjk->bij", vec, lam, vec.conj())
        out = np.empty_like(v)
        out[:, :n] = np.real(p[:, di, di])
        pu = p[:, iu[0], iu[1]]
        out[:, n : n + k] = _SQRT2 * np.real(pu)
        out[:, n + k :] = _SQRT2 * np.imag(pu)
        w[idx] = out
    return w


def run_chunk(x, z, u, a, U, V, h, offsets, sizes, kinds, alpha, iters):
    """Run ``iters`` over-relaxed ADMM steps in place.

    Affine step ``x = a*v + U (V^T v) + h`` with ``v = z - u``; cone step
    ``z = Pi_K(alpha x + (1-alpha) z + u)``.  Returns ``(|x - z|_inf, |dz|_inf)``
    from the final iteration.
    """
    rp = rd = 0.0
    for _ in range(iters):
        v = z - u
        x[:] = U @ (V.T @ v) + h
        if a != 0.0:
            x += a * v
        xh = alpha * x + (1.0 - alpha) * z
        w = xh + u
        zold = z.copy()
        project_cone(w, offsets, sizes, kinds)
        z[:] = w
        u += xh - z
        rp = float(np.max(np.abs(x - z), initial=0.0))
        rd = float(np.max(np.abs(z - zold), initial=0.0))
    return rp, rd
