"""Basins of the critical five-cycles, rendered in double precision with numpy.

Points are kept as coordinate pairs scaled so the larger has modulus 1, and
each step evaluates both components in whichever affine chart is bounded.
"""

from __future__ import annotations

import colorsys
from dataclasses import dataclass

import numpy as np

DEFAULT_VIEWPORT = (-1.5, -1.5, 1.5, 1.5)
DEFAULT_RES = (512, 512)


@dataclass
class BasinImage:
    rgb: np.ndarray          # (H, W, 3) uint8
    labels: np.ndarray       # attractor index per pixel, -1 when not captured
    iterations: np.ndarray

    @property
    def captured_fraction(self):
        return float((self.labels >= 0).mean())


def _as_arrays(m):
    c1 = np.array([complex(c) for c in m.first.coeffs])
    c2 = np.array([complex(c) for c in m.second.coeffs])
    return c1, c2


def _normalize(a, b):
    s = np.maximum(np.abs(a), np.abs(b))
    s[s == 0] = 1.0
    return a / s, b / s


def _step(c1, c2, a, b):
    inner = np.abs(a) < np.abs(b)           # chart b = 1, t = a / b
    u = np.empty_like(a)
    v = np.empty_like(a)
    if inner.any():
        t = a[inner] / b[inner]
        u[inner] = np.polyval(c1, t)
        v[inner] = np.polyval(c2, t)
    outer = ~inner
    if outer.any():
        t = b[outer] / a[outer]
        u[outer] = np.polyval(c1[::-1], t)
        v[outer] = np.polyval(c2[::-1], t)
    return _normalize(u, v)


def _orbit_labels(c1, c2, a, b, q, owner, max_iter, capture):
    labels = np.full(a.shape, -1, dtype=np.int16)
    iters = np.zeros(a.shape, dtype=np.int32)
    active = np.arange(a.size)
    a, b = a.copy(), b.copy()
    for n in range(max_iter + 1):
        pa, pb = a[active], b[active]
        nrm = np.sqrt(np.abs(pa) ** 2 + np.abs(pb) ** 2)
        dist = np.abs(pa[:, None] * q[None, :, 1] - pb[:, None] * q[None, :, 0]) / nrm[:, None]
        best = dist.argmin(axis=1)
        hit = dist[np.arange(len(active)), best] < capture
        labels[active[hit]] = owner[best[hit]]
        iters[active[hit]] = n
        active = active[~hit]
        if not active.size or n == max_iter:
            break
        a[active], b[active] = _step(c1, c2, a[active], b[active])
    return labels, iters


def palette(n=12):
    return [colorsys.hsv_to_rgb(i / n, 0.75, 1.0) for i in range(n)]


def render_basins(m, cycles, viewport=DEFAULT_VIEWPORT, resolution=DEFAULT_RES,
                  max_iter=200, capture=1e-3):
    """Colour each pixel of the affine viewport by the cycle its orbit reaches.

    ``cycles`` is a list of point lists (one per attractor); ``viewport`` is
    (x0, y0, x1, y1) in the affine coordinate w1 / w2.
    """
    x0, y0, x1, y1 = viewport
    W, H = resolution
    xs = x0 + (np.arange(W) + 0.5) * (x1 - x0) / W
    ys = y1 - (np.arange(H) + 0.5) * (y1 - y0) / H
    grid = (xs[None, :] + 1j * ys[:, None]).ravel()
    a, b = _normalize(grid.astype(complex), np.ones_like(grid, dtype=complex))

    pts, owner = [], []
    for idx, cyc in enumerate(cycles):
        for p in cyc:
            pts.append((complex(p.w1), complex(p.w2)))
            owner.append(idx)
    q = np.array(pts)
    q /= np.linalg.norm(q, axis=1)[:, None]
    owner = np.array(owner)

    c1, c2 = _as_arrays(m)
    labels = np.full(grid.shape, -1, dtype=np.int16)
    iters = np.zeros(grid.shape, dtype=np.int32)
    chunk = 64 * W
    for start in range(0, grid.size, chunk):
        sl = slice(start, min(start + chunk, grid.size))
        lab, its = _orbit_labels(c1, c2, a[sl], b[sl], q, owner, max_iter, capture)
        labels[sl], iters[sl] = lab, its

    cols = np.array(palette(max(len(cycles), 1)))
    shade = 1.0 - 0.75 * np.sqrt(np.minimum(iters, max_iter) / max_iter)
    rgb = np.zeros(grid.shape + (3,))
    got = labels >= 0
    rgb[got] = cols[labels[got]] * shade[got, None]
    rgb = np.round(rgb * 255).astype(np.uint8).reshape(H, W, 3)
    return BasinImage(rgb, labels.reshape(H, W), iters.reshape(H, W))


def write_ppm(path, rgb):
    h, w, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(np.ascontiguousarray(rgb, dtype=np.uint8).tobytes())
    return path


def write_png(path, rgb):
    try:
        from PIL import Image
    except ImportError as exc:
        raise RuntimeError("PNG output needs Pillow; write a .ppm instead") from exc
    Image.fromarray(rgb).save(path)
    return path


def save_image(path, rgb):
    """PPM always; PNG when the path asks for it (and Pillow is present)."""
    if str(path).lower().endswith(".png"):
        return write_png(path, rgb)
    return write_ppm(path, rgb)
