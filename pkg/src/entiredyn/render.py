"""Pixel classification, singular-orbit overlays and PPM output."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as kr
from .errors import Indeterminate
from .logdyn import geometry
from .maps import EntireMap, singular_values
from .orbits import ESCAPE_DOUBLINGS, BigPoint, classify_batch, step


@dataclass(frozen=True)
class Viewport:
    center: complex
    width: float
    pixels_x: int
    pixels_y: int | None = None

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("width must be positive")
        if self.pixels_x < 1:
            raise ValueError("pixels_x must be >= 1")
        object.__setattr__(self, "center", complex(self.center))
        if self.pixels_y is None:
            object.__setattr__(self, "pixels_y", self.pixels_x)
        if self.pixels_y < 1:
            raise ValueError("pixels_y must be >= 1")

    @property
    def dx(self) -> float:
        return self.width / self.pixels_x

    @property
    def height(self) -> float:
        # square pixels
        return self.dx * self.pixels_y

    @property
    def left(self) -> float:
        return self.center.real - self.width / 2.0

    @property
    def top(self) -> float:
        return self.center.imag + self.height / 2.0

    def pixel_centers(self) -> np.ndarray:
        """Complex grid of shape (pixels_y, pixels_x); row 0 is the top row."""
        xs = self.left + (np.arange(self.pixels_x) + 0.5) * self.dx
        ys = self.top - (np.arange(self.pixels_y) + 0.5) * self.dx
        return xs[None, :] + 1j * ys[:, None]

    def pixel_of(self, z: complex):
        """(row, col) of the nearest pixel centre, ties to the lower index;
        None outside the viewport."""
        u = (z.real - self.left) / self.dx
        v = (self.top - z.imag) / self.dx
        if not (0.0 <= u <= self.pixels_x and 0.0 <= v <= self.pixels_y):
            return None
        col = min(max(math.ceil(u - 1.0), 0), self.pixels_x - 1)
        row = min(max(math.ceil(v - 1.0), 0), self.pixels_y - 1)
        return row, col


@dataclass
class ClassifiedImage:
    viewport: Viewport
    n_max: int
    escape_n: np.ndarray  # step count for escaping pixels, -1 otherwise
    fiat: np.ndarray
    overlay: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.overlay is None:
            self.overlay = np.zeros(self.escape_n.shape, np.bool_)

    @property
    def shape(self) -> tuple:
        return self.escape_n.shape

    def escaping(self) -> np.ndarray:
        return self.escape_n >= 0

    def verdict_at(self, z: complex):
        """``("escaping", n)``, ``("non_escaping", None)`` or None off-image."""
        pix = self.viewport.pixel_of(complex(z))
        if pix is None:
            return None
        n = int(self.escape_n[pix])
        return ("escaping", n) if n >= 0 else ("non_escaping", None)


def render(m: EntireMap, vp: Viewport, n_max: int, R: float | None = None,
           doublings: int = ESCAPE_DOUBLINGS, block: int = 64) -> ClassifiedImage:
    """Escape classification of every pixel centre; undecided pixels count as
    non-escaping."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    grid = vp.pixel_centers()
    verdict, n_event, fiat = classify_batch(m, grid.ravel(), R, n_max,
                                            doublings=doublings, block=block)
    esc = verdict == kr.ESCAPING
    escape_n = np.where(esc, n_event, -1).reshape(grid.shape)
    return ClassifiedImage(vp, int(n_max), escape_n.astype(np.int64),
                           (fiat & esc).reshape(grid.shape))


def singular_orbit(m: EntireMap, s: complex, n_orbit: int) -> list:
    """The first ``n_orbit`` points ``s, f(s), ...`` that are directly
    representable; stops early once the orbit leaves double range."""
    pts = []
    p = BigPoint.from_complex(s)
    for k in range(n_orbit):
        if p.is_log:
            break
        pts.append(p.value)
        if k + 1 == n_orbit:
            break
        try:
            p = step(m, p)
        except Indeterminate:
            break
    return pts


def overlay_singular_orbit(m: EntireMap, img: ClassifiedImage,
                           n_orbit: int) -> ClassifiedImage:
    if n_orbit < 1:
        raise ValueError("n_orbit must be >= 1")
    mask = img.overlay.copy()
    for s in singular_values(m):
        for z in singular_orbit(m, s.point, n_orbit):
            pix = img.viewport.pixel_of(z)
            if pix is not None:
                mask[pix] = True
    return replace(img, overlay=mask)


def ppm_bytes(img: ClassifiedImage) -> bytes:
    h, w = img.shape
    g = np.where(img.escape_n >= 0,
                 (255.0 * np.minimum(1.0, img.escape_n / img.n_max)).astype(np.int64),
                 255)
    g = np.where(img.overlay, 0, g).astype(np.uint8)
    rgb = np.repeat(g[:, :, None], 3, axis=2)
    return f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.tobytes()


def write_ppm(img: ClassifiedImage, path) -> None:
    with open(path, "wb") as fh:
        fh.write(ppm_bytes(img))


@dataclass
class RotationEstimate:
    theta: float
    max_modulus: float
    steps: int


def rotation_estimate(m: EntireMap, z0: complex = 0.01, steps: int = 100_000,
                      center: complex = 0j) -> RotationEstimate:
    """Mean argument increment about ``center`` along the orbit of ``z0``,
    in turns (mod 1)."""
    orb = kr.orbit_direct(m.code, m.p, complex(z0), int(steps))
    rel = orb - center
    inc = np.angle(rel[1:] / rel[:-1])
    theta = (inc.mean() / (2.0 * math.pi)) % 1.0
    return RotationEstimate(float(theta), float(np.abs(orb).max()), int(steps))
