"""Inclusion geometry: axis-aligned rectangle unions (2D letters) and spheres (3D).

Letters are unions of pairwise-disjoint axis-aligned rectangles, so every
interface normal is exact and interface points can be constructed on the
boundary instead of projected onto it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class GeometryError(ValueError):
    """Raised for overlapping or out-of-bounds inclusion geometry."""


@dataclass(frozen=True)
class Rect:
    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise GeometryError(f"degenerate rectangle {self}")

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Closed-rectangle membership for an (n, 2) array."""
        x, y = pts[:, 0], pts[:, 1]
        return (x >= self.x0) & (x <= self.x1) & (y >= self.y0) & (y <= self.y1)

    def overlaps(self, other: "Rect") -> bool:
        return not (
            self.x1 <= other.x0
            or other.x1 <= self.x0
            or self.y1 <= other.y0
            or other.y1 <= self.y0
        )

    def edges(self) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """(start, end, outward normal) per edge, normals pointing out of the rectangle."""
        return [
            (np.array([self.x0, self.y0]), np.array([self.x1, self.y0]), np.array([0.0, -1.0])),
            (np.array([self.x1, self.y0]), np.array([self.x1, self.y1]), np.array([1.0, 0.0])),
            (np.array([self.x0, self.y1]), np.array([self.x1, self.y1]), np.array([0.0, 1.0])),
            (np.array([self.x0, self.y0]), np.array([self.x0, self.y1]), np.array([-1.0, 0.0])),
        ]


@dataclass(frozen=True)
class Letter:
    name: str
    rects: tuple[Rect, ...]

    @property
    def area(self) -> float:
        return sum(r.area for r in self.rects)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        inside = np.zeros(pts.shape[0], dtype=bool)
        for r in self.rects:
            inside |= r.contains(pts)
        return inside


@dataclass(frozen=True)
class LetterLayout:
    """Versioned letter geometry for the 2D benchmark, JSON round-trippable."""

    version: str
    domain: tuple[float, float]  # (width, height); domain is [0, w] x [0, h]
    letters: tuple[Letter, ...]

    def validate(self) -> None:
        w, h = self.domain
        rects = [(l.name, r) for l in self.letters for r in l.rects]
        for name, r in rects:
            if not (0.0 < r.x0 and r.x1 < w and 0.0 < r.y0 and r.y1 < h):
                raise GeometryError(f"rectangle {r} of letter {name!r} is not strictly inside the domain")
        for i in range(len(rects)):
            for j in range(i + 1, len(rects)):
                if rects[i][1].overlaps(rects[j][1]):
                    raise GeometryError(
                        f"rectangles of letters {rects[i][0]!r} and {rects[j][0]!r} overlap: "
                        f"{rects[i][1]} vs {rects[j][1]}"
                    )

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "domain": list(self.domain),
            "letters": [
                {"name": l.name, "rects": [[r.x0, r.y0, r.x1, r.y1] for r in l.rects]}
                for l in self.letters
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @staticmethod
    def from_dict(d: dict) -> "LetterLayout":
        layout = LetterLayout(
            version=str(d["version"]),
            domain=(float(d["domain"][0]), float(d["domain"][1])),
            letters=tuple(
                Letter(name=e["name"], rects=tuple(Rect(*map(float, r)) for r in e["rects"]))
                for e in d["letters"]
            ),
        )
        layout.validate()
        return layout

    @staticmethod
    def from_json(text: str) -> "LetterLayout":
        return LetterLayout.from_dict(json.loads(text))


def default_letter_layout() -> LetterLayout:
    """Built-in letter geometry: I, I, T, M left to right.

    The M's diagonal strokes are approximated by two thin vertical bars; all
    strokes are pairwise disjoint so each letter's interface is a union of
    rectangle boundaries with exact axis-aligned normals.
    """
    layout = LetterLayout(
        version="1",
        domain=(1.7, 1.0),
        letters=(
            Letter("I", (Rect(0.22, 0.25, 0.34, 0.75),)),
            Letter("I", (Rect(0.52, 0.25, 0.64, 0.75),)),
            Letter(
                "T",
                (
                    Rect(0.80, 0.63, 1.10, 0.75),  # top bar
                    Rect(0.89, 0.25, 1.01, 0.60),  # stem
                ),
            ),
            Letter(
                "M",
                (
                    Rect(1.20, 0.25, 1.30, 0.75),  # left bar
                    Rect(1.32, 0.45, 1.36, 0.68),  # left stroke
                    Rect(1.39, 0.45, 1.43, 0.68),  # right stroke
                    Rect(1.45, 0.25, 1.55, 0.75),  # right bar
                ),
            ),
        ),
    )
    layout.validate()
    return layout


@dataclass(frozen=True)
class Sphere:
    center: tuple[float, float, float]
    radius: float

    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * np.pi * self.radius**3

    def contains(self, pts: np.ndarray) -> np.ndarray:
        d = pts - np.asarray(self.center)
        return np.einsum("ij,ij->i", d, d) <= self.radius**2

    def signed_distance(self, pts: np.ndarray) -> np.ndarray:
        d = pts - np.asarray(self.center)
        return np.sqrt(np.einsum("ij,ij->i", d, d)) - self.radius

    def surface_points(self, count: int, seed: int) -> np.ndarray:
        """Fibonacci lattice on the sphere, rotated by a seed-derived offset."""
        i = np.arange(count)
        golden = np.pi * (3.0 - np.sqrt(5.0))
        offset = 2.0 * np.pi * ((seed * 0.6180339887498949) % 1.0)
        z = 1.0 - 2.0 * (i + 0.5) / count
        r_xy = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        phi = golden * i + offset
        unit = np.stack([r_xy * np.cos(phi), r_xy * np.sin(phi), z], axis=1)
        return np.asarray(self.center) + self.radius * unit

    def normals(self, pts: np.ndarray) -> np.ndarray:
        """Unit normals pointing away from the sphere (radially outward)."""
        d = pts - np.asarray(self.center)
        norm = np.linalg.norm(d, axis=1, keepdims=True)
        return d / norm
