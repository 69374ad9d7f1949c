"""Image writers: binary PPM for frames, ascii PBM for masks, PNG for browsers."""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError


def _check_rgb(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise ParameterError(f"expected (h, w, 3) uint8 image, got {image.shape} {image.dtype}")
    return image


def write_ppm(path, image: np.ndarray) -> None:
    image = _check_rgb(image)
    h, w = image.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(image.tobytes())


def write_pbm(path, inside: np.ndarray) -> None:
    """Ascii PBM; mask cells are black (1) on white for quick inspection."""
    inside = np.asarray(inside, dtype=bool)
    if inside.ndim != 2:
        raise ParameterError("mask must be 2D")
    h, w = inside.shape
    rows = ["".join("1" if v else "0" for v in row) for row in inside]
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"P1\n{w} {h}\n")
        fh.write("\n".join(rows) + "\n")


def write_png(path, image: np.ndarray) -> None:
    from PIL import Image

    image = _check_rgb(image)
    Image.fromarray(image, mode="RGB").save(path, format="PNG")
