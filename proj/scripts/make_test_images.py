"""Regenerates the 128x128 test targets in data/ from scikit-image's bundled samples."""
import pathlib

import numpy as np
from skimage import data, transform

OUT = pathlib.Path(__file__).resolve().parent.parent / "data"


def to_ppm(img: np.ndarray, path: pathlib.Path) -> None:
    h, w, _ = img.shape
    q = np.floor(np.clip(img, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)
    path.write_bytes(f"P6\n{w} {h}\n255\n".encode() + q.tobytes())


def square_crop(img: np.ndarray) -> np.ndarray:
    h, w = img.shape[:2]
    s = min(h, w)
    y0, x0 = (h - s) // 2, (w - s) // 2
    return img[y0:y0 + s, x0:x0 + s]


def main() -> None:
    OUT.mkdir(exist_ok=True)
    for name in ("astronaut", "coffee"):
        img = square_crop(getattr(data, name)()).astype(np.float64) / 255.0
        small = transform.resize(img, (128, 128), anti_aliasing=True)
        to_ppm(small, OUT / f"{name}_128.ppm")


if __name__ == "__main__":
    main()
