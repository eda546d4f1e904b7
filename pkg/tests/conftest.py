import numpy as np

from sbgp import Image


def random_image(seed: int, h: int = 48, w: int = 48, lo: float = 0.0, hi: float = 255.0) -> Image:
    rng = np.random.default_rng(seed)
    return Image(rng.uniform(lo, hi, (h, w)))


def random_pixels(seed: int, h: int = 48, w: int = 48) -> np.ndarray:
    return np.random.default_rng(seed).uniform(0.0, 255.0, (h, w))
