"""Synthetic aerial label scene shared by the demos."""
import numpy as np

import landrisk as lr


def make_scene(table, height=240, width=320, seed=0):
    """A grass field with a paved road, a roof, trees, a car and a few people."""
    rng = np.random.default_rng(seed)
    ids = {e.label: e.id for e in table.entries}
    labels = np.full((height, width), ids["grass"], np.uint8)
    labels[:, 140:175] = ids["paved-area"]
    labels[20:90, 200:300] = ids["roof"]
    labels[150:230, 20:110] = ids["dirt"]
    for cy, cx in [(40, 40), (60, 95), (200, 250), (120, 300)]:
        yy, xx = np.ogrid[:height, :width]
        labels[(yy - cy) ** 2 + (xx - cx) ** 2 < 18 ** 2] = ids["tree"]
    labels[110:130, 145:170] = ids["car"]
    for _ in range(6):
        y, x = rng.integers(5, height - 5), rng.integers(5, width - 5)
        labels[y - 2 : y + 3, x - 1 : x + 2] = ids["person"]
    return labels


def fake_photo(labels, table, seed=0):
    """Class colors darkened plus noise, standing in for the camera frame."""
    rng = np.random.default_rng(seed)
    rgb = table.palette[labels].astype(np.int16) // 2 + 40
    rgb += rng.integers(-20, 21, rgb.shape).astype(np.int16)
    return np.clip(rgb, 0, 255).astype(np.uint8)
