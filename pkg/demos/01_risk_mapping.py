"""
From semantic labels to a risk map
==================================

Map each segmentation class to one of six risk levels, grow the dangerous
levels with a safety margin, and render the result over the input frame.
"""
from pathlib import Path

import numpy as np

import landrisk as lr
from _scene import fake_photo, make_scene

out = Path("demo_output")
out.mkdir(exist_ok=True)

table = lr.default_class_table()
cmap = lr.default_colormap()

# 24 classes, 6 levels: 0 is ideal landing ground, 5 means people
for level in range(6):
    members = [e.label for e in table.entries if e.risk == level]
    print(level, ", ".join(members))

labels = make_scene(table)
photo = fake_photo(labels, table)
(out / "scene_labels.png").write_bytes(lr.encode_label_image(labels, table))

risk = lr.map_class_to_risk(labels, table)
print("pixels per level:", np.bincount(risk.ravel(), minlength=6))

# default margins: 5 px around levels 3-4, 15 px around people
policy = lr.DilationPolicy()
safer = lr.dilate_risk(risk, policy)
print("after dilation:  ", np.bincount(safer.ravel(), minlength=6))

(out / "risk.png").write_bytes(lr.encode_risk_image(risk, cmap))
(out / "risk_dilated.png").write_bytes(lr.encode_risk_image(safer, cmap))
lr.codecs.write_rgb_png(out / "risk_overlay.png", lr.overlay(photo, safer, cmap, alpha=0.5))
print("wrote", sorted(p.name for p in out.iterdir()))
