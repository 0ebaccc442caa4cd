"""
Ranking safe landing zones
==========================

Treat levels 0-1 as landable, measure how far each pixel is from anything
riskier (or from the frame edge), and propose the best spot in each safe
region.
"""
from pathlib import Path

import landrisk as lr
from landrisk.pipeline import RunConfig, annotate_slz, slz_report
from _scene import fake_photo, make_scene

out = Path("demo_output")
out.mkdir(exist_ok=True)

table = lr.default_class_table()
cmap = lr.default_colormap()
labels = make_scene(table)
risk = lr.dilate_risk(lr.map_class_to_risk(labels, table), lr.DilationPolicy())

clearance = lr.distance_to_risk(risk, threshold=1)
print(f"largest clearance: {clearance.max():.2f} px")

regions = lr.connected_regions(risk, threshold=1)
print(f"{len(regions)} safe regions, largest {max(r.area for r in regions)} px")

cfg = RunConfig(table=table, colormap=cmap, slz_threshold=1, slz_k=3)
doc, candidates = slz_report(risk, cfg, dilated=True)
for rank, c in enumerate(candidates, 1):
    print(f"#{rank} center={c.center} clearance={c.clearance_radius:.2f}px "
          f"mean risk={c.mean_risk_in_zone:.3f} area={c.area}px")

img = annotate_slz(risk, candidates, cmap, base=fake_photo(labels, table), alpha=0.5)
lr.codecs.write_rgb_png(out / "slz.png", img)
