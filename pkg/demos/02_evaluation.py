"""
Class-level versus risk-level evaluation
========================================

Corrupt a ground-truth scene the way a segmentation network might, then
score it twice: over the 24 classes and over the 6 risk levels.
"""
import numpy as np

import landrisk as lr
from _scene import make_scene

table = lr.default_class_table()
rng = np.random.default_rng(3)

gt = make_scene(table)
pred = gt.copy()

# confusions inside a risk group cost nothing at the risk level
ids = {e.label: e.id for e in table.entries}
swap = (gt == ids["grass"]) & (rng.random(gt.shape) < 0.3)
pred[swap] = ids["dirt"]
# random errors across groups do
noise = rng.random(gt.shape) < 0.05
pred[noise] = rng.integers(0, 24, noise.sum())

cm = lr.confusion(pred, gt, len(table))
risk_cm = lr.coarsen(cm, table.grouping(), n_groups=6)

for name, m in [("classes", cm), ("risk levels", risk_cm)]:
    r = lr.MetricsReport.from_confusion(m)
    print(f"{name:12s} acc {r.pixel_accuracy:.4f}  mIoU {r.mean_iou:.4f}  "
          f"F1 {r.mean_f1:.4f}  bal acc {r.balanced_accuracy:.4f}")

# same matrix, computed directly from the mapped maps
direct = lr.confusion(lr.map_class_to_risk(pred, table), lr.map_class_to_risk(gt, table), 6)
assert direct == risk_cm

np.set_printoptions(precision=2, suppress=True)
print("row-normalized risk confusion:")
print(lr.row_normalize(risk_cm))
