"""
Real-time budget check
======================

Feed 1280x720 raw label frames through decode, risk mapping, dilation and
encode, and compare the slowest frame against a 14 FPS budget. Only the
post-inference work is timed.
"""
import json

import numpy as np

import landrisk as lr
from landrisk.pipeline import run_stream

table = lr.default_class_table()
rng = np.random.default_rng(0)

frames = []
for _ in range(50):
    coarse = rng.integers(0, 24, (45, 80)).astype(np.uint8)
    frames.append(lr.encode_labels_raw(np.kron(coarse, np.ones((16, 16), np.uint8)), table))

outputs = []
stats = run_stream(frames, table, lr.DilationPolicy.uniform(5), budget_fps=14.0,
                   sink=lambda i, data: outputs.append(data))
print(json.dumps(stats.to_dict(), indent=2))
print("first output frame:", outputs[0][:4], len(outputs[0]), "bytes")
