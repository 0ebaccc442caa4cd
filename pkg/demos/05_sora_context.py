"""
Regulatory context
==================

Intrinsic ground risk classes for a 1 m UAV, next to the six risk levels
used in the maps. The two scales are reported side by side; no formula links
them.
"""
import landrisk as lr
from landrisk.sora import scenarios

for s in scenarios():
    print(f"GRC {lr.grc_lookup(s)}  {s.description}")

print()
for level in range(6):
    print(level, lr.risk_level_description(level))
