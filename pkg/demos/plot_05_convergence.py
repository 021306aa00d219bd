"""
SNR against the number of patterns
==================================

Averaged over ten seeds, the region SNR of the fluctuation image rises about
10 dB per decade of frames, with the scattering channel trailing the direct
one by roughly a dB.
"""

import sys

from ghostcam import convergence_curve, mask_from_object
from ghostcam.scenarios import ScenarioConfig, build_scenario

grid = (500, 2000, 8000, 18000)
seeds = range(10 if "--full" in sys.argv else 4)
config = ScenarioConfig(scenario_id="scatter", channel={"gain_jitter": 0.2})
direct = build_scenario(config.replace(scenario_id="direct", channel={}))
scatter = build_scenario(config)
mask = mask_from_object(direct.object)

curves = {sc.scenario_id: convergence_curve(sc, grid, seeds, mask=mask, threads=4) for sc in (direct, scatter)}
print(f"{'frames':>7} " + " ".join(f"{name:>16}" for name in curves))
for j, n in enumerate(grid):
    cells = [f"{c.mean_db[j]:7.2f} +/- {c.std_db[j]:4.2f}" for c in curves.values()]
    print(f"{n:>7} " + " ".join(f"{cell:>16}" for cell in cells))
