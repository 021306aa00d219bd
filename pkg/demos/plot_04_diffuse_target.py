"""
A grayscale reflective target around the corner
===============================================

A shaded aircraft silhouette reflects patterned light onto a wall lit by
strong ambient light. The correlation signal is faint, so the frame count
goes up to 50,000.
"""

from pathlib import Path

from ghostcam import acquire, fidelity, make_toy_target, save_object_image
from ghostcam.reconstruct import write_display_pgm
from ghostcam.scenarios import ScenarioConfig, build_scenario

from _show import ascii_image

out = Path("demo_output")
out.mkdir(exist_ok=True)

# the target travels as an ordinary 8-bit PGM
save_object_image(out / "toy_target.pgm", make_toy_target(64, 64))
config = ScenarioConfig(scenario_id="corner_diffuse", image=str(out / "toy_target.pgm"), glyph=None,
                        width=64, height=64)
sc = build_scenario(config)
print("object mode:", sc.object.mode.value, "| frames:", config.n_frames)
print("ground truth:")
print(ascii_image(sc.object.values, step=2))

acq = acquire(sc, config.n_frames, checkpoints=[5000])
for n, img in ((5000, acq.checkpoints[5000]), (config.n_frames, acq.image())):
    print(f"\nN = {n}: fidelity {fidelity(img.fluct, sc.object):.3f}")
    print(ascii_image(img.fluct, step=2))
write_display_pgm(out / "diffuse_fluct.pgm", acq.image().fluct)
