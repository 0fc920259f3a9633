"""Wall-clock time of the two diffusion pipelines across graph sizes."""

from neurohotnet import SimConfig, run_study2

cfg = SimConfig(density=0.3, min_component=8, subjects=60, frames=284,
                noise_sd=120.0, seed=2, gamma=30.0, delta=1.8e-3, nu=1.5e-4)
sizes = [60, 120, 180, 240]
res = run_study2(sizes, 3, cfg)
for m, t in res.timings.items():
    row = "  ".join(f"{s}: {x:.3f}s" for s, x in zip(sizes, t["mean"]))
    print(f"{m:<16} {row}   slope {res.slopes[m]:.2f}")
# delta is fixed, so influence values fall below it as R grows and few
# candidates remain to test; that is why the detector gets faster with size.
for tr in res.trials:
    print(f"R = {tr['R']}: {len(tr['neurohotnet'])} component(s) selected")
