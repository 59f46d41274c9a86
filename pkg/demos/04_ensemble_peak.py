"""Sweep disorder strength, average over realizations, find the peak.

A small version of the production pipeline: window-averaged spread as a
function of disorder strength for two sizes, with the peak location per
size.  Takes about a minute on one core.
"""

import numpy as np

from fockscope import RunConfig, TimeSpec, peak_location, run_ensemble

cfg = RunConfig(
    kind="quasiperiodic",
    L_list=(8, 10),
    W_grid=tuple(np.arange(2.0, 6.01, 0.5)),
    n_realizations=20,
    time_spec=TimeSpec(rule="heisenberg", pad=100.0, n_spectra=6,
                       log_points=8, window_points=20),
    master_seed=2024,
    evolver="dense",
)
print(f"running {len(cfg.L_list)} sizes x {len(cfg.W_grid)} disorder points "
      f"x {cfg.n_realizations} realizations ...")
res = run_ensemble(cfg)

for L in cfg.L_list:
    fit = res.heisenberg_fits[L]
    print(f"\nL={L}  (long-time window starts at the fitted spectral "
          f"cutoff; max fit residual {fit.max_rel_residual:.1%})")
    print(f"{'W':>6} {'window avg':>12} {'stderr':>8}")
    rows = sorted((wa.W, wa.value, wa.stderr)
                  for wa in res.window_averages if wa.L == L)
    for w, v, e in rows:
        print(f"{w:6.2f} {v:12.4f} {e:8.4f}")
    pk = peak_location(res.curve(L))
    tag = " (at grid edge)" if pk.boundary else ""
    print(f"peak near W* = {pk.w_star:.3f}{tag}")

print("\nwith increasing size the peak location drifts toward stronger "
      "disorder; push L and the realization count up to sharpen it")
