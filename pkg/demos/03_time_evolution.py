"""Quench a Néel state and watch the spread grow: two propagators, one answer."""

import tempfile

import numpy as np

from fockscope import (
    KrylovConfig,
    ModelSpec,
    build_hamiltonian,
    dense_evolve,
    displacement_of_state,
    krylov_evolve,
    load_checkpoint,
    make_rng,
    neel_state,
    sample_fields,
    save_checkpoint,
)

spec = ModelSpec("quasiperiodic", L=10, W=3.0, seed=5)
H = build_hamiltonian(spec, sample_fields(spec, make_rng(5)))
psi = neel_state(10)
t_grid = np.geomspace(0.1, 100.0, 12)

print("=== Lanczos propagation vs exact diagonalization ===")
states = krylov_evolve(H, psi, t_grid, KrylovConfig(tolerance=1e-10))
print(f"{'t':>8} {'delta_x2':>10} {'|norm-1|':>10} {'|kry-dense|':>12}")
for t, s in zip(t_grid, states):
    ref = dense_evolve(H, psi, float(t))
    diff = np.linalg.norm(s.amplitudes - ref.amplitudes)
    print(f"{t:8.2f} {displacement_of_state(s):10.4f} "
          f"{abs(s.norm() - 1):10.2e} {diff:12.2e}")

print()
print("=== checkpoint and resume ===")
with tempfile.NamedTemporaryFile(suffix=".npz") as fh:
    save_checkpoint(fh.name, states[-1], float(t_grid[-1]), {"W": 3.0})
    resumed, t0, manifest = load_checkpoint(fh.name)
    print(f"resumed at t={t0} with manifest {manifest}")
    more = krylov_evolve(H, resumed, [50.0])[0]  # continues to t = 150
    direct = krylov_evolve(H, psi, [150.0])[0]
    print(f"resumed-vs-direct at t=150: "
          f"{np.linalg.norm(more.amplitudes - direct.amplitudes):.2e}")
