"""The four disorder realizations: cosine fields, chains, and circuits."""

import numpy as np

from fockscope import (
    ModelSpec,
    build_hamiltonian,
    build_noninteracting,
    make_rng,
    realization_json,
    sample_fields,
    sample_floquet_circuit,
)

L = 10

print("=== on-site fields h_j = W cos(2 pi k j + phi_j) ===")
for kind in ("quasiperiodic", "random"):
    spec = ModelSpec(kind, L=L, W=2.0, seed=7)
    f = sample_fields(spec, make_rng(7))
    tag = "one global phase" if kind == "quasiperiodic" else "i.i.d. phases"
    print(f"{kind:15s} ({tag})")
    print(f"  phases: {np.array2string(f.phases[:5], precision=3)} ...")
    print(f"  fields: {np.array2string(f.fields[:5], precision=3)} ...")

print()
print("=== sparse chain Hamiltonians in the zero-magnetization sector ===")
spec = ModelSpec("quasiperiodic", L=L, W=2.0, seed=7)
H = build_hamiltonian(spec, sample_fields(spec, make_rng(7)))
print(f"interacting:    dim={H.dimension}, nnz={H.matrix.nnz}, "
      f"hermiticity defect={H.hermiticity_defect():.1e}")
spec_ni = ModelSpec("noninteracting-qp", L=L, W=2.0, seed=7)
H_ni = build_noninteracting(spec_ni, sample_fields(spec_ni, make_rng(7)))
print(f"hopping only:   dim={H_ni.dimension}, nnz={H_ni.matrix.nnz} "
      f"(range-1 hopping, no zz coupling)")

print()
print("=== one period of the random circuit ===")
spec = ModelSpec("floquet", L=6, W=3.0, seed=7)
circ = sample_floquet_circuit(spec, make_rng(7))
print(f"bond visiting order: {circ.bond_order}")
worst = max(
    float(np.max(np.abs(g @ g.conj().T - np.eye(4)))) for g in circ.bond_gates
)
print(f"worst bond-gate unitarity defect: {worst:.2e}")
print(f"site layer diagonal: {circ.diagonal_site_layer}")
print()
print("replayable realization record:")
print(realization_json(spec, circ)[:160], "...")
