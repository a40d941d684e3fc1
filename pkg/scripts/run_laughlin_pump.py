"""Flux-pump spectral flow of a Chern insulator with a central defect.

Writes the flow trace (t, eigenvalue, branch) for spaghetti plots and prints
the defect-localized flow against the pair index of the same sample.
"""

from topoinv import (
    FluxPath,
    build_hamiltonian,
    diagonalize,
    dirac_phase,
    fermi_projection,
    make_named_model,
    pair_index,
    spectral_flow,
)
from topoinv.flow import flow_trace

N = 16
MASS = 1.0

model = make_named_model("qwz", sizes=N, boundary="open", mass=MASS)
sample = build_hamiltonian(model)
path = FluxPath(base=sample, plaquette=(N // 2, N // 2))
flow = spectral_flow(path, 0.0)
pi = pair_index(fermi_projection(diagonalize(sample), 0.0), dirac_phase(sample))
print(f"spectral flow {flow.net} (raw {flow.raw_net}), pair index {pi.rounded} ({pi.value:+.5f})")

with open("flow.csv", "w") as fh:
    fh.write("t,eigenvalue,branch\n")
    for t, e, b in flow_trace(path, 0.0):
        fh.write(f"{t!r},{e!r},{b}\n")
print("wrote flow.csv")
