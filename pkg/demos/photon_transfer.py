"""Move a shared photon onto memory qubits through ancilla interference.

Each site mixes its mode with a local ancilla on a balanced splitter and
counts both ports. A plus-state ancilla teleports the vacuum/photon qubit
exactly half the time; coherent ancillas trade a deterministic write
against phase errors, with a heralded subset that is exact. Networks of
sites compose from the per-site acceptance probability.
"""

import numpy as np

from qtelarray.transfer import (
    deterministic_fidelity_closed,
    find_heralded_optimum,
    heralded_rate_closed,
    lossy_transfer,
    network_failure_probability,
    network_fidelity,
    network_pair_distribution,
    plus_ancilla_transfer,
)

out = plus_ancilla_transfer(theta=np.pi / 4)
print("plus-ancilla teleport of (|0> + e^{i pi/4} |1>)/sqrt2:")
for b in sorted(out.branches, key=lambda b: b.record):
    tag = "accept" if b.accepted else "reject"
    print(f"  counts {b.record}: p = {b.probability:.4f}  "
          f"f = {b.fidelity:.4f}  [{tag}]")
print(f"  accepted probability {out.probability:.4f}, "
      f"fidelity {out.fidelity:.12f}")

print("\ncoherent ancillas, two sites sharing one photon:")
print("  alpha   f_deterministic   p_heralded")
for alpha in (0.0, 0.5, 0.88, 1.5, 2.0, 3.0, 4.0):
    f = deterministic_fidelity_closed(alpha)
    p = heralded_rate_closed(alpha)
    print(f"  {alpha:5.2f}   {f:15.6f}   {p:10.6f}")
alpha_star, p_star = find_heralded_optimum()
print(f"  heralded acceptance peaks at alpha = {alpha_star:.3f} "
      f"with p = {p_star:.6f} (accepted branches are exact)")
print("  deterministic fidelity tends to 1/2 + 1/pi = "
      f"{0.5 + 1 / np.pi:.6f} for large alpha")

print("\ndetector loss (amplitude transmission eta):")
print("  eta    f_accepted   p_accept")
for eta in (0.25, 0.5, 0.75, 1.0):
    res = lossy_transfer(eta)
    print(f"  {eta:4.2f}   {res.fidelity:10.6f}   {res.probability:.6f}")

N, p1 = 8, float(np.sqrt(0.22))
print(f"\nnetwork of {N} sites, per-site acceptance p1 = {p1:.4f}:")
print(f"  attempt failure probability: "
      f"{network_failure_probability(N, p1):.6f}")
dist = network_pair_distribution(N, p1)
for k, pk in dist.items():
    print(f"  {k} surviving sites: p = {pk:.6f}")
print(f"  fidelity scaling from pairwise f2 = 0.95: "
      f"{network_fidelity(N, 0.95):.6f}")
