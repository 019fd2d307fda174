"""Critical capacity vs number of sinks, analysis against simulation.

Rebuilds the sink-count experiment on a 400-node grid: for each sink count
the network is probed above its analytic bound, replications record the
capacity consumption at the first deadline miss, and the minimum across
replications is the critical capacity. Writes the CSV artifact next to this
script.
"""

import os

from rtcap import (
    AnalyticParams,
    SimConfig,
    SweepSpec,
    csv_filename,
    emit_csv,
    run_sweep,
)

spec = SweepSpec(
    kind="sink_sweep",
    values=(1, 2, 4, 8, 16),
    analytic=AnalyticParams(node_count=400, bandwidth=250_000.0),
    sim=SimConfig(packet_size=4_000.0, duration=30.0),
    rows=20, cols=20, spacing=10.0, jitter=0.25, radio_range=20.5,
    load_factor=2.5, replication_count=5, base_seed=0)

rows = run_sweep(spec)

print("sinks  analytic_DM  analytic_EDF  simulated_critical  sim/DM  (u, m, K_d)")
for r in rows:
    ratio = r.simulated_critical / r.analytic_dm
    print(f"{int(r.swept_value):>5}  {r.analytic_dm:>11.0f}  "
          f"{r.analytic_edf:>12.0f}  {r.simulated_critical:>18.0f}  "
          f"{ratio:>6.2f}  ({r.neighborhood_bound}, {r.nodes_per_disk}, "
          f"{r.max_hops})")

dest = os.path.join(os.path.dirname(__file__) or ".", csv_filename(spec))
emit_csv(rows, dest, spec)
print(f"\nwrote {dest}")
print("More sinks shorten routes and relieve the aggregation bottleneck, so")
print("capacity grows with the sink count; the analytic bound (worst-case")
print("inversion factor 2) tracks the simulated critical capacity from below.")
