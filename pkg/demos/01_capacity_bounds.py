"""Closed-form capacity limits for load-balanced traffic.

Walks the two schedulers across path lengths and shows the headline
behavior: the fixed-priority (DM) limit always sits below the EDF limit,
and the two converge as paths get longer.
"""

from rtcap import AnalyticParams, DM, EDF, rtcc_balanced, balanced_vq_bound

# A mid-size deployment: 800 nodes, 250 kbit/s radios, contention
# neighborhoods of at most 12 nodes, worst-case priority inversion.
params = AnalyticParams(node_count=800, bandwidth=250_000.0,
                        neighborhood_bound=12, inversion_factor=2.0)

print("Load-balanced capacity limits (bits/s)")
print(f"{'hops':>5} {'DM':>14} {'EDF':>14} {'DM/EDF':>8} {'vq bound':>10}")
for hops in (1, 2, 3, 5, 8, 12, 18, 25, 35, 50):
    p = AnalyticParams(node_count=params.node_count, bandwidth=params.bandwidth,
                       neighborhood_bound=params.neighborhood_bound,
                       inversion_factor=params.inversion_factor,
                       path_length=hops)
    dm = rtcc_balanced(DM, p)
    edf = rtcc_balanced(EDF, p)
    print(f"{hops:>5} {dm.value:>14.1f} {edf.value:>14.1f} "
          f"{dm.value / edf.value:>8.4f} {balanced_vq_bound(hops):>10.6f}")

print()
print("The DM bound gives up the most at a single hop (ratio 0.586) and is")
print("within 2% of EDF by 25 hops: long paths amortize the per-hop")
print("pessimism of fixed-priority scheduling.")
