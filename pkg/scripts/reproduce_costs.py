"""Recompute the published memory-cost and render-time figures.

    python scripts/reproduce_costs.py [--bandwidth 53]
"""

import argparse

from attnswap.costs import BANDWIDTH_KBPS, PUBLISHED, CostParams, published_cost_report, render_time_s


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bandwidth", type=float, default=BANDWIDTH_KBPS["developing"])
    args = ap.parse_args()

    rep = published_cost_report(CostParams(bandwidth_kbps=args.bandwidth))
    rows = [
        ("screen text cost (kB)", rep.text_cost_kB, PUBLISHED["text_cost_kB"]),
        ("min saving (%)", rep.min_saving_pct, PUBLISHED["min_saving_pct"]),
        ("max saving (%)", rep.max_saving_pct, PUBLISHED["max_saving_pct"]),
        ("achieved saving (%)", rep.achieved_saving_pct, PUBLISHED["achieved_saving_pct"]),
        ("render before (s)", rep.render_time_before_s, PUBLISHED["render_time_before_s"]),
        ("render after (s)", rep.render_time_after_s, PUBLISHED["render_time_after_s"]),
    ]
    print(f"{'quantity':<24}{'computed':>12}{'published':>12}")
    for name, got, ref in rows:
        print(f"{name:<24}{got:>12.4f}{ref:>12.2f}")
    print()
    for label, kbps in BANDWIDTH_KBPS.items():
        print(f"{label:<12} {kbps:>6.0f} kbps: before {render_time_s(rep.page_image_cost_kB * rep.micro_f1, kbps):8.2f} s"
              f"  after {render_time_s(rep.text_cost_kB, kbps):6.2f} s")


if __name__ == "__main__":
    main()
