"""Compare sampled line-of-sight cell areas with the Gamma-fit area law."""

import argparse
import json

from blindspot.cli import cell_summary
from blindspot.simulator import sample_cell_areas


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--lambda0", type=float, default=0.03)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--threads", type=int, default=1)
    args = p.parse_args()

    sample = sample_cell_areas(args.lambda0, args.samples, args.seed, args.threads)
    print(json.dumps(cell_summary(sample, args.lambda0), indent=2))


if __name__ == "__main__":
    main()
