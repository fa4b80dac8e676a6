"""Numerically probe whether a half-sample shift maximizes cross-correlation tail energy.

For each basis the tail energies of band-limited shifted cross-correlations are
summed over waveform pairs for shifts 0.1..0.4 and compared with shift 0.5.
"""

import argparse
import logging

from ibilab.basis import Domain, build_basis
from ibilab.ibi import half_shift_conjecture


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--length", type=int, default=32)
    ap.add_argument("--eta", type=float, default=0.9)
    ap.add_argument("--inner", type=int, default=None, help="inner half-width (default: length)")
    ap.add_argument("--max-pairs", type=int, default=200)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    for domain in Domain:
        basis = build_basis(domain, args.length, args.eta)
        res = half_shift_conjecture(basis, args.inner or args.length, max_pairs=args.max_pairs)
        tails = "  ".join(f"{t}:{e:.3e}" for t, e in res["tail_energy"].items())
        print(f"{domain.value}: {tails}  violations {len(res['violations'])}/{res['pairs']}")


if __name__ == "__main__":
    main()
