"""Solve and cache the Allen-Cahn reference fields for the whole hardness grid.

    python3 scripts/build_references.py [cache_dir]   (default runs/reference)
"""

import sys
from pathlib import Path

from slpinn import ground_truth as gt
from slpinn.pde import kappa_grid


def main():
    cache = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("runs") / "reference"
    for kappa in kappa_grid("allen_cahn"):
        ref = gt.allen_cahn_reference(kappa, cache)
        meta = ref.solver_meta
        print(f"kappa={kappa:g}: range [{ref.values.min():+.3f}, {ref.values.max():+.3f}], "
              f"self-convergence {meta['self_convergence']:.1e} -> {gt.cache_path(cache, 'allen_cahn', kappa)}")


if __name__ == "__main__":
    main()
