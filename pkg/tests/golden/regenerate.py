"""Rebuild the golden table files from the synthetic ledger in conftest.

Run from the repository root:  python3 tests/golden/regenerate.py
Only do this after an intentional change to the table layout.
"""

import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent))

from conftest import golden_ledger  # noqa: E402

from slpinn import harness  # noqa: E402

for model in harness.FIT_MODELS:
    harness.fit_tables(golden_ledger(), model, HERE)
print("golden tables written to", HERE)
