"""Print mean sum-SE per scheme and sweep value for one or more sweep CSVs."""
import sys
from collections import defaultdict

import numpy as np

from riscr.harness import read_csv


def summarize(path):
    res = read_csv(path)
    table = defaultdict(list)
    for r in res.rows:
        table[(r.scheme, r.value)].append(r.sum_se)
    schemes = list(dict.fromkeys(r.scheme for r in res.rows))
    values = sorted({r.value for r in res.rows})
    var = res.rows[0].sweep_variable if res.rows else "?"
    print(f"{path}  ({var})")
    print(f"{'scheme':22s}" + "".join(f"{v:>9g}" for v in values))
    for s in schemes:
        print(f"{s:22s}" + "".join(f"{np.nanmean(table[(s, v)]):9.3f}" for v in values))


if __name__ == "__main__":
    for p in sys.argv[1:]:
        summarize(p)
        print()
