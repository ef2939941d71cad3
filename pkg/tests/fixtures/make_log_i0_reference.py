"""Regenerate ``log_i0_reference.json`` with 50-digit arithmetic (needs mpmath)."""
import json
import pathlib

import mpmath as mp
import numpy as np

mp.mp.dps = 50
xs = sorted(
    set(
        [0.0, 1e-8, 1e-3, 0.5, 1.0, 5.0, 19.5, 20.0, 20.5, 100.0]
        + [float(x) for x in np.geomspace(1e-2, 1e6, 40)]
    )
)
rows = [{"x": repr(x), "log_i0": mp.nstr(mp.log(mp.besseli(0, mp.mpf(x))), 30)} for x in xs]
assert len(rows) == 50
path = pathlib.Path(__file__).with_name("log_i0_reference.json")
path.write_text(json.dumps(rows, indent=1) + "\n")
