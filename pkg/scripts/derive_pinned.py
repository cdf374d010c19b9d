"""Regenerate src/knotflow/data/pinned.json.

Coercivity constants are the maximum ratio over the stress corpus together
with the round circle, rounded up to two decimals.  The GNS constant is the
maximum over 1000 random 64-mode fields and the single modes (which
saturate the interpolation at exactly 1), rounded up to two decimals.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from knotflow.curves import circle
from knotflow.diagnostics import coercivity_ratio, gns_check, gns_corpus, stress_corpus
from knotflow.energy import m_alpha
from knotflow.fractional import q_symbol

ALPHAS = (2.2, 2.5, 2.8)
GNS_ORDERS = (0.5, 1.0, 2.0)
GNS_SEED = 20240611
OUT = Path(__file__).resolve().parents[1] / "src" / "knotflow" / "data" / "pinned.json"


def ceil2(x: float) -> float:
    return math.ceil(x * 100.0 - 1e-9) / 100.0


def main() -> None:
    corpus = stress_corpus()
    coer, coer_raw = {}, {}
    for a in ALPHAS:
        vals = [coercivity_ratio(c, a) for c in corpus] + [coercivity_ratio(circle(1.0, 128), a)]
        coer_raw[f"{a:.2f}"] = max(vals)
        coer[f"{a:.2f}"] = ceil2(max(vals))
    gns = max(gns_check(f, *GNS_ORDERS) for f in gns_corpus(1000, GNS_SEED))
    x = np.arange(256) / 256
    single = max(gns_check(np.sin(2 * np.pi * k * x), *GNS_ORDERS) for k in range(1, 65))
    data = {
        "m_alpha": {f"{a:.2f}": m_alpha(a) for a in ALPHAS},
        "q_symbol": {f"{a:.2f}": [q_symbol(k, a) for k in range(1, 9)] for a in ALPHAS},
        "coercivity_C": coer,
        "coercivity_corpus_max": coer_raw,
        "gns_C": ceil2(max(gns, single)),
        "gns_corpus_max": gns,
        "gns_orders": list(GNS_ORDERS),
        "gns_seed": GNS_SEED,
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(data, indent=2) + "\n")
    print(json.dumps(data, indent=2))


if __name__ == "__main__":
    main()
