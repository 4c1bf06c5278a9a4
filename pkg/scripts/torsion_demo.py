"""Evaluate the torsion relations on random two-chart covers and print residual tables."""
from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from thetadet.acceptance import draw_pair
from thetadet.core import Characteristic, validate_polarization
from thetadet.fibration import two_chart_cover, verify_torsion


@dataclass
class TorsionConfig:
    cases: list[tuple[tuple[int, ...], str]] = field(
        default_factory=lambda: [((1,), "A"), ((2,), "A"), ((1, 2), "A"), ((3,), "A-exceptional"), ((2, 2, 2), "B")]
    )
    covers: int = 3
    samples: int = 5
    step: float = 0.05
    seed: int = 0


def run(cfg: TorsionConfig) -> list[dict]:
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for diag, mode in cfg.cases:
        D = validate_polarization(diag)
        for k in range(cfg.covers):
            M, Z, _, _ = draw_pair(rng, D, 6, 0.1)
            cover = two_chart_cover(M, Z.Z, Z.Z + cfg.step * (1 + 1j) * np.eye(D.g), cfg.samples, Characteristic.zero(D.g))
            rep = verify_torsion(cover, mode, rng=rng)
            rows.append({"D": list(diag), "mode": mode, "cover": k, "word": M.name, "max_residual": rep.max_residual, "passed": rep.passed})
    return rows


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--covers", type=int, default=TorsionConfig.covers)
    p.add_argument("--seed", type=int, default=TorsionConfig.seed)
    args = p.parse_args()
    cfg = TorsionConfig(covers=args.covers, seed=args.seed)
    print(json.dumps({"config": asdict(cfg), "result": run(cfg)}, indent=2))
