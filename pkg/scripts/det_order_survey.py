"""Histogram of root-of-unity orders of det C_M over random elements of G_D."""
from __future__ import annotations

import argparse
import json
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from thetadet.acceptance import draw_pair
from thetadet.core import validate_polarization
from thetadet.errors import ThetaDetError
from thetadet.theta import random_characteristic
from thetadet.transform import allowed_orders, transformation_matrix


@dataclass
class SurveyConfig:
    types: list[tuple[int, ...]] = field(default_factory=lambda: [(1,), (2,), (3,), (1, 2), (2, 2), (1, 3), (2, 4)])
    draws: int = 30
    max_len: int = 8
    y_floor: float = 0.05
    seed: int = 0


def survey(cfg: SurveyConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    out = {}
    for diag in cfg.types:
        D = validate_polarization(diag)
        orders = Counter()
        for _ in range(cfg.draws):
            M, Z, _, _ = draw_pair(rng, D, cfg.max_len, cfg.y_floor)
            c = random_characteristic(rng, D)
            try:
                orders[transformation_matrix(M, Z, c, rng=rng).order] += 1
            except ThetaDetError as exc:
                orders[type(exc).__name__] += 1
        out[str(diag)] = {
            "orders": {str(k): v for k, v in sorted(orders.items(), key=str)},
            "allowed": sorted(allowed_orders(D, "symmetric")),
        }
    return out


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--draws", type=int, default=SurveyConfig.draws)
    p.add_argument("--seed", type=int, default=SurveyConfig.seed)
    args = p.parse_args()
    cfg = SurveyConfig(draws=args.draws, seed=args.seed)
    print(json.dumps({"config": asdict(cfg), "result": survey(cfg)}, indent=2))
