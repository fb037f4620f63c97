"""How quickly the bounded logical distance reaches the greatest bisimulation.

For random model pairs, prints one CSV row per (lattice, pair, depth) with the
largest gap between the distance at that depth and the solver's result.
"""
import argparse
import csv
import random
import sys
from dataclasses import dataclass

from fuzzbis.generators import ModelGenConfig, random_pair
from fuzzbis.hm import hm_check, make_budget
from fuzzbis.lattice import get_lattice


@dataclass
class Config:
    lattices: tuple = ("godel", "lukasiewicz", "product")
    pairs: int = 20
    max_states: int = 3
    depth: int = 3
    pool_rounds: int = 0
    seed: int = 0


def main(cfg: Config):
    w = csv.writer(sys.stdout)
    w.writerow(["lattice", "pair", "depth", "max_gap", "matched", "sound"])
    for name in cfg.lattices:
        L = get_lattice(name)
        rng = random.Random(cfg.seed)
        for k in range(cfg.pairs):
            M, N = random_pair(L, rng, ModelGenConfig(max_states=cfg.max_states))
            rep = hm_check(M, N, make_budget(M, N, cfg.depth, cfg.pool_rounds))
            Z = rep.solver.relation.table
            for d, (vals, _) in enumerate(rep.distance.history):
                gaps = [L.distance(v, z) for rv, rz in zip(vals, Z) for v, z in zip(rv, rz)]
                mg = max(gaps)
                w.writerow([name, k, d, float(mg), mg <= rep.tolerance, rep.sound_by_depth[d]])


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--pairs", type=int, default=Config.pairs)
    p.add_argument("--depth", type=int, default=Config.depth)
    p.add_argument("--pool-rounds", type=int, default=Config.pool_rounds)
    p.add_argument("--seed", type=int, default=Config.seed)
    p.add_argument("--lattice", action="append", help="repeatable; default all three t-norms")
    a = p.parse_args()
    main(Config(tuple(a.lattice) if a.lattice else Config.lattices, a.pairs, Config.max_states, a.depth,
                a.pool_rounds, a.seed))
