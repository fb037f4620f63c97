"""Tally of correspondence outcomes on random automata pairs.

Half the pairs are bisimilar by construction (one state duplicated), half are
independent random automata related by their greatest forward bisimulation.
"""
import argparse
import random
from collections import Counter
from dataclasses import dataclass

from fuzzbis.automata import correspondence_check, greatest_forward_bisimulation
from fuzzbis.generators import random_automaton, split_state
from fuzzbis.lattice import get_lattice


@dataclass
class Config:
    lattices: tuple = ("godel", "chain:3", "boolean4")
    pairs: int = 200
    max_states: int = 3
    seed: int = 0


def main(cfg: Config):
    for name in cfg.lattices:
        L = get_lattice(name)
        rng = random.Random(cfg.seed)
        tally = Counter()
        for k in range(cfg.pairs):
            A = random_automaton(L, rng, rng.randint(1, cfg.max_states), ["x", "y"][:rng.randint(1, 2)], "a")
            if k % 2:
                B, Z = split_state(A, rng.choice(A.states))
                kind = "split"
            else:
                B = random_automaton(L, rng, rng.randint(1, cfg.max_states), A.alphabet, "b")
                Z = greatest_forward_bisimulation(A, B).relation
                kind = "random"
            rep = correspondence_check(A, B, Z)
            tally[kind, rep.direction1.status, rep.direction2.status] += 1
        for (kind, d1, d2), n in sorted(tally.items()):
            print(f"{name:10s} {kind:6s} d1={d1:11s} d2={d2:11s} {n}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--pairs", type=int, default=Config.pairs)
    p.add_argument("--seed", type=int, default=Config.seed)
    a = p.parse_args()
    main(Config(pairs=a.pairs, seed=a.seed))
