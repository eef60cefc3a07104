"""Random enumerable-set builds checked against plain Python sets."""

import random

from cfgenum.ecs import NodeStore


def letters_of(strings):
    return {x for s in strings for x in s}


def random_build(rng, ops=12, letters=4, store=None, pool=None):
    """Build random sets through the store's API; returns (store, [(handle, model set)], calls).

    Unions are only made between disjoint sets and products only between
    letter-disjoint sets, so every model set is exact.
    """
    store = store or NodeStore()
    calls = 0
    if pool is None:
        pool = [(store.make_empty(), frozenset()), (store.make_eps(), frozenset([()]))]
        calls = 2
    alphabet = [(pos, ann) for pos in range(1, letters + 1) for ann in "xy"]
    for _ in range(ops):
        roll = rng.random()
        if roll < 0.3:
            letter = rng.choice(alphabet)
            pool.append((store.make_singleton(letter), frozenset([(letter,)])))
            calls += 1
            continue
        (ha, sa), (hb, sb) = rng.choice(pool), rng.choice(pool)
        if roll < 0.65:
            if sa & sb:
                continue
            pool.append((store.union(ha, hb), sa | sb))
            calls += 1
        else:
            if letters_of(sa) & letters_of(sb):
                continue
            pool.append((store.product(ha, hb), frozenset(u + v for u in sa for v in sb)))
            calls += 1
    return store, pool, calls


def seeded_build(seed, **kw):
    return random_build(random.Random(seed), **kw)
