import functools
import random

from hypothesis import settings

from cfgenum import corpus, oracle

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@functools.lru_cache(maxsize=None)
def unambiguous_corpus(count, seed=7, check_len=6):
    """Random grammars with a non-empty language that pass the bounded unambiguity check."""
    rng = random.Random(seed)
    found = []
    while len(found) < count:
        g = corpus.random_grammar(rng)
        if not g.rules:
            continue
        if oracle.check_unambiguous_upto(g, check_len).ok:
            found.append(g)
    return tuple(found)


def named_grammars():
    return [("g1", corpus.g1()), ("g2", corpus.g2()), ("g3", corpus.g3()),
            ("split", corpus.split_grammar())]


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.RESULTS:
        terminalreporter.write_line(line)
