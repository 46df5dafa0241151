import os

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CORPUS = os.path.join(ROOT, "corpus")
GOLDEN = ("converse_barcan.jd", "converse_buridan.jd", "jt45_barcan.jd")


def corpus_path(*parts):
    return os.path.join(CORPUS, *parts)


def load(name):
    from jlogic.textio import parse_derivation

    with open(corpus_path(name), encoding="utf-8") as fh:
        return parse_derivation(fh.read(), base_dir=CORPUS)


@pytest.fixture
def golden():
    return {name: load(name) for name in GOLDEN}
