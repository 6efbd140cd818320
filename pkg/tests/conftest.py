from __future__ import annotations

from importlib import resources

import pytest

from markermine import linclass, tagger
from markermine.extraction import load_pdtb_forms
from markermine.filtering import SentencePair


def data_path(name: str):
    return resources.files("markermine.data").joinpath(name)


@pytest.fixture(scope="session")
def fixture_corpus():
    with resources.as_file(data_path("tagger_fixture.txt")) as p:
        return tagger.load_tagged_corpus(p)


@pytest.fixture(scope="session")
def tagger_model(fixture_corpus):
    return tagger.train_tagger(fixture_corpus, epochs=5, seed=0)


@pytest.fixture(scope="session")
def langid_model():
    with resources.as_file(data_path("langid.dmlc")) as p:
        return linclass.load_model(p)


@pytest.fixture(scope="session")
def pdtb_forms():
    return load_pdtb_forms()


@pytest.fixture(scope="session")
def tagger_model_file(tagger_model, tmp_path_factory):
    path = tmp_path_factory.mktemp("models") / "tagger.dmpt"
    tagger_model.save(path)
    return path


# The one fully worked sample pair: mined text and its expected instance.
SAMPLE_PAIR = SentencePair(
    s1="Paul Prudhomme's Louisiana Kitchen created a sensation when it was published in 1984.",
    s2="Happily, this family collective cookbook is just as good",
)
SAMPLE_S2_PRIME = "This family collective cookbook is just as good"
SAMPLE_MARKER = "happily"
