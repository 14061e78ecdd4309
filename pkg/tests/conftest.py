import pytest

from factgraph.corpus import Document, DocumentStore, load_claims, load_wiki_pages
from factgraph.pipeline import Pipeline
from factgraph.selection import SelectionConfig
from factgraph.synthetic import write_corpus
from factgraph.verifier import TrainConfig

# Selection settings used by the end-to-end experiments: the synthetic corpus
# is built so that 0.5 keeps exactly the sentences that settle a claim.
EXPERIMENT_THRESHOLD = 0.5


@pytest.fixture(scope="session")
def synth_paths(tmp_path_factory):
    return write_corpus(tmp_path_factory.mktemp("synth"))


@pytest.fixture(scope="session")
def synth_store(synth_paths):
    store, warnings = load_wiki_pages(synth_paths["wiki"])
    assert warnings == 0
    return store


@pytest.fixture(scope="session")
def synth_train_claims(synth_paths):
    return load_claims(synth_paths["train"])


@pytest.fixture(scope="session")
def synth_dev_claims(synth_paths):
    return load_claims(synth_paths["dev"])


@pytest.fixture(scope="session")
def synth_all_claims(synth_paths):
    return load_claims(synth_paths["claims"])


@pytest.fixture(scope="session")
def trained_pipeline(synth_store, synth_train_claims):
    pipeline = Pipeline(
        synth_store, selection=SelectionConfig(threshold=EXPERIMENT_THRESHOLD), workers=2
    )
    pipeline.train(synth_train_claims, TrainConfig())
    return pipeline


@pytest.fixture
def tiny_store():
    documents = {
        "Hawaii": Document(
            "Hawaii",
            (
                "Hawaii is a state in the United States.",
                "It joined the union in 1959.",
                "Honolulu is the capital of Hawaii.",
            ),
        ),
        "Hawaii_(film)": Document("Hawaii_(film)", ("Hawaii is a 1966 film.",)),
        "Barack_Obama": Document(
            "Barack_Obama",
            (
                "Barack Obama was born in Hawaii in 1961.",
                "Obama served as president of the United States.",
            ),
        ),
    }
    return DocumentStore(documents)
