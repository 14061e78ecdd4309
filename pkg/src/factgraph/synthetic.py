"""Deterministic synthetic corpus: 40 entity pages and 90 labeled claims.

Every page states one positive fact about its entity, explicitly negates a
second, stays silent on a third, and adds a cross-reference to another
entity's positive fact. Claims restate one of the three facts, so the gold
label is recoverable from how the selected evidence overlaps the claim:
full coverage -> SUPPORTS, full coverage behind a negation -> REFUTES,
name-only coverage -> NEI. Verbs and object vocabularies rotate across the
three roles, so the claim text alone does not give the label away.
"""

from __future__ import annotations

import json
from pathlib import Path

from ._io import write_text_atomic

N_ENTITIES = 40
N_PER_LABEL = 30
TRAIN_ENTITIES = 20  # entities 0..19 train, 20..29 held out

FACT_SENTENCE_INDEX = 6
NEGATION_SENTENCE_INDEX = 7
CROSS_REFERENCE_INDEX = 8

FIRST_NAMES = (
    "Alden Briony Casper Delia Emrys Farrah Gideon Honora Idris Jolene "
    "Keir Liora Magnus Nerissa Osric Petra Quill Rosalind Soren Tamsin "
    "Ulric Verity Wendell Xanthe Yorick Zelda Ansel Beatrix Cormac Dorothea "
    "Elias Fenella Garrick Hester Ivo Junia Kestrel Lachlan Mireille Nolan"
).split()

LAST_NAMES = (
    "Varro Whitlock Ashgrove Penhallow Marchetti Oakes Fairburn Greaves "
    "Hollis Ingram Jardine Kirkwood Larkspur Mowbray Nightingale Okafor "
    "Pemberton Quimby Rutherford Selwyn Thistlewood Underhill Vance "
    "Wetherby Yates Zimmermann Abernathy Blackwood Calloway Driscoll "
    "Eastman Farrow Goodwin Hathaway Irving Jessop Kendrick Loxley "
    "Merriweather Norwood"
).split()

RELATION_VERBS = (
    "directed recorded founded visited composed joined wrote produced hosted designed"
).split()

OBJECT_FIRST = (
    "Parkfall Winter Harbor Ember Gilded Quiet Scarlet Hollow Amber Silver "
    "Crimson Lantern Sable Meridian Opal Thistle Cobalt Juniper Marble Vesper"
).split()

OBJECT_SECOND = (
    "Saga Lights Notes Chronicle Sonata Archive Pavilion Atlas Orchard "
    "Gallery Ledger Quartet Terrace Almanac Mosaic Carousel Observatory"
).split()

CITIES = "Brimstead Calverton Dunmore Elswick Farleigh Glenrock Harwick Iverness".split()
PROFESSIONS = (
    "sculptor archivist botanist cartographer violinist historian engraver astronomer"
).split()
LANDMARKS = ("old quarter", "stone bridge", "mill yard", "cliff walk", "salt market",
             "green arcade")
SCHOOLS = (
    "Northgate Hall", "Eastbrook College", "Westfield Academy", "Southmere Conservatory",
    "Ravenhill Seminary", "Oldtown Polytechnic", "Bellamy Lyceum", "Kingsmoor School",
)


def entity_name(e: int) -> str:
    return f"{FIRST_NAMES[e]} {LAST_NAMES[e]}"


def entity_title(e: int) -> str:
    return f"{FIRST_NAMES[e]}_{LAST_NAMES[e]}"


def _object(e: int, role: int) -> str:
    # Offsets chosen so no (verb, object) fact collides across roles within
    # the 40-entity range (moduli 10/20/17 only realign past index 40).
    return (
        f"{OBJECT_FIRST[(e + 13 * role) % len(OBJECT_FIRST)]} "
        f"{OBJECT_SECOND[(3 * e + 11 * role) % len(OBJECT_SECOND)]}"
    )


def entity_facts(e: int) -> dict[str, tuple[str, str]]:
    """(verb, object) for the stated, negated, and unmentioned facts."""
    return {
        "positive": (RELATION_VERBS[e % 10], _object(e, 0)),
        "negated": (RELATION_VERBS[(e + 3) % 10], _object(e, 1)),
        "unmentioned": (RELATION_VERBS[(e + 6) % 10], _object(e, 2)),
    }


def document_sentences(e: int) -> list[str]:
    name = entity_name(e)
    city = CITIES[e % len(CITIES)]
    profession = PROFESSIONS[(e + 3) % len(PROFESSIONS)]
    landmark = LANDMARKS[e % len(LANDMARKS)]
    school = SCHOOLS[(e + 5) % len(SCHOOLS)]
    facts = entity_facts(e)
    pos_verb, pos_obj = facts["positive"]
    neg_verb, neg_obj = facts["negated"]
    target = (e + 7) % N_ENTITIES
    t_name = entity_name(target)
    t_verb, t_obj = entity_facts(target)["positive"]
    year = 1951 + e
    return [
        f"{name} is a {profession} from {city}.",
        f"{name} lives near the {landmark} of {city}.",
        f"{name} works at the {city} institute.",
        f"{name} studied at {school}.",
        f"{name} speaks often about craft and form.",
        f"{name} is known across {city}.",
        f"{name} {pos_verb} {pos_obj} in {year}.",
        f"{name} never {neg_verb} {neg_obj}.",
        f"{name} praised {t_name} after {t_name} {t_verb} {t_obj}.",
        "The quiet courtyard stayed calm through the long season.",
    ]


def wiki_records() -> list[dict]:
    records = []
    for e in range(N_ENTITIES):
        sentences = document_sentences(e)
        records.append(
            {
                "id": entity_title(e),
                "text": " ".join(sentences),
                "lines": "\n".join(f"{i}\t{s}" for i, s in enumerate(sentences)),
            }
        )
    return records


def claim_records() -> list[dict]:
    """90 claims, 30 per label, ids 100+/200+/300+ by label."""
    records = []
    for e in range(N_PER_LABEL):
        facts = entity_facts(e)
        name = entity_name(e)
        title = entity_title(e)
        pos_verb, pos_obj = facts["positive"]
        records.append(
            {
                "id": 100 + e,
                "claim": f"{name} {pos_verb} {pos_obj}.",
                "label": "SUPPORTS",
                "evidence": [[[1000 + e, 1000 + e, title, FACT_SENTENCE_INDEX]]],
            }
        )
        neg_verb, neg_obj = facts["negated"]
        records.append(
            {
                "id": 200 + e,
                "claim": f"{name} {neg_verb} {neg_obj}.",
                "label": "REFUTES",
                "evidence": [[[2000 + e, 2000 + e, title, NEGATION_SENTENCE_INDEX]]],
            }
        )
        unk_verb, unk_obj = facts["unmentioned"]
        records.append(
            {
                "id": 300 + e,
                "claim": f"{name} {unk_verb} {unk_obj}.",
                "label": "NOT ENOUGH INFO",
                "evidence": [[[3000 + e, 3000 + e, None, None]]],
            }
        )
    return records


def split_claim_records(records: list[dict]) -> tuple[list[dict], list[dict]]:
    """Entity-disjoint split: entities 0..19 train, 20..29 held out."""
    train, dev = [], []
    for record in records:
        entity = record["id"] % 100
        (train if entity < TRAIN_ENTITIES else dev).append(record)
    return train, dev


DEFAULT_CONFIG = """\
[selection]
threshold = 0.5
top_docs = 10
top_sents = 5
scorer = overlap

[srlgraph]
labeler = rules

[encoder]
provider = deterministic
dim = 64
seed = 0

[verifier]
layers = 2
hidden_dim = 64
mlp_hidden = 64
epochs = 150
learning_rate = 0.01
batch_size = 16
seed = 7
"""


def write_corpus(directory: str | Path) -> dict[str, Path]:
    """Write wiki.jsonl, train.jsonl, dev.jsonl, claims.jsonl, and a ready
    config file into ``directory``; returns the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "wiki": directory / "wiki.jsonl",
        "train": directory / "train.jsonl",
        "dev": directory / "dev.jsonl",
        "claims": directory / "claims.jsonl",
        "config": directory / "synth.cfg",
    }
    write_text_atomic(
        paths["wiki"], "\n".join(json.dumps(r, sort_keys=True) for r in wiki_records()) + "\n"
    )
    records = claim_records()
    train, dev = split_claim_records(records)
    for key, rows in (("claims", records), ("train", train), ("dev", dev)):
        write_text_atomic(
            paths[key], "\n".join(json.dumps(r, sort_keys=True) for r in rows) + "\n"
        )
    write_text_atomic(paths["config"], DEFAULT_CONFIG)
    return paths
