"""Regenerate the bundled toy taxonomy under src/assoclens/data/toy_wordnet."""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from assoclens.wordnet import TaxonomyDb, dump, toy_taxonomy_dir  # noqa: E402

# (id, lemmas, hypernym ids, gloss)
SYNSETS = [
    (1, ["entity"], [], "that which is perceived to have its own distinct existence"),
    (2, ["physical_entity"], [1], "an entity that has physical existence"),
    (3, ["abstraction", "abstract_entity"], [1], "a general concept"),
    (4, ["object", "physical_object"], [2], "a tangible and visible entity"),
    (5, ["whole", "unit"], [4], "an assemblage of parts regarded as a single entity"),
    (6, ["artifact", "artefact"], [5], "a man-made object"),
    (7, ["covering"], [6], "an artifact that covers something else"),
    (8, ["clothing", "article_of_clothing", "vesture", "wear"], [7], "a covering designed to be worn"),
    (9, ["gown"], [8], "a woman's dress, usually with a close-fitting bodice"),
    (10, ["skirt"], [8], "a garment hanging from the waist"),
    (11, ["dress", "frock"], [8], "a one-piece garment for a woman"),
    (12, ["blouse"], [8], "a top worn by women"),
    (13, ["structure", "construction"], [6], "a thing constructed"),
    (14, ["building", "edifice"], [13], "a structure with a roof and walls"),
    (15, ["living_thing", "animate_thing"], [5], "a living entity"),
    (16, ["organism", "being"], [15], "a living thing that can act independently"),
    (17, ["person", "individual", "someone"], [16], "a human being"),
    (18, ["woman", "adult_female"], [17], "an adult female person"),
    (19, ["skirt"], [18], "slang for a young woman"),
    (20, ["man", "adult_male"], [17], "an adult male person"),
    (21, ["lover"], [17], "a person who loves someone"),
    (22, ["boyfriend", "beau"], [21], "a man who is the lover of a woman"),
    (23, ["girlfriend"], [21], "a woman who is the lover of a man"),
    (24, ["geological_formation", "formation"], [4], "the geological features of the earth"),
    (25, ["slope", "incline"], [24], "an elevated geological formation"),
    (26, ["bank"], [25], "sloping land beside a body of water"),
    (27, ["shore"], [24], "the land along the edge of a body of water"),
    (28, ["group", "grouping"], [3], "any number of entities considered as a unit"),
    (29, ["social_group"], [28], "people sharing some social relation"),
    (30, ["organization", "organisation"], [29], "a group of people who work together"),
    (31, ["institution"], [30], "an organization founded for a specific purpose"),
    (32, ["financial_institution"], [31], "an institution that conducts financial transactions"),
    (33, ["bank", "depository_financial_institution"], [32], "a financial institution that accepts deposits"),
    (34, ["communication"], [3], "something that is communicated"),
    (35, ["message", "content"], [34], "what a communication is about"),
    (36, ["statement"], [35], "a message stating a fact or opinion"),
    (37, ["answer", "reply", "response"], [36], "a statement made to reply to a question"),
    (38, ["email", "e-mail"], [35], "a message sent electronically"),
    (39, ["movie", "film", "picture"], [34], "a form of entertainment that enacts a story"),
    (40, ["challenge"], [36], "a call to engage in a contest"),
]

# Non-default sense ranks: the less obvious sense is listed first on purpose.
SENSE_ORDER = {"skirt": [19, 10], "bank": [33, 26]}

VERBS = ["wear", "dress", "challenge", "respond", "reply", "answer", "say",
         "love", "film", "email", "bank", "skirt"]
ADJECTIVES = ["red", "pink", "beautiful", "kind", "strict", "easy", "hard"]
EXCEPTIONS = {
    "noun": {"women": ["woman"], "men": ["man"]},
    "verb": {"wore": ["wear"], "worn": ["wear"], "said": ["say"]},
    "adjective": {"harder": ["hard"]},
}


def build():
    return TaxonomyDb.build(SYNSETS, sense_order=SENSE_ORDER,
                            lemmas={"verb": VERBS, "adjective": ADJECTIVES},
                            exceptions=EXCEPTIONS)


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else toy_taxonomy_dir()
    dump(build(), out)
    print(f"wrote {len(SYNSETS)} synsets to {out}")
