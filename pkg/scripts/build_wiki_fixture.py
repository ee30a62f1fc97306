"""Write tests/fixtures/wiki_pages.json: 80 fictional tags with hand-assigned labels.

Each entry gives the tag, the page title its search returns (or null), the
page wikitext and the expected (is_person, gender).  Pages mix the markup a
lead-section parser must survive: nested templates, references, comments,
file links, piped links and pronouns below the first heading.
"""

import json
import os
import random

OUT = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures", "wiki_pages.json")

FIRST_F = ["Alina", "Brisa", "Corah", "Delphine", "Elska", "Faye", "Greta", "Hollis", "Ines",
           "Jolene", "Kaia", "Liesel", "Marisol", "Nadia", "Odile", "Priya", "Quilla", "Rosalind",
           "Saoirse", "Tamsin", "Ulla", "Vesna", "Wren", "Xiomara", "Yael", "Zinnia", "Amara",
           "Bettany", "Calla", "Dorit"]
FIRST_M = ["Anselm", "Borislav", "Cyprian", "Dashiell", "Emrys", "Florian", "Gideon", "Hollis",
           "Isidore", "Jasper", "Kestrel", "Lucan", "Mattias", "Nikolai", "Osric", "Peregrine",
           "Quentin", "Rafferty", "Soren", "Thaddeus", "Ulric", "Vasco", "Wystan", "Xander",
           "Yusuf", "Zoltan", "Ambrose", "Barnaby", "Caspian", "Dorian"]
SURNAMES = ["Varnholt", "Quillfeather", "Ostrander", "Mirecourt", "Pellwick", "Tarrow",
            "Lindqvist-Hale", "Abernath", "Crowthorne", "Esquivel", "Fenwright", "Galloway-Ruiz"]
JOBS = ["actress", "novelist", "chemist", "sprinter", "architect", "cellist", "senator",
        "painter", "astronomer", "chef"]
TOPICS = ["Gift Ideas", "Health", "Travel Tips", "Holiday Baking", "Box Office", "Red Carpet",
          "Awards Season", "Streaming Guide", "Fashion Week", "Tech Reviews"]
MISSING = ["Qxvlor Event", "Unlisted Rumor", "Zzyzx Tour", "Blorbo Fandom", "Neverwas Gala"]

BIRTH_KEYS = ["birth_date", "birth_place", "born", "birth_name", "birth date"]


def infobox(kind, name, with_birth, rng):
    params = [f"| name = {name}",
              "| image = Portrait_" + name.replace(" ", "_") + ".jpg",
              "| caption = {{nowrap|" + name + " in 2015}}"]
    if with_birth:
        key = rng.choice(BIRTH_KEYS)
        params.append(f"| {key} = {{{{birth date and age|19{rng.randint(40, 99)}|"
                      f"{rng.randint(1, 12)}|{rng.randint(1, 28)}}}}}")
    params.append("| occupation = " + rng.choice(JOBS))
    return "{{Infobox " + kind + "\n" + "\n".join(params) + "\n}}\n"


def person_page(name, gender, rng):
    p, q = ("She", "her") if gender == "F" else ("He", "his")
    o_sub = "he" if gender == "F" else "she"
    job = rng.choice(JOBS)
    lead = [
        f"'''{name}''' (born 19{rng.randint(40, 99)}) is a [[fiction|fictional]] {job}."
        f"<ref>{{{{cite web|title={name}|quote={o_sub} said it}}}}</ref>",
        f"{p} is best known for {q} work on ''[[The Lantern Years]]''.",
        f"<!-- editors: {o_sub} {o_sub} {o_sub} do not count -->",
        f"[[File:{name.replace(' ', '_')}.png|thumb|{o_sub.capitalize()} at an event]]",
        f"In later years {p.lower()} returned to teaching, and {q} students remember "
        f"{p.lower()} fondly.",
    ]
    if rng.random() < 0.5:
        # one opposite-gender mention in the lead; the subject still dominates
        lead.append(f"{q.capitalize()} mentor once wrote that {o_sub} admired the work.")
    body = ("\n== Early life ==\n" + (f"{o_sub.capitalize()} " * 12)
            + "grew up elsewhere.\n=== Family ===\nMore text.\n")
    return "{{Short description|Fictional " + job + "}}\n" + infobox("person", name, True, rng) \
        + "\n".join(lead) + "\n" + body


def topic_page(topic, rng):
    if rng.random() < 0.5:
        box = infobox("website", topic, False, rng)
    else:
        box = ""
    return (box + f"'''{topic}''' is a recurring feature. She and he appear in examples.\n"
            "== History ==\nNothing further.\n")


def main():
    rng = random.Random(20240101)
    entries = []
    for i, first in enumerate(FIRST_F):
        name = f"{first} {SURNAMES[i % len(SURNAMES)]}"
        entries.append({"tag": name, "title": name, "wikitext": person_page(name, "F", rng),
                        "is_person": True, "gender": "F"})
    for i, first in enumerate(FIRST_M):
        name = f"{first} {SURNAMES[(i + 5) % len(SURNAMES)]}"
        entries.append({"tag": name, "title": name, "wikitext": person_page(name, "M", rng),
                        "is_person": True, "gender": "M"})
    for t in TOPICS:
        entries.append({"tag": t, "title": t + " (feature)", "wikitext": topic_page(t, rng),
                        "is_person": False, "gender": "U"})
    # nicknames whose search resolves to an existing person's page
    for k in (0, 7, 14, 30, 41):
        src = entries[k]
        alias = src["tag"].split()[0] + " " + src["tag"].split()[-1][0] + "."
        entries.append(dict(src, tag=alias))
    for t in MISSING:
        entries.append({"tag": t, "title": None, "wikitext": None,
                        "is_person": False, "gender": "U"})
    assert len(entries) == 80
    assert len({e["tag"] for e in entries}) == 80
    with open(OUT, "w", encoding="utf-8") as fh:
        json.dump(entries, fh, indent=1, ensure_ascii=False)
        fh.write("\n")


if __name__ == "__main__":
    main()
