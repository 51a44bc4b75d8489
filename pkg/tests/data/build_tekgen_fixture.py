"""Regenerate ``tekgen_fixture.jsonl`` and ``properties.tsv``.

Every record is assembled from known (predicate, object) pairs, so the
expected reconstruction comes from construction rather than from the code
under test. Run from this directory: ``python3 build_tekgen_fixture.py``.
"""

import json
import random

PROPERTIES = [
    ("P39", "position held", ""),
    ("P580", "start time", "began"),
    ("P582", "end time", ""),
    ("P569", "date of birth", "birth date,born on"),
    ("P570", "date of death", "died on"),
    ("P19", "place of birth", "birthplace,born in"),
    ("P17", "country", ""),
    ("P27", "country of citizenship", "citizenship,nationality"),
    ("P585", "point in time", "date"),
    ("P1001", "applies to jurisdiction", ""),
    ("P463", "member of", ""),
    ("P54", "member of sports team", "played for"),
    ("P413", "position played on team", "position played"),
    ("P69", "educated at", "alma mater"),
    ("P106", "occupation", "profession"),
    ("P31", "instance of", ""),
    ("P131", "located in the administrative territorial entity", "located in"),
    ("P361", "part of", ""),
    ("P166", "award received", "award"),
    ("P57", "director", "directed by"),
    ("P161", "cast member", "starring"),
    ("P2047", "duration", "runtime"),
    ("P577", "publication date", "release date"),
]

DATES = ["01 January 1611", "00 1680", "10 April 1968", "12 March 1903", "3 June 1889", "1997", "21 October 2004"]
PEOPLE = {
    "position held": ["Dean of Exeter", "Mayor of Lyon", "Bishop of Bath and Wells", "Chancellor of the Exchequer"],
    "start time": DATES, "end time": DATES, "date of birth": DATES, "date of death": DATES,
    "birth date": DATES, "born on": DATES, "died on": DATES,
    "place of birth": ["Exeter", "Nassau", "Porto Alegre", "Kraków"],
    "birthplace": ["Tallinn", "Cork"], "born in": ["Hobart", "Bergen"],
    "country of citizenship": ["United States", "Norway", "New Zealand"],
    "citizenship": ["Chile"], "nationality": ["Ireland", "Estonia"],
    "member of sports team": ["Cork City F.C.", "Bergen Vikings", "Hobart Hurricanes"],
    "played for": ["Tallinn Kalev"], "position played on team": ["goalkeeper", "midfielder", "fly-half"],
    "position played": ["winger"], "educated at": ["Trinity College Dublin", "University of Otago"],
    "alma mater": ["Sorbonne"], "occupation": ["priest", "architect", "novelist", "cricketer"],
    "profession": ["surgeon"], "award received": ["Order of Canada", "Pulitzer Prize for Fiction"],
    "award": ["Nobel Prize in Physics"], "member of": ["Royal Society", "Académie française"],
}
EVENTS = {
    "point in time": DATES, "date": DATES, "country": ["The Bahamas", "Norway", "Chile", "Mongolia"],
    "applies to jurisdiction": ["The Bahamas", "Tasmania", "Quebec"], "instance of": ["general election", "referendum"],
    "located in the administrative territorial entity": ["Tasmania", "Quebec"], "located in": ["Ulaanbaatar"],
    "part of": ["1968 elections", "Nordic referendums"],
}
FILMS = {
    "director": ["Ray Griggs", "Agnès Varda"], "directed by": ["Jane Campion"],
    "cast member": ["Michael Rooker", "Tom Sizemore", "Liv Ullmann"], "starring": ["Justin Whalin"],
    "duration": ["98.0 minutes", "124 minutes"], "runtime": ["87 minutes"],
    "publication date": DATES, "release date": DATES, "country": ["United States", "France"],
}
SUBJECTS = [
    ("person", ["George Cary (1611-1680)", "Abraham A. Ribicoff", "Mary Ellen Otto", "Tomas Kask", "Ana Beatriz Lopes",
                "Sean Og Murphy", "Kari Nordvik", "Jan Nowak (bishop)", "Hamish Tait", "Aino Saar", "Liam Healy",
                "Claire Dubois", "Ingrid Haugen", "Pedro Alvarez Soto", "Ruth Ribicoff"]),
    ("event", ["1968 Bahamian general election", "1972 Tasmanian state election", "1995 Quebec referendum",
               "2008 Mongolian legislative election", "1905 Norwegian union dissolution referendum"]),
    ("film", ["Super Capers", "Cleo from 5 to 7", "The Piano", "Persona (1966 film)", "Dungeons and Dragons (film)"]),
]
POOLS = {"person": PEOPLE, "event": EVENTS, "film": FILMS}
SEPARATORS = ["", "◊", "♢", "|"]


def keys():
    out = []
    for _, label, aliases in PROPERTIES:
        out.append(label.lower().split())
        out += [a.lower().split() for a in aliases.split(",") if a]
    return out


def contains_key(text, all_keys):
    toks = text.lower().split()
    return any(toks[i:i + len(k)] == k for k in all_keys for i in range(len(toks)))


def main(seed=20240501):
    rng = random.Random(seed)
    all_keys = keys()
    for pool in POOLS.values():
        for pred, objs in pool.items():
            assert pred.split() in all_keys, pred
            for o in objs:
                assert not contains_key(o, all_keys), o
    records = []
    subjects = [(kind, s) for kind, names in SUBJECTS for s in names]
    index = 0
    while len(records) < 45:
        kind, subject = subjects[index % len(subjects)]
        index += 1
        pool = POOLS[kind]
        preds = rng.sample(sorted(pool), rng.randint(1, 4))
        pairs = [(p, rng.choice(pool[p])) for p in preds]
        sep = rng.choice(SEPARATORS)
        glue = f" {sep} " if sep else " "
        flat = glue.join(f"{p}{glue}{o}" for p, o in pairs)
        sentence = f"{subject}: " + "; ".join(f"{p} {o}" for p, o in pairs) + "."
        records.append({"id": f"tk-{len(records):03d}", "subject": subject, "flat": flat, "sentence": sentence,
                        "expected_pairs": [list(p) for p in pairs], "expected_unresolved": []})
    # records that must be rejected, each with its expected residue
    rejects = [
        ("Hamish Tait", "cricketer from Hobart occupation cricketer", [["occupation", "cricketer"]], ["cricketer from Hobart"]),
        ("Aino Saar", "date of birth ◊ 3 June 1889 ◊ date of death", [["date of birth", "3 June 1889"]], ["date of death"]),
        ("The Piano", "a film by Jane Campion", [], ["a film by Jane Campion"]),
        ("Liam Healy", "played for award Order of Canada", [["award", "Order of Canada"]], ["played for"]),
        ("1995 Quebec referendum", "| |", [], []),
    ]
    for subject, flat, pairs, unresolved in rejects:
        records.append({"id": f"tk-{len(records):03d}", "subject": subject, "flat": flat, "sentence": f"About {subject}.",
                        "expected_pairs": pairs, "expected_unresolved": unresolved})
    with open("tekgen_fixture.jsonl", "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r, ensure_ascii=False) + "\n")
    with open("properties.tsv", "w", encoding="utf-8") as fh:
        fh.write("property_id\tlabel\taliases\n")
        for pid, label, aliases in PROPERTIES:
            fh.write(f"{pid}\t{label}\t{aliases}\n")


if __name__ == "__main__":
    main()
