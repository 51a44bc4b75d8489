"""
Recovering triple boundaries
============================

Some corpora store a subject plus one flat string of relations and objects.
With a table of known relation names the string can be cut back into pairs:
scan left to right, and wherever the longest known relation starts, begin a
new pair.
"""

# In[ ]
from pathlib import Path

from kgtext.ingest import PropertyLookup, reconstruct_boundaries, tekgen_to_samples

lookup = PropertyLookup.from_tsv(Path(__file__).resolve().parent.parent / "tests" / "data" / "properties.tsv")
rec = reconstruct_boundaries(
    "George Cary", "position held ◊ Dean of Exeter ◊ date of birth ◊ 01 January 1611", lookup)
print(rec.pairs, rec.property_ids)

# In[ ]
"""
"country" and "country of citizenship" are both relations. The longer one
wins where it fits.
"""
print(reconstruct_boundaries("Kari Nordvik", "country of citizenship Norway", lookup).pairs)
print(reconstruct_boundaries("1905 referendum", "country Norway", lookup).pairs)

# In[ ]
rejects = []
records = [
    {"subject": "Liam Healy", "flat": "occupation cricketer", "sentence": "Liam Healy plays cricket."},
    {"subject": "The Piano", "flat": "a film by Jane Campion", "sentence": "The Piano is a film."},
]
print([s.graph.to_lists() for s in tekgen_to_samples(records, lookup, rejects)])
print(rejects)
