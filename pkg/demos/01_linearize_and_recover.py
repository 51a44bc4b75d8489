"""
Graphs as token sequences
=========================

A knowledge graph is a list of (subject, predicate, object) triples. To feed
one to a sequence model we flatten it with three marker tokens, and to read a
model's output back we parse the markers again, tolerating the damage a
half-trained model tends to produce.
"""

# In[ ]
from kgtext.codec import Direction, augment_shuffle, delinearize, linearize, prefix_task
from kgtext.model import KnowledgeGraph, Triple

g = KnowledgeGraph((
    Triple("Super Capers", "starring", "Michael Rooker"),
    Triple("Super Capers", "runtime", "98.0"),
))
tokens = linearize(g)
print(" ".join(tokens))
print(" ".join(prefix_task(tokens, Direction.G2T)))

# In[ ]
"""
Parsing is total: it never raises. Chunks that do not look like
``<S> subject <P> predicate <O> object`` are reported as dropped spans and the
rest of the sequence is still used.
"""
broken = "<S> Super Capers <P> starring <S> Super Capers <P> runtime <O> 98.0 <O> minutes".split()
report = delinearize(broken)
print(report.graph.to_lists())
print([" ".join(broken[a:b]) for a, b in report.dropped_fragments], report.well_formed)

# In[ ]
"""
Triple order carries no meaning, so training data can be augmented with
seeded reorderings. The first element is always the original order.
"""
for variant in augment_shuffle(g, 2, seed=11):
    print([t.predicate for t in variant])
