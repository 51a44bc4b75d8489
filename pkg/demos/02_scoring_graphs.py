"""
Scoring generated graphs
========================

Candidate triples are paired with reference triples by a maximum-weight
assignment, then every pair is credited under four match modes, from the
strict (same string in the same slot) to the partial (half credit for enough
token overlap).
"""

# In[ ]
from kgtext.graph_metrics import align_graphs, brute_force_alignment, score_graphs
from kgtext.model import KnowledgeGraph, Triple

ref = KnowledgeGraph((
    Triple("1968 Bahamian general election", "point in time", "10 April 1968"),
    Triple("1968 Bahamian general election", "country", "The Bahamas"),
))
cand = KnowledgeGraph((
    Triple("1968 Bahamian general election", "country", "Bahamas"),
    Triple("1968 Bahamian general election", "point in time", "10 April 1968"),
))
for mode, s in score_graphs(cand, ref).as_dict().items():
    print(f"{mode:9s} P={s['precision']:.3f} R={s['recall']:.3f} F1={s['f1']:.3f}")

# In[ ]
res = align_graphs(cand, ref)
print(res.pairs)
for mode, matrix in res.score_matrix.items():
    print(mode.value, matrix.tolist())

# In[ ]
"""
The exhaustive search is the reference for small graphs and agrees with the
assignment solver. Beyond eight triples only the solver is usable.
"""
import time

print(brute_force_alignment(cand, ref).total_score == res.total_score)
big = KnowledgeGraph(tuple(Triple(f"e{i}", f"r{i % 5}", f"v{i}") for i in range(50)))
t0 = time.perf_counter()
align_graphs(big, KnowledgeGraph(tuple(reversed(big.triples))))
print(f"50 x 50 alignment in {1000 * (time.perf_counter() - t0):.1f} ms")
