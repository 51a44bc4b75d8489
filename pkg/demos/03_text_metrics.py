"""
Text metrics
============

Four reference-based scores, all usable as rewards. Sentence-level BLEU with
add-one smoothing stays informative on short outputs where plain BLEU
collapses to zero.
"""

# In[ ]
from kgtext.text_metrics import ScoredPair, chrf_pp, corpus_bleu, meteor_lite, sentence_bleu_smoothed

pairs = [
    ScoredPair("the cat sat on the mat", ["the cat is on the mat"]),
    ScoredPair("George Cary was Dean of Exeter", ["George Cary served as Dean of Exeter", "Cary was dean at Exeter"]),
]
for p in pairs:
    print(f"{p.hypothesis!r}")
    print("  bleu", round(corpus_bleu([p]), 4), " smoothed", round(sentence_bleu_smoothed(p), 4),
          " chrF++", round(chrf_pp([p]), 4), " meteor-lite", round(meteor_lite(p), 4))

# In[ ]
"""
METEOR-lite also matches words by stem, and a perfect match on a short
sentence still pays a small fragmentation penalty.
"""
print(meteor_lite(ScoredPair("cats sit", ["cat sits"])))
print(meteor_lite(ScoredPair("one two three four", ["one two three four"])))
