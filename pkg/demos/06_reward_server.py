"""
Rewards over a pipe
===================

A training loop in another process can ask for rewards one JSON line at a
time. Here the server runs in-process over byte buffers; ``kgtext
reward-serve`` does the same over stdin/stdout, or over TCP with ``--port``.
"""

# In[ ]
import io
import json

from kgtext.server import serve_stream

requests = [
    {"id": "g2t-1", "direction": "g2t", "hypothesis": "alice knows bob .", "references": ["alice knows bob ."],
     "spec": [{"metric": "meteor_lite", "weight": 0.5}, {"metric": "bleu_smoothed", "weight": 0.5}]},
    {"id": "t2g-1", "direction": "t2g", "hypothesis": "<S> alice <P> knows <O> bob <S> bob <P>",
     "references": [["alice", "knows", "bob"], ["bob", "likes", "carol"]],
     "spec": [{"metric": "f1_exact", "weight": 1.0}]},
]
inp = io.BytesIO(b"".join(json.dumps(r).encode() + b"\n" for r in requests) + b"{broken\n")
out = io.BytesIO()
serve_stream(inp, out)
for line in out.getvalue().decode().splitlines():
    print(line)
