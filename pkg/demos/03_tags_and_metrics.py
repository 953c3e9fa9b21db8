"""
Reference tagging and the evaluation metrics
============================================

Shows the <Term> tag transform round-tripping, then scores a toy corpus
with Hits@N, term success rate, the ASR retention filter, and the
contrastive loss.
"""

import math

from termscope import (
    LossCase,
    RetrievalEvalCase,
    TsrCase,
    asr_filter,
    contrastive_loss,
    hits_at_n,
    levenshtein,
    strip_tags,
    tag_reference,
    term_success_rate,
)

# --- tagging -----------------------------------------------------------

reference = "The software utilizes NLP technology"
tagged = tag_reference(reference, ["NLP"])
print(f"tagged:   {tagged.text}")
print(f"stripped: {strip_tags(tagged.text)}")
assert strip_tags(tagged.text) == reference

# CJK references work the same way
cjk = tag_reference("这句话提到自然语言处理和变换器", ["自然语言处理", "变换器"])
print(f"tagged:   {cjk.text}")

# --- retrieval metrics -------------------------------------------------

cases = [
    RetrievalEvalCase("utt-0", frozenset({"A", "B"}), ("B", "C", "A")),
    RetrievalEvalCase("utt-1", frozenset({"D"}), ("D", "E")),
]
for n in (1, 2, 3):
    print(f"hits@{n} = {hits_at_n(cases, n):.4f}")

# --- translation metrics -----------------------------------------------

hyps = [TsrCase("utt-0", "the <Term> NLP stack ships", ("NLP", "stack", "GPU"))]
print(f"term success rate = {term_success_rate(hyps):.4f}")

print(f"levenshtein(kitten, sitting) = {levenshtein('kitten', 'sitting')}")
print(f"filter('Neural Network', 'neural netwrk') -> "
      f"{asr_filter('Neural Network', 'neural netwrk').value}")

# --- contrastive loss --------------------------------------------------

# positive tied with four negatives: softmax mass 1/5, loss = ln 5
tied = contrastive_loss(LossCase(sim_pos=0.9, sim_negs=(0.9,) * 4))
print(f"tied loss = {tied:.6f}  (ln 5 = {math.log(5):.6f})")
print(f"separated loss = {contrastive_loss(LossCase(0.9, (-0.9, -0.8))):.6f}")
