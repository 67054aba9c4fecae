# %% [markdown]
# # Coherence scoring and boundary inference
#
# Segmentation is a two-step pipeline: score every consecutive utterance
# pair with a coherence backend, then place boundaries at sharp coherence
# valleys. The depth of the valley at interval i is
#
#     dp_i = (hl(i) + hr(i) - 2 c_i) / 2
#
# where hl/hr are the peaks reached climbing left/right while scores keep
# strictly increasing, and the boundary threshold is tau = mean - stddev/2
# over the dialogue's depth scores.

# %%
from dialseg import Dialogue, LexicalScorer, Utterance, depth_profile, score_dialogue, segment

dialogue = Dialogue(
    id="liability-insurance",
    utterances=(
        Utterance("For how long should the liability insurance coverage remain in effect?"),
        Utterance("As long as the registration of your vehicle remains valid."),
        Utterance("Does this liability insurance apply for motorcycles too?"),
        Utterance("There are some exceptions for motorcycles."),
        Utterance("Do the names on the registration application and the identification card match?"),
        Utterance("Yes, the names must match in both documents."),
        Utterance("Can I submit copies or faxes of my identification card to the DMV?"),
        Utterance("Yes, but the card will be rejected if the barcode reader cannot scan the barcode."),
    ),
)

profile = score_dialogue(LexicalScorer(), dialogue)
print("coherence:", [round(c, 3) for c in profile.scores])

# %%
dp = depth_profile(profile)
print("depths:   ", [round(d, 3) for d in dp.depths])
print(f"tau = {dp.mean:.3f} - {dp.stddev:.3f}/2 = {dp.threshold:.3f}")

prediction = segment(profile)
print("boundaries after utterances:", sorted(prediction.boundaries))

# %% [markdown]
# ## Pluggable backends
#
# The lexical backend is corpus-free TF-IDF cosine. A word-embedding backend
# pools token vectors and maps cosine into [0, 1]; an external backend calls
# any server speaking the `/score` wire protocol (see the protocol demo in
# the README). All backends produce the same `CoherenceProfile` shape, so
# the segmenter does not care which one produced the scores.

# %%
import io

from dialseg import EmbeddingScorer, load_embedding_table

vectors = io.StringIO(
    "insurance 0.9 0.1 0.0\n"
    "liability 0.8 0.2 0.0\n"
    "registration 0.7 0.2 0.1\n"
    "motorcycles 0.6 0.4 0.0\n"
    "names 0.1 0.9 0.1\n"
    "match 0.2 0.8 0.2\n"
    "card 0.1 0.2 0.9\n"
    "barcode 0.0 0.1 0.9\n"
    "dmv 0.1 0.3 0.8\n"
)
table = load_embedding_table(vectors)
embedding_scorer = EmbeddingScorer(table)
emb_profile = score_dialogue(embedding_scorer, dialogue)
print("embedding coherence:", [round(c, 3) for c in emb_profile.scores])
print("embedding boundaries:", sorted(segment(emb_profile).boundaries))
print("pairs with no known tokens (scored 0.5):", embedding_scorer.oov_pairs)

# %% [markdown]
# ## The random baseline
#
# For reference experiments: draw a boundary count b uniformly from
# {0..k-1}, then mark each interval independently with probability b/k.
# Fully reproducible under a seeded generator.

# %%
import numpy as np

from dialseg import random_segment

rng = np.random.default_rng(7)
for _ in range(3):
    print("random:", sorted(random_segment(len(dialogue), rng, dialogue.id).boundaries))
