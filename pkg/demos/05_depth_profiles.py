# %% [markdown]
# # Depth-score variance across scorer backends
#
# A useful diagnostic for comparing coherence backends: the average (over
# dialogues) variance of each dialogue's depth scores. Backends that
# discriminate topical relatedness more sharply produce more pronounced
# valleys, hence larger depth variance; weak surface-feature backends yield
# depth scores close to each other.

# %%
import numpy as np

from dialseg import EmbeddingScorer, LexicalScorer, depth_profile, score_dialogue
from dialseg.metrics import depth_variance
from dialseg.synth import one_hot_embedding_table, segmentation_corpus

corpus = segmentation_corpus(300, np.random.default_rng(20240807))
table = one_hot_embedding_table(corpus, 8)

backends = {
    "TextTiling (TF-IDF)": LexicalScorer(),
    "TeT + Embedding": EmbeddingScorer(table),
}

# %%
variances = {}
for name, scorer in backends.items():
    profiles = [depth_profile(score_dialogue(scorer, item.dialogue)) for item in corpus]
    variances[name] = depth_variance(profiles)

width = max(len(n) for n in variances)
for name, value in variances.items():
    print(f"{name.ljust(width)}  {value:.4f}")

# %% [markdown]
# The TF-IDF backend's valleys are diluted by the novel words each turn
# introduces, so its depth scores cluster; the embedding backend sees
# through surface variation (every topic word maps to its topic vector) and
# separates the same dialogues much more sharply. Per-dialogue depth
# reports for plotting these profiles come from `dialseg segment` or, in
# code, straight from `depth_profile`.

# %%
example = corpus[0]
profile = score_dialogue(backends["TeT + Embedding"], example.dialogue)
dp = depth_profile(profile)
print("gold boundaries:", sorted(example.boundaries))
for i, (c, d) in enumerate(zip(profile.scores, dp.depths)):
    bar = "#" * int(round(d * 40))
    marker = " <- gold" if i in example.boundaries else ""
    print(f"interval {i:>2}  c={c:.2f}  dp={d:.2f} {bar}{marker}")
