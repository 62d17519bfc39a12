"""Expert finding over author-publication corpora: topic-model retrieval of
candidate authors, coauthorship-graph scoring, and Markov-chain rank fusion."""

__version__ = "0.1.0"
