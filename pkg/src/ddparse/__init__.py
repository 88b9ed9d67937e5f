"""Discourse dependency parsing with a Sent-First pipeline.

The toolkit builds document-level dependency trees over Elementary
Discourse Units (EDUs) in two stages: an arc-eager transition parser
runs inside each sentence, then again over the sequence of sentence
roots, and the two levels are assembled into one tree.  Relations are
assigned by stacked sequence labeling over EDU-pair representations.
A bounds module exhaustively verifies the search-space reduction of
the Sent-First restriction on small documents.
"""

__version__ = "0.1.0"
