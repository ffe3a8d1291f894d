"""Toolkit for scoring LLM-assisted analysis of forensic timelines.

The package covers the full loop: parse Plaso-style supertimeline CSV
files, derive ground truth (grep matches, keyword detections, high-level
event summaries), drive a chat-completions model in live or replay mode,
and score candidate outputs with BLEU and ROUGE.
"""

__version__ = "0.1.0"
