"""Subjective knowledge acquisition toolkit.

Pipeline: extract candidate property/type pairs from a tagged corpus, map
them onto KB classes, build the resemble graph, select the most
inference-productive pairs, collect opinions through multiple-choice tasks
(simulated or served over HTTP), generalize with per-pair classifiers, and
saturate the facts through synonym/antonym inference into an enriched KB.
"""

__version__ = "0.1.0"

from .kb import KnowledgeBase, Triple, load_kb
from .lexicon import Lexicon, load_lexicon
from .pairs import STPair
from .resemble import ResembleEdge, STGraph, build_graph, resemble

__all__ = [
    "KnowledgeBase",
    "Lexicon",
    "ResembleEdge",
    "STGraph",
    "STPair",
    "Triple",
    "build_graph",
    "load_kb",
    "load_lexicon",
    "resemble",
    "__version__",
]
