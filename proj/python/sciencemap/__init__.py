"""Embedding-space and citation-graph analysis of publication corpora.

Thin wrapper over the C++ core. Functions returning reports give plain dicts.
"""

import json as _json

from ._sciencemap import (
    CitationGraph,
    Corpus,
    EmbeddingStore,
    Error,
    PairSample,
    PcaModel,
    Record,
    SubjectCenters,
    SynthCorpus,
    __version__,
    build_graph,
    cosine_distance,
    embed_texts,
    explained_variance_curve,
    load_corpus,
    load_store,
    mock_embed,
    pca_fit,
    pearson,
    sample,
    sample_pairs,
    save_corpus,
    save_store,
    shortest_path_distance,
    subject_centers,
    synth_corpus,
)
from . import _sciencemap


def preprocess(corpus, min_abstract_chars=100):
    """Return (kept corpus, report dict)."""
    kept, report = _sciencemap._preprocess(corpus, min_abstract_chars)
    return kept, _json.loads(report)


def classify_soft(vector, centers, temperature=0.05):
    """Return {"temperature", "argmax", "probabilities": {subject: p}}."""
    return _json.loads(_sciencemap._classify_soft(vector, centers, temperature))


def correlate_distances(store, graph, sample, mode="undirected", threads=1):
    return _json.loads(_sciencemap._correlate_distances(store, graph, sample, mode, threads))


def kde_hdr_contours(points, levels=(0.25, 0.5, 0.75), bandwidth=None, grid_size=128):
    """Return (levels or None, notice). Each level has mass, threshold, area, rings."""
    return _sciencemap._kde_hdr_contours(list(points), list(levels), bandwidth, grid_size)


def run_command(command, settings=None, **kwargs):
    """Run one pipeline stage. Settings use dotted keys, e.g. {"embed.provider": "planted"}.

    Keyword arguments are merged in with "__" standing for "." (embed__provider="mock").
    """
    merged = {k: str(v) for k, v in (settings or {}).items()}
    merged.update({k.replace("__", "."): str(v) for k, v in kwargs.items()})
    return _json.loads(_sciencemap._run_command(command, merged))
