"""Dataset ingestion, synthetic generation, splits, and feature caches."""
from .cache import FeatureCache, cache_features, cache_lookup
from .ingest import ingest_csv_directory
from .manifest import DatasetManifest, MultimodalSample, load_manifest
from .splits import SplitSpec, make_split
from .synthetic import SynthConfig, synth_generate

__all__ = [
    "DatasetManifest",
    "FeatureCache",
    "MultimodalSample",
    "SplitSpec",
    "SynthConfig",
    "cache_features",
    "cache_lookup",
    "ingest_csv_directory",
    "load_manifest",
    "make_split",
    "synth_generate",
]
