from .corpus import (
    Corpus,
    DatasetManifest,
    ImbalanceSpec,
    InvalidManifestError,
    LabeledImage,
    induce_imbalance,
    retained_count,
)
from .ingest import build_corpus, ingest_idx, ingest_png_directory
from .streams import MixedBatchStream, PairedDomainStream, SingleBatchStream
from .synthetic import build_synthetic_corpus, render_item

__all__ = [
    "Corpus",
    "DatasetManifest",
    "ImbalanceSpec",
    "InvalidManifestError",
    "LabeledImage",
    "MixedBatchStream",
    "PairedDomainStream",
    "SingleBatchStream",
    "build_corpus",
    "build_synthetic_corpus",
    "induce_imbalance",
    "ingest_idx",
    "ingest_png_directory",
    "render_item",
    "retained_count",
]
