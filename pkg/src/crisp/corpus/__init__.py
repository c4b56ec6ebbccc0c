"""Citation graph model, scholarly-API retrieval, and dataset ingestion."""

from .cache import ResponseCache
from .client import (
    ApiError,
    EmptyReferenceListError,
    HttpxTransport,
    NotFoundError,
    RetryableApiError,
    ScholarClient,
    TokenBucket,
)
from .ground_truth import (
    GroundTruthLoad,
    IngestionReport,
    load_ground_truth,
    write_ground_truth_jsonl,
)
from .model import (
    CitingPaperBundle,
    GroundTruthRecord,
    PaperRecord,
    ReferenceEntry,
    dedupe_references,
    read_bundles_jsonl,
    write_bundles_jsonl,
)

__all__ = [
    "ApiError",
    "CitingPaperBundle",
    "EmptyReferenceListError",
    "GroundTruthLoad",
    "GroundTruthRecord",
    "HttpxTransport",
    "IngestionReport",
    "NotFoundError",
    "PaperRecord",
    "ReferenceEntry",
    "ResponseCache",
    "RetryableApiError",
    "ScholarClient",
    "TokenBucket",
    "dedupe_references",
    "load_ground_truth",
    "read_bundles_jsonl",
    "write_bundles_jsonl",
    "write_ground_truth_jsonl",
]
