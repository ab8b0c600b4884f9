"""Extraction sidecar: model-backed batch jobs around the curation pipeline.

The pipeline and this package never import each other; they meet only in
files. The sidecar writes the binary embedding matrix format, per-image
OCR JSON in an engine's native dialect, caption JSONL, classifier score
JSONL, and resized images, and owns every model runtime needed to do so.
"""

__version__ = "0.1.0"

from .errors import BackendUnavailable, JobError, SidecarError
from .jobs import ExtractJob, job_from_dict, load_job, read_manifest
from .ops import report_path, run_job
from .trfg import read_matrix, write_matrix

__all__ = [
    "BackendUnavailable",
    "ExtractJob",
    "JobError",
    "SidecarError",
    "job_from_dict",
    "load_job",
    "read_manifest",
    "read_matrix",
    "report_path",
    "run_job",
    "write_matrix",
]
