"""Contraction clustering (RASTER) for point batches and evolving streams."""
from .batch import BatchParams, accumulate, cluster_tiles, raster, raster_prime, significant_tiles
from .errors import (
    ConfigError,
    ConsistencyError,
    LateRecordError,
    ParseError,
    PipelineError,
    ProtocolError,
    RejectedInputError,
    SRasterError,
)
from .grid import CHEBYSHEV, MANHATTAN, Metric, neighbors, project, rescale
from .nodes import Add, AlphaNode, ClusterRow, Expire, Forward, KappaNode, Recluster, Remove, StreamRecord, project_record
from .pipeline import BarrierState, Pipeline, PipelineConfig, partition_key, run_pipeline

__version__ = "0.1.0"
