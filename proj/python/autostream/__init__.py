"""AutoML pipelines on drifting data streams."""

from ._core import (
    __version__,
    concept_distance,
    eddm_replay,
    generate,
    run,
    strategies,
)

__all__ = ["__version__", "concept_distance", "eddm_replay", "generate", "run", "strategies"]
