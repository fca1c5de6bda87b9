"""Surface correspondence toolkit: geodesics, embedding losses, retrieval
metrics, and the full command-line pipelines, backed by the C++ core."""

try:
    # Installed layout: the extension lives inside the package.
    from ._surfcorr import (
        ArgError,
        IoError,
        ParseError,
        ValidationError,
        geodesic_matrix,
        loss_id,
        loss_triplet,
        make_scene,
        mesh_counts,
        mha,
        reid_eval,
        run_cli,
    )
except ImportError:
    # Development layout: the extension sits on sys.path next to the build.
    from _surfcorr import (
        ArgError,
        IoError,
        ParseError,
        ValidationError,
        geodesic_matrix,
        loss_id,
        loss_triplet,
        make_scene,
        mesh_counts,
        mha,
        reid_eval,
        run_cli,
    )

__all__ = [
    "ArgError",
    "IoError",
    "ParseError",
    "ValidationError",
    "geodesic_matrix",
    "loss_id",
    "loss_triplet",
    "make_scene",
    "mesh_counts",
    "mha",
    "reid_eval",
    "run_cli",
]
