"""Double JPEG compression detection from DCT-coefficient transition features."""

from ._core import (
    COMBINED_DIM,
    GLOBAL_DIM,
    CoefficientPlane,
    Detector,
    DjdError,
    combined_feature,
    compress_once,
    compress_twice,
    decompress,
    global_feature,
    parse_jpeg,
    quant_table,
    run_cli,
    synth_image,
    write_jpeg,
)

__all__ = [
    "COMBINED_DIM",
    "GLOBAL_DIM",
    "CoefficientPlane",
    "Detector",
    "DjdError",
    "combined_feature",
    "compress_once",
    "compress_twice",
    "decompress",
    "global_feature",
    "parse_jpeg",
    "quant_table",
    "run_cli",
    "synth_image",
    "write_jpeg",
    "read_plane",
]


def read_plane(path):
    """Coefficient plane of a baseline JPEG file on disk."""
    with open(path, "rb") as f:
        return parse_jpeg(f.read())
