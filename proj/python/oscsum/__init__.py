"""Numerical kernels for twisted GL(3) x GL(2) exponential sums."""

from ._core import (
    CertificateError,
    DeltaExpansion,
    GL2Form,
    GL3Form,
    ValidationError,
    Window,
    __version__,
    delta_form,
    frak_c,
    frak_k,
    gl2_voronoi,
    gl3_voronoi,
    hecke_violations,
    kloosterman,
    ramanujan_sum,
    run,
    symmetric_square,
    twisted_sum,
)

__all__ = [
    "CertificateError",
    "DeltaExpansion",
    "GL2Form",
    "GL3Form",
    "ValidationError",
    "Window",
    "__version__",
    "delta_form",
    "frak_c",
    "frak_k",
    "gl2_voronoi",
    "gl3_voronoi",
    "hecke_violations",
    "kloosterman",
    "ramanujan_sum",
    "run",
    "symmetric_square",
    "twisted_sum",
]
