from core.lattice import (
    Image,
    Mat,
    Vec,
    as_image,
    as_vec,
    check_nonnegative,
    devectorize,
    frob_norm,
    vectorize,
)

__all__ = [
    "Image",
    "Mat",
    "Vec",
    "as_image",
    "as_vec",
    "check_nonnegative",
    "devectorize",
    "frob_norm",
    "vectorize",
]
