from jspec.algebra.scalars import ExactComplex, to_exact
from jspec.algebra.linalg import (
    EigenCluster,
    EigenError,
    as_exact,
    as_float,
    charpoly_exact,
    cluster_values,
    ctranspose,
    det,
    eigen_clusters,
    eigen_decompose,
    eye,
    fro_norm,
    is_exact,
    is_hermitian,
)
from jspec.algebra.poly import (
    InterpolationError,
    MultiPoly,
    UniPoly,
    interpolate_homogeneous,
    poly_eval,
    uni_gcd,
    uni_roots,
)
