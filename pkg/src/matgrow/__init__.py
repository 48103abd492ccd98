"""Finite matroids, projective geometries over small fields and their projections."""

from .errors import BudgetExceeded, CertificateError
from .gf import FieldSpec, field_make, mat_rank, projective_points
from .matroid import (
    ExplicitMatroid,
    LinearMatroid,
    Matroid,
    MatroidError,
    closure,
    epsilon,
    flats,
    is_isomorphic,
    is_modular_pair,
    is_skew,
    is_weakly_round,
    local_conn,
    minorize,
    rank,
    simplify,
    uniform,
)
from .geometry import ModularCut, ProjectionCertificate, ag, enumerate_extensions, extend, paired_extension, pg, project, truncate

__version__ = "0.1.0"

__all__ = [
    "ag",
    "BudgetExceeded",
    "CertificateError",
    "closure",
    "enumerate_extensions",
    "epsilon",
    "ExplicitMatroid",
    "extend",
    "field_make",
    "FieldSpec",
    "flats",
    "is_isomorphic",
    "is_modular_pair",
    "is_skew",
    "is_weakly_round",
    "LinearMatroid",
    "local_conn",
    "mat_rank",
    "Matroid",
    "MatroidError",
    "minorize",
    "ModularCut",
    "paired_extension",
    "pg",
    "project",
    "ProjectionCertificate",
    "projective_points",
    "rank",
    "simplify",
    "truncate",
    "uniform",
]
