"""Fibre-product geometry for HNN extensions of Z^n.

Builds the Bass-Serre tree and a discretized warped strip space for a
checked HNN presentation, assembles the height-matched fibre product
with its product metric and explicit connecting paths, and estimates
compression exponents of concrete embeddings into l^p.

Quick tour:

    >>> from hnngeo import preset, reduce_string, to_string
    >>> pres = preset("bs:1:2")
    >>> to_string(reduce_string(pres, "t^-1 x^2 t"))
    'x'

Module map: presentation (HNN data and coset tables), group_core
(reduced forms and word metric), bass_serre (tree patches, geodesics,
height-monotone rays), y_space (strip metric grid; kernels in
_kernels), millefeuille (fibre product, two-metric comparison, group
action probes), compression (embeddings and exponent estimates), cli
(batch front end).
"""

from .presentation import Presentation, preset, validate_presentation, load, parse_word
from .group_core import (
    GroupElement,
    affine_oracle,
    ball,
    britton_reduce,
    identity,
    inverse,
    j_N,
    multiply,
    reduce_string,
    t_exponent,
    to_string,
    word_length,
)
from .bass_serre import (
    TreeBall,
    TreeEdge,
    TreePoint,
    TreeVertex,
    ascending_ray_beta,
    act_vertex,
    base_vertex,
    geodesic_sigma,
    height_c,
    neighbors,
    tree_distance,
    vertex_of,
)
from .y_space import YModel, YPoint, act_y, height_b, vertical_ray_alpha, y_distance, y_geodesic
from .millefeuille import (
    MPoint,
    QIFit,
    act_m,
    base_mpoint,
    connect_theta,
    dM_upper,
    lemma_experiment,
    make_mpoint,
    normalize_to_fundamental_domain,
    orbit_qi_fit,
    product_distance,
    properness_probe,
)
from .compression import (
    EmbeddingSpec,
    ExponentEstimate,
    compose_min,
    embed_group,
    embed_tree,
    estimate_exponent,
)

__all__ = [
    "Presentation", "preset", "validate_presentation", "load", "parse_word",
    "GroupElement", "affine_oracle", "ball", "britton_reduce", "identity",
    "inverse", "j_N", "multiply", "reduce_string", "t_exponent", "to_string",
    "word_length",
    "TreeBall", "TreeEdge", "TreePoint", "TreeVertex", "ascending_ray_beta",
    "act_vertex", "base_vertex", "geodesic_sigma", "height_c", "neighbors",
    "tree_distance", "vertex_of",
    "YModel", "YPoint", "act_y", "height_b", "vertical_ray_alpha",
    "y_distance", "y_geodesic",
    "MPoint", "QIFit", "act_m", "base_mpoint", "connect_theta", "dM_upper",
    "lemma_experiment", "make_mpoint", "normalize_to_fundamental_domain",
    "orbit_qi_fit", "product_distance", "properness_probe",
    "EmbeddingSpec", "ExponentEstimate", "compose_min", "embed_group",
    "embed_tree", "estimate_exponent",
]
