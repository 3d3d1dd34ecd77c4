"""Inhomogeneous Assouad-type observables on Bedford-McMullen carpets."""

from .carpet import (
    Carpet,
    assouad_dim,
    box_dim,
    carpet_from_counts,
    gamma,
    hausdorff_dim,
    is_uniform_fibres,
    new_carpet,
    render_depth,
)
from .deviation import INF, rate_function, rate_I
from .measure import BernoulliMeasure, bernoulli, column_uniform, max_entropy, mcmullen
from .symbolic import Code, scale_indices

__version__ = "0.1.0"
