"""State spaces: topology, bounds, metrics, interpolation and sampling."""

from .core import (
    Kind,
    SpaceDescriptor,
    as_state,
    compound,
    discrete,
    distance,
    distance_trusted,
    distance_many,
    dubins,
    enforce_bounds,
    flat_bounds,
    interpolate,
    interpolate_many,
    real_vector,
    reeds_shepp,
    sample_gaussian,
    sample_uniform,
    satisfies_bounds,
    se2,
    so2,
    states_equal,
    steer_shortest,
    time_augmented,
    wrap_angle,
)
from .steering import SteeredPath

__all__ = [
    "Kind", "SpaceDescriptor", "SteeredPath", "as_state", "compound", "discrete", "distance", "distance_trusted",
    "distance_many", "dubins", "enforce_bounds", "flat_bounds", "interpolate", "interpolate_many", "real_vector",
    "reeds_shepp", "sample_gaussian", "sample_uniform", "satisfies_bounds", "se2", "so2",
    "states_equal", "steer_shortest", "time_augmented", "wrap_angle",
]
