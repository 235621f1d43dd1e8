from pooling.grid import MaxfunConfig, PoolGrid, PoolGrid1D, make_grid, make_grid_1d, subsquare
from pooling.operators import (
    MaxfunProfile,
    PoolOutput,
    Provenance,
    maxfun_profile,
    pool_avg,
    pool_max,
    pool_maxfun,
    pool_maxfun_1d,
    pool_mixed,
    pool_stochastic,
    reduce_profile,
)

__all__ = [
    "MaxfunConfig",
    "MaxfunProfile",
    "PoolGrid",
    "PoolGrid1D",
    "PoolOutput",
    "Provenance",
    "make_grid",
    "make_grid_1d",
    "maxfun_profile",
    "pool_avg",
    "pool_max",
    "pool_maxfun",
    "pool_maxfun_1d",
    "pool_mixed",
    "pool_stochastic",
    "reduce_profile",
    "subsquare",
]
