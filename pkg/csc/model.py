"""
Module: csc.model
Description:
    Layered convolutional sparse coding with maxfun pooling: layer specs, the
    chained model, pooling of codes and the forward pass that solves one
    pursuit per layer against the previous pooled output.

    A code is pooled as N spatial positions x m1 channels with the 1-D maxfun
    applied per channel; the pooled map is flattened position-major, so the
    next layer sees a signal of length out_len * m1.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple

import numpy as np

from core.lattice import Vec, as_vec
from csc.dictionary import ConvDictionary, build_dict
from csc.pursuit import pursuit_greedy, pursuit_oracle
from csc.sparse import SparseCode
from pooling.grid import MaxfunConfig, PoolGrid1D, make_grid_1d
from pooling.operators import pool_maxfun_1d
from utils.errors import InfeasibleError, ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LayerSpec:
    """One layer: dictionary D_i, pooling (window, stride, radii), lambda_i, eps_i."""

    dictionary: ConvDictionary
    window: int
    stride: int
    pool: MaxfunConfig
    lam: int = 1
    eps: float = 0.0

    def __post_init__(self):
        if self.lam < 1:
            raise ValidationError(f"INFEASIBLE_SPARSITY: lambda={self.lam} < 1")
        if self.eps < 0:
            raise ValidationError(f"BAD_TOLERANCE: eps={self.eps}")
        self.pool.validate_for_window(self.window)
        make_grid_1d(self.dictionary.N, self.window, self.stride)

    @property
    def grid(self) -> PoolGrid1D:
        return make_grid_1d(self.dictionary.N, self.window, self.stride)

    @property
    def pooled_len(self) -> int:
        return self.grid.out_len * self.dictionary.m1


@dataclass(frozen=True)
class DcppModel:
    layers: Tuple[LayerSpec, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if not layers:
            raise ValidationError("EMPTY_MODEL: at least one layer is required")
        for i in range(1, len(layers)):
            expected = layers[i - 1].pooled_len
            if layers[i].dictionary.N != expected:
                logger.error(f"[CSC] Layer {i + 1} input length mismatch")
                raise ValidationError(
                    f"LAYER_CHAIN_MISMATCH: layer {i + 1} has N={layers[i].dictionary.N}, "
                    f"layer {i} pools to {expected}"
                )

    @property
    def input_len(self) -> int:
        return self.layers[0].dictionary.N


@dataclass
class DcppResult:
    codes: List[SparseCode] = field(default_factory=list)
    pooled: List[Vec] = field(default_factory=list)
    infeasible_layers: List[int] = field(default_factory=list)


# (1-based layer index, layer, input signal) -> code
Solver = Callable[[int, LayerSpec, Vec], SparseCode]


def pool_code(code: SparseCode, layer: LayerSpec) -> Vec:
    """Per-channel 1-D maxfun of a code, flattened position-major."""
    if code.N != layer.dictionary.N or code.m1 != layer.dictionary.m1:
        raise ValidationError(f"SHAPE_MISMATCH: code N={code.N}, m1={code.m1} vs layer dictionary")
    out = pool_maxfun_1d(code.blocks, layer.grid, layer.pool)
    return out.values.reshape(-1)


def oracle_solver(supports: Sequence[Sequence[int]]) -> Solver:
    """Solver that runs oracle least squares on the given per-layer supports."""

    def solve(index: int, layer: LayerSpec, signal: Vec) -> SparseCode:
        return pursuit_oracle(layer.dictionary, signal, supports[index - 1])

    return solve


def greedy_solver(nonneg: bool = True) -> Solver:
    """Solver that runs the stripe-constrained greedy pursuit with each layer's lambda and eps."""

    def solve(index: int, layer: LayerSpec, signal: Vec) -> SparseCode:
        return pursuit_greedy(layer.dictionary, signal, layer.lam, layer.eps, nonneg=nonneg)

    return solve


def dcpp_forward(signal, model: DcppModel, solver: Solver, strict: bool = True) -> DcppResult:
    """
    Solves the layered pursuit problem front to back.

    Args:
        signal: Input vector of length ``model.input_len``.
        model (DcppModel): Layers.
        solver (Solver): Per-layer pursuit.
        strict (bool): Re-raise solver infeasibility. Otherwise continue with the
            solver's best-effort code and record the layer index.

    Raises:
        InfeasibleError: Solver infeasibility (strict mode) or a code with
            negative entries that cannot be pooled; ``.layer`` is 1-based.
    """
    current = as_vec(signal)
    if current.size != model.input_len:
        raise ValidationError(f"LENGTH_MISMATCH: input {current.size} vs model N={model.input_len}")

    result = DcppResult()
    for index, layer in enumerate(model.layers, start=1):
        try:
            code = solver(index, layer, current)
        except InfeasibleError as e:
            if strict or e.code is None:
                raise InfeasibleError(f"LAYER_{index}: {e}", layer=index, code=e.code) from e
            logger.warning(f"[CSC] Layer {index} infeasible; continuing with best-effort code")
            result.infeasible_layers.append(index)
            code = e.code

        if np.any(code.gamma < 0):
            raise InfeasibleError(
                f"NEGATIVE_CODE: layer {index} code has {int(np.count_nonzero(code.gamma < 0))} negative "
                "entries and cannot be pooled",
                layer=index,
                code=code,
            )
        pooled = pool_code(code, layer)
        result.codes.append(code)
        result.pooled.append(pooled)
        current = pooled
    return result


def build_model(N: int, layers: Sequence[dict]) -> DcppModel:
    """
    Builds a model from plain settings.

    Each entry holds ``local`` (n0 x m1), ``window``, ``stride``, ``r_min``,
    ``b``, ``centered`` and ``lambda``; a layer's signal length is the
    previous layer's pooled length.
    """
    if not layers:
        raise ValidationError("EMPTY_MODEL: at least one layer is required")
    specs = []
    length = int(N)
    for i, layer in enumerate(layers, start=1):
        try:
            spec = LayerSpec(
                dictionary=build_dict(layer["local"], length),
                window=int(layer["window"]),
                stride=int(layer["stride"]),
                pool=MaxfunConfig(
                    r_min=int(layer.get("r_min", 1)),
                    b=int(layer.get("b", 1)),
                    centered=bool(layer.get("centered", True)),
                ),
                lam=int(layer.get("lambda", 1)),
            )
        except KeyError as e:
            raise ValidationError(f"MISSING_LAYER_KEY: layer {i} needs {e}") from e
        except ValidationError as e:
            raise ValidationError(f"LAYER_{i}: {e}") from e
        specs.append(spec)
        length = spec.pooled_len
    return DcppModel(layers=tuple(specs))
