"""
Module: main
Description:
    Entry point for the maxfun experiments.
    Subcommands: ``pool`` (one pooling operator on one image or feature file),
    ``csc-verify`` (stability trials of a layered sparse coding model),
    ``classify`` (pooling comparison on a labelled corpus) and ``selftest``
    (verification suites). Every run loads and validates its configuration
    before any work, logs to console and a rotating file and sends webhook
    notices on start, success and failure.

    Exit codes: 0 success, 1 validation error, 2 runtime failure,
    3 verification failure.
"""
import argparse
import logging
import os
import sys
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from checks.suites import run_all
from classify.experiment import regime_settings, run_pooling_comparison
from classify.features import POOL_METHODS
from csc.model import build_model
from csc.stability import check_preconditions, epsilon_recursion, verify_stability
from etl.extract import is_feature_file, load_image
from etl.load import read_features, write_csv, write_features, write_text
from etl.transform import preprocess
from pooling.grid import MaxfunConfig, make_grid
from pooling.operators import (
    PoolOutput,
    check_alpha,
    pool_avg,
    pool_max,
    pool_maxfun,
    pool_mixed,
    pool_stochastic,
)
from utils.alert import send_run_alert
from utils.config import RunConfig, load_run_config
from utils.errors import ValidationError
from utils.logger import setup_logger
from utils.parallel import resolve_threads

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_VERIFICATION = 3


def _positive_int(cfg: RunConfig, key: str, minimum: int = 1) -> int:
    value = cfg.get(key)
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ValidationError(f"BAD_CONFIG_VALUE: {key}={value!r} must be an integer >= {minimum}")
    return value


def _maxfun_config(cfg: RunConfig) -> MaxfunConfig:
    return MaxfunConfig(
        r_min=_positive_int(cfg, "r_min"),
        b=_positive_int(cfg, "b"),
        centered=cfg["method"] == "maxfun",
    )


def validate_pool(cfg: RunConfig) -> None:
    if not cfg["input"]:
        raise ValidationError("MISSING_INPUT: set pool.input")
    if not cfg["output"]:
        raise ValidationError("MISSING_OUTPUT: set pool.output")
    if cfg["method"] not in POOL_METHODS:
        raise ValidationError(f"UNKNOWN_METHOD: {cfg['method']!r} not in {POOL_METHODS}")
    window = _positive_int(cfg, "window")
    _positive_int(cfg, "stride")
    if cfg["method"] in ("maxfun", "maxfun_noncentered"):
        _maxfun_config(cfg).validate_for_window(window)
    if cfg["method"] == "mixed":
        check_alpha(cfg["alpha"])
    if cfg["preprocess"]:
        _positive_int(cfg, "resize")
    if cfg["provenance"] and cfg["method"] not in ("maxfun", "maxfun_noncentered"):
        raise ValidationError("PROVENANCE_UNAVAILABLE: provenance is only recorded by the maxfun methods")


def validate_csc(cfg: RunConfig) -> None:
    _positive_int(cfg, "trials")
    if cfg["solver"] not in ("oracle", "greedy"):
        raise ValidationError(f"UNKNOWN_SOLVER: {cfg['solver']!r}")
    if float(cfg["eps0"]) < 0:
        raise ValidationError(f"BAD_TOLERANCE: eps0={cfg['eps0']}")
    if len(cfg["amp_range"]) != 2:
        raise ValidationError(f"BAD_AMPLITUDE_RANGE: {cfg['amp_range']}")
    model = build_model(cfg["N"], cfg["layers"])
    check_preconditions(model, literal_mu1=bool(cfg["literal_mu1"]))
    epsilon_recursion(
        float(cfg["eps0"]),
        [layer.lam for layer in model.layers],
        [layer.dictionary.mu for layer in model.layers],
        literal_mu1=bool(cfg["literal_mu1"]),
    )


def validate_classify(cfg: RunConfig) -> None:
    if not cfg["dataset.fixture.enabled"]:
        manifest = cfg["dataset.manifest"]
        if not manifest or not os.path.exists(manifest):
            raise ValidationError(f"MISSING_DATASET: manifest {manifest!r} not found")
    if not cfg["regimes"]:
        raise ValidationError("EMPTY_REGIMES: configure at least one (window, stride) regime")
    for regime in cfg["regimes"]:
        if set(regime) != {"window", "stride"} or min(int(regime["window"]), int(regime["stride"])) < 1:
            raise ValidationError(f"BAD_REGIME: {regime}")
        regime_settings(regime, cfg.values)
    if not cfg["alpha_grid"]:
        raise ValidationError("EMPTY_GRID: classify.alpha_grid is empty")
    for alpha in cfg["alpha_grid"]:
        check_alpha(alpha)
    if not 0.0 < float(cfg["test_fraction"]) < 1.0:
        raise ValidationError(f"DEGENERATE_FRACTION: test_fraction={cfg['test_fraction']}")
    _positive_int(cfg, "cv_folds", minimum=2)
    _positive_int(cfg, "preprocess.target")
    _positive_int(cfg, "svm.epochs")
    if float(cfg["svm.reg_C"]) <= 0 or float(cfg["svm.learning_rate"]) <= 0:
        raise ValidationError(f"BAD_SVM_PARAMS: {cfg['svm']}")


def validate_selftest(cfg: RunConfig) -> None:
    for key in ("oracle_inputs", "sandwich_images", "nonexpansive_pairs", "monotone_inputs", "coherence_dicts", "stability_trials"):
        _positive_int(cfg, key)


def _pool(X: np.ndarray, cfg: RunConfig) -> PoolOutput:
    grid = make_grid(X.shape[-2], X.shape[-1], cfg["window"], cfg["stride"])
    method = cfg["method"]
    if method == "avg":
        return pool_avg(X, grid)
    if method == "max":
        return pool_max(X, grid)
    if method == "mixed":
        return pool_mixed(X, grid, cfg["alpha"])
    if method == "stochastic":
        return pool_stochastic(X, grid)
    return pool_maxfun(X, grid, _maxfun_config(cfg))


def provenance_frame(out: PoolOutput) -> pd.DataFrame:
    """One row per pooled cell: channel, cell indices, value, winning radius and center."""
    values = out.values if out.values.ndim == 3 else out.values[None]
    prov = out.provenance
    radius = prov.radius if prov.radius.ndim == 3 else prov.radius[None]
    rows = prov.center_row if prov.center_row.ndim == 3 else prov.center_row[None]
    cols = prov.center_col if prov.center_col.ndim == 3 else prov.center_col[None]
    c, k, l = np.meshgrid(*(np.arange(n) for n in values.shape), indexing="ij")
    return pd.DataFrame(
        {
            "channel": c.ravel(),
            "k": k.ravel(),
            "l": l.ravel(),
            "value": values.ravel(),
            "radius": radius.ravel(),
            "center_row": rows.ravel(),
            "center_col": cols.ravel(),
        }
    )


def cmd_pool(cfg: RunConfig) -> int:
    path = cfg["input"]
    if is_feature_file(path):
        X = read_features(path)
    else:
        X = load_image(path)
        if cfg["preprocess"]:
            X = preprocess(X, cfg["resize"])

    out = _pool(X, cfg)
    write_features(cfg["output"], out.values)
    if cfg["provenance"]:
        write_csv(cfg["provenance"], provenance_frame(out))
    print(f"pooled {X.shape} -> {out.values.shape} with {cfg['method']}; wrote {cfg['output']}")
    return EXIT_OK


def cmd_csc_verify(cfg: RunConfig) -> int:
    model = build_model(cfg["N"], cfg["layers"])
    seed = int(cfg["seed"])
    report = verify_stability(
        model,
        float(cfg["eps0"]),
        [seed + t for t in range(int(cfg["trials"]))],
        solver=cfg["solver"],
        amp_range=tuple(cfg["amp_range"]),
        literal_mu1=bool(cfg["literal_mu1"]),
        threads=resolve_threads(),
    )
    write_csv(cfg["output"], report.to_frame())
    print(
        f"stability: {report.trials} trials, pass rate {report.pass_rate:.4f} "
        f"(pooled-deviation bound {report.lemma_rate:.4f}); report {cfg['output']}"
    )
    return EXIT_OK if report.all_passed else EXIT_VERIFICATION


def cmd_classify(cfg: RunConfig) -> int:
    result = run_pooling_comparison(cfg.values, threads=resolve_threads())
    text = result.to_text()
    write_csv(cfg["output_csv"], result.table)
    write_text(cfg["output_txt"], text)
    if cfg["output_cv"]:
        write_csv(cfg["output_cv"], result.cv_log)
    print(f"pooling comparison ({result.n_train} train / {result.n_test} test)")
    print(text, end="")
    return EXIT_OK


def cmd_selftest(cfg: RunConfig, csc_cfg: RunConfig) -> int:
    results = run_all(cfg.values, csc_cfg.values)
    for result in results:
        print(result.summary())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFICATION


VALIDATORS: Dict[str, Callable[[RunConfig], None]] = {
    "pool": validate_pool,
    "csc-verify": validate_csc,
    "classify": validate_classify,
    "selftest": validate_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="maxfun", description="Maxfun pooling experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("pool", "apply one pooling operator to an image or feature file"),
        ("csc-verify", "run seeded stability trials of a layered sparse coding model"),
        ("classify", "compare pooling strategies on a labelled corpus"),
        ("selftest", "run the verification suites"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", dest="run_file", default=None, help="JSON run file merged over the defaults")
        p.add_argument(
            "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
            help="override one key, e.g. --set window=5 (repeatable)",
        )
    return parser


def run(command: str, run_file: Optional[str] = None, overrides: Sequence[str] = ()) -> int:
    """
    Executes one subcommand end to end.

    Flow:
        1. Load and validate the configuration (nothing else happens on failure).
        2. Run the subcommand.
        3. Notify the webhook of the outcome.

    Returns:
        int: Process exit code.
    """
    try:
        cfg = load_run_config(command, run_file=run_file, overrides=overrides)
        setup_logger(cfg.paths.get("log_file"))
        VALIDATORS[command](cfg)
        csc_cfg = load_run_config("csc-verify") if command == "selftest" else None
        if csc_cfg is not None:
            validate_csc(csc_cfg)
    except ValidationError as e:
        setup_logger()
        logger.error(f"[Config] {command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as e:
        setup_logger()
        logger.critical(f"[Config] {command}: {type(e).__name__} - {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME

    try:
        logger.info(f">>> {command} started")
        send_run_alert(f"{command} started", level="INFO")
        if command == "pool":
            code = cmd_pool(cfg)
        elif command == "csc-verify":
            code = cmd_csc_verify(cfg)
        elif command == "classify":
            code = cmd_classify(cfg)
        else:
            code = cmd_selftest(cfg, csc_cfg)

        if code == EXIT_OK:
            msg = f"{command} succeeded"
            logger.info(msg)
            send_run_alert(msg, level="INFO")
        else:
            msg = f"{command} finished with failed checks (exit {code})"
            logger.warning(msg)
            send_run_alert(msg, level="WARNING")
        return code

    except ValidationError as e:
        error_msg = f"{command} rejected: {e}"
        logger.error(error_msg)
        send_run_alert(error_msg, level="ERROR")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as e:
        error_msg = f"{command} failed: {type(e).__name__} - {e}"
        logger.critical(error_msg, exc_info=True)
        send_run_alert(error_msg, level="CRITICAL")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.command, args.run_file, args.overrides)


if __name__ == "__main__":
    sys.exit(main())
