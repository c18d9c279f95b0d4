"""
MINT Feature Selection Toolkit
Command-line application

Simulates benchmark datasets, ranks genotype features with mRMR or its
transductive variant MINT, and cross-validates the rankings with ridge
regression.
"""

import json
import logging
import re
import sys
from datetime import datetime
from typing import Any, Dict, List, Optional, Sequence

import click

import config
from modules.dataset_io import AUTO, CONTINUOUS, GENOTYPE, Dataset, load_genotypes, load_labels, load_phenotype, write_dataset
from modules.errors import FoldError, ValidationError
from modules.harness import LAMBDA_GCV, METHOD_ALIASES, METHODS, ExperimentConfig, run_experiment, run_selection
from modules.infotheory import EQUAL_FREQUENCY, SCALED_ROUNDING, BinningSpec
from modules.report_generator import KIND_CV, ReportGenerator, timing_block
from modules.selection import MODE_MINT, MODES
from modules.simulate import CASES, NOISE_SCALES, SimSpec, simulate

logger = logging.getLogger("mint")

LOG_FORMAT = "%(asctime)s %(levelname)-8s %(name)s: %(message)s"
EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_VALIDATION = 2

_RANGE = re.compile(r"^\s*(\d+)\s*\.\.\s*(\d+)\s*(?::\s*(\d+)\s*)?$")


def parse_n_list(text: str) -> List[int]:
    """Parse "100,200,300" or "START..STOP[:STEP]" (inclusive, step 100 by default)."""
    match = _RANGE.match(text)
    if match:
        start, stop = int(match.group(1)), int(match.group(2))
        step = int(match.group(3)) if match.group(3) else 100
        if step < 1 or stop < start:
            raise ValidationError(f"invalid feature-count range '{text}'")
        return list(range(start, stop + 1, step))
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ValidationError(f"invalid feature-count list '{text}'") from None
    if not values:
        raise ValidationError("empty feature-count list")
    return values


def parse_methods(text: str) -> List[str]:
    methods = [part.strip() for part in text.split(",") if part.strip()]
    return [METHOD_ALIASES.get(method, method) for method in methods]


def _binning(bins: Optional[int], strategy: str = EQUAL_FREQUENCY) -> BinningSpec:
    if bins is not None and bins < 1:
        raise ValidationError(f"bin count must be >= 1, got {bins}")
    return BinningSpec(strategy, bins if strategy == EQUAL_FREQUENCY else None)


def _load(genotypes: str, phenotype: Optional[str], impute_mode: bool, feature_kind: str,
          labels: Optional[str] = None) -> Dataset:
    dataset = load_genotypes(genotypes, impute_mode=impute_mode, feature_kind=feature_kind)
    if phenotype is not None:
        dataset = load_phenotype(phenotype, dataset)
    if labels is not None:
        dataset = load_labels(labels, dataset)
    return dataset


def _write(document: Dict[str, Any], out: str, csv_path: Optional[str]):
    generator = ReportGenerator()
    if not generator.export_to_json(document, out):
        raise click.ClickException(f"could not write report to {out}")
    if csv_path and not generator.export_to_csv(document, csv_path):
        raise click.ClickException(f"could not write CSV summary to {csv_path}")
    click.echo(generator.generate_summary_text(document))


def _run_cv(inputs: Dict[str, Any], experiment: ExperimentConfig, threads: int,
            progress: bool) -> Dict[str, Any]:
    started = datetime.now()
    dataset = _load(inputs["genotypes"], inputs["phenotype"], inputs["impute_mode"],
                    inputs["feature_kind"], inputs.get("labels"))
    reports = run_experiment(dataset, experiment, n_jobs=threads, progress=progress)
    return ReportGenerator().build_cv_document(experiment, reports, inputs, timing_block(started, threads))


threads_option = click.option(
    "--threads", type=click.IntRange(min=1), default=config.DEFAULT_THREADS, envvar="MINT_THREADS",
    show_default=True, help="Worker threads (never changes reported numbers)",
)
progress_option = click.option("--progress/--no-progress", default=False, help="Show progress bars")
loading_options = [
    click.option("--genotypes", required=True, type=click.Path(dir_okay=False), help="Genotype CSV"),
    click.option("--phenotype", required=True, type=click.Path(dir_okay=False), help="Phenotype CSV"),
    click.option("--impute-mode", is_flag=True, help="Fill NA cells with the column mode"),
    click.option("--feature-kind", type=click.Choice([AUTO, GENOTYPE, CONTINUOUS]), default=AUTO,
                 show_default=True, help="How feature columns are typed and discretized"),
    click.option("--bins", type=int, default=None,
                 help="Equal-frequency bins for continuous columns and the target [default: ceil(sqrt(n))]"),
    click.option("--target-binning", type=click.Choice([EQUAL_FREQUENCY, SCALED_ROUNDING]),
                 default=EQUAL_FREQUENCY, show_default=True, help="Target discretization"),
]


def with_loading_options(command):
    for option in reversed(loading_options):
        command = option(command)
    return command


@click.group()
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              default=config.APP_LOG_LEVEL, show_default=True, help="Logging verbosity")
@click.version_option(config.TOOL_VERSION, prog_name="mint-select")
def cli(log_level: str):
    """MINT / mRMR feature selection for genomic prediction."""
    logging.basicConfig(format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(log_level.upper())


@cli.command("simulate")
@click.option("--case", "case", type=click.Choice(CASES), required=True, help="Benchmark case")
@click.option("--seed", type=int, default=config.DEFAULT_SEED, show_default=True, help="RNG seed")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory")
@click.option("--n-samples", type=int, default=None)
@click.option("--n-good", type=int, default=None, help="Case one good features")
@click.option("--good-noise-var", type=float, default=None)
@click.option("--n-seeds", type=int, default=None, help="Case two seed features")
@click.option("--seed-noise-var", type=float, default=None)
@click.option("--dups-per-seed", type=int, default=None)
@click.option("--dup-noise-var", type=float, default=None)
@click.option("--n-bad", type=int, default=None)
@click.option("--bad-noise-var", type=float, default=None)
@click.option("--noise-scale", type=click.Choice(NOISE_SCALES), default=None,
              help="Read noise parameters as variances (default) or standard deviations")
def simulate_command(case: str, seed: int, out: str, **overrides):
    """Write a seeded synthetic dataset."""
    spec = SimSpec.for_case(case, rng_seed=seed, **overrides)
    paths = write_dataset(simulate(spec), out)
    for role, path in paths.items():
        click.echo(f"{role}: {path}")


@cli.command("select")
@with_loading_options
@click.option("--method", type=click.Choice(MODES), default=MODE_MINT, show_default=True)
@click.option("--n", "n", type=int, required=True, help="Number of features to select")
@click.option("--test-genotypes", type=click.Path(dir_okay=False), default=None,
              help="Unlabeled genotype rows used for mint redundancy")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Report JSON path")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None, help="Extra CSV summary")
@threads_option
@progress_option
def select_command(genotypes, phenotype, impute_mode, feature_kind, bins, target_binning,
                   method, n, test_genotypes, out, csv_path, threads, progress):
    """Rank features on one labeled dataset."""
    started = datetime.now()
    if method == MODE_MINT and test_genotypes is None:
        logger.warning("mint without --test-genotypes has no unlabeled rows and is equivalent to mrmr")
    dataset = _load(genotypes, phenotype, impute_mode, feature_kind)
    test_dataset = None
    if test_genotypes is not None:
        test_dataset = load_genotypes(test_genotypes, impute_mode=impute_mode, feature_kind=dataset.feature_kinds[0])

    feature_binning = _binning(bins)
    target_spec = _binning(bins, target_binning)
    result, components = run_selection(dataset, method, n, test_dataset, feature_binning, target_spec,
                                       n_jobs=threads, progress=progress)
    settings = {
        "inputs": {"genotypes": genotypes, "phenotype": phenotype, "test_genotypes": test_genotypes,
                   "impute_mode": impute_mode, "feature_kind": feature_kind},
        "method": method,
        "n": n,
        "feature_binning": feature_binning.to_dict(),
        "target_binning": target_spec.to_dict(),
    }
    document = ReportGenerator().build_selection_document(
        result, dataset.feature_ids, components, settings, timing_block(started, threads)
    )
    _write(document, out, csv_path)


@cli.command("cv")
@with_loading_options
@click.option("--labels", type=click.Path(dir_okay=False), default=None,
              help="Ground-truth labels CSV for selection diagnostics")
@click.option("--methods", default="all,mrmr,mint", show_default=True,
              help=f"Comma list from {', '.join(METHODS)} ('all' for all-features)")
@click.option("--n-list", default="100..500", show_default=True,
              help="Feature counts: comma list or START..STOP[:STEP]")
@click.option("--folds", type=int, default=config.DEFAULT_FOLDS, show_default=True)
@click.option("--seed", type=int, default=config.DEFAULT_SEED, show_default=True, help="Fold seed")
@click.option("--lambda", "lambda_policy", default=LAMBDA_GCV, show_default=True,
              help="'gcv' or a fixed ridge strength")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Report JSON path")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None, help="Extra CSV summary")
@threads_option
@progress_option
def cv_command(genotypes, phenotype, impute_mode, feature_kind, bins, target_binning, labels,
               methods, n_list, folds, seed, lambda_policy, out, csv_path, threads, progress):
    """Cross-validate feature selection methods."""
    experiment = ExperimentConfig(
        methods=tuple(parse_methods(methods)),
        n_features=tuple(parse_n_list(n_list)),
        lambda_policy=lambda_policy,
        feature_binning=_binning(bins),
        target_binning=_binning(bins, target_binning),
        folds=folds,
        seed=seed,
    )
    inputs = {"genotypes": genotypes, "phenotype": phenotype, "labels": labels,
              "impute_mode": impute_mode, "feature_kind": feature_kind}
    _write(_run_cv(inputs, experiment, threads, progress), out, csv_path)


@cli.command("replay")
@click.argument("report", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="New report JSON path")
@threads_option
@progress_option
def replay_command(report, out, threads, progress):
    """Re-run a cross-validation report from its embedded config."""
    with open(report, "r", encoding="utf-8") as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError(f"not a JSON report: {e.msg}", path=report, row=e.lineno) from None
    if document.get("kind") != KIND_CV:
        raise ValidationError("only cross-validation reports can be replayed", path=report)
    try:
        inputs = document["config"]["inputs"]
        experiment = ExperimentConfig.from_dict(document["config"]["experiment"])
    except (KeyError, TypeError) as e:
        raise ValidationError(f"report config is incomplete: {e}", path=report) from None
    _write(_run_cv(inputs, experiment, threads, progress), out, None)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns 0 on success, 2 on invalid input, 1 on internal errors."""
    try:
        cli.main(args=list(argv) if argv is not None else None, prog_name="mint-select",
                 standalone_mode=False)
        return EXIT_OK
    except click.UsageError as e:
        e.show()
        return EXIT_VALIDATION
    except ValidationError as e:
        click.echo(f"Error: {e}", err=True)
        return EXIT_VALIDATION
    except FoldError as e:
        if isinstance(e.cause, ValidationError):
            click.echo(f"Error: {e}", err=True)
            return EXIT_VALIDATION
        logger.exception("Cross-validation failed")
        return EXIT_INTERNAL
    except click.ClickException as e:
        e.show()
        return EXIT_INTERNAL
    except click.Abort:
        click.echo("Aborted", err=True)
        return EXIT_INTERNAL
    except Exception:
        logger.exception("Internal error")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
