"""
Report Generator
Builds report documents from selection and cross-validation runs and
exports them as JSON, CSV and plain text
"""

import json
import logging
import os
from datetime import datetime
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

import config
from .harness import CvReport, ExperimentConfig
from .selection import SelectionResult

logger = logging.getLogger(__name__)

KIND_CV = "cv"
KIND_SELECT = "select"


class ReportGenerator:
    def __init__(self, tool_version: str = config.TOOL_VERSION,
                 schema_version: str = config.SCHEMA_VERSION):
        self.tool_version = tool_version
        self.schema_version = schema_version

    def build_cv_document(self, experiment: ExperimentConfig, reports: Sequence[CvReport],
                          inputs: Dict[str, Any], timing: Dict[str, Any]) -> Dict[str, Any]:
        """
        Assemble the cross-validation report document

        Args:
            experiment: Resolved experiment settings
            reports: One CvReport per (method, n)
            inputs: Input files and loading options, enough to re-run
            timing: Wall-clock figures and thread count (excluded from comparisons)

        Returns:
            Report document
        """
        return {
            "schema_version": self.schema_version,
            "tool_version": self.tool_version,
            "kind": KIND_CV,
            "config": {"inputs": dict(inputs), "experiment": experiment.to_dict()},
            "results": [report.to_dict() for report in reports],
            "timing": dict(timing),
        }

    def build_selection_document(self, result: SelectionResult, feature_ids: Sequence[str],
                                 components: Sequence[float], settings: Dict[str, Any],
                                 timing: Dict[str, Any]) -> Dict[str, Any]:
        """Assemble the single-run selection report document."""
        relevance, redundancy = components
        entry = result.to_dict(feature_ids)
        entry.update({
            "relevance_mean": relevance,
            "redundancy_mean": redundancy,
            "phi": relevance - redundancy,
            "redundancy_note": "mean over all ordered pairs of selected features, diagonal included",
        })
        return {
            "schema_version": self.schema_version,
            "tool_version": self.tool_version,
            "kind": KIND_SELECT,
            "config": dict(settings),
            "results": [entry],
            "timing": dict(timing),
        }

    def generate_summary_text(self, document: Dict[str, Any]) -> str:
        """
        Plain-text summary of a report document

        Args:
            document: Document from build_cv_document or build_selection_document

        Returns:
            Report text
        """
        report = []
        report.append("=" * 80)
        report.append("MINT FEATURE SELECTION REPORT")
        report.append("=" * 80)
        report.append(f"Tool version: {document['tool_version']}  Schema: {document['schema_version']}")
        generated = document.get("timing", {}).get("finished_at")
        if generated:
            report.append(f"Generated: {generated}")
        report.append("")

        report.append("SUMMARY")
        report.append("-" * 40)
        if document["kind"] == KIND_CV:
            report.extend(self._summarize_cv(document))
        else:
            report.extend(self._summarize_selection(document))
        report.append("")

        report.append("METHODOLOGY")
        report.append("-" * 40)
        report.extend(self._describe_methodology())
        return "\n".join(report)

    def _summarize_cv(self, document: Dict[str, Any]) -> List[str]:
        experiment = document["config"]["experiment"]
        lambda_policy = experiment["lambda_policy"]
        summary = [
            f"{experiment['folds']}-fold cross-validation, seed {experiment['seed']}, "
            f"lambda {'by GCV' if lambda_policy == 'gcv' else lambda_policy}",
            "",
            f"{'method':<14}{'n':>8}{'mean r^2':>12}{'min r^2':>12}{'max r^2':>12}{'MI evals':>14}",
        ]
        for entry in document["results"]:
            summary.append(
                f"{entry['method']:<14}{entry['n']:>8}{entry['mean_r2']:>12.4f}"
                f"{min(entry['fold_r2']):>12.4f}{max(entry['fold_r2']):>12.4f}{entry['mi_eval_count']:>14}"
            )
        quality = [entry for entry in document["results"] if "selection_quality" in entry]
        if quality:
            summary.append("")
            summary.append("Ground truth: precision = share of non-bad picks, groups = seed groups covered")
            for entry in quality:
                q = entry["selection_quality"]
                summary.append(
                    f"  {entry['method']:<12}n={entry['n']:<6} precision {q['precision']:.3f}  "
                    f"groups {q['groups_covered']:.1f}"
                )
        return summary

    def _summarize_selection(self, document: Dict[str, Any]) -> List[str]:
        entry = document["results"][0]
        summary = [
            f"Mode {entry['mode']}: {entry['n']} features, {entry['mi_eval_count']} MI evaluations",
            f"Mean relevance {entry['relevance_mean']:.4f}, mean redundancy {entry['redundancy_mean']:.4f}, "
            f"phi {entry['phi']:.4f}",
            "",
            "Top of ranking:",
        ]
        for position, (feature, score) in enumerate(zip(entry["ranking_ids"][:10], entry["step_scores"][:10])):
            summary.append(f"  {position + 1:>3}. {feature:<20} {score:.4f}")
        return summary

    def _describe_methodology(self) -> List[str]:
        return [
            "Features are ranked greedily by relevance minus mean redundancy,",
            "with plug-in mutual information in bits. In mint mode redundancy is",
            "measured on training plus unlabeled held-out feature rows; held-out",
            "targets are only used to score r^2 (squared Pearson correlation) of",
            "a standardized ridge regression fitted on the training rows.",
        ]

    def export_to_json(self, document: Dict[str, Any], filepath: str) -> bool:
        """Write a report document as JSON"""
        try:
            directory = os.path.dirname(filepath)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(filepath, "w", encoding="utf-8") as f:
                json.dump(document, f, ensure_ascii=False, indent=2)
                f.write("\n")
            logger.info("Report written to %s", filepath)
            return True
        except OSError as e:
            logger.error("JSON export failed: %s", e)
            return False

    def export_to_csv(self, document: Dict[str, Any], filepath: str) -> bool:
        """Write one summary row per result entry"""
        try:
            rows = []
            for entry in document["results"]:
                row = {"method": entry.get("method", entry.get("mode")), "n": entry["n"],
                       "mi_eval_count": entry["mi_eval_count"]}
                if "fold_r2" in entry:
                    row["mean_r2"] = entry["mean_r2"]
                    row.update({f"fold_{i}_r2": value for i, value in enumerate(entry["fold_r2"])})
                if "phi" in entry:
                    row["phi"] = entry["phi"]
                quality: Optional[Dict[str, float]] = entry.get("selection_quality")
                if quality:
                    row.update({f"quality_{key}": value for key, value in quality.items()})
                rows.append(row)

            if not rows:
                return False
            pd.DataFrame(rows).to_csv(filepath, index=False, lineterminator="\n")
            logger.info("CSV summary written to %s", filepath)
            return True
        except OSError as e:
            logger.error("CSV export failed: %s", e)
            return False


def timing_block(started: datetime, threads: int) -> Dict[str, Any]:
    finished = datetime.now()
    return {
        "started_at": started.isoformat(timespec="seconds"),
        "finished_at": finished.isoformat(timespec="seconds"),
        "elapsed_seconds": round((finished - started).total_seconds(), 3),
        "threads": threads,
    }
