#!/usr/bin/env python3
"""
Timing benchmark for hexfam.
Times family verification, the bad-pair pipeline and the extremal search
against fixed budgets and writes the results to a JSON file.
"""

import argparse
import json
import logging
import os
import statistics
import sys
import time
from datetime import datetime
from fractions import Fraction
from typing import Callable, Dict, List, Optional

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'backend'))

from classify import Relation, verify_family
from config import config
from constructions import christmas_tree, fat_hexagon_stack, prism_quadrilaterals
from extremal_search import SearchProblem, max_family
from models import FatnessParams, PointSet
from pipeline import PipelineOutcome, fatness_transfer, run_pipeline

logger = logging.getLogger(__name__)

DEFAULT_PARAMS = FatnessParams.from_c(2, Fraction(1, 2))


class PerformanceBenchmark:
    """Timing suite; each benchmark reports its runs and the budget it must meet"""

    def __init__(self, repeats: int = 3, threads: Optional[int] = None):
        self.repeats = repeats
        self.threads = threads

    def _time(self, action: Callable[[], bool], budget_seconds: float) -> Dict:
        timings: List[float] = []
        correct = True
        for _ in range(self.repeats):
            start = time.perf_counter()
            correct = action() and correct
            timings.append(time.perf_counter() - start)
        return {
            "runs": self.repeats,
            "mean_seconds": round(statistics.mean(timings), 4),
            "max_seconds": round(max(timings), 4),
            "budget_seconds": budget_seconds,
            "within_budget": max(timings) <= budget_seconds,
            "correct": correct,
        }

    def benchmark_christmas_trees(self) -> Dict:
        logger.info("Benchmarking Christmas tree verification...")
        results = {}
        for m, budget in ((5, 5.0), (12, 60.0)):
            family = christmas_tree(m)
            results[f"m={m}"] = self._time(
                lambda: verify_family(family, Relation.VERTEX_OR_EDGE, threads=self.threads).ok, budget
            )
        return results

    def benchmark_prism_quadrilaterals(self) -> Dict:
        logger.info("Benchmarking prism quadrilateral verification...")

        def sweep() -> bool:
            return all(
                verify_family(prism_quadrilaterals(m, seed), Relation.NO_BAD, threads=self.threads).ok
                for m in range(2, 11) for seed in range(5)
            )

        return {"m=2..10, 5 seeds": self._time(sweep, 60.0)}

    def benchmark_pipeline(self) -> Dict:
        logger.info("Benchmarking the bad-pair pipeline...")
        results = {}
        for count in (3, 10):
            family = fat_hexagon_stack(count, DEFAULT_PARAMS)
            results[f"stack({count})"] = self._time(
                lambda: run_pipeline(family, DEFAULT_PARAMS).outcome == PipelineOutcome.WITNESS, 30.0
            )
        results["fatness_transfer"] = self._time(
            lambda: fatness_transfer(DEFAULT_PARAMS, Fraction(9, 10)).c_prime_sq == Fraction(40, 9), 1.0
        )
        return results

    def benchmark_search(self) -> Dict:
        logger.info("Benchmarking the extremal search...")
        octahedron = PointSet.from_coordinates(
            [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
        )
        results = {}
        for relation in Relation:
            results[relation.value] = self._time(
                lambda: max_family(SearchProblem(octahedron, 3, relation)).exhausted, 60.0
            )
        return results

    def run_all_benchmarks(self) -> Dict:
        logger.info("Starting hexfam benchmarks...")
        start_time = datetime.now()
        results = {
            "benchmark_info": {
                "start_time": start_time.isoformat(),
                "repeats": self.repeats,
                "threads": self.threads or config.get_thread_count(),
                "python_version": sys.version,
            }
        }

        results["christmas_trees"] = self.benchmark_christmas_trees()
        results["prism_quadrilaterals"] = self.benchmark_prism_quadrilaterals()
        results["pipeline"] = self.benchmark_pipeline()
        results["search"] = self.benchmark_search()

        end_time = datetime.now()
        results["benchmark_info"]["end_time"] = end_time.isoformat()
        results["benchmark_info"]["total_duration_seconds"] = (end_time - start_time).total_seconds()
        results["summary"] = self.generate_summary(results)
        return results

    def generate_summary(self, results: Dict) -> Dict:
        """PASS when every benchmark is correct and within its budget"""
        summary = {"overall_status": "PASS", "issues": []}
        for group, entries in results.items():
            if group == "benchmark_info":
                continue
            for name, metrics in entries.items():
                if not metrics["correct"]:
                    summary["issues"].append(f"{group} {name}: wrong result")
                if not metrics["within_budget"]:
                    summary["issues"].append(
                        f"{group} {name}: {metrics['max_seconds']}s exceeds {metrics['budget_seconds']}s"
                    )
        if summary["issues"]:
            summary["overall_status"] = "FAIL"
        return summary

    def save_results(self, results: Dict, filename: Optional[str] = None) -> str:
        if filename is None:
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            filename = f"hexfam_benchmark_{timestamp}.json"
        with open(filename, 'w') as f:
            json.dump(results, f, indent=2)
        logger.info(f"Results saved to: {filename}")
        return filename


def main():
    parser = argparse.ArgumentParser(description="Timing benchmark for hexfam")
    parser.add_argument("--repeats", type=int, default=3, help="Runs per benchmark")
    parser.add_argument("--threads", type=int, default=None, help="Worker threads for verification")
    parser.add_argument("--output", help="Output file for results")
    parser.add_argument("--verbose", action="store_true", help="Enable verbose logging")
    args = parser.parse_args()

    logging_config = config.get_logging_config()
    logging.basicConfig(level=logging_config["level"], format=logging_config["format"])
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    benchmark = PerformanceBenchmark(repeats=args.repeats, threads=args.threads)
    results = benchmark.run_all_benchmarks()
    output_file = benchmark.save_results(results, args.output)

    summary = results["summary"]
    print(f"Overall status: {summary['overall_status']}")
    for issue in summary["issues"]:
        print(f"  - {issue}")
    print(f"Detailed results saved to: {output_file}")
    sys.exit(0 if summary["overall_status"] == "PASS" else 1)


if __name__ == "__main__":
    main()
