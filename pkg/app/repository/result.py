from pathlib import Path
from typing import Sequence

import pandas as pd
from pydantic import BaseModel

from app.model.vo.trace import RunTrace
from .base import BaseMapper

RESULTS_SCHEMA_VERSION = 1

RESULT_COLUMNS = ["method", "start", "seed", "best_value", "best_k", "iterations", "termination",
                  "enumeration_value"]
SUMMARY_COLUMNS = ["method", "runs", "min_value", "avg_value", "med_value"]
TIMING_COLUMNS = ["method", "start", "time_s"]


class ResultMapper(BaseMapper):
    """
    输出目录布局:
        results.csv / summary.csv   只含确定性的列, 相同配置与种子逐字节一致
        timings.csv                 墙钟时间
        traces/<method>_<start>.csv 每轮迭代记录
        metadata.json, verdict.json, bounds.json, vc_scan.csv
    """

    def write_results(self, out_dir: Path | str, rows: Sequence[dict]) -> pd.DataFrame:
        frame = pd.DataFrame(list(rows), columns=RESULT_COLUMNS)
        self.write_frame(Path(out_dir) / "results.csv", frame)
        summary = summarize(frame)
        self.write_frame(Path(out_dir) / "summary.csv", summary)
        return summary

    def read_results(self, out_dir: Path | str) -> pd.DataFrame:
        return self.read_frame(Path(out_dir) / "results.csv")

    def read_summary(self, out_dir: Path | str) -> pd.DataFrame:
        return self.read_frame(Path(out_dir) / "summary.csv")

    def write_timings(self, out_dir: Path | str, rows: Sequence[dict]) -> pd.DataFrame:
        frame = pd.DataFrame(list(rows), columns=TIMING_COLUMNS)
        self.write_frame(Path(out_dir) / "timings.csv", frame)
        averages = frame.groupby("method", sort=False)["time_s"].mean().reset_index(name="avg_time_s")
        self.write_frame(Path(out_dir) / "timing_summary.csv", averages)
        return averages

    def write_trace(self, out_dir: Path | str, trace: RunTrace) -> Path:
        frame = pd.DataFrame(trace.to_rows(), columns=["k", "Fbar", "F", "gain", "epsilon_min", "decrease",
                                                       "C", "time_ms"])
        return self.write_frame(Path(out_dir) / "traces" / f"{trace.method}_{trace.start}.csv", frame)

    def write_table(self, out_dir: Path | str, name: str, rows: Sequence[dict]) -> Path:
        return self.write_frame(Path(out_dir) / name, pd.DataFrame(list(rows)))

    def write_document(self, out_dir: Path | str, name: str, data: dict | BaseModel) -> Path:
        return self.write_json(Path(out_dir) / name, data)


def summarize(results: pd.DataFrame) -> pd.DataFrame:
    """每个方法的 runs / min / avg / median, 方法顺序与首次出现顺序一致"""
    grouped = results.groupby("method", sort=False)["best_value"]
    summary = pd.DataFrame({
        "runs": grouped.count(),
        "min_value": grouped.min(),
        "avg_value": grouped.mean(),
        "med_value": grouped.median(),
    }).reset_index()
    return summary[SUMMARY_COLUMNS]


_result_mapper = ResultMapper()

def get_result_mapper() -> ResultMapper:
    return _result_mapper
