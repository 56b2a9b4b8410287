"""JSON run reports: assembly, exit status, writing and merging."""
from __future__ import annotations

import json
import os
from typing import Iterable, List

from . import __version__
from .errors import UsageError
from .io_util import atomic_write_text, dumps

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_NONCONVERGENCE = 3

OUTPUT_ENV = "B1CLASSES_OUTPUT_DIR"


def _plain(obj):
    return obj.to_dict() if hasattr(obj, "to_dict") else obj


def verdict_of(result: dict):
    """The verdict string carried by a result entry, if any."""
    for key in ("verdict", "overall"):
        v = result.get(key)
        if isinstance(v, str):
            return v
    return None


def exit_status(results: Iterable[dict]) -> int:
    """``1`` when any result is violated, else ``0`` (inconclusive counts as success)."""
    return EXIT_VIOLATION if any(verdict_of(r) == "violated" for r in results) else EXIT_OK


def make_report(command: str, config_echo: dict, results: List, status: int | None = None) -> dict:
    plain = [_plain(r) for r in results]
    return {
        "tool": "b1classes",
        "version": __version__,
        "command": command,
        "config": config_echo,
        "results": plain,
        "exit_status": exit_status(plain) if status is None else status,
    }


def output_dir(configured: str | None) -> str:
    """Output directory: environment override, then config, then ``b1classes-out``."""
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return env
    return configured or "b1classes-out"


def write_report(report: dict, path: str) -> str:
    atomic_write_text(path, dumps(report))
    return path


def load_report(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            rep = json.load(fh)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read report {path!r}: {exc}") from exc
    if not isinstance(rep, dict) or rep.get("tool") != "b1classes" or "results" not in rep:
        raise UsageError(f"{path!r} is not a b1classes report")
    return rep


def merge_reports(reports: List[dict], sources: List[str]) -> dict:
    """Concatenate results; the merged exit status is the largest input status."""
    results = []
    for rep, src in zip(reports, sources):
        for r in rep["results"]:
            entry = dict(r)
            entry["source"] = src
            entry["source_command"] = rep.get("command")
            results.append(entry)
    status = max((int(r.get("exit_status", 0)) for r in reports), default=0)
    merged = make_report("report-merge", {"sources": list(sources)}, results, status)
    return merged
