"""Interestingness-test oracles: an external script contract plus an
in-process callback variant for tests, both with content-hash caching and
query accounting."""

from __future__ import annotations

import hashlib
import os
import shutil
import subprocess
import tempfile
import threading
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import OracleSetupError
from .program import SourceProgram


@dataclass
class OracleCounters:
    queries_total: int = 0
    cache_hits: int = 0
    failures: int = 0
    timeouts: int = 0
    executions: int = 0


class PropertyOracle:
    """Base oracle: caching, counters, and thread safety. Subclasses
    implement ``_execute(text) -> bool``."""

    def __init__(self):
        self._cache: dict[str, bool] = {}
        self._lock = threading.Lock()
        self.counters = OracleCounters()

    def check(self, program) -> bool:
        text = program.text if isinstance(program, SourceProgram) else program
        key = hashlib.sha256(text.encode()).hexdigest()
        with self._lock:
            self.counters.queries_total += 1
            if key in self._cache:
                self.counters.cache_hits += 1
                return self._cache[key]
            result = self._execute(text)
            self.counters.executions += 1
            if not result:
                self.counters.failures += 1
            self._cache[key] = result
            return result

    def snapshot_counters(self) -> OracleCounters:
        with self._lock:
            return replace(self.counters)

    def _execute(self, text: str) -> bool:
        raise NotImplementedError


class CallbackOracle(PropertyOracle):
    """Oracle backed by a Python predicate over program text."""

    def __init__(self, predicate):
        super().__init__()
        self._predicate = predicate

    def _execute(self, text: str) -> bool:
        return bool(self._predicate(text))


class ScriptOracle(PropertyOracle):
    """Oracle backed by an executable interestingness script.

    The candidate is written to ``candidate_name`` inside a fresh working
    directory, the script runs with that directory as CWD, and exit status
    0 within the timeout means the property holds. A timeout counts as
    "property not preserved", never as an error.
    """

    def __init__(self, script_path, candidate_name="candidate",
                 timeout=60.0, work_dir_template=None):
        super().__init__()
        self.script_path = Path(script_path).resolve()
        self.candidate_name = candidate_name
        self.timeout = timeout
        self.work_dir_template = work_dir_template
        if not self.script_path.is_file():
            raise OracleSetupError(f"test script not found: {self.script_path}")
        if not os.access(self.script_path, os.X_OK):
            raise OracleSetupError(f"test script not executable: {self.script_path}")

    def _execute(self, text: str) -> bool:
        try:
            work_dir = tempfile.mkdtemp(prefix="codetrim-oracle-",
                                        dir=self.work_dir_template)
        except OSError as exc:
            raise OracleSetupError(f"cannot create working directory: {exc}") from exc
        try:
            Path(work_dir, self.candidate_name).write_text(text)
            try:
                proc = subprocess.run(
                    [str(self.script_path)],
                    cwd=work_dir,
                    stdout=subprocess.DEVNULL,
                    stderr=subprocess.DEVNULL,
                    timeout=self.timeout,
                )
            except subprocess.TimeoutExpired:
                self.counters.timeouts += 1
                return False
            return proc.returncode == 0
        finally:
            shutil.rmtree(work_dir, ignore_errors=True)
