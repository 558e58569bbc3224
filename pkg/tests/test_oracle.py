import os
import stat
import textwrap

import pytest

from codetrim.errors import OracleSetupError
from codetrim.oracle import CallbackOracle, ScriptOracle


def _write_script(path, body):
    path.write_text("#!/bin/sh\n" + textwrap.dedent(body))
    path.chmod(path.stat().st_mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)
    return path


@pytest.fixture
def grep_script(tmp_path):
    return _write_script(tmp_path / "check.sh", "exec grep -q bug candidate\n")


def test_exit_zero_script_is_true(tmp_path):
    script = _write_script(tmp_path / "ok.sh", "exit 0\n")
    oracle = ScriptOracle(script)
    assert oracle.check("anything at all") is True


def test_grep_script_discriminates(grep_script):
    oracle = ScriptOracle(grep_script)
    assert oracle.check("int bug;") is True
    assert oracle.check("int fine;") is False


def test_candidate_written_under_configured_name(tmp_path):
    script = _write_script(tmp_path / "name.sh", "test -f prog.c\n")
    oracle = ScriptOracle(script, candidate_name="prog.c")
    assert oracle.check("x;") is True


def test_script_runs_in_fresh_cwd(tmp_path):
    # Each execution sees only its own candidate file.
    script = _write_script(
        tmp_path / "count.sh", 'test "$(ls | wc -l)" -eq 1\n')
    oracle = ScriptOracle(script)
    assert oracle.check("first") is True
    assert oracle.check("second") is True


def test_cache_identity_skips_execution(grep_script):
    oracle = ScriptOracle(grep_script)
    assert oracle.check("int bug;") is True
    before = oracle.snapshot_counters()
    assert oracle.check("int bug;") is True
    after = oracle.snapshot_counters()
    assert after.executions == before.executions  # no new process
    assert after.cache_hits == before.cache_hits + 1
    assert after.queries_total == before.queries_total + 1


def test_counter_arithmetic(grep_script):
    oracle = ScriptOracle(grep_script)
    oracle.check("bug 1")
    oracle.check("bug 2")
    oracle.check("clean")
    oracle.check("bug 1")  # cache hit
    c = oracle.snapshot_counters()
    assert c.queries_total == 4
    assert c.cache_hits == 1
    assert c.executions == 3
    assert c.failures == 1
    assert c.queries_total == c.cache_hits + c.executions


def test_timeout_counts_as_failure(tmp_path):
    script = _write_script(tmp_path / "slow.sh", "sleep 5\n")
    oracle = ScriptOracle(script, timeout=0.3)
    assert oracle.check("whatever") is False
    c = oracle.snapshot_counters()
    assert c.timeouts == 1
    assert c.failures == 1


def test_missing_script_raises_setup_error(tmp_path):
    with pytest.raises(OracleSetupError):
        ScriptOracle(tmp_path / "absent.sh")


def test_non_executable_script_raises_setup_error(tmp_path):
    script = tmp_path / "plain.sh"
    script.write_text("#!/bin/sh\nexit 0\n")
    script.chmod(0o644)
    with pytest.raises(OracleSetupError):
        ScriptOracle(script)


def test_callback_oracle_caches_too():
    seen = []

    def predicate(text):
        seen.append(text)
        return "k" in text

    oracle = CallbackOracle(predicate)
    assert oracle.check("ok") is True
    assert oracle.check("ok") is True
    assert oracle.check("no") is False
    assert seen == ["ok", "no"]


def test_snapshot_is_a_copy():
    oracle = CallbackOracle(lambda text: True)
    snap = oracle.snapshot_counters()
    oracle.check("a")
    assert snap.queries_total == 0
    assert oracle.counters.queries_total == 1
