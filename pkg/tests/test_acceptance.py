"""Release gate: every acceptance criterion at its stated tolerance.

Runs each check at the default seed and prints its one-line verdict. The
CLI-level determinism check (criterion 12's `ffsim verify` double run)
lives at the bottom; it re-executes the entire gate, so this module is the
slow part of the suite by design.
"""

import json

import pytest

from ffsim import acceptance, cli

SEED = 42


@pytest.mark.parametrize("criterion", acceptance.ALL_CRITERIA,
                         ids=lambda fn: fn.__name__)
def test_criterion(criterion):
    result = criterion(SEED)
    status = "PASS" if result["passed"] else "FAIL"
    print(f"[{status}] criterion {result['id']:2d}: {result['name']}: "
          f"{json.dumps(result['details'], default=str)[:240]}")
    assert result["passed"], result


def test_verify_cli_byte_identical(tmp_path):
    paths = [tmp_path / "v1.json", tmp_path / "v2.json"]
    codes = [cli.main(["verify", "--seed", str(SEED), "--out", str(p)])
             for p in paths]
    assert codes == [0, 0]
    assert paths[0].read_bytes() == paths[1].read_bytes()
