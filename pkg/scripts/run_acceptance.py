"""Run the numbered acceptance checks and print one PASS/FAIL line per criterion."""
import pathlib
import sys

import pytest

root = pathlib.Path(__file__).resolve().parent.parent
sys.exit(pytest.main([str(root / "tests" / "test_acceptance.py"), "-q", "-p", "no:cacheprovider",
                      "--rootdir", str(root)] + sys.argv[1:]))
