import os
import shutil
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

Z3 = shutil.which("z3")

requires_z3 = pytest.mark.skipif(Z3 is None, reason="z3 executable not installed")


def _backends():
    names = ["numpy"]
    try:
        from fpblast.bitvec import _kernel  # noqa: F401
        names.append("cython")
    except ImportError:
        pass
    return names


BACKENDS = _backends()


@pytest.fixture(params=BACKENDS)
def backend_name(request):
    return request.param


@pytest.fixture
def fixtures():
    return FIXTURES


@pytest.fixture(autouse=True)
def _no_solver_env(monkeypatch):
    monkeypatch.delenv("FPBLAST_SOLVER", raising=False)
    yield


def pytest_report_header(config):
    from fpblast.bitvec import BACKEND
    return "fpblast tape backend: %s; z3: %s; FPBLAST_PURE_PYTHON=%s" % (
        BACKEND, Z3 or "absent", os.environ.get("FPBLAST_PURE_PYTHON", ""))
