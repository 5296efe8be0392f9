import os
import subprocess
import sys

from urbanca.knowledge import _backend


def _selected(env_value):
    env = dict(os.environ)
    env.pop("URBANCA_BACKEND", None)
    if env_value is not None:
        env["URBANCA_BACKEND"] = env_value
    out = subprocess.run([sys.executable, "-c", "from urbanca.knowledge import BACKEND; print(BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip()


def test_env_forces_python_fallback():
    assert _selected("python") == "python"


def test_default_prefers_compiled():
    expect = "cython" if _backend.compiled_kernels is not None else "python"
    assert _selected(None) == expect
