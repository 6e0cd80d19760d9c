import subprocess
import sys

from nidss._kernels import backend


def test_backend_reports_a_known_name():
    assert backend() in ("numba", "numpy")


def run_probe(env_value):
    code = "from nidss._kernels import backend; print(backend())"
    env = {"NIDSS_NUMBA": env_value} if env_value is not None else {}
    import os

    full_env = dict(os.environ)
    full_env.update(env)
    out = subprocess.run([sys.executable, "-c", code], capture_output=True,
                         text=True, env=full_env, check=True)
    return out.stdout.strip()


def test_env_flag_selects_numpy_fallback():
    assert run_probe("0") == "numpy"
    assert run_probe("off") == "numpy"


def test_default_prefers_numba_when_available():
    try:
        import numba  # noqa: F401
    except ImportError:
        return
    assert run_probe("1") == "numba"
