"""Test fixture wiring.

When the wheel is installed, ``import bdlab`` just works. In a plain CMake
checkout the compiled extension lives in ``build/``; load it under the name
the package expects before the package import runs.
"""

import importlib.util
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parents[2]


def _preload_core():
    if importlib.util.find_spec("bdlab") is not None:
        return
    candidates = sorted(ROOT.glob("build*/_core*.so"))
    if not candidates:
        raise ImportError(
            "bdlab is not installed and no built _core extension was found; "
            "run `pip install .` or build the CMake tree first"
        )
    spec = importlib.util.spec_from_file_location("bdlab._core", candidates[-1])
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    sys.modules["bdlab._core"] = module
    sys.path.insert(0, str(ROOT / "python"))


_preload_core()
