import subprocess
import sys
import textwrap


def test_import_without_extension_uses_numpy_kernels():
    code = textwrap.dedent("""
        import sys
        sys.modules["ppgloss._ccore"] = None  # makes the import fail
        import numpy as np
        import ppgloss
        assert ppgloss.active_backend() == "python", ppgloss.active_backend()
        assert ppgloss.available_backends() == ["python"]
        v, _ = ppgloss.soft_dtw(np.array([0.0, 1.0]), np.array([0.0, 2.0]))
        print(round(v, 9))
    """)
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "0.673437359"
