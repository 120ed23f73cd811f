"""CSV fixtures shaped like the sweep pipeline's outputs."""

import numpy as np
import pytest

from csv_schema import CURVE_COLUMNS, SWEEP_COLUMNS, write_csv


@pytest.fixture
def curve_csv(tmp_path):
    """n=6 curves for 20 ratios plus an inf-ratio reference trace."""
    path = tmp_path / "curve.csv"
    rows = []
    taus = np.linspace(0.0, 2.0, 40)
    for ratio in np.linspace(5.0, 100.0, 20):
        depress = float(5.0 / ratio)
        for tau in taus:
            p = (1 - depress) * 0.63 * np.sin(np.pi * tau / 2) ** 2
            rows.append({"n": 6, "J_over_eta": repr(float(ratio)),
                         "t": repr(float(tau * 300)), "t_scaled": repr(float(tau)),
                         "p_success": repr(float(p)), "leakage": repr(depress * 0.1)})
    for tau in taus:
        rows.append({"n": 6, "J_over_eta": "inf", "t": repr(float(tau * 300)),
                     "t_scaled": repr(float(tau)),
                     "p_success": repr(float(0.63 * np.sin(np.pi * tau / 2) ** 2)),
                     "leakage": "0.0"})
    write_csv(path, CURVE_COLUMNS, rows)
    return path


@pytest.fixture
def sweep_csv(tmp_path):
    """Five qubit counts, 20 ratios each."""
    path = tmp_path / "sweep.csv"
    rows = []
    for n in range(2, 7):
        p_ref = 0.95 - 0.07 * n
        for ratio in np.linspace(5.0, 100.0, 20):
            rows.append({"n": n, "J_over_eta": repr(float(ratio)),
                         "p_peak": repr(float(p_ref * (1 - 2.0 / ratio))),
                         "p_reference": repr(float(p_ref)),
                         "gap": repr(float(1.0 / ratio)), "error": ""})
    write_csv(path, SWEEP_COLUMNS, rows)
    return path
