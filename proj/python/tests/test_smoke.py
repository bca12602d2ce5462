import numpy as np
import pytest

import mrlab


def test_groups_listed():
    assert "identities" in mrlab.check_groups()


def test_null_mode_and_resolvent():
    a = mrlab.heat_generator(16)
    assert np.linalg.norm(a @ np.ones(a.shape[0])) < 1e-10
    r = mrlab.resolvent(a, 5.0)
    assert np.allclose(r @ (5.0 * np.eye(a.shape[0]) - a), np.eye(a.shape[0]), atol=1e-10)


def test_fractional_power_paths_agree():
    a = mrlab.heat_generator(16, perturbed=False) - np.eye(17)
    exact = mrlab.frac_power_eig(a, 0.6)
    assert np.linalg.norm(mrlab.frac_power_contour(a, 0.6) - exact) <= 1e-6 * np.linalg.norm(exact)


def test_identities_group_passes():
    records = mrlab.run_group("identities", example="heat", N=32, **{"lambda": [5.0]})
    assert records and all(r["pass"] for r in records)
    assert {"check", "value", "tolerance", "pass", "meta"} <= set(records[0])


def test_bad_config_raises():
    with pytest.raises(ValueError):
        mrlab.run_group("maxreg", N=4)
