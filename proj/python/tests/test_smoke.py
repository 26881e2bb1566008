import math
import os

import numpy as np
import pytest

import geokernel as gk

SMALL = """
[manifold]
kind = sphere
[dynamics]
kernel = od
N = 6
[integrator]
h = 0.01
[observation]
T = 0.5
L = 6
M = 4
[basis]
n = 8
[run]
seed = 5
test_ics = 2
transfer_N = 8
"""


def test_sphere_geometry():
    m = gk.Manifold.sphere()
    r = m.descriptor.radius
    x = np.array([r, 0.0, 0.0])
    y = np.array([0.0, r, 0.0])
    assert m.distance(x, y) == pytest.approx(r * math.pi / 2, rel=1e-14)
    assert m.distance(x, y) == m.distance(y, x)
    assert m.norm(x, m.unit_tangent(x, y)) == pytest.approx(1.0, abs=1e-14)
    assert np.linalg.norm(m.project(np.array([2.0, 1.0, -1.0]))) == pytest.approx(r, abs=1e-12)


def test_factor2_closed_form():
    m = gk.Manifold.poincare(gk.DistanceConvention.Factor2)
    a, b = 0.3 + 0.1j, -0.2 + 0.4j
    expected = 2 * math.atanh(abs(a - b) / abs(1 - a * b.conjugate()))
    got = m.distance(np.array([a.real, a.imag]), np.array([b.real, b.imag]))
    assert got == pytest.approx(expected, rel=1e-12)


def test_kernels_vectorize():
    od = gk.make_od()
    r = np.linspace(0.0, 2.0, 9)
    values = od(r)
    assert values.shape == r.shape
    assert values[3] == od(float(r[3]))
    ps1 = gk.make_ps1()
    assert ps1.types == 2
    assert ps1.at(1, 1)(0.5) == 0.0


def test_rhs_and_energy():
    model = gk.ModelSpec(gk.Manifold.sphere(), gk.make_od(), 5)
    x = gk.initial_condition(model, "uniform_sphere", seed=3)
    assert x.shape == (5, 3)
    v = gk.rhs(model, x)
    # Velocities are tangent.
    assert np.allclose(np.sum(v * x, axis=1), 0.0, atol=1e-10)
    times, states, _ = gk.simulate(model, x, 0.5, h=0.01)
    assert states.shape == (len(times), 5, 3)
    energies = [gk.energy(model, s) for s in states]
    assert all(b <= a * (1 + 1e-8) + 1e-15 for a, b in zip(energies, energies[1:]))


def test_pipeline(tmp_path):
    cfg = gk.ExperimentConfig.parse(SMALL)
    ds = gk.simulate_training(cfg)
    assert (ds.N, ds.L, ds.M) == (6, 6, 4)
    assert ds.positions(0).shape == (6, 6, 3)
    assert gk.TrajectoryDataset.from_bytes(ds.to_bytes()) == ds
    assert ds.to_bytes()[:4] == b"GKD1"

    res = gk.learn(cfg, ds)
    assert len(res.reports) == 1
    assert res.reports[0].lambda_min > 0
    est = res.estimators.at(0, 0)
    assert est.coeffs.shape == (8,)

    rep = gk.evaluate(cfg, ds, res.estimators, str(tmp_path))
    assert math.isfinite(rep.pair(0, 0).error.value)
    assert rep.transfer is not None
    assert len(rep.fresh.errors) == 2
    assert os.path.exists(tmp_path / "kernels.csv")


def test_errors_map_to_python():
    with pytest.raises(gk.ValidationError):
        gk.ExperimentConfig.parse("[manifold]\nkind = torus\n")
    with pytest.raises(ValueError):
        gk.SplineBasis(1.0, 0.0, 5)


def test_loglog_fit():
    x = [10.0, 100.0, 1000.0]
    fit = gk.fit_loglog(x, [v ** (-1.0 / 3.0) for v in x])
    assert fit.slope == pytest.approx(-1.0 / 3.0, rel=1e-12)
