"""Smoke test for the Python bindings.

Build and install first, e.g. `maturin develop -m crates/py/Cargo.toml`,
then run `python python/smoke_test.py`.
"""

import json
import math

import ipeps_dispersion as ipd


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    # series reference
    x = ipd.symmetry_point("X", 2)
    assert close(x[0], math.pi, 1e-15) and x[1] == 0.0
    assert close(ipd.series_delta("paramagnetic", 0.1, "X"), 2.02015, 1e-12)
    assert close(ipd.series_delta("ferromagnetic", 1.0, "X", 3), 11.836458333333333, 1e-12)
    assert ipd.series_within_validity("paramagnetic", 0.1)
    assert not ipd.series_within_validity("ferromagnetic", 2.5)
    labels = [label for label, _ in ipd.high_symmetry_path(2)]
    assert labels[:4] == ["X", "M", "S", "G"], labels

    # plateau fit on a synthetic straight line
    tau = [0.01 * (i + 1) for i in range(200)]
    fit = ipd.fit_trace(tau, [0.5 - 1.75 * t for t in tau])
    assert close(fit.delta_k, 1.75, 1e-9) and fit.plateau_ok, fit

    # one real point: paramagnet at J = 0.1 on the X point
    params = ipd.TfimParams(0.1, 1.0, 2)
    assert params.phase == "paramagnetic" and params.energy_unit == "g"
    ev = ipd.EvolutionParams(dtau=0.01, d_max=3, seed=7)
    curve, traces = ipd.compute_curve(params, ["X"], evolution=ev, traces=True)
    point = curve.point("X")
    assert point is not None and point.plateau_ok, point
    assert close(point.delta_k, 2.02015, 0.01 * 2.02015), point.delta_k
    assert len(traces) == 1 and len(traces[0].tau) == len(traces[0]) > 100

    back = ipd.DispersionCurve.from_json(curve.to_json())
    assert back.points[0].delta_k == point.delta_k
    assert json.loads(curve.to_json())["unit"] == "g"

    try:
        ipd.TfimParams(-1.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative J accepted")

    print(f"smoke test passed: delta(X) = {point.delta_k:.5f}, series 2.02015")


if __name__ == "__main__":
    main()
