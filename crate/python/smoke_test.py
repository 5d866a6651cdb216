"""Smoke test for the biphoton_pmd extension module.

Build and install first:  pip install maturin && maturin develop -m crates/python/Cargo.toml
"""

import math

import biphoton_pmd as bp


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b}"


def main():
    # unit conventions: GHz is ordinary frequency
    close(bp.parse_frequency("100GHz"), 2 * math.pi * 1e11, 1e-12 * 2 * math.pi * 1e11)
    assert bp.parse_time("1ps") == 1e-12

    src = bp.PhotonPairSource.gaussian(1.0, 1.0, 1.0)
    engine = bp.Engine(src, tau_max=2.0)
    r = engine.evaluate(1.0, 0.5)
    close(r.concurrence, bp.concurrence_gaussian(1.0, 1.0, 1.0, 1.0, 0.5), 1e-9)
    close(abs(r.kappa), r.concurrence, 1e-15)
    close(bp.wootters_concurrence(r.kappa), r.concurrence, 1e-9)

    opt = engine.optimize(1.0)
    close(opt.tau_b_opt, 0.5, 1e-5)
    close(opt.c_opt, math.exp(-0.25), 1e-9)
    assert bp.optimal_dgd_gaussian(1.0, 1.0, 1.0) == (0.5, math.exp(-0.25))

    time_engine = bp.Engine(src, tau_max=2.0, method="time")
    close(time_engine.evaluate(1.0, 0.3).concurrence, engine.evaluate(1.0, 0.3).concurrence, 1e-6)

    sg = bp.PhotonPairSource.super_gaussian(3, 1.0, 1.0, 1.0)
    curve = bp.Engine(sg, tau_max=2.0).sweep_taub(1.0, [0.25 * k for k in range(9)])
    x_peak, c_peak = max(curve, key=lambda p: p[1])
    assert x_peak < 0.75 and c_peak < 0.85, (x_peak, c_peak)

    cw = bp.PhotonPairSource(None, bp.SpectralProfile.gaussian(1.0), bp.SpectralProfile.gaussian(1.0))
    assert bp.Engine(cw, tau_max=1.0).evaluate(1.0, 1.0).concurrence == 1.0

    f = bp.SpectralProfile.parse("supergauss:n=3,B=1", normalized=True)
    close(f.measure_rms_bandwidth(), 1.0, 1e-9)
    pts = bp.sweep_pump_bandwidth(f, f, 1.0, [0.0, 0.5, 1.0], pump_order=3)
    assert all(b[1] <= a[1] + 1e-6 for a, b in zip(pts, pts[1:]))

    try:
        bp.Engine(sg, tau_max=1.0, method="analytic")
    except ValueError as e:
        assert "Gaussian" in str(e)
    else:
        raise AssertionError("analytic engine accepted super-Gaussian spectra")

    rho = bp.density_matrix(0.5 + 0j)
    close(rho[0][3].real, 0.25, 1e-15)
    print("smoke test passed")


if __name__ == "__main__":
    main()
