"""Smoke test for the gle_py extension module."""

import math

import gle_py


def main():
    k = gle_py.Kernel.exponential(1.0)
    assert abs(k(0.5) - math.exp(-0.5)) < 1e-15
    w = 2.0
    assert abs(k.fourier_cos(w) - 1 / (1 + w * w)) < 1e-12
    assert abs(k.numeric().fourier_sin(w) - w / (1 + w * w)) < 1e-8
    assert gle_py.classify_tail(k) == "integrable"
    assert k.check()["assumption1"]

    sd = gle_py.SpectralDensity(k, m=1.0, lam=0.0)
    assert sd.regime == "m>0,lambda=0"
    assert sd.rhat(1.0) > 0
    v, e = sd.msd(1e3)
    assert abs(v / 1e3 - 2.0) < 0.02, v
    assert sd.predicted_exponent() == 1.0

    k_h = gle_py.SpectralDensity(gle_py.Kernel.power_law_h(0.75), 1.0, 0.0)
    eta, hw = k_h.fit_exponent(1e2, 1e4)
    assert abs(eta - 0.5) < 0.03, eta

    rouse = gle_py.Kernel.rouse(2.0, 1.0)
    assert abs(rouse.tail_exponent() - 0.5) < 1e-3

    times, paths = sd.simulate(0.2, 20, 500, 7)
    assert len(times) == 21 and len(paths) == 500
    assert all(p[0] == 0.0 for p in paths)
    emp = sum(p[-1] ** 2 for p in paths) / len(paths)
    exact = sd.msd(times[-1])[0]
    assert abs(emp - exact) < 0.25 * exact, (emp, exact)

    try:
        gle_py.SpectralDensity(k, m=-1.0, lam=0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative mass accepted")
    print("gle_py smoke test passed")


if __name__ == "__main__":
    main()
