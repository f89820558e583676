"""Smoke test for the `ucx` extension module.

Build and install first:  pip install ./crates/python
"""

import math

import ucx


def main():
    assert ucx.delta(2.0, 0.0) == 0.0
    assert ucx.delta(2.0, 2.0) == 1.0
    assert abs(ucx.delta(2.0, 1.0) - (1 - math.sqrt(3) / 2)) < 1e-15
    assert abs(ucx.delta(1.5, 1.0) - 0.0672) < 1e-4
    assert abs(ucx.s_star(1.5, 1.0) - 1.715) < 1e-3

    try:
        ucx.certificate(1.5)
    except ValueError as e:
        assert "epsilon" in str(e)
    else:
        raise AssertionError("missing epsilon accepted")

    cert = ucx.certificate(1.5, 1.0)
    reports = ucx.verify_appendix(1.5, 1.0, 2001)
    assert all(r.passed for r in reports), reports

    r = ucx.brute_force((1.0, 1.0, 1.0), 4.0, restarts=16, local_steps=1000)
    assert r.residual < 1e-9
    assert r.value <= ucx.certificate(4.0).value((1.0, 1.0, 1.0)) + 1e-9

    grid = ucx.sample_boundary(1.5, 30, eps=1.0)
    (x3, b), = grid.envelope_slice([1.0])
    assert b <= cert.value((1.0, 1.0, x3)) + 1e-9

    print(f"delta(1.5, 1) = {ucx.delta(1.5, 1.0):.6f}")
    print(f"brute force B(1,1,1) at p=4: {r.value:.6f}")
    print(f"envelope B(1,1,1) at p=1.5: {b:.6f}")
    print("ok")


if __name__ == "__main__":
    main()
