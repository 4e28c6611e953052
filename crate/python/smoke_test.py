"""Smoke test for the ioncrystal Python extension.

Build and install first, e.g. `maturin develop -m crates/ioncrystal-py/Cargo.toml`
or `pip install crates/ioncrystal-py`.
"""

import math

import ioncrystal


def main():
    sums = ioncrystal.lattice_sums(3)
    assert abs(sums["c1"] - 12.0) < 1e-12
    assert abs(sums["c2"] - (6.0 + 2.0 / math.sqrt(3.0))) < 1e-12

    scales = ioncrystal.derived_scales(20e3, 1e6, 100)
    assert scales["d0"] > 0 and scales["beta_z"] > 0
    print(f"d0 = {scales['d0'] * 1e6:.3f} um, beta_z = {scales['beta_z']:.3e}")

    crystal = ioncrystal.Crystal(12, 50.0)
    assert crystal.l == 12
    modes = crystal.modes_at(0, 0)
    assert modes["omegas"] == [1.0, 1.0, 50.0]
    assert crystal.gap_report()["gap_ok"]
    d = crystal.dynamical_matrix(3, 1)
    assert all(abs(d[i][j] - d[j][i]) < 1e-14 for i in range(3) for j in range(3))

    scan = ioncrystal.decoherence_scan(20e3, 1e6, 8, 0.05, [1e-4, 1e-3])
    rows = scan["rows"]
    assert len(rows) == 2 and rows[1]["error_e"] > rows[0]["error_e"] > 0

    gate = ioncrystal.gate_diagnostics(0.0, 3.8e-3, 50.0, 0.05, 10.0)
    assert gate["e_z"] == 0.0

    j = ioncrystal.chain_couplings(5, 1e-3, 0.05, 1e-3)
    assert all(abs(j[a][b] - j[b][a]) < 1e-15 for a in range(5) for b in range(5))

    try:
        ioncrystal.Crystal(0, 50.0)
    except ValueError:
        pass
    else:
        raise AssertionError("L = 0 accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
