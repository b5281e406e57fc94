"""Builds the extension module and exercises the Python API.

Run from the repository root: python3 python/smoke_test.py
"""

import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_module() -> Path:
    subprocess.run(
        ["cargo", "build", "--release", "-p", "jdemm-py"], cwd=ROOT, check=True
    )
    lib = ROOT / "target" / "release" / "libjdemm_py.so"
    out = Path(tempfile.mkdtemp()) / "jdemm_py.so"
    shutil.copy(lib, out)
    return out.parent


def region(p_up, p_down, nu_u, nu_d):
    return {
        "p_up": p_up,
        "p_down": p_down,
        "p_none": 1.0 - p_up - p_down,
        "law_up": {"nu": nu_u, "delta": 0.05},
        "law_down": {"nu": nu_d, "delta": 0.07},
    }


def main() -> None:
    sys.path.insert(0, str(build_module()))
    import jdemm_py as jd

    model = jd.Model(
        {
            "mu": 0.08,
            "sigma": 0.2,
            "r": 0.03,
            "tau": 0.01,
            "b_down": -1.5,
            "b_up": 1.5,
            "region1": region(0.1, 0.3, 0.04, -0.06),
            "region2": region(0.25, 0.1, 0.05, -0.03),
        }
    )
    premia = jd.Premia(gamma_d=0.5, eta_1u=1.0, eta_1d=-1.5, eta_2u=0.8, eta_2d=1.2)
    assert model.validate() == []

    bad = model.to_dict()
    bad["sigma"] = 0.0
    assert len(jd.Model(bad).validate()) == 1

    drift = jd.no_arbitrage_drift(model, premia)
    parts = drift["risk_free"] + drift["diffusion_premium"] + drift["jump_adjustment"]
    assert abs(drift["mu"] - parts) < 1e-14
    print(f"no-arbitrage drift {drift['mu']:.6f}")

    rn = jd.risk_neutralize(model, premia)
    for key in ("region1", "region2"):
        q = rn[key]
        assert abs(q["q_up"] + q["q_down"] + q["q_none"] - 1.0) < 1e-12

    cal = jd.calibrate_gamma(model, jd.Premia(eta_1u=1.0, eta_1d=-1.5, eta_2u=0.8, eta_2d=1.2), drift["mu"])
    assert abs(cal["gamma_d"] - 0.5) < 1e-9

    paths = jd.simulate(model, 100, 20, seed=7)
    assert len(paths) == 100 and len(paths[0]) == 21 and paths[0][0] == 100.0
    assert paths == jd.simulate(model, 100, 20, seed=7)
    fair = model.with_no_arbitrage_mu(premia)
    q_paths = jd.simulate(fair, 100, 20, seed=7, measure="q", premia=premia, drift="no-arbitrage")
    assert all(s > 0 for p in q_paths for s in p)

    no_jump = jd.Model(
        {**model.to_dict(), "region1": region(0, 0, 0, 0), "region2": region(0, 0, 0, 0)}
    )
    mc = jd.price_european(no_jump, jd.Premia(), "call", 100.0, 25, 100_000, seed=1)
    bs = jd.black_scholes_reference(100.0, 100.0, 0.03, 0.2, mc["maturity"], "call")
    z = (mc["price"] - bs) / mc["std_error"]
    assert abs(z) < 4, z
    print(f"call price {mc['price']:.4f} +/- {mc['std_error']:.4f}, Black-Scholes {bs:.4f}")

    try:
        jd.price_european(model, premia, "straddle", 100.0, 5, 10, seed=1)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown payoff accepted")
    assert math.isfinite(jd.black_scholes_reference(100.0, 90.0, 0.0, 0.3, 0.0, "put"))
    print("python smoke test passed")


if __name__ == "__main__":
    main()
