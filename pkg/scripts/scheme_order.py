"""Observed convergence order of the time integrators against the extrapolated Euler oracle.

    python3 scripts/scheme_order.py
"""
import math

import numpy as np

from cograph.dynamics import SCHEMES, CoupledState, System
from cograph.fields import AlphaProfile, OmegaSpec
from cograph.graph import BaseMeasure
from cograph.interpolation import FluxInterpolation
from cograph.oracle import convergence_study, reference_integrate

DTS = [4e-2, 2e-2, 1e-2, 5e-3, 2.5e-3]


def scenario():
    # two vertices with a density-dependent omega so both equations are coupled
    mu = BaseMeasure.line(2)
    W = np.ones((2, 2, 2))
    W[0, 1, 0] = W[1, 0, 0] = 4.0
    system = System(mu, FluxInterpolation(), AlphaProfile("identity"), OmegaSpec.kernel(W))
    return CoupledState(np.array([4.0, 0.0]), np.ones((2, 2)) - np.eye(2)), system


def main():
    init, system = scenario()
    ref = reference_integrate(init, system, 1e-4, 1.0, record_every=1.0, levels=3)
    for scheme in SCHEMES:
        dts = DTS if scheme != "euler" else [d / 10 for d in DTS]
        errors, ratios = convergence_study(init, system, scheme, dts, 1.0, ref)
        print(scheme)
        for k, (dt, err) in enumerate(zip(dts, errors)):
            order = f"  order {math.log2(ratios[k - 1]):.3f}" if k else ""
            print(f"  dt={dt:<8g} error={err:.3e}{order}")


if __name__ == "__main__":
    main()
