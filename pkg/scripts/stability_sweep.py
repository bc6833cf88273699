"""Observed stability ratio versus the envelope for growing horizons on the two-vertex preset.

    python3 scripts/stability_sweep.py
"""
from dataclasses import replace

from cograph.config import preset_config
from cograph.scenarios import execute


def main():
    base = preset_config("stability")
    print(f"{'T':>6} {'ratio':>10} {'envelope':>12}")
    for T in (0.1, 0.25, 0.5, 1.0, 2.0):
        cfg = replace(base, integrator=replace(base.integrator, t_end=T))
        s = execute(cfg).summary
        print(f"{T:6.2f} {s['stability_ratio']:10.5f} {s['stability_envelope']:12.5g}")


if __name__ == "__main__":
    main()
